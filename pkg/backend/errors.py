class MaxGraphError(Exception):
    """Base error; `code` is the stable identifier used in reports and API replies."""
    code = "MaxGraphError"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        return {"code": self.code, "message": self.message, **self.details}


# ------------------------------
# Validation (CLI exit 2)
# ------------------------------
class ParamsError(MaxGraphError, ValueError):
    code = "ParamsError"


class OrderingViolation(ParamsError):
    code = "OrderingViolation"


class LengthMismatch(ParamsError):
    code = "LengthMismatch"


class SignDomain(ParamsError):
    code = "SignDomain"


class ConfigError(ParamsError):
    code = "ConfigError"


# ------------------------------
# Pointwise evaluation
# ------------------------------
class BranchPointEvaluation(MaxGraphError):
    code = "BranchPointEvaluation"


class DegenerateGauss(MaxGraphError):
    code = "DegenerateGauss"


class NotOnHyperboloid(MaxGraphError):
    code = "NotOnHyperboloid"


# ------------------------------
# Integration
# ------------------------------
class QuadratureFailure(MaxGraphError):
    code = "QuadratureFailure"


class PathThroughSingularity(MaxGraphError):
    code = "PathThroughSingularity"


class NonConvergent(MaxGraphError):
    code = "NonConvergent"


# ------------------------------
# Singular analysis
# ------------------------------
class VerificationFailure(MaxGraphError):
    code = "VerificationFailure"


class DegenerateSingularity(MaxGraphError):
    code = "DegenerateSingularity"


class AmbiguousDirection(MaxGraphError):
    code = "AmbiguousDirection"


# ------------------------------
# Construction / export
# ------------------------------
class Infeasible(MaxGraphError):
    code = "Infeasible"


class OrderingInfeasible(MaxGraphError):
    code = "OrderingInfeasible"


class WeldFailure(MaxGraphError):
    code = "WeldFailure"


class NotClosedOnCurve(MaxGraphError):
    code = "NotClosedOnCurve"


class IOFailure(MaxGraphError):
    code = "IOFailure"
