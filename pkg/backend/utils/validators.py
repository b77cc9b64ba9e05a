import math
import numbers

from errors import LengthMismatch, OrderingViolation, SignDomain


def require_int(name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise LengthMismatch(f"{name} must be an integer, got {value!r}", field=name)
    if value < minimum:
        raise LengthMismatch(f"{name} must be >= {minimum}, got {value}", field=name)
    return int(value)


def require_reals(name, values, length):
    if values is None:
        values = []
    if not isinstance(values, (list, tuple)):
        raise LengthMismatch(f"{name} must be a list", field=name)
    if len(values) != length:
        raise LengthMismatch(f"|{name}| = {len(values)}, expected {length}", field=name)
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, numbers.Real) or not math.isfinite(v):
            raise LengthMismatch(f"{name} entries must be finite reals, got {v!r}", field=name)
        out.append(float(v))
    return tuple(out)


def require_signs(name, values, length):
    if values is None:
        values = []
    if not isinstance(values, (list, tuple)):
        raise LengthMismatch(f"{name} must be a list", field=name)
    if len(values) != length:
        raise LengthMismatch(f"|{name}| = {len(values)}, expected {length}", field=name)
    for v in values:
        if isinstance(v, bool) or v not in (1, -1):
            raise SignDomain(f"{name} entries must be +1 or -1, got {v!r}", field=name)
    return tuple(int(v) for v in values)


def check_ordering(a, b):
    """b_2n < ... < b_1 < 0 < a_1 < ... < a_2m, reporting the first broken link."""
    if a and a[0] <= 0:
        raise OrderingViolation(f"a_1 = {a[0]} must be > 0", constraint="0 < a_1")
    for i in range(len(a) - 1):
        if not a[i] < a[i + 1]:
            raise OrderingViolation(
                f"a_{i + 1} = {a[i]} must be < a_{i + 2} = {a[i + 1]}",
                constraint=f"a_{i + 1} < a_{i + 2}",
            )
    if b and b[0] >= 0:
        raise OrderingViolation(f"b_1 = {b[0]} must be < 0", constraint="b_1 < 0")
    for i in range(len(b) - 1):
        if not b[i + 1] < b[i]:
            raise OrderingViolation(
                f"b_{i + 2} = {b[i + 1]} must be < b_{i + 1} = {b[i]}",
                constraint=f"b_{i + 2} < b_{i + 1}",
            )


def segment_distance(p, q, c):
    """Euclidean distance from point c to segment [p, q] in the complex plane."""
    d = q - p
    if d == 0:
        return abs(c - p)
    t = ((c - p) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p + t * d - c)
