"""
Discrete types of surfaces: (m, n) splits of the cone count and the up/down
configurations up to rotation and reflection.

The identifications used are the global up/down flip F, the simultaneous
reversal R of both direction lists, and for m = n the axis swap S. The group
they generate reproduces the class counts 6 / 6 / 5 for four cones.
"""
from dataclasses import dataclass
from itertools import product

from errors import LengthMismatch
from utils import validators
from weierstrass_core import validate_params

UP, DOWN = "up", "down"
_FLIP = {UP: DOWN, DOWN: UP}


@dataclass(frozen=True)
class ConeConfig:
    m: int
    n: int
    dirs_pos: tuple
    dirs_neg: tuple

    def __post_init__(self):
        if len(self.dirs_pos) != self.m or len(self.dirs_neg) != self.n:
            raise LengthMismatch("direction lists must have lengths m and n")
        for d in self.dirs_pos + self.dirs_neg:
            if d not in (UP, DOWN):
                raise LengthMismatch(f"direction must be 'up' or 'down', got {d!r}")

    def key(self):
        return tuple(0 if d == UP else 1 for d in self.dirs_pos + self.dirs_neg)

    def to_dict(self):
        return {"m": self.m, "n": self.n, "dirs_pos": list(self.dirs_pos), "dirs_neg": list(self.dirs_neg)}

    @classmethod
    def from_dict(cls, data):
        return cls(
            m=int(data["m"]),
            n=int(data["n"]),
            dirs_pos=tuple(data.get("dirs_pos", ())),
            dirs_neg=tuple(data.get("dirs_neg", ())),
        )


def enumerate_types(total):
    """All (m, n) with m + n = total and m >= n >= 0."""
    total = validators.require_int("total", total, 1)
    return [(m, total - m) for m in range(total, (total - 1) // 2, -1)]


# ------------------------------
# Identifications
# ------------------------------
def _flip(c):
    return ConeConfig(c.m, c.n, tuple(_FLIP[d] for d in c.dirs_pos), tuple(_FLIP[d] for d in c.dirs_neg))


def _reverse(c):
    return ConeConfig(c.m, c.n, c.dirs_pos[::-1], c.dirs_neg[::-1])


def _swap(c):
    return ConeConfig(c.n, c.m, c.dirs_neg, c.dirs_pos)


def orbit(c):
    """Images of c under the identification group."""
    seen = {c}
    frontier = [c]
    moves = [_flip, _reverse] + ([_swap] if c.m == c.n else [])
    while frontier:
        current = frontier.pop()
        for move in moves:
            image = move(current)
            if image not in seen:
                seen.add(image)
                frontier.append(image)
    return seen


def canonicalize(c):
    """Lexicographically smallest member of the orbit (up < down); puts the longer list first."""
    if c.n > c.m:
        c = _swap(c)
    return min(orbit(c), key=ConeConfig.key)


def classes(m, n):
    """[(canonical config, class size)] for type (m, n), in canonical order."""
    sizes = {}
    for dirs in product((UP, DOWN), repeat=m + n):
        canon = canonicalize(ConeConfig(m, n, dirs[:m], dirs[m:]))
        sizes[canon] = sizes.get(canon, 0) + 1
    return sorted(sizes.items(), key=lambda item: item[0].key())


def moduli_dimension(m, n):
    """Free real parameters once a_1 = 1 is fixed."""
    return 2 * (m + n) - 1


def class_table(total):
    types = []
    for m, n in enumerate_types(total):
        found = classes(m, n)
        types.append({
            "type": [m, n],
            "count": len(found),
            "bound": 2 ** (m + n - 1),
            "moduli_dimension": moduli_dimension(m, n),
            "classes": [dict(c.to_dict(), class_size=size) for c, size in found],
        })
    return {"cones": total, "types": types, "total": sum(t["count"] for t in types)}


def instantiate(c, spacing=1.0):
    """
    Evenly spaced branch points with a_1 = 1 and b_1 = -1; an up cone gets
    alpha = -1 on the positive axis and beta = +1 on the negative axis.
    """
    if not spacing > 0:
        raise LengthMismatch(f"spacing must be positive, got {spacing}")
    return validate_params({
        "m": c.m,
        "n": c.n,
        "a": [1.0 + i * spacing for i in range(2 * c.m)],
        "b": [-(1.0 + k * spacing) for k in range(2 * c.n)],
        "alpha": [-1 if d == UP else 1 for d in c.dirs_pos],
        "beta": [1 if d == UP else -1 for d in c.dirs_neg],
    })
