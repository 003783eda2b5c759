"""Upper half-plane geometry for the level-one modular group.

Points of the upper half-plane, integer matrices acting by Moebius
transformations, enumeration of SL2(Z) in sup-norm shells, reduction to
the standard fundamental domain, stabilizer orders, and the elliptic
coordinate X attached to a center, X(z) = (z - center)/(z - conj(center)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

__all__ = [
    "UHPoint",
    "ModMatrix",
    "ShellSpec",
    "IDENTITY",
    "S_MAT",
    "T_MAT",
    "as_complex",
    "mobius_apply",
    "automorphy",
    "x_coord",
    "x_inverse",
    "enumerate_shell",
    "reduce_to_fd",
    "stabilizer_order",
    "sl2z_equivalent",
]

# Shells up to this bound are enumerated by exhaustive search; beyond it the
# coprime-column parametrization is used.  Both must agree on the overlap.
N_BRUTE_FORCE = 6

_MAX_REDUCTION_STEPS = 10_000

# corner of the standard fundamental domain, e^{2 pi i / 3}
_RHO = complex(-0.5, math.sqrt(3.0) / 2.0)


@dataclass(frozen=True)
class UHPoint:
    """A point x + iy of the open upper half-plane (y > 0)."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"UHPoint requires y > 0, got y = {self.y!r}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z) -> "UHPoint":
        z = complex(z)
        return cls(z.real, z.imag)

    def __repr__(self):
        return f"UHPoint({self.x:g}, {self.y:g})"


def as_complex(z) -> complex:
    """Coerce a UHPoint or complex-like value to a complex number."""
    if isinstance(z, UHPoint):
        return z.z
    return complex(z)


@dataclass(frozen=True)
class ModMatrix:
    """An integer matrix (a b; c d) with determinant one."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det != 1:
            raise ValueError(f"ModMatrix requires det = 1, got {det}")

    def __matmul__(self, other: "ModMatrix") -> "ModMatrix":
        return ModMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "ModMatrix":
        return ModMatrix(self.d, -self.b, -self.c, self.a)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    @classmethod
    def translation(cls, n: int) -> "ModMatrix":
        return cls(1, n, 0, 1)


IDENTITY = ModMatrix(1, 0, 0, 1)
S_MAT = ModMatrix(0, -1, 1, 0)
T_MAT = ModMatrix(1, 1, 0, 1)


@dataclass(frozen=True)
class ShellSpec:
    """Shell of SL2(Z): all matrices with max(|a|,|b|,|c|,|d|) = max_entry."""

    max_entry: int

    def __post_init__(self):
        if self.max_entry < 1:
            raise ValueError("max_entry must be >= 1")


def mobius_apply(M: ModMatrix, z: UHPoint) -> UHPoint:
    """Apply (az+b)/(cz+d); determinant one keeps the half-plane."""
    w = as_complex(z)
    return UHPoint.from_complex((M.a * w + M.b) / (M.c * w + M.d))


def automorphy(M: ModMatrix, z) -> complex:
    """The factor cz + d; callers raise it to the relevant weight."""
    return M.c * as_complex(z) + M.d


def x_coord(center, z) -> complex:
    """Elliptic coordinate X(z) = (z - center)/(z - conj(center)), |X| < 1."""
    zc = as_complex(center)
    w = as_complex(z)
    return (w - zc) / (w - zc.conjugate())


def x_inverse(center, X) -> UHPoint:
    """Invert the elliptic coordinate; requires |X| < 1."""
    X = complex(X)
    if abs(X) >= 1:
        raise ValueError(f"x_inverse requires |X| < 1, got |X| = {abs(X)}")
    zc = as_complex(center)
    return UHPoint.from_complex((zc - zc.conjugate() * X) / (1 - X))


def _t_interval(coef: int, offset: int, bound: int):
    """Integer t with |offset + t*coef| <= bound, as (lo, hi) or None.

    coef == 0 collapses to all-t when |offset| <= bound (signalled by
    (-inf, inf)) and to the empty set otherwise.
    """
    if coef == 0:
        return (-math.inf, math.inf) if abs(offset) <= bound else None
    lo = (-bound - offset) / coef
    hi = (bound - offset) / coef
    if lo > hi:
        lo, hi = hi, lo
    return (math.ceil(lo), math.floor(hi))


def _shell_by_columns(n: int):
    """Shell n via coprime columns (c, d) and a = a0 + t*c, b = b0 + t*d."""
    out = []
    for c in range(-n, n + 1):
        for d in range(-n, n + 1):
            if c == 0 and d == 0:
                continue
            if math.gcd(c, d) != 1:
                continue
            # particular solution of a*d - b*c = 1
            g, u, v = _ext_gcd(d, c)
            a0, b0 = u, -v
            ia = _t_interval(c, a0, n)
            ib = _t_interval(d, b0, n)
            if ia is None or ib is None:
                continue
            lo = max(ia[0], ib[0])
            hi = min(ia[1], ib[1])
            if math.isinf(lo) or math.isinf(hi):
                # c and d cannot both vanish, so at most one interval is infinite
                raise AssertionError("unbounded t-range in shell enumeration")
            rows = []
            col_max = max(abs(c), abs(d))
            for t in range(int(lo), int(hi) + 1):
                a = a0 + t * c
                b = b0 + t * d
                if max(abs(a), abs(b), col_max) == n:
                    rows.append((a, b))
            for a, b in sorted(rows):
                out.append(ModMatrix(a, b, c, d))
    return out


def _ext_gcd(x: int, y: int):
    """Extended gcd: returns (g, u, v) with u*x + v*y = g."""
    old_r, r = x, y
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _shell_bruteforce(n: int):
    out = []
    rng = range(-n, n + 1)
    for c, d, a, b in product(rng, rng, rng, rng):
        if max(abs(a), abs(b), abs(c), abs(d)) != n:
            continue
        if a * d - b * c == 1:
            out.append(ModMatrix(a, b, c, d))
    return out


def enumerate_shell(spec: ShellSpec):
    """All determinant-one matrices with sup-norm exactly spec.max_entry.

    Deterministic order: lexicographic on (c, d, a, b).
    """
    n = spec.max_entry
    if n <= N_BRUTE_FORCE:
        return _shell_bruteforce(n)
    return _shell_by_columns(n)


def reduce_to_fd(z: UHPoint):
    """Reduce to the standard fundamental domain |x| <= 1/2, |z| >= 1.

    Returns (point, matrix) with matrix * z = point.  Ties are canonical:
    x in [-1/2, 1/2), and x <= 0 on the arc |z| = 1.
    """
    w = as_complex(z)
    M = IDENTITY
    for _ in range(_MAX_REDUCTION_STEPS):
        n = math.floor(w.real + 0.5)
        if n != 0:
            w = w - n
            M = ModMatrix.translation(-n) @ M
        if abs(w) < 1.0:
            w = -1.0 / w
            M = S_MAT @ M
        else:
            break
    else:
        raise RuntimeError("fundamental-domain reduction did not terminate")
    if w.real == 0.5:  # exact tie on the right edge
        w = w - 1.0
        M = ModMatrix.translation(-1) @ M
    if abs(w) == 1.0 and w.real > 0.0:  # exact tie on the arc
        w = -1.0 / w
        M = S_MAT @ M
    return UHPoint.from_complex(w), M


def stabilizer_order(z: UHPoint, tol: float = 1e-9) -> int:
    """Order of the PSL2(Z) stabilizer: 2 at the orbit of i, 3 at rho, else 1."""
    w, _ = reduce_to_fd(z)
    wc = w.z
    if abs(wc - 1j) <= tol:
        return 2
    if abs(wc - _RHO) <= tol or abs(wc - (_RHO + 1.0)) <= tol:
        return 3
    return 1


def sl2z_equivalent(z1: UHPoint, z2: UHPoint, tol: float) -> bool:
    """Whether two points lie in one SL2(Z) orbit, up to tolerance tol.

    Both points are reduced; the boundary identifications x = -1/2 ~ 1/2 and
    z ~ -1/z on the arc are checked explicitly so near-boundary points compare
    correctly.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    w1 = reduce_to_fd(z1)[0].z
    w2 = reduce_to_fd(z2)[0].z
    candidates = [w2, w2 - 1.0, w2 + 1.0, -1.0 / w2, -1.0 / w2 - 1.0, -1.0 / w2 + 1.0]
    if abs(w2 - 1.0) > 1e-12:
        candidates.append(-1.0 / (w2 - 1.0))
    candidates.append(-1.0 / (w2 + 1.0))
    return any(abs(w1 - c) <= tol for c in candidates)
