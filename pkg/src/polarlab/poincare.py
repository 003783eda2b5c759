"""Truncated elliptic Poincare series of both families.

The meromorphic family has seed psi(z) = (z - cbar)^(-2k) X(z)^m and is
summed in weight 2k; the harmonic family has seed
phi(z) = (z - cbar)^(2k-2) beta(1 - r(z)^2; 2k-1, -m) X(z)^m and is summed
in weight 2 - 2k.  Sums run over all of SL2(Z) (both signs of each
matrix), in increasing sup-norm shells, with a fixed deterministic order
inside each shell, so results are bit-identical across runs and worker
counts.

For a matrix M = (a b; c d) the slashed seed is evaluated through the
linear forms P = (a - c*center) z + (b - d*center) and
Q = (a - c*cbar) z + (b - d*cbar):

    X(Mz) = P / Q,
    (cz+d)^(-2k) psi(Mz)      = Q^(-2k) X^m,
    (cz+d)^(2k-2) phi(Mz)     = Q^(2k-2) beta(w; 2k-1, -m) X^m,

with w = 1 - |X|^2 = 4 * center.y * z.y / |Q|^2 exactly, which avoids all
cancellation near the real line.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import special
from .halfplane import (
    ModMatrix,
    ShellSpec,
    UHPoint,
    as_complex,
    automorphy,
    enumerate_shell,
    mobius_apply,
)

__all__ = [
    "Kind",
    "SpaceTag",
    "SeriesSpec",
    "TruncationParams",
    "SeriesValue",
    "TermSingularityError",
    "psi_seed",
    "phi_seed",
    "eval_series",
    "approx_invariance_defect",
    "delta_reference",
    "space_tag",
    "series_function",
    "slash",
    "matrices_up_to",
]

_CHUNK = 512


class Kind(enum.Enum):
    MEROMORPHIC = "meromorphic"
    HARMONIC = "harmonic"


class SpaceTag(enum.Enum):
    CUSP_SPAN = "cusp-span"
    E_SPACE = "E"
    D_SPACE = "D"
    H_CUSP = "H-cusp"
    H_E = "H-E"
    H_OTHER = "H-other"


class TermSingularityError(RuntimeError):
    """A summand exceeded the magnitude guard: z is too close to a pole orbit."""


@dataclass(frozen=True)
class SeriesSpec:
    """Which Poincare series: family, weight parameter k, index m, center.

    For the harmonic family m is the literal series subscript, i.e. the
    index j of the weight 2-2k series with seed beta-factor
    beta(1-r^2; 2k-1, -j).
    """

    kind: Kind
    k: int
    m: int
    center: UHPoint

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k >= 2 is required for absolute convergence")

    @property
    def weight(self) -> int:
        return 2 * self.k if self.kind is Kind.MEROMORPHIC else 2 - 2 * self.k


@dataclass(frozen=True)
class TruncationParams:
    """Shell cutoff, trailing-shell window for the tail diagnostic, term guard."""

    max_shell: int
    tail_window: int = 4
    term_guard: float = 1e12

    def __post_init__(self):
        if self.max_shell < 1:
            raise ValueError("max_shell must be >= 1")
        if not 0 < self.tail_window < self.max_shell:
            raise ValueError("tail_window must satisfy 0 < W < max_shell")
        if self.term_guard <= 0:
            raise ValueError("term_guard must be positive")


@dataclass
class SeriesValue:
    value: complex
    last_shells_magnitude: float
    shells_used: int


# ---------------------------------------------------------------------------
# matrix tables


@lru_cache(maxsize=None)
def _shell_array(n: int) -> np.ndarray:
    mats = enumerate_shell(ShellSpec(n))
    return np.array([m.entries() for m in mats], dtype=np.int64).reshape(-1, 4)


@lru_cache(maxsize=None)
def matrices_up_to(n: int):
    """Concatenated shells 1..n as an (M, 4) int array plus shell boundaries.

    boundaries[j] is the row where shell j+1 starts; boundaries[n] = M.
    """
    parts = [_shell_array(j) for j in range(1, n + 1)]
    bounds = np.zeros(n + 1, dtype=np.int64)
    for j, p in enumerate(parts):
        bounds[j + 1] = bounds[j] + len(p)
    return np.concatenate(parts, axis=0), bounds


def _worker_count() -> int:
    raw = os.environ.get("POLARLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


# ---------------------------------------------------------------------------
# seeds


def _as_points(z):
    """Coerce UHPoint / complex / array input to (complex ndarray, is_scalar)."""
    if isinstance(z, UHPoint):
        return np.asarray(z.z, dtype=complex), True
    arr = np.asarray(z, dtype=complex)
    return arr, arr.ndim == 0


def psi_seed(k: int, m: int, center, z):
    """Meromorphic seed (z - cbar)^(-2k) X(z)^m; pole at the center for m < 0."""
    zc = as_complex(center)
    w, scalar = _as_points(z)
    if m < 0 and np.any(w == zc):
        raise TermSingularityError("psi seed has a pole at the center for m < 0")
    X = (w - zc) / (w - zc.conjugate())
    val = (w - zc.conjugate()) ** (-2 * k) * X**m
    return complex(val) if scalar else val


def phi_seed(k: int, m: int, center, z):
    """Harmonic seed (z - cbar)^(2k-2) beta(1 - r^2; 2k-1, -m) X(z)^m.

    The seed is singular at the center for every m: the beta factor grows
    like r^(-2m) for m > 0 and logarithmically for m = 0, and X^m has a
    pole for m < 0, so z = center always signals.
    """
    zc = as_complex(center)
    w, scalar = _as_points(z)
    if np.any(w == zc):
        raise TermSingularityError("phi seed is singular at the center")
    X = (w - zc) / (w - zc.conjugate())
    warg = 1.0 - np.abs(X) ** 2
    bfac = special.beta_array(np.atleast_1d(warg), 2 * k - 1, -m)
    bfac = bfac.reshape(np.shape(warg))
    val = (w - zc.conjugate()) ** (2 * k - 2) * bfac * X**m
    return complex(val) if scalar else val


# ---------------------------------------------------------------------------
# truncated series


def _ipow(base: np.ndarray, e: int) -> np.ndarray:
    """base**e for integer e by binary exponentiation (cheaper than pow)."""
    if e == 0:
        return np.ones_like(base)
    n = abs(e)
    result = None
    sq = base
    while n:
        if n & 1:
            result = sq if result is None else result * sq
        n >>= 1
        if n:
            sq = sq * sq
    return result if e > 0 else 1.0 / result


def _chunk_sums(spec: SeriesSpec, z: np.ndarray, abcd: np.ndarray, tail_from: int,
                start: int, guard: float):
    """Sum of slashed seeds for one chunk of matrices, plus tail magnitudes.

    Accumulation order inside the chunk is the row order of abcd, giving a
    fixed summation order overall once chunks are combined in index order.
    """
    zc = as_complex(spec.center)
    zcc = zc.conjugate()
    cy = zc.imag
    k = spec.k
    m = spec.m
    mero = spec.kind is Kind.MEROMORPHIC
    y = z.imag
    acc = np.zeros_like(z)
    tail = np.zeros(z.shape, dtype=float)
    for i, (a, b, c, d) in enumerate(abcd):
        P = (a - zc * c) * z + (b - zc * d)
        Q = (a - zcc * c) * z + (b - zcc * d)
        X = P / Q
        if mero:
            term = _ipow(Q, -2 * k) * _ipow(X, m)
        else:
            warg = 4.0 * cy * y / (Q.real**2 + Q.imag**2)
            term = _ipow(Q, 2 * k - 2) * special.beta_array(warg, 2 * k - 1, -m) \
                * _ipow(X, m)
        mags = np.abs(term)
        peak = mags.max() if mags.size else 0.0
        if not np.isfinite(peak) or peak > guard:
            raise TermSingularityError(
                f"term magnitude {peak:.3e} exceeds guard {guard:.3e} "
                f"(matrix {(a, b, c, d)}): z too close to a pole orbit"
            )
        acc += term
        if start + i >= tail_from:
            tail += mags
    return acc, tail


def eval_series(spec: SeriesSpec, z, trunc: TruncationParams) -> SeriesValue:
    """Evaluate the truncated series at z (UHPoint, complex, or complex array).

    Shells 1..max_shell are summed in increasing order with a fixed order
    inside each shell; the tail diagnostic is the summed |term| over the
    final tail_window shells.  Worker threads (POLARLAB_THREADS) evaluate
    fixed chunks whose partial sums are combined in chunk order, so the
    result does not depend on the worker count.
    """
    zarr, scalar = _as_points(z)
    zflat = np.atleast_1d(zarr)
    if np.any(zflat.imag <= 0):
        raise ValueError("evaluation points must lie in the upper half-plane")

    abcd, bounds = matrices_up_to(trunc.max_shell)
    tail_from = int(bounds[trunc.max_shell - trunc.tail_window])
    nmat = len(abcd)
    chunks = [(s, min(s + _CHUNK, nmat)) for s in range(0, nmat, _CHUNK)]

    def job(se):
        s, e = se
        return _chunk_sums(spec, zflat, abcd[s:e], tail_from, s, trunc.term_guard)

    workers = _worker_count()
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, chunks))
    else:
        parts = [job(c) for c in chunks]

    acc = np.zeros_like(zflat)
    tail = np.zeros(zflat.shape, dtype=float)
    for pa, pt in parts:  # fixed combination order
        acc += pa
        tail += pt

    if scalar:
        return SeriesValue(complex(acc[0]), float(tail[0]), trunc.max_shell)
    return SeriesValue(acc.reshape(zarr.shape), tail.reshape(zarr.shape), trunc.max_shell)


def series_function(spec: SeriesSpec, trunc: TruncationParams):
    """The truncated series as a plain point-function on complex arrays."""

    def f(z):
        return eval_series(spec, z, trunc).value

    return f


def slash(F, weight: int, M: ModMatrix):
    """The weight-w slash action (F |_w M)(z) = (cz+d)^(-w) F(Mz) on a point-function."""

    def g(z):
        zz = np.asarray(z, dtype=complex)
        mz = (M.a * zz + M.b) / (M.c * zz + M.d)
        return (M.c * zz + M.d) ** (-weight) * np.asarray(F(mz))

    return g


def approx_invariance_defect(spec: SeriesSpec, z, M: ModMatrix,
                             trunc: TruncationParams) -> float:
    """|(F |_w M)(z) - F(z)| for the truncated series; shrinks as shells grow."""
    w = spec.weight
    zc = as_complex(z)
    fz = eval_series(spec, zc, trunc).value
    mz = mobius_apply(M, UHPoint.from_complex(zc))
    fmz = eval_series(spec, mz, trunc).value
    j = automorphy(M, zc)
    return abs(j ** (-w) * fmz - fz)


# ---------------------------------------------------------------------------
# reference cusp form and the space classifier


def delta_reference(z):
    """The discriminant cusp form Delta(z) = q prod (1-q^n)^24, q = e^{2 pi i z}.

    The product is truncated so the dropped tail is below 1e-15 relative
    for Im z >= 1/2; smaller imaginary parts are rejected.
    """
    zarr, scalar = _as_points(z)
    w = np.atleast_1d(zarr)
    ymin = float(np.min(w.imag))
    if ymin < 0.5:
        raise ValueError("delta_reference requires Im z >= 0.5")
    # |q|^(n+1) * 24 < 1e-16  =>  n > 16*ln(10)/(2*pi*ymin) + margin
    nmax = int(np.ceil(18.0 * np.log(10.0) / (2.0 * np.pi * ymin))) + 2
    q = np.exp(2j * np.pi * w)
    prod = np.ones_like(q)
    qn = np.ones_like(q)
    for _ in range(nmax):
        qn = qn * q
        prod = prod * (1.0 - qn) ** 24
    val = q * prod
    return complex(val[0]) if scalar else val.reshape(zarr.shape)


def space_tag(spec: SeriesSpec) -> SpaceTag:
    """Classify the series by its index per the spanning lemmas.

    Meromorphic: m >= 0 spans cusp forms, 1-2k <= m <= -1 the E-space,
    m <= -2k the D-space.  Harmonic with subscript j: j <= -1 lies in the
    cusp-image space, 0 <= j <= 2k-2 in the E-image space, else neither.
    """
    k, m = spec.k, spec.m
    if spec.kind is Kind.MEROMORPHIC:
        if m >= 0:
            return SpaceTag.CUSP_SPAN
        if m >= 1 - 2 * k:
            return SpaceTag.E_SPACE
        return SpaceTag.D_SPACE
    if m <= -1:
        return SpaceTag.H_CUSP
    if m <= 2 * k - 2:
        return SpaceTag.H_E
    return SpaceTag.H_OTHER
