"""Petersson inner products three ways, and the identity checkers built on them.

Convergent pairings are integrated directly over the truncated standard
fundamental domain with a midpoint rule (uniform in x, geometric in y,
arc boundary by midpoint inclusion).  A single pole of order one is
handled by removing a disk, integrating the annulus in polar coordinates
down to shrinking radii, and extrapolating the radius to zero.  Every
other pairing goes through the closed coefficient formulas:

    <f, Psi_{2k,n}>   = 8 pi (2k-2)! n! / ((4y)^{2k} (2k-1+n)!) c_f(n),
    <Psi_{2k,l}, f>   = (2 pi / y) [l <= -1] c+_F(-l-1),  xi F = f,

for cusp forms f (first line) and f in the E/D spaces (second line).
The flagship two-path check evaluates
<Psi_{2k,m}^{z2}, Psi_{2k,n}^{z1}> once by quadrature (both factors are
cusp forms) and once through the harmonic series P_{2-2k,2k-1+m}^{z2},
whose coefficient c+ at index 2k-1+n around z1 gives the right side of
the inner-product identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import expansion, poincare, special
from .halfplane import UHPoint, as_complex
from .poincare import Kind, SeriesSpec, TruncationParams

__all__ = [
    "FDQuadParams",
    "InnerReport",
    "NonIntegrableError",
    "petersson_quadrature",
    "inner_coeff_formula",
    "inner_via_cplus",
    "check_theorem_1_1",
    "check_petersson_formula",
    "weight12_degeneracy_demo",
]

_INTEGRAND_GUARD = 1e12
_Y_LO = 0.78  # grid floor, below sqrt(3)/2; cells outside |z| >= 1 are masked


class NonIntegrableError(RuntimeError):
    """Integrand magnitude guard tripped: the pairing is not integrable here."""


@dataclass(frozen=True)
class FDQuadParams:
    """Fundamental-domain grid and puncture controls.

    y_max is chosen so the cusp-form tail beyond it is negligible
    (e^(-4 pi y) at weight 12 is ~1e-65 already at y = 12).  A positive
    puncture_radius removes disks around the listed poles;
    richardson_punctures is the number of shrinking radii (halved each
    level) used for the extrapolation to radius zero.
    """

    y_max: float = 12.0
    grid_nx: int = 400
    grid_ny: int = 400
    puncture_radius: float = 0.0
    richardson_punctures: int = 0

    def __post_init__(self):
        if self.y_max <= 1.0:
            raise ValueError("y_max must exceed 1")
        if self.grid_nx < 8 or self.grid_ny < 8:
            raise ValueError("grid too coarse")
        if self.puncture_radius < 0:
            raise ValueError("puncture_radius must be >= 0")
        if self.richardson_punctures < 0:
            raise ValueError("richardson_punctures must be >= 0")

    @property
    def grid_key(self):
        return (self.y_max, self.grid_nx, self.grid_ny)


@dataclass
class InnerReport:
    lhs: complex
    rhs: complex
    abs_diff: float
    rel_diff: float
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def build(cls, lhs: complex, rhs: complex, diagnostics=None) -> "InnerReport":
        lhs = complex(lhs)
        rhs = complex(rhs)
        ad = abs(lhs - rhs)
        scale = max(abs(lhs), abs(rhs))
        return cls(lhs, rhs, ad, ad / scale if scale > 0 else 0.0,
                   diagnostics or {})


# ---------------------------------------------------------------------------
# grids and cached series values


@dataclass
class _FDGrid:
    cells: np.ndarray    # complex midpoints of cells inside the domain
    weights: np.ndarray  # cell areas
    key: tuple


@lru_cache(maxsize=8)
def _fd_grid(key) -> _FDGrid:
    y_max, nx, ny = key
    xs = -0.5 + (np.arange(nx) + 0.5) / nx
    ratio = (y_max / _Y_LO) ** (1.0 / ny)
    edges = _Y_LO * ratio ** np.arange(ny + 1)
    yc = np.sqrt(edges[:-1] * edges[1:])
    dy = np.diff(edges)
    Z = xs[None, :] + 1j * yc[:, None]
    W = (1.0 / nx) * dy[:, None] * np.ones_like(xs)[None, :]
    keep = np.abs(Z) >= 1.0
    return _FDGrid(Z[keep].ravel(), W[keep].ravel(), key)


@lru_cache(maxsize=64)
def _series_on_fd(spec: SeriesSpec, trunc: TruncationParams, key) -> np.ndarray:
    grid = _fd_grid(key)
    return poincare.eval_series(spec, grid.cells, trunc).value


@lru_cache(maxsize=8)
def _delta_on_fd(key) -> np.ndarray:
    return poincare.delta_reference(_fd_grid(key).cells)


def cached_series_fn(spec: SeriesSpec, trunc: TruncationParams, q: FDQuadParams):
    """Point-function for the truncated series that reuses grid evaluations."""
    grid = _fd_grid(q.grid_key)

    def f(z):
        if z is grid.cells:
            return _series_on_fd(spec, trunc, q.grid_key)
        return poincare.eval_series(spec, z, trunc).value

    return f


def cached_delta_fn(q: FDQuadParams):
    grid = _fd_grid(q.grid_key)

    def f(z):
        if z is grid.cells:
            return _delta_on_fd(q.grid_key)
        return poincare.delta_reference(z)

    return f


# ---------------------------------------------------------------------------
# quadrature


def _pairing_values(f, g, k, z):
    vals = np.asarray(f(z)) * np.conj(np.asarray(g(z))) * z.imag ** (2 * k - 2)
    peak = np.max(np.abs(vals)) if vals.size else 0.0
    if not np.isfinite(peak) or peak > _INTEGRAND_GUARD:
        raise NonIntegrableError(
            f"integrand magnitude {peak:.3e} exceeds the guard; "
            "pole of order >= 2 or missing puncture"
        )
    return vals


def _annulus_integral(f, g, k, p: complex, r_in: float, r_out: float,
                      nr: int = 48, ntheta: int = 96) -> complex:
    """Integral of f conj(g) y^(2k-2) over the annulus r_in <= |z-p| <= r_out."""
    if r_in >= r_out:
        return 0.0 + 0.0j
    redges = r_in * (r_out / r_in) ** (np.arange(nr + 1) / nr)
    rc = np.sqrt(redges[:-1] * redges[1:])
    dr = np.diff(redges)
    theta = 2.0 * np.pi * (np.arange(ntheta) + 0.5) / ntheta
    ring = np.exp(1j * theta)
    z = p + rc[:, None] * ring[None, :]
    vals = _pairing_values(f, g, k, z)
    w = rc[:, None] * dr[:, None] * (2.0 * np.pi / ntheta)
    return complex(np.sum(vals * w))


def petersson_quadrature(f, g, k: int, q: FDQuadParams, punctures=()) -> complex:
    """<f, g> = integral over the fundamental domain of f conj(g) y^(2k-2).

    punctures lists pole positions (inside the domain) of a single simple
    pole each; with q.puncture_radius > 0 the disks are removed, annuli
    down to shrinking radii are integrated in polar coordinates, and the
    puncture radius is extrapolated to zero (Richardson over the halved
    radii).
    """
    grid = _fd_grid(q.grid_key)
    cells, weights = grid.cells, grid.weights
    punctures = [as_complex(p) for p in punctures]
    if punctures and q.puncture_radius > 0:
        mask = np.ones(len(cells), dtype=bool)
        for p in punctures:
            mask &= np.abs(cells - p) >= q.puncture_radius
        kept = cells[mask]
        base_vals = _pairing_values(f, g, k, kept)
        base = complex(np.sum(base_vals * weights[mask]))
        levels = max(1, q.richardson_punctures)
        eps = q.puncture_radius * 0.5 ** np.arange(levels)
        vals = []
        for e in eps:
            total = base
            for p in punctures:
                total += _annulus_integral(f, g, k, p, e, q.puncture_radius)
            vals.append(total)
        if levels == 1:
            return vals[0]
        coef_re = np.polyfit(eps, [v.real for v in vals], levels - 1)
        coef_im = np.polyfit(eps, [v.imag for v in vals], levels - 1)
        return complex(coef_re[-1], coef_im[-1])
    vals = _pairing_values(f, g, k, cells)
    return complex(np.sum(vals * weights))


# ---------------------------------------------------------------------------
# closed formulas


def inner_coeff_formula(c_f_at_n: complex, k: int, n: int, center_y: float) -> complex:
    """Petersson coefficient formula: the pairing of a cusp form against the
    index-n meromorphic series equals
    8 pi (2k-2)! n! / ((4y)^{2k} (2k-1+n)!) times the form's coefficient."""
    if n < 0:
        raise ValueError("the coefficient formula needs n >= 0")
    fac = special.factorial_ratio(2 * k - 2, 0) / special.factorial_ratio(2 * k - 1 + n, n)
    return 8.0 * math.pi * fac / (4.0 * center_y) ** (2 * k) * complex(c_f_at_n)


def inner_via_cplus(cplus_F_at: complex, k: int, ell: int, center_y: float) -> complex:
    """Pairing of the index-ell series against an E/D form f = xi(F):
    (2 pi / y) c+_F(-ell-1) for ell <= -1 and exactly zero for ell >= 0."""
    if ell >= 0:
        return 0.0 + 0.0j
    return 2.0 * math.pi / center_y * complex(cplus_F_at)


# ---------------------------------------------------------------------------
# identity checkers


def _rhs_via_harmonic(k: int, m: int, n: int, z1: UHPoint, z2: UHPoint,
                      trunc: TruncationParams, samples: int = 256,
                      far_radii=None, near_radius: float = 0.8) -> tuple[complex, dict]:
    """-(2 pi / y1) c+ at index 2k-1+n of (4 y2)^(1-2k) P_{2-2k,2k-1+m}^{z2},
    extracted around z1 with the split (doubles + mp near terms) evaluator."""
    pspec = SeriesSpec(Kind.HARMONIC, k, 2 * k - 1 + m, z2)
    scale = (4.0 * z2.y) ** (1 - 2 * k)
    if far_radii is None:
        far_radii = (0.4, 0.6)
    s1 = expansion.CircleSampling(far_radii[0], samples)
    s2 = expansion.CircleSampling(far_radii[1], samples)
    idx = 2 * k - 1 + n
    exp = expansion.extract_harmonic_split(pspec, z1, s1, s2, (idx, idx),
                                           trunc, scale=scale,
                                           near_radius=near_radius)
    cplus = exp.plus(idx)
    rhs = -inner_via_cplus(cplus, k, -n - 2 * k, z1.y)
    diag = {"cplus_re": cplus.real, "cplus_im": cplus.imag, "index": float(idx)}
    return rhs, diag


def check_theorem_1_1(k: int, m: int, n: int, z1: UHPoint, z2: UHPoint,
                      trunc: TruncationParams, q: FDQuadParams,
                      quad_trunc: TruncationParams = None,
                      samples: int = 256) -> InnerReport:
    """Two-path check of the inner-product identity between the cusp-form
    pairing <Psi_{2k,m}^{z2}, Psi_{2k,n}^{z1}> and its evaluation through
    the harmonic series (the D/xi-image route).

    m, n >= 0 so the quadrature side pairs genuine (truncated) cusp forms;
    k = 2 or 3 makes both sides vanish with the space of cusp forms.
    """
    if m < 0 or n < 0:
        raise ValueError("the checker needs m, n >= 0")
    qt = quad_trunc or trunc
    fm = cached_series_fn(SeriesSpec(Kind.MEROMORPHIC, k, m, z2), qt, q)
    fn = cached_series_fn(SeriesSpec(Kind.MEROMORPHIC, k, n, z1), qt, q)
    lhs = petersson_quadrature(fm, fn, k, q)
    rhs, diag = _rhs_via_harmonic(k, m, n, z1, z2, trunc, samples=samples)
    diag["pre_negation_sign"] = math.copysign(1.0, lhs.real * (-rhs.real)) \
        if lhs.real * rhs.real != 0 else 0.0
    return InnerReport.build(lhs, rhs, diag)


def check_petersson_formula(k: int, n: int, z: UHPoint, trunc: TruncationParams,
                            q: FDQuadParams, rho: float = 0.35,
                            samples: int = 256,
                            quad_trunc: TruncationParams = None) -> InnerReport:
    """Quadrature against the Petersson coefficient formula for the
    normalized discriminant form (leading q-coefficient one)."""
    if n < 0:
        raise ValueError("n >= 0 required")
    qt = quad_trunc or trunc
    fd = cached_delta_fn(q)
    fpsi = cached_series_fn(SeriesSpec(Kind.MEROMORPHIC, k, n, z), qt, q)
    lhs = petersson_quadrature(fd, fpsi, k, q)
    ext = expansion.extract_meromorphic(poincare.delta_reference, z, k,
                                        expansion.CircleSampling(rho, samples),
                                        (0, n + 2))
    rhs = inner_coeff_formula(ext.plus(n), k, n, z.y)
    return InnerReport.build(lhs, rhs, {"c_delta_re": ext.plus(n).real,
                                        "c_delta_im": ext.plus(n).imag})


def weight12_degeneracy_demo(trunc: TruncationParams, q: FDQuadParams,
                             quad_trunc: TruncationParams = None,
                             samples: int = 256):
    """Weight-12 instance of the degeneracy structure, around center 2i.

    With F = (4y)^(1-2k) P_{-10,-1}^{2i} the xi-image is exactly the
    index-0 weight-12 series (a cusp form), whose squared norm is computed
    by quadrature.  The inner-product identity evaluates the D-image norm
    through the same machinery as the flagship check with m = n = 0; the
    two must agree, and be positive.  The degenerate branch is witnessed
    by the vanishing of c+ at index 11 of the cusp-image series
    P_{-10,-1}^{2i}, equivalent to both sides of the identity vanishing
    when one index drops to -2k.
    """
    k = 6
    z = UHPoint(0.0, 2.0)
    qt = quad_trunc or trunc
    results = []

    fps = cached_series_fn(SeriesSpec(Kind.MEROMORPHIC, k, 0, z), qt, q)
    norm_xi = petersson_quadrature(fps, fps, k, q)
    results.append(("xi-image-norm-positive",
                    InnerReport.build(norm_xi, 0.0,
                                      {"positive": 1.0 if norm_xi.real > 0 else 0.0})))

    machinery, diag = _rhs_via_harmonic(k, 0, 0, z, z, trunc, samples=samples)
    ratio = machinery.real / norm_xi.real if norm_xi.real else math.inf
    rep = InnerReport.build(machinery, norm_xi, dict(diag, ratio=ratio))
    results.append(("xiD-norm-ratio", rep))

    # degenerate branch: the c+ coefficient of the cusp-image harmonic series
    # P_{-10,-1} at index 2k-1 encodes <Psi_{-12}, Psi_0>, which must vanish
    cusp_spec = SeriesSpec(Kind.HARMONIC, k, -1, z)
    scale = (4.0 * z.y) ** (1 - 2 * k)
    s1 = expansion.CircleSampling(0.4, samples)
    s2 = expansion.CircleSampling(0.6, samples)
    idx = 2 * k - 1
    ext = expansion.extract_harmonic_split(cusp_spec, z, s1, s2, (idx, idx),
                                           trunc, scale=scale)
    vanishing = -inner_via_cplus(ext.plus(idx), k, -2 * k, z.y)
    rep = InnerReport.build(vanishing, 0.0,
                            {"norm_scale": norm_xi.real,
                             "relative_to_norm": abs(vanishing) / abs(norm_xi.real)})
    results.append(("degenerate-branch-vanishing", rep))
    return results
