"""Elliptic-expansion coefficient extraction around a center.

A weight-2k meromorphic form f has, near a center with coordinate X,

    f(z) = (z - cbar)^(-2k) sum_n c(n) X^n,

so sampling g(X) = f(z(X)) (z(X) - cbar)^(2k) on a circle |X| = rho and
taking angular Fourier modes gives c(n) = A_n / rho^n.  A weight-(2-2k)
harmonic form has two coefficient families,

    F(z) = (z - cbar)^(2k-2) sum_n [c+(n) + c-(n) beta0(1-r^2; 2k-1, -n)] X^n,

and since beta0 is radius-dependent, two circles give a 2x2 linear system
per mode that separates c+ from c-.

For weight parameters k >= 4, extraction around centers at or near the
pole orbit of a harmonic series is impossible in double precision: the
beta factors of the few near-pole terms reach ~1e17 while the wanted c+
amplitudes sit twenty orders below.  extract_harmonic_split therefore
sums the far matrices in doubles and treats each near-pole term
separately in mpmath, adding the per-term coefficients; coefficients do
not depend on the (per-term valid) sampling radius, so every piece may
use its own circles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from . import poincare, special
from .halfplane import UHPoint, as_complex, sl2z_equivalent, stabilizer_order

__all__ = [
    "CircleSampling",
    "EllipticExpansion",
    "AliasingError",
    "IllConditionedError",
    "extract_meromorphic",
    "extract_harmonic",
    "extract_harmonic_split",
    "polynomial_part",
    "principal_part_indices",
    "n0_bound",
    "b_coefficient",
    "check_lemma24",
    "Lemma24Report",
    "safe_extraction_radii",
]


class AliasingError(RuntimeError):
    """Out-of-window Fourier mass too large for the requested window."""


class IllConditionedError(RuntimeError):
    """The two-radius beta0 system is numerically singular for some mode."""


@dataclass(frozen=True)
class CircleSampling:
    """Sampling circle |X| = rho with a power-of-two number of points."""

    rho: float
    samples: int = 256

    def __post_init__(self):
        if not 0.05 <= self.rho <= 0.75:
            raise ValueError("rho must lie in [0.05, 0.75]")
        if self.samples < 8 or self.samples & (self.samples - 1):
            raise ValueError("samples must be a power of two, >= 8")


@dataclass
class EllipticExpansion:
    """Extracted coefficients around a center, on a declared index window.

    minus_coeffs is empty for meromorphic inputs.  Coefficients follow the
    raw normalization of the expansion displays (no stabilizer factor is
    divided out).
    """

    center: UHPoint
    k: int
    plus_coeffs: dict = field(default_factory=dict)
    minus_coeffs: dict = field(default_factory=dict)
    n_min: int = 0
    n_max: int = 0

    def plus(self, n: int) -> complex:
        self._check(n)
        return self.plus_coeffs.get(n, 0.0 + 0.0j)

    def minus(self, n: int) -> complex:
        self._check(n)
        return self.minus_coeffs.get(n, 0.0 + 0.0j)

    def _check(self, n: int):
        if not self.n_min <= n <= self.n_max:
            raise KeyError(f"index {n} outside extraction window [{self.n_min}, {self.n_max}]")


def _circle_points(center, rho: float, samples: int):
    """z-points of the circle |X| = rho, X = rho * exp(2 pi i j / N)."""
    zc = as_complex(center)
    theta = 2.0 * np.pi * np.arange(samples) / samples
    X = rho * np.exp(1j * theta)
    return (zc - zc.conjugate() * X) / (1.0 - X)


def _fourier_modes(gvals: np.ndarray) -> np.ndarray:
    """A_n = (1/N) sum_j g_j e^{-i n theta_j}; index n modulo N."""
    return np.fft.fft(gvals) / len(gvals)


def _check_aliasing(modes: np.ndarray, alias_tol: float):
    n = len(modes)
    idx = np.arange(n)
    freq = np.where(idx <= n // 2, idx, idx - n)
    guard = np.abs(freq) > (3 * n) // 8
    peak = np.max(np.abs(modes))
    if peak == 0.0:
        return
    leak = np.max(np.abs(modes[guard])) / peak
    if leak > alias_tol:
        raise AliasingError(
            f"guard-band Fourier mass {leak:.2e} exceeds {alias_tol:.2e}; "
            "enlarge samples or shrink the circle"
        )


def _window_range(window) -> tuple[int, int]:
    n_min, n_max = int(window[0]), int(window[1])
    if n_min > n_max:
        raise ValueError("window must satisfy n_min <= n_max")
    return n_min, n_max


def extract_meromorphic(f, center, k: int, s: CircleSampling, window,
                        alias_tol: float = 1e-6) -> EllipticExpansion:
    """Coefficients c(n) of a meromorphic weight-2k form around the center.

    f is a point-function on complex arrays.  Only poles at the center
    itself are allowed inside the circle; a pole elsewhere inside it would
    shift the Laurent annulus and corrupt every coefficient.
    """
    n_min, n_max = _window_range(window)
    if max(abs(n_min), abs(n_max)) >= s.samples // 2:
        raise ValueError("window exceeds the Nyquist range of the sampling")
    zc = as_complex(center)
    zpts = _circle_points(center, s.rho, s.samples)
    g = np.asarray(f(zpts)) * (zpts - zc.conjugate()) ** (2 * k)
    modes = _fourier_modes(g)
    _check_aliasing(modes, alias_tol)
    coeffs = {}
    for n in range(n_min, n_max + 1):
        coeffs[n] = complex(modes[n % s.samples] / s.rho**n)
    cp = UHPoint.from_complex(zc)
    return EllipticExpansion(cp, k, coeffs, {}, n_min, n_max)


def _two_radius_solve(a1, a2, rho1, rho2, k, n_min, n_max, cond_tol):
    """Per-mode 2x2 solve for (c+, c-) from Fourier data at two radii."""
    plus, minus = {}, {}
    n1, n2 = len(a1), len(a2)
    for n in range(n_min, n_max + 1):
        b1 = special.beta0(1.0 - rho1**2, 2 * k - 1, -n)
        b2 = special.beta0(1.0 - rho2**2, 2 * k - 1, -n)
        det = b2 - b1
        if abs(det) < cond_tol * (1.0 + min(abs(b1), abs(b2))):
            raise IllConditionedError(
                f"beta0 separation too small at mode {n}: |{b1:.3e} - {b2:.3e}|"
            )
        r1 = a1[n % n1] / rho1**n
        r2 = a2[n % n2] / rho2**n
        plus[n] = complex((r1 * b2 - r2 * b1) / det)
        minus[n] = complex((r2 - r1) / det)
    return plus, minus


def extract_harmonic(F, center, k: int, s1: CircleSampling, s2: CircleSampling,
                     window, alias_tol: float = 1e-6,
                     cond_tol: float = 1e-12) -> EllipticExpansion:
    """Both coefficient families of a weight-(2-2k) harmonic form.

    Per angular mode n the two radii give the linear system
    c+(n) + c-(n) beta0(1-rho_i^2; 2k-1, -n) = A_n(rho_i) / rho_i^n.
    """
    n_min, n_max = _window_range(window)
    if s1.rho == s2.rho:
        raise ValueError("the two radii must differ")
    if max(abs(n_min), abs(n_max)) >= min(s1.samples, s2.samples) // 2:
        raise ValueError("window exceeds the Nyquist range of the sampling")
    zc = as_complex(center)
    modes = []
    for s in (s1, s2):
        zpts = _circle_points(center, s.rho, s.samples)
        g = np.asarray(F(zpts)) / (zpts - zc.conjugate()) ** (2 * k - 2)
        mo = _fourier_modes(g)
        _check_aliasing(mo, alias_tol)
        modes.append(mo)
    plus, minus = _two_radius_solve(modes[0], modes[1], s1.rho, s2.rho,
                                    k, n_min, n_max, cond_tol)
    cp = UHPoint.from_complex(zc)
    return EllipticExpansion(cp, k, plus, minus, n_min, n_max)


# ---------------------------------------------------------------------------
# split extraction for harmonic Poincare series (doubles + mpmath near terms)


def _orbit_images(spec_center, mats: np.ndarray):
    """M^{-1}(center of the series) for every matrix row, as complex array."""
    zc = as_complex(spec_center)
    a = mats[:, 0].astype(float)
    b = mats[:, 1].astype(float)
    c = mats[:, 2].astype(float)
    d = mats[:, 3].astype(float)
    return (d * zc - b) / (-c * zc + a)


def _term_values_mp(abcd, k: int, m: int, center_c, zpts_mp):
    """One slashed harmonic seed on mp sample points (list of mpc)."""
    a, b, c, d = (int(v) for v in abcd)
    zc = mp.mpc(center_c.real, center_c.imag)
    zcc = mp.conj(zc)
    cy = mp.mpf(center_c.imag)
    vals = []
    for z in zpts_mp:
        P = (a - zc * c) * z + (b - zc * d)
        Q = (a - zcc * c) * z + (b - zcc * d)
        X = P / Q
        w = 4 * cy * mp.im(z) / (mp.re(Q) ** 2 + mp.im(Q) ** 2)
        vals.append(Q ** (2 * k - 2) * special.beta_scalar_mp(w, 2 * k - 1, -m) * X**m)
    return vals


def _mp_term_coeffs(abcd, spec, center, rho1, rho2, samples, n_min, n_max):
    """Per-term (c+, c-) maps of one slashed seed, by mp two-radius solve."""
    zc = as_complex(center)
    zc_mp = mp.mpc(zc.real, zc.imag)
    zcc = mp.conj(zc_mp)
    k = spec.k
    roots = [mp.e ** (2j * mp.pi * j / samples) for j in range(samples)]
    dft_root = mp.e ** (-2j * mp.pi / samples)
    dft_pow = [dft_root**j for j in range(samples)]
    sol = {}
    for rho in (rho1, rho2):
        zpts = [(zc_mp - zcc * (rho * r)) / (1 - rho * r) for r in roots]
        vals = _term_values_mp(abcd, k, spec.m, as_complex(spec.center), zpts)
        g = [vals[j] / (zpts[j] - zcc) ** (2 * k - 2) for j in range(samples)]
        amp = {}
        for n in range(n_min, n_max + 1):
            s = mp.mpc(0)
            for j in range(samples):
                s += g[j] * dft_pow[(j * n) % samples]
            amp[n] = s / samples
        sol[rho] = amp
    plus, minus = {}, {}
    for n in range(n_min, n_max + 1):
        b1 = special.beta0_scalar_mp(1 - mp.mpf(rho1) ** 2, 2 * k - 1, -n)
        b2 = special.beta0_scalar_mp(1 - mp.mpf(rho2) ** 2, 2 * k - 1, -n)
        r1 = sol[rho1][n] / mp.mpf(rho1) ** n
        r2 = sol[rho2][n] / mp.mpf(rho2) ** n
        det = b2 - b1
        plus[n] = (r1 * b2 - r2 * b1) / det
        minus[n] = (r2 - r1) / det
    return plus, minus


def extract_harmonic_split(spec, center, s1: CircleSampling, s2: CircleSampling,
                           window, trunc, scale: complex = 1.0,
                           near_radius: float = 0.8, mp_samples: int = 192,
                           mp_dps: int = 60, alias_tol: float = 1e-6,
                           cond_tol: float = 1e-12) -> EllipticExpansion:
    """High-precision extraction for a truncated harmonic Poincare series.

    Matrices whose pole image sits within elliptic distance near_radius of
    the extraction center are handled one at a time in mpmath on circles
    scaled to their own pole distance; the remaining matrices are summed
    in doubles and extracted on (s1, s2).  Coefficient maps add.  scale
    multiplies the final coefficients (series prefactors).
    """
    if spec.kind is not poincare.Kind.HARMONIC:
        raise ValueError("extract_harmonic_split expects a harmonic series spec")
    n_min, n_max = _window_range(window)
    zc = as_complex(center)
    mats, _ = poincare.matrices_up_to(trunc.max_shell)
    images = _orbit_images(spec.center, mats)
    rdist = np.abs((images - zc) / (images - zc.conjugate()))
    near = rdist < near_radius
    far_mats = mats[~near]

    # far part: plain double-precision series over the far matrices
    def far_fn(z):
        zux = np.atleast_1d(np.asarray(z, dtype=complex))
        acc, _ = poincare._chunk_sums(spec, zux, far_mats, len(far_mats), 0,
                                      trunc.term_guard)
        return acc.reshape(np.shape(z))

    far = extract_harmonic(far_fn, center, spec.k, s1, s2, window,
                           alias_tol=alias_tol, cond_tol=cond_tol)

    # near part: per-term mp extraction; +M and -M give identical terms
    near_mats = mats[near]
    near_r = rdist[near]
    seen = {}
    for row, r in zip(near_mats, near_r):
        key = tuple(int(v) for v in row)
        nkey = tuple(-v for v in key)
        if nkey in seen:
            seen[nkey][1] += 1
        else:
            seen[key] = [float(r), 1]

    plus_mp = {n: mp.mpc(0) for n in range(n_min, n_max + 1)}
    minus_mp = {n: mp.mpc(0) for n in range(n_min, n_max + 1)}
    with mp.workdps(mp_dps):
        for key, (r, mult) in sorted(seen.items()):
            # a pole at the extraction center itself (the seed term) does not
            # bound the term's expansion disk
            r_eff = r if r > 1e-6 else 1.0
            rho1 = 0.45 * r_eff
            rho2 = 0.60 * r_eff
            p, q = _mp_term_coeffs(np.array(key), spec, center, rho1, rho2,
                                   mp_samples, n_min, n_max)
            for n in range(n_min, n_max + 1):
                plus_mp[n] += mult * p[n]
                minus_mp[n] += mult * q[n]

    plus, minus = {}, {}
    for n in range(n_min, n_max + 1):
        pv = far.plus(n) + complex(float(mp.re(plus_mp[n])), float(mp.im(plus_mp[n])))
        mv = far.minus(n) + complex(float(mp.re(minus_mp[n])), float(mp.im(minus_mp[n])))
        plus[n] = scale * pv
        minus[n] = scale * mv
    return EllipticExpansion(UHPoint.from_complex(zc), spec.k, plus, minus, n_min, n_max)


def safe_extraction_radii(center, pole_center=None, scan_shell: int = 6,
                          factors=(0.6, 0.85)) -> tuple[float, float]:
    """Radii pair inside the expansion disk of a series around the center.

    The disk of validity ends at the nearest SL2(Z) image of pole_center
    (default: the center itself); images closer than 1e-9 (the center's own
    pole) do not bound the disk.
    """
    zc = as_complex(center)
    pc = as_complex(pole_center) if pole_center is not None else zc
    mats, _ = poincare.matrices_up_to(scan_shell)
    images = _orbit_images(UHPoint.from_complex(pc), mats)
    r = np.abs((images - zc) / (images - zc.conjugate()))
    r = r[r > 1e-9]
    rmin = float(np.min(r)) if len(r) else 1.0
    rmin = min(rmin, 1.0)
    lo = max(0.05, factors[0] * rmin)
    hi = min(0.75, factors[1] * rmin)
    if not lo < hi:
        raise ValueError(f"no usable radius window around {zc}")
    return lo, hi


# ---------------------------------------------------------------------------
# structural pieces: polynomial part, principal part, n0, b-coefficients


def polynomial_part(e: EllipticExpansion) -> list:
    """The 2k-1 coefficients c+(0), ..., c+(2k-2)."""
    top = 2 * e.k - 2
    if e.n_min > 0 or e.n_max < top:
        raise ValueError(f"window [{e.n_min}, {e.n_max}] does not cover [0, {top}]")
    return [e.plus(n) for n in range(top + 1)]


def principal_part_indices(e: EllipticExpansion, k: int, tol: float):
    """Index sets of the growing terms: plus-side n < 0, minus-side n >= 0."""
    plus = {n for n, v in e.plus_coeffs.items() if n < 0 and abs(v) > tol}
    minus = {n for n, v in e.minus_coeffs.items() if n >= 0 and abs(v) > tol}
    return plus, minus


def n0_bound(spec, center_query, tol: float = 1e-9) -> int:
    """Singularity order bound of the harmonic series at the query point.

    Zero off the orbit of the series center; on it, |j| + 1 if the series
    subscript j vanishes and |j| otherwise (the paper's |k-1 +- m| +
    delta-term, rewritten in the subscript).
    """
    if spec.kind is not poincare.Kind.HARMONIC:
        raise ValueError("n0_bound applies to harmonic series")
    if isinstance(center_query, UHPoint):
        q = center_query
    else:
        q = UHPoint.from_complex(center_query)
    if not sl2z_equivalent(spec.center, q, tol):
        return 0
    return abs(spec.m) + (1 if spec.m == 0 else 0)


def b_coefficient(k: int, m: int, n: int, spec_center, query_center,
                  cplus_at_n: complex, n0: int,
                  tol: float = 1e-9) -> complex:
    """Three-branch b-coefficient of the Bol image of the harmonic series
    with subscript m + k - 1.

    n < 0 uses the exact rational constant, the middle branch fires only at
    n = k - 1 + m, and n >= 2k - 1 rescales the supplied labeled
    coefficient c+(n) (stabilizer factor divided out).  Indices in the gap
    min(n0, 2k-2) < n < 2k-1 are not covered by the case split and yield 0.
    """
    if n < -n0:
        raise ValueError(f"b-coefficient requires n >= -n0 = {-n0}")
    sc = spec_center if isinstance(spec_center, UHPoint) else UHPoint.from_complex(spec_center)
    qc = query_center if isinstance(query_center, UHPoint) else UHPoint.from_complex(query_center)
    equiv = sl2z_equivalent(sc, qc, tol)
    omega = stabilizer_order(sc)
    if n < 0:
        if not (equiv and n == m + k - 1):
            return 0.0 + 0.0j
        fr = special.factorial_ratio(-n + 2 * k - 2, -n - 1)
        return complex(-fr * 2 * omega * float(special.c_const(2 * k - 1, 1 - k - m)))
    if n <= min(n0, 2 * k - 2):
        if not (equiv and n == k - 1 + m):
            return 0.0 + 0.0j
        return complex(-2.0 * special.factorial_ratio(2 * k - 2, 0) * omega)
    if n >= 2 * k - 1:
        return 2.0 * omega * special.factorial_ratio(n, n + 1 - 2 * k) * complex(cplus_at_n)
    return 0.0 + 0.0j  # gap between the displayed branches


# ---------------------------------------------------------------------------
# coefficient-relation checker


@dataclass
class Lemma24Report:
    """Per-index comparison of the xi- and Bol-image coefficient relations."""

    k: int
    m: int
    z0: UHPoint
    z: UHPoint
    window: tuple
    relation_xi: dict = field(default_factory=dict)   # n -> (lhs, rhs)
    relation_bol: dict = field(default_factory=dict)  # n -> (lhs, rhs)
    skipped: list = field(default_factory=list)
    max_mismatch: float = 0.0


def check_lemma24(k: int, m: int, z0: UHPoint, z: UHPoint, window, trunc,
                  radii=None, samples: int = 256,
                  psi_radius: float = None) -> Lemma24Report:
    """Check both coefficient relations between the harmonic series around z
    and the meromorphic series with index m - k, via independent extraction
    of each side.

    Relation one (xi image): conj(raw-minus of P_{k-1-m}) at n equals
    (y0/y)^(2k-1) times the raw coefficient of Psi_{m-k} at -n-1.  Relation
    two (Bol image): the b-coefficient built from the raw data of
    P_{k-1+m} at n equals -(2k-2)! (y0/y)^(2k-1) times the raw Psi
    coefficient at n+1-2k.  All stabilizer and seed bookkeeping is internal
    to the raw coefficients, which is what the extractors return.
    """
    n_min, n_max = _window_range(window)
    y0 = z0.y
    y = z.y
    if radii is None:
        radii = safe_extraction_radii(z, pole_center=z0)
    s1 = CircleSampling(radii[0], samples)
    s2 = CircleSampling(radii[1], samples)

    spec_minus = poincare.SeriesSpec(poincare.Kind.HARMONIC, k, k - 1 - m, z0)
    spec_plus = poincare.SeriesSpec(poincare.Kind.HARMONIC, k, k - 1 + m, z0)
    spec_psi = poincare.SeriesSpec(poincare.Kind.MEROMORPHIC, k, m - k, z0)

    e_minus = extract_harmonic(poincare.series_function(spec_minus, trunc),
                               z, k, s1, s2, (n_min, n_max))
    e_plus = extract_harmonic(poincare.series_function(spec_plus, trunc),
                              z, k, s1, s2, (n_min, n_max))

    psi_lo = min(-n_max - 1, n_min + 1 - 2 * k)
    psi_hi = max(-n_min - 1, n_max + 1 - 2 * k)
    if psi_radius is None:
        psi_radius = 0.5 * (radii[0] + radii[1])
    e_psi = extract_meromorphic(poincare.series_function(spec_psi, trunc),
                                z, k, CircleSampling(psi_radius, samples),
                                (psi_lo, psi_hi))

    omega0 = stabilizer_order(z0)
    n0_plus = n0_bound(spec_plus, z)
    fact = special.factorial_ratio(2 * k - 2, 0)
    yfac = (y0 / y) ** (2 * k - 1)

    rep = Lemma24Report(k, m, z0, z, (n_min, n_max))
    worst = 0.0
    for n in range(n_min, n_max + 1):
        lhs = np.conj(e_minus.minus(n))
        rhs = yfac * e_psi.plus(-n - 1)
        rep.relation_xi[n] = (complex(lhs), complex(rhs))
        worst = max(worst, abs(lhs - rhs))

        if n >= -n0_plus:
            if min(n0_plus, 2 * k - 2) < n < 2 * k - 1:
                rep.skipped.append(n)  # branch gap of the b case split
                continue
            labeled = e_plus.plus(n) / (2.0 * omega0) if n >= 2 * k - 1 else 0.0
            bval = b_coefficient(k, m, n, z0, z, labeled, n0_plus)
            rhs_b = -fact * yfac * e_psi.plus(n + 1 - 2 * k)
            rep.relation_bol[n] = (complex(bval), complex(rhs_b))
            worst = max(worst, abs(complex(bval) - rhs_b))
    rep.max_mismatch = worst
    return rep
