"""Command-line front end: evaluate series, extract expansions, compute inner
products, and run the named verification suites.

Reports are machine readable.  JSON uses the fixed schema

    {"command": str, "params": obj,
     "results": [{"name": str, "lhs": [re, im], "rhs": [re, im],
                  "abs_diff": num, "rel_diff": num, "pass": bool}],
     "runtime_ms": num}

with every float printed to 17 significant digits, so identical configs
produce identical reports up to the runtime field.  CSV flattens the same
rows.  Exit status: 0 all checks passed, 1 a check failed, 2 configuration
error, 3 a numerical guard tripped (pole proximity, aliasing, conditioning).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from dataclasses import dataclass

from . import expansion, inner, operators, poincare
from .expansion import AliasingError, CircleSampling, IllConditionedError
from .halfplane import UHPoint
from .inner import FDQuadParams, NonIntegrableError
from .operators import StencilParams
from .poincare import Kind, SeriesSpec, TermSingularityError, TruncationParams

__all__ = ["main", "run_suite", "SUITES", "CheckRow"]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# evaluation points used by the pointwise suites: generic, inside the domain,
# away from the orbit of the test centers
GENERIC_POINTS = (
    complex(0.13, 1.07),
    complex(-0.21, 0.93),
    complex(0.31, 1.22),
    complex(-0.38, 1.41),
    complex(0.05, 1.55),
)

CENTER_2I = UHPoint(0.0, 2.0)
CENTER_I = UHPoint(0.0, 1.0)
CENTER_GENERIC = UHPoint(0.25, 1.5)

TRUNC_OPS = TruncationParams(24, 4)
TRUNC_EXTRACT = TruncationParams(32, 4)
TRUNC_QUAD_K6 = TruncationParams(14, 3)
TRUNC_QUAD_K2 = TruncationParams(20, 4)
QUAD_DEFAULT = FDQuadParams(12.0, 240, 240)
QUAD_PUNCTURED = FDQuadParams(12.0, 260, 260, puncture_radius=0.03,
                              richardson_punctures=3)

STENCIL_SINGLE = StencilParams(1e-3, 2)
STENCIL_NESTED = StencilParams(1e-2, 2)


@dataclass
class CheckRow:
    name: str
    lhs: complex
    rhs: complex
    abs_diff: float
    rel_diff: float
    passed: bool


def _row(name, lhs, rhs, passed=None, tol=None) -> CheckRow:
    lhs = complex(lhs)
    rhs = complex(rhs)
    ad = abs(lhs - rhs)
    scale = max(abs(lhs), abs(rhs))
    rel = ad / scale if scale > 0 else 0.0
    if passed is None:
        passed = rel < tol
    return CheckRow(name, lhs, rhs, ad, rel, bool(passed))


# ---------------------------------------------------------------------------
# verification suites


def suite_lemma_flip(k: int = 2, center: UHPoint = CENTER_2I,
                     points=GENERIC_POINTS, trunc: TruncationParams = TRUNC_OPS,
                     tol: float = 1e-3):
    """Involution and the two exchange identities of the flipping operator."""
    spec = SeriesSpec(Kind.HARMONIC, k, 2 * k - 2, center)
    F = poincare.series_function(spec, trunc)
    Fflip = operators.flipped(F, k, STENCIL_NESTED)
    fac = (4.0 * math.pi) ** (2 * k - 1) / math.factorial(2 * k - 2)
    rows = []
    for i, z in enumerate(points):
        lhs = complex(operators.flip(Fflip, k, z, STENCIL_NESTED))
        rhs = complex(F(z))
        rows.append(_row(f"involution[z{i}]", lhs, rhs, tol=tol))
        lhs = complex(operators.xi(Fflip, 2 - 2 * k, z, STENCIL_NESTED))
        rhs = fac * complex(operators.bol(F, k, z, STENCIL_NESTED))
        rows.append(_row(f"xi-flip-vs-bol[z{i}]", lhs, rhs, tol=tol))
        lhs = complex(operators.bol(Fflip, k, z, STENCIL_NESTED))
        rhs = complex(operators.xi(F, 2 - 2 * k, z, STENCIL_SINGLE)) / fac
        rows.append(_row(f"bol-flip-vs-xi[z{i}]", lhs, rhs, tol=tol))
    return rows


def suite_lemma_ppsirel(k: int = 2, ms=(0, 3), center: UHPoint = CENTER_2I,
                        points=GENERIC_POINTS, trunc: TruncationParams = TRUNC_OPS,
                        tol: float = 1e-3):
    """Pointwise xi- and Bol-images of the harmonic series against the
    meromorphic series they equal, term-exactly at matched truncation."""
    rows = []
    y0 = center.y
    for m in ms:
        hspec = SeriesSpec(Kind.HARMONIC, k, m, center)
        F = poincare.series_function(hspec, trunc)
        psi_xi = poincare.series_function(
            SeriesSpec(Kind.MEROMORPHIC, k, -m - 1, center), trunc)
        psi_bol = poincare.series_function(
            SeriesSpec(Kind.MEROMORPHIC, k, m + 1 - 2 * k, center), trunc)
        cxi = (4.0 * y0) ** (2 * k - 1)
        cbol = -math.factorial(2 * k - 2) * (y0 / math.pi) ** (2 * k - 1)
        for i, z in enumerate(points):
            lhs = complex(operators.xi(F, 2 - 2 * k, z, STENCIL_SINGLE))
            rhs = cxi * complex(psi_xi(z))
            rows.append(_row(f"xi-image[m={m},z{i}]", lhs, rhs, tol=tol))
            lhs = complex(operators.bol(F, k, z, STENCIL_NESTED))
            rhs = cbol * complex(psi_bol(z))
            rows.append(_row(f"bol-image[m={m},z{i}]", lhs, rhs, tol=tol))
    return rows


_XIDELLIPTIC_CONFIGS = (
    # (k, m, z0, z, window, radii, psi_radius)
    (2, 2, CENTER_2I, CENTER_2I, (-3, 3), (0.145, 0.205), 0.175),
    (2, 2, CENTER_2I, CENTER_GENERIC, (-3, 3), (0.09, 0.14), 0.115),
    (3, 1, CENTER_I, CENTER_I, (-3, 6), (0.22, 0.33), 0.275),
)


def suite_lemma_xidelliptic(configs=_XIDELLIPTIC_CONFIGS,
                            trunc: TruncationParams = TRUNC_EXTRACT,
                            tol: float = 1e-4):
    """Coefficient relations between the harmonic series and the meromorphic
    series with shifted index, each side independently extracted."""
    rows = []
    for k, m, z0, z, window, radii, prho in configs:
        rep = expansion.check_lemma24(k, m, z0, z, window, trunc,
                                      radii=radii, psi_radius=prho)
        name = f"k{k}-m{m}-z0={z0.x:g}+{z0.y:g}i-z={z.x:g}+{z.y:g}i"
        rows.append(_row(name, rep.max_mismatch, 0.0,
                         passed=rep.max_mismatch < tol))
    return rows


def suite_lemma_innermero(q: FDQuadParams = QUAD_PUNCTURED,
                          quad_trunc: TruncationParams = TRUNC_QUAD_K6,
                          tol: float = 1e-3):
    """Vanishing of the pairing of a cusp-index series against an E-space
    series: the coefficient formula gives exactly zero for index >= 0, the
    punctured quadrature must agree."""
    k = 6
    rows = []
    dd = inner.petersson_quadrature(inner.cached_delta_fn(q),
                                    inner.cached_delta_fn(q), k, q)
    for z in (CENTER_2I, CENTER_GENERIC):
        f0 = inner.cached_series_fn(SeriesSpec(Kind.MEROMORPHIC, k, 0, z),
                                    quad_trunc, q)
        fm1 = inner.cached_series_fn(SeriesSpec(Kind.MEROMORPHIC, k, -1, z),
                                     quad_trunc, q)
        val = inner.petersson_quadrature(f0, fm1, k, q, punctures=(z,))
        norm0 = inner.petersson_quadrature(f0, f0, k, q)
        scale = math.sqrt(abs(norm0.real) * abs(dd.real))
        rows.append(_row(f"ell0-pairing[z={z.x:g}+{z.y:g}i]", val, 0.0,
                         passed=abs(val) < tol * scale))
    return rows


def suite_petersson_coeff(q: FDQuadParams = QUAD_DEFAULT,
                          trunc: TruncationParams = TRUNC_QUAD_K6,
                          tol: float = 1e-2):
    """Quadrature against the Petersson coefficient formula, weight 12."""
    cases = ((6, 0, CENTER_2I), (6, 1, CENTER_2I), (6, 0, CENTER_I))
    rows = []
    for k, n, z in cases:
        rep = inner.check_petersson_formula(k, n, z, trunc, q)
        rows.append(_row(f"k{k}-n{n}-z={z.x:g}+{z.y:g}i", rep.lhs, rep.rhs, tol=tol))
    return rows


def suite_theorem_1_1(q: FDQuadParams = QUAD_DEFAULT,
                      trunc: TruncationParams = TRUNC_EXTRACT,
                      tol: float = 1e-2, zero_tol: float = 1e-3,
                      cases=None):
    """Flagship two-path identity check, plus the weight-4 degenerate case
    where both sides must vanish with the space of cusp forms."""
    rows = []
    if cases is None:
        cases = [(6, 0, 0, CENTER_2I, CENTER_2I), (6, 0, 1, CENTER_2I, CENTER_2I),
                 (6, 0, 0, CENTER_I, CENTER_2I), (6, 0, 1, CENTER_I, CENTER_2I)]
    for k, m, n, z1, z2 in cases:
        rep = inner.check_theorem_1_1(k, m, n, z1, z2, trunc, q,
                                      quad_trunc=TRUNC_QUAD_K6)
        name = f"k{k}-m{m}-n{n}-z1={z1.x:g}+{z1.y:g}i-z2={z2.x:g}+{z2.y:g}i"
        rows.append(_row(name, rep.lhs, rep.rhs, tol=tol))
    rep = inner.check_theorem_1_1(2, 0, 0, CENTER_2I, CENTER_2I, TRUNC_EXTRACT,
                                  q, quad_trunc=TRUNC_QUAD_K2)
    rows.append(_row("k2-both-sides-vanish", rep.lhs, rep.rhs,
                     passed=abs(rep.lhs) < zero_tol and abs(rep.rhs) < zero_tol))
    return rows


def suite_weight12_degeneracy(q: FDQuadParams = QUAD_DEFAULT,
                              trunc: TruncationParams = TRUNC_EXTRACT,
                              ratio_window=(0.98, 1.02), vanish_tol: float = 1e-2):
    """Positive-definiteness of the quotient pairing at weight 12."""
    results = inner.weight12_degeneracy_demo(trunc, q, quad_trunc=TRUNC_QUAD_K6)
    rows = []
    for name, rep in results:
        if name == "xi-image-norm-positive":
            rows.append(_row(name, rep.lhs, rep.rhs,
                             passed=rep.lhs.real > 0 and
                             abs(rep.lhs.imag) < 1e-6 * abs(rep.lhs.real)))
        elif name == "xiD-norm-ratio":
            ratio = rep.diagnostics.get("ratio", math.inf)
            rows.append(_row(name, rep.lhs, rep.rhs,
                             passed=ratio_window[0] <= ratio <= ratio_window[1]))
        else:
            rel = rep.diagnostics.get("relative_to_norm", math.inf)
            rows.append(_row(name, rep.lhs, rep.rhs, passed=rel < vanish_tol))
    return rows


def suite_orthogonality(q: FDQuadParams = QUAD_PUNCTURED,
                        quad_trunc: TruncationParams = TRUNC_QUAD_K6,
                        tol: float = 1e-4):
    """Orthogonality of the simple-pole E-space series to cusp forms,
    by punctured quadrature against the discriminant form."""
    k = 6
    rows = []
    fd = inner.cached_delta_fn(q)
    dd = inner.petersson_quadrature(fd, fd, k, q)
    for z in (CENTER_2I, CENTER_GENERIC):
        fpsi = inner.cached_series_fn(SeriesSpec(Kind.MEROMORPHIC, k, -1, z),
                                      quad_trunc, q)
        val = inner.petersson_quadrature(fpsi, fd, k, q, punctures=(z,))
        rows.append(_row(f"psi-minus1-vs-delta[z={z.x:g}+{z.y:g}i]", val, 0.0,
                         passed=abs(val) < tol * abs(dd.real)))
    return rows


SUITES = {
    "lemma-flip": suite_lemma_flip,
    "lemma-ppsirel": suite_lemma_ppsirel,
    "lemma-xidelliptic": suite_lemma_xidelliptic,
    "lemma-innermero": suite_lemma_innermero,
    "petersson-coeff": suite_petersson_coeff,
    "theorem-1-1": suite_theorem_1_1,
    "weight12-degeneracy": suite_weight12_degeneracy,
    "orthogonality": suite_orthogonality,
}


def run_suite(name: str, **kwargs):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](**kwargs)


# ---------------------------------------------------------------------------
# report serialization


def _fmt_float(x: float) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x != x:
        return '"nan"'
    if x in (math.inf, -math.inf):
        return '"inf"' if x > 0 else '"-inf"'
    if isinstance(x, int):
        return repr(x)
    return f"{x:.17g}"


def _json_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return _fmt_float(v)
    if isinstance(v, str):
        body = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{body}"'
    if isinstance(v, complex):
        return f"[{_fmt_float(v.real)}, {_fmt_float(v.imag)}]"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if isinstance(v, dict):
        items = ", ".join(f'{_json_value(str(kk))}: {_json_value(vv)}'
                          for kk, vv in v.items())
        return "{" + items + "}"
    if v is None:
        return "null"
    return _json_value(str(v))


def render_json(command: str, params: dict, rows, runtime_ms: float) -> str:
    results = [
        {"name": r.name, "lhs": r.lhs, "rhs": r.rhs, "abs_diff": r.abs_diff,
         "rel_diff": r.rel_diff, "pass": r.passed}
        for r in rows
    ]
    doc = {"command": command, "params": params, "results": results,
           "runtime_ms": runtime_ms}
    return _json_value(doc)


def render_csv(command: str, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["command", "name", "lhs_re", "lhs_im", "rhs_re", "rhs_im",
                "abs_diff", "rel_diff", "pass"])
    for r in rows:
        w.writerow([command, r.name, f"{r.lhs.real:.17g}", f"{r.lhs.imag:.17g}",
                    f"{r.rhs.real:.17g}", f"{r.rhs.imag:.17g}",
                    f"{r.abs_diff:.17g}", f"{r.rel_diff:.17g}",
                    "true" if r.passed else "false"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument handling


def parse_point(text: str) -> UHPoint:
    """Parse '2i', 'i', '0.25+1.5i' style points of the upper half-plane."""
    t = text.strip().replace("I", "i")
    if t in ("i", "+i"):
        return UHPoint(0.0, 1.0)
    try:
        z = complex(t.replace("i", "j"))
    except ValueError as exc:
        raise ValueError(f"cannot parse point {text!r}") from exc
    return UHPoint(z.real, z.imag)


def _apply_config_file(args: argparse.Namespace, path: str):
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if not hasattr(args, key):
                raise ValueError(f"unknown config key {key!r}")
            cur = getattr(args, key)
            if isinstance(cur, bool):
                setattr(args, key, val.lower() in ("1", "true", "yes"))
            elif isinstance(cur, int):
                setattr(args, key, int(val))
            elif isinstance(cur, float):
                setattr(args, key, float(val))
            else:
                setattr(args, key, val)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="polarlab",
        description="Evaluate Poincare series, extract elliptic expansions, "
                    "compute Petersson inner products, run verification suites.")
    ap.add_argument("--config", default=None, help="key=value file overriding flags")
    ap.add_argument("--output", choices=("json", "csv"), default="json")
    ap.add_argument("--output-path", default=None)
    sub = ap.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("eval", help="evaluate a truncated Poincare series")
    pe.add_argument("--kind", choices=("meromorphic", "harmonic"), required=True)
    pe.add_argument("--k", type=int, required=True)
    pe.add_argument("--m", type=int, required=True)
    pe.add_argument("--center", required=True)
    pe.add_argument("--z", required=True)
    pe.add_argument("--max-shell", type=int, default=40)
    pe.add_argument("--tail-window", type=int, default=4)
    pe.add_argument("--guard", type=float, default=1e12)
    pe.add_argument("--tail-tol", type=float, default=None,
                    help="pass only if the tail diagnostic is below this")

    px = sub.add_parser("expand", help="extract elliptic-expansion coefficients")
    px.add_argument("--kind", choices=("meromorphic", "harmonic"), required=True)
    px.add_argument("--k", type=int, required=True)
    px.add_argument("--m", type=int, required=True)
    px.add_argument("--center", required=True, help="series center")
    px.add_argument("--around", default=None, help="extraction center (default: series center)")
    px.add_argument("--rho1", type=float, default=None)
    px.add_argument("--rho2", type=float, default=None)
    px.add_argument("--samples", type=int, default=256)
    px.add_argument("--nmin", type=int, required=True)
    px.add_argument("--nmax", type=int, required=True)
    px.add_argument("--max-shell", type=int, default=32)
    px.add_argument("--split", action="store_true",
                    help="use the high-precision split extractor (harmonic only)")

    pi = sub.add_parser("inner", help="inner product of the discriminant form "
                                      "against a meromorphic series, both routes")
    pi.add_argument("--k", type=int, default=6)
    pi.add_argument("--n", type=int, required=True)
    pi.add_argument("--center", required=True)
    pi.add_argument("--grid", type=int, default=240)
    pi.add_argument("--ymax", type=float, default=12.0)
    pi.add_argument("--max-shell", type=int, default=14)
    pi.add_argument("--tol", type=float, default=1e-2)

    pv = sub.add_parser("verify", help="run one named verification suite")
    pv.add_argument("--suite", required=True, choices=sorted(SUITES))
    pv.add_argument("--k", type=int, default=None)

    sub.add_parser("table", help="run every verification suite")
    return ap


def _dispatch(args) -> tuple[list, dict]:
    if args.command == "eval":
        spec = SeriesSpec(Kind.MEROMORPHIC if args.kind == "meromorphic"
                          else Kind.HARMONIC, args.k, args.m,
                          parse_point(args.center))
        trunc = TruncationParams(args.max_shell, args.tail_window, args.guard)
        z = parse_point(args.z)
        sv = poincare.eval_series(spec, z, trunc)
        tail_ok = True if args.tail_tol is None else sv.last_shells_magnitude < args.tail_tol
        mag = abs(sv.value)
        rows = [CheckRow("series-value", complex(sv.value), 0.0, mag,
                         sv.last_shells_magnitude / mag if mag > 0 else 0.0,
                         bool(tail_ok))]
        params = {"kind": args.kind, "k": args.k, "m": args.m,
                  "center": str(args.center), "z": str(args.z),
                  "max_shell": args.max_shell, "tail_window": args.tail_window}
        return rows, params

    if args.command == "expand":
        kind = Kind.MEROMORPHIC if args.kind == "meromorphic" else Kind.HARMONIC
        spec = SeriesSpec(kind, args.k, args.m, parse_point(args.center))
        around = parse_point(args.around) if args.around else spec.center
        trunc = TruncationParams(args.max_shell, min(4, args.max_shell - 1))
        if args.rho1 is None or args.rho2 is None:
            lo, hi = expansion.safe_extraction_radii(around, pole_center=spec.center)
            rho1 = args.rho1 if args.rho1 is not None else lo
            rho2 = args.rho2 if args.rho2 is not None else hi
        else:
            rho1, rho2 = args.rho1, args.rho2
        window = (args.nmin, args.nmax)
        if kind is Kind.MEROMORPHIC:
            e = expansion.extract_meromorphic(
                poincare.series_function(spec, trunc), around, args.k,
                CircleSampling(rho1, args.samples), window)
        elif args.split:
            e = expansion.extract_harmonic_split(
                spec, around, CircleSampling(rho1, args.samples),
                CircleSampling(rho2, args.samples), window, trunc)
        else:
            e = expansion.extract_harmonic(
                poincare.series_function(spec, trunc), around, args.k,
                CircleSampling(rho1, args.samples),
                CircleSampling(rho2, args.samples), window)
        rows = []
        for n in range(args.nmin, args.nmax + 1):
            rows.append(CheckRow(f"c+({n})", e.plus(n), 0.0, abs(e.plus(n)), 0.0, True))
        if kind is Kind.HARMONIC:
            for n in range(args.nmin, args.nmax + 1):
                rows.append(CheckRow(f"c-({n})", e.minus(n), 0.0, abs(e.minus(n)), 0.0, True))
        params = {"kind": args.kind, "k": args.k, "m": args.m,
                  "center": str(args.center), "around": str(args.around or args.center),
                  "rho1": rho1, "rho2": rho2, "samples": args.samples,
                  "nmin": args.nmin, "nmax": args.nmax, "max_shell": args.max_shell}
        return rows, params

    if args.command == "inner":
        z = parse_point(args.center)
        q = FDQuadParams(args.ymax, args.grid, args.grid)
        trunc = TruncationParams(args.max_shell, min(3, args.max_shell - 1))
        rep = inner.check_petersson_formula(args.k, args.n, z, trunc, q)
        rows = [CheckRow("quadrature-vs-formula", rep.lhs, rep.rhs, rep.abs_diff,
                         rep.rel_diff, rep.rel_diff < args.tol)]
        params = {"k": args.k, "n": args.n, "center": str(args.center),
                  "grid": args.grid, "ymax": args.ymax,
                  "max_shell": args.max_shell, "tol": args.tol}
        return rows, params

    if args.command == "verify":
        kwargs = {}
        if args.k is not None and args.suite in ("lemma-flip", "lemma-ppsirel"):
            kwargs["k"] = args.k
        rows = run_suite(args.suite, **kwargs)
        return rows, {"suite": args.suite}

    if args.command == "table":
        rows = []
        for name in sorted(SUITES):
            for r in SUITES[name]():
                rows.append(CheckRow(f"{name}:{r.name}", r.lhs, r.rhs,
                                     r.abs_diff, r.rel_diff, r.passed))
        return rows, {"suites": sorted(SUITES)}

    raise ValueError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
        if args.config:
            _apply_config_file(args, args.config)
    except SystemExit:
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    try:
        rows, params = _dispatch(args)
    except (TermSingularityError, AliasingError, IllConditionedError,
            NonIntegrableError) as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    runtime_ms = (time.perf_counter() - t0) * 1000.0

    if args.output == "json":
        text = render_json(args.command, params, rows, runtime_ms)
    else:
        text = render_csv(args.command, rows)
    if args.output_path:
        with open(args.output_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
