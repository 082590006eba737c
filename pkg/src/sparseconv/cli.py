"""Command line front end: ``sparseconv {bound,sharp,compress,gaussian,verify}``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import gaussexp, stability
from .addset import (
    NotFound,
    PointSet,
    base_expand_compress,
    compress_convolution,
    compression_bound,
    compression_bound_n,
    min_diameter_search,
)
from .numerics import ContractError
from .sequences import GroupError, SparseSeq, convolve, norm
from .suites import SUITES, run_suite

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class UsageError(Exception):
    pass


def _g(v: float) -> float | str:
    if math.isinf(v):
        return "-inf" if v < 0 else "inf"
    return float(f"{v:.15g}")


def _dump(obj, out) -> None:
    out.write(json.dumps(obj, sort_keys=True, indent=2))
    out.write("\n")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive count, got {v}")
    return v


def parse_s_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad s list {text!r}")
    if not vals:
        raise UsageError("empty s list")
    for v in vals:
        if v < 3 or v % 2 == 0:
            raise UsageError(f"s values must be odd and >= 3, got {v}")
    return vals


def parse_sigma_spec(text: str) -> list[float]:
    """``lo:hi:step`` (inclusive of ``hi``) or a comma-separated list."""
    try:
        if ":" in text:
            lo, hi, step = (float(t) for t in text.split(":"))
            if not (lo > 0 and step > 0 and hi >= lo):
                raise UsageError(f"bad sigma range {text!r}")
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            return [round(lo + i * step, 12) for i in range(count)]
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad sigma spec {text!r}")
    if not vals or any(v <= 0 for v in vals):
        raise UsageError(f"sigma values must be positive: {text!r}")
    return vals


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_bound(args, out) -> int:
    s, f = args.s, args.f
    cb = compression_bound_n(s, f)
    report = {
        "s": s,
        "f": f,
        "compression_n": cb.n,
        "compression_log2_n": _g(cb.log2_n),
        "compression_exceeds_int_range": cb.exceeds_int_range,
    }
    if args.n is not None:
        report["n"] = args.n
        report["log2_alpha"] = _g(stability.analytic_alpha_log2(s, f, args.n))
        if s == f and s >= 2:
            report["log2_alpha_equal_form"] = _g(stability.analytic_alpha_log2_equal(s, args.n))
    cor = stability.corollary_universal_bound(s, f)
    report["universal"] = cor.to_json()
    if args.n is None:
        report["log2_alpha"] = _g(cor.log2_alpha)
    if args.json:
        _dump(report, out)
    else:
        out.write(f"s={s} f={f}\n")
        out.write(f"compression n(m={s + f - 1}) = {cb.n if cb.n is not None else 'exceeds 2^63'} (log2 {cb.log2_n:.15g})\n")
        if args.n is not None:
            out.write(f"log2 alpha(s,f,n={args.n}) >= {report['log2_alpha']}\n")
            if "log2_alpha_equal_form" in report:
                out.write(f"log2 alpha, s=f form      >= {report['log2_alpha_equal_form']}\n")
        out.write(f"universal log2 alpha >= {_g(cor.log2_alpha)}\n")
    return EXIT_OK


def cmd_sharp(args, out) -> int:
    if args.method == "exhaustive":
        res = stability.sharp_alpha_exhaustive(args.s, args.f, args.n, args.grid)
    else:
        res = stability.sharp_alpha_alternating(args.s, args.f, args.n, args.restarts, args.seed)
    _dump(res.to_json(), out)
    return EXIT_OK


def _load_json(path: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file {path} does not exist")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})")


def cmd_compress(args, out) -> int:
    data = _load_json(args.input)
    if "points" in data:
        A = PointSet.from_json(data)
        phi = min_diameter_search(A) if args.strategy == "search" else base_expand_compress(A)
        m = len(A)
        report = {
            "map": phi.to_json(),
            "diameter": phi.diameter,
            "guaranteed_n": compression_bound(m).n,
            "konyagin_lev_bound": 2 ** (m - 2) if m >= 2 else 0,
        }
        _dump(report, out)
        return EXIT_OK if phi.verified else EXIT_VERIFY
    if "x" in data and "y" in data:
        x = SparseSeq.from_json(data["x"])
        y = SparseSeq.from_json(data["y"])
        res = compress_convolution(x, y, args.strategy)
        conv = convolve(x, y)
        conv_t = convolve(res.x_tilde, res.y_tilde)
        norms = {}
        ok = res.verify(x, y) and res.phi.verified
        for label, r in (("1", 1.0), ("2", 2.0), ("inf", math.inf)):
            a, b = norm(conv, r), norm(conv_t, r)
            norms[label] = {"original": _g(a), "compressed": _g(b)}
            ok = ok and abs(a - b) <= 1e-12 * max(a, b, 1e-300)
        m = len(res.phi.domain)
        report = {
            "map": res.phi.to_json(),
            "diameter": res.phi.diameter,
            "n": res.n,
            "guaranteed_n": compression_bound_n(len(x), len(y)).n,
            "konyagin_lev_bound": 2 ** (m - 2) if m >= 2 else 0,
            "x_tilde": res.x_tilde.to_json(),
            "y_tilde": res.y_tilde.to_json(),
            "norms": norms,
            "verified": ok,
        }
        _dump(report, out)
        return EXIT_OK if ok else EXIT_VERIFY
    raise UsageError("input must be a point set {'group','points'} or a pair {'x','y'}")


def cmd_gaussian(args, out) -> int:
    s_values = parse_s_list(args.s)
    sigmas = parse_sigma_spec(args.sigma)
    records = gaussexp.sweep(s_values, sigmas, args.precision)
    text = gaussexp.records_to_csv(records)
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    # summary: per-s grid minimum and the comparison at sigma = (s-1)/2
    summary = sys.stderr if not args.out else out
    summary.write("# s,sigma_star_grid,log_ratio_star,minus_s_over_2,at_(s-1)/2,above_minus_s_over_2\n")
    for s in s_values:
        rows = [r for r in records if r.s == s]
        best = min(rows, key=lambda r: r.log_ratio)
        mid = gaussexp.gaussian_ratio(gaussexp.make_pair(s, (s - 1) / 2), args.precision).log_ratio
        summary.write(
            f"# {s},{best.sigma:.15g},{best.log_ratio:.15g},{-s / 2:.15g},{mid:.15g},{mid >= -s / 2}\n"
        )
    return EXIT_OK


def cmd_verify(args, out) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)} or 'all'")
    reports = run_suite(args.suite, args.seed)
    for rep in reports:
        out.write(rep.summary() + "\n")
        for msg in rep.messages:
            out.write(f"  {msg}\n")
    ok = all(r.ok for r in reports)
    out.write(f"total: {sum(r.checks - r.failures for r in reports)}/{sum(r.checks for r in reports)} checks passed\n")
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparseconv", description="Stability bounds for sparse convolutions.")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="closed-form lower bound and compression length")
    b.add_argument("--s", type=_positive, required=True)
    b.add_argument("--f", type=_positive, required=True)
    b.add_argument("--n", type=_positive)
    b.add_argument("--json", action="store_true", help="emit JSON")
    b.set_defaults(func=cmd_bound)

    sh = sub.add_parser("sharp", help="sharp alpha by optimization")
    sh.add_argument("--s", type=_positive, required=True)
    sh.add_argument("--f", type=_positive, required=True)
    sh.add_argument("--n", type=_positive, required=True)
    sh.add_argument("--method", choices=["exhaustive", "alternating"], default="exhaustive")
    sh.add_argument("--restarts", type=_positive, default=16)
    sh.add_argument("--grid", type=_positive)
    sh.add_argument("--seed", type=int, default=0)
    sh.set_defaults(func=cmd_sharp)

    c = sub.add_parser("compress", help="compress a point set or a sequence pair")
    c.add_argument("input", help="JSON file")
    c.add_argument("--strategy", choices=["base_expand", "search"], default="base_expand")
    c.set_defaults(func=cmd_compress)

    g = sub.add_parser("gaussian", help="Gaussian pair sweep as CSV")
    g.add_argument("--s", required=True, help="comma-separated odd sparsities")
    g.add_argument("--sigma", required=True, help="lo:hi:step (inclusive) or comma list")
    g.add_argument("--out", help="CSV output path (default stdout)")
    g.add_argument("--precision", choices=["auto", "native", "extended"], default="auto")
    g.set_defaults(func=cmd_gaussian)

    v = sub.add_parser("verify", help="run property suites")
    v.add_argument("--suite", default="all")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except stability.BudgetExceeded as exc:
        sys.stderr.write(f"budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except NotFound as exc:
        sys.stderr.write(f"not found: {exc}\n")
        return EXIT_VERIFY
    except (ContractError, GroupError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
