"""Command-line surface: norm inspection, membership checks, canonicalization,
shallow-to-deep compilation, bound sweeps, Rademacher estimation, and the two
built-in demonstrations.

Exit codes: 0 success, 1 malformed input, 2 budget or precondition violation,
3 verification or membership failure. CSV output uses 12 significant digits;
network files keep full precision.
"""

import argparse
import json
import re
import sys

import numpy as np

from . import compiler, estimate
from .capacity import (
    approx_error_bound,
    approx_plan,
    bound_auto,
    generalization_bound,
    l1_corollary_bound,
    sweep,
)
from .compiler import (
    CoefficientBudgetError,
    CompileRangeError,
    DegenerateUnitError,
    ShallowFormatError,
)
from .estimate import EstimateConfig, Sample, UnsupportedNormError
from .netcore import (
    INF,
    ClassSpec,
    NormSpec,
    NetworkFormatError,
    class_check,
    evaluate,
    layer_norms,
    load_network,
    save_network,
)
from .transform import (
    BudgetExceededError,
    ConstantNotRepresentableError,
    canonicalize,
    motivating_networks,
    motivating_table,
)

VERIFY_TOLERANCE = 1e-9


class CliInputError(ValueError):
    """Malformed command line, file, or inline JSON."""


class VerificationFailure(Exception):
    """A requested verification did not hold."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliInputError(message)


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _parse_q(text: str) -> float:
    if text.strip().lower() == "inf":
        return INF
    return float(text)


def _load_spec(arg: str) -> ClassSpec:
    try:
        if arg.lstrip().startswith("{"):
            doc = json.loads(arg)
        else:
            with open(arg, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        return ClassSpec.from_json_dict(doc)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliInputError(f"invalid class spec {arg!r}: {exc}") from exc


def _load_sample(path: str) -> Sample:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict) or doc.get("version") != 1:
            raise ValueError("sample file must be a JSON object with version 1")
        return Sample(np.asarray(doc["points"], dtype=float))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CliInputError(f"invalid sample file {path!r}: {exc}") from exc


def _parse_sweep(text: str) -> list[int]:
    m = re.fullmatch(r"k=(\d+)\.\.(\d+)(?:,(\d+))?", text.strip())
    if not m:
        raise CliInputError(f"sweep grammar is k=A..B[,step], got {text!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    step = int(m.group(3)) if m.group(3) else 1
    if lo < 0 or hi < lo or step < 1:
        raise CliInputError(f"invalid sweep range {text!r}")
    return list(range(lo, hi + 1, step))


def _print_bound_rows(reports, out=sys.stdout):
    max_terms = max(len(r.terms) for r in reports)
    header = "p,q,c,c_out,k,widths,n,m1,branch,value" + "".join(
        f",term{i + 1}" for i in range(max_terms)
    )
    print(header, file=out)
    for r in reports:
        inp = r.inputs
        widths = ";".join(str(d) for d in inp["dims"][1:-1]) or "-"
        q = "inf" if inp["q"] == INF else _fmt(inp["q"])
        cells = [_fmt(inp["p"]), q, _fmt(inp["c"]), _fmt(inp["c_out"]), str(inp["k"]),
                 widths, str(inp["n"]), str(inp["m1"]), r.branch, _fmt(r.value)]
        cells += [_fmt(v) for v in r.terms.values()]
        cells += [""] * (max_terms - len(r.terms))
        print(",".join(cells), file=out)


def _cmd_norm(args) -> int:
    net = load_network(args.net)
    ns = NormSpec(args.p, _parse_q(args.q))
    print("layer,norm")
    for i, value in enumerate(layer_norms(net, ns), start=1):
        print(f"{i},{_fmt(value)}")
    return 0


def _cmd_check(args) -> int:
    net = load_network(args.net)
    spec = _load_spec(args.spec_json)
    report = class_check(net, spec, tol=args.tol)
    print(f"dims_ok,{report.dims_ok}")
    print(f"depth_ok,{report.depth_ok}")
    print(f"hidden_norms_ok,{report.hidden_norms_ok}")
    print(f"output_norm_ok,{report.output_norm_ok}")
    print(f"norms,{';'.join(_fmt(v) for v in report.norms)}")
    print(f"passed,{report.passed}")
    if not report.passed:
        print(f"detail,{report.detail}")
        return 3
    return 0


def _cmd_canonicalize(args) -> int:
    net = load_network(args.net)
    ns = NormSpec(args.p, _parse_q(args.q))
    result, report = canonicalize(net, ns, args.c, args.c_out, tol=args.tol)
    save_network(result, args.out)
    print(f"scale_factors,{';'.join(_fmt(s) for s in report.scale_factors)}")
    print(f"norms,{';'.join(_fmt(v) for v in layer_norms(result, ns))}")
    if report.folded_constant is not None:
        print(f"folded_constant,{';'.join(_fmt(v) for v in report.folded_constant)}")
    return 0


def _cmd_compile(args) -> int:
    shallow = compiler.load_shallow(args.shallow)
    ns = NormSpec(args.p, _parse_q(args.q))
    net, plan = compiler.compile_to_depth(shallow, args.k, ns, args.c_out)
    save_network(net, args.out)
    print(f"widths,{';'.join(str(w) for w in plan.widths)}")
    print(f"width_cap_stated,{plan.width_cap_stated}")
    print(f"width_cap_proof,{plan.width_cap_proof}")
    if args.verify:
        rng = np.random.default_rng(args.seed)
        points = rng.uniform(-2.0, 2.0, size=(args.verify, shallow.input_dim))
        deviation = float(np.max(np.abs(evaluate(net, points)[:, 0] - shallow.evaluate(points))))
        print(f"max_deviation,{deviation:.6g}")
        if deviation > VERIFY_TOLERANCE:
            raise VerificationFailure(
                f"compiled network deviates by {deviation:.6g} > {VERIFY_TOLERANCE}"
            )
    return 0


def _cmd_bound(args) -> int:
    spec = _load_spec(args.spec_json)
    if args.sweep:
        reports = sweep(spec, args.n, _parse_sweep(args.sweep))
    else:
        reports = [bound_auto(spec, args.n)]
    _print_bound_rows(reports)
    return 0


def _cmd_gen_bound(args) -> int:
    spec = _load_spec(args.spec_json)
    reports = [generalization_bound(spec, args.n, args.delta)]
    if args.a0 is not None:
        reports.append(l1_corollary_bound(spec, args.n, args.delta, args.a0))
    _print_bound_rows(reports)
    return 0


def _cmd_approx(args) -> int:
    wid, k_max = approx_plan(args.m1, args.L, args.c_out, args.k, args.Cr)
    error = approx_error_bound(args.m1, args.L, args.c_out, args.C)
    print("wid_k,k_max,error_bound")
    print(f"{wid},{k_max},{_fmt(error)}")
    return 0


def _cmd_estimate(args) -> int:
    spec = _load_spec(args.spec_json)
    sample = _load_sample(args.sample)
    cfg = EstimateConfig(
        epsilon_draws=args.draws, restarts=args.restarts, steps=args.steps,
        step_size=args.step_size, step_decay=args.step_decay,
        decay_every=args.decay_every, seed=args.seed,
    )
    report = estimate.empirical_rademacher(spec, sample, cfg,
                                           compare_bound=args.compare_bound)
    print(json.dumps(report.to_json_dict(), indent=1))
    return 0


def _cmd_demo_motivating(args) -> int:
    table = motivating_table()
    print("x,f,f_rescaled,difference")
    for x, fx, gx, diff in table:
        print(f"{_fmt(x)},{_fmt(fx)},{_fmt(gx)},{_fmt(diff)}")
    worst = float(np.max(np.abs(table[:, 3] - 99.0)))
    f, f_prime = motivating_networks()
    ns = NormSpec(1, INF)
    prod = float(np.prod(layer_norms(f, ns)))
    prod_rescaled = float(np.prod(layer_norms(f_prime, ns)))
    print(f"max_offset_error,{worst:.6g}")
    print(f"norm_products,{_fmt(prod)};{_fmt(prod_rescaled)}")
    if worst > 1e-12 or abs(prod - prod_rescaled) > 1e-12 * prod:
        raise VerificationFailure("rescaling demo identities violated")
    return 0


def _cmd_demo_divergence(args) -> int:
    values = [float(v) for v in args.c0_list.split(",") if v.strip()]
    if not values:
        raise CliInputError("--c0-list must list at least one constant level")
    rows = estimate.divergence_table(values, args.gamma0, args.n, seed=args.seed,
                                     mc_draws=args.mc_draws)
    print("C0,witness,norm_product")
    for row in rows:
        print(f"{_fmt(row.value)},{_fmt(row.witness)},{_fmt(row.norm_product)}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="wnrelu", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="per-layer mixed norms of a network file")
    p.add_argument("--net", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", required=True)
    p.set_defaults(func=_cmd_norm)

    p = sub.add_parser("check", help="class membership report (exit 0 iff pass)")
    p.add_argument("--net", required=True)
    p.add_argument("--spec-json", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("canonicalize", help="rescale hidden layers to norm exactly c")
    p.add_argument("--net", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--c-out", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_canonicalize)

    p = sub.add_parser("compile", help="compile a shallow network to depth k")
    p.add_argument("--shallow", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", default="inf")
    p.add_argument("--c-out", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verify", type=int, default=0, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("bound", help="Rademacher upper bounds (CSV)")
    p.add_argument("--spec-json", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sweep", metavar="k=A..B[,step]")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("gen-bound", help="excess-risk bounds (CSV)")
    p.add_argument("--spec-json", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--a0", type=float, default=None)
    p.set_defaults(func=_cmd_gen_bound)

    p = sub.add_parser("approx", help="approximation width plan and error bound")
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--c-out", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--Cr", type=float, required=True)
    p.add_argument("--C", type=float, required=True)
    p.set_defaults(func=_cmd_approx)

    p = sub.add_parser("estimate", help="empirical Rademacher estimation (JSON)")
    p.add_argument("--spec-json", required=True)
    p.add_argument("--sample", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--draws", type=int, default=64)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--step-decay", type=float, default=0.5)
    p.add_argument("--decay-every", type=int, default=100)
    p.add_argument("--compare-bound", action="store_true")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("demo", help="built-in demonstrations")
    demo_sub = p.add_subparsers(dest="demo", required=True)
    d = demo_sub.add_parser("motivating", help="rescaling shifts the function, not the norms")
    d.set_defaults(func=_cmd_demo_motivating)
    d = demo_sub.add_parser("claim1", help="constant-class divergence table")
    d.add_argument("--gamma0", type=float, required=True)
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--c0-list", required=True)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--mc-draws", type=int, default=None)
    d.set_defaults(func=_cmd_demo_divergence)

    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NetworkFormatError, ShallowFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (BudgetExceededError, ConstantNotRepresentableError, CompileRangeError,
            CoefficientBudgetError, DegenerateUnitError, UnsupportedNormError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run(sys.argv[1:]))
