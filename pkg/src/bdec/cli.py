"""
Command-line entry point.

Machine-readable output (CSV or JSON) goes to stdout or ``--out``; a short
human summary goes to stderr. Failures print a single JSON line on stderr
and exit with 2 (invalid parameters), 3 (unrealizable code) or 4 (budget
exceeded).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import alloc, bounds, codes, gf2, harness
from .channels import ChannelParams
from .codes import LinearCode, PartitionedCode

EXIT_INVALID = 2
EXIT_UNREALIZABLE = 3
EXIT_BUDGET = 4

CODE_ALIASES = {
    "hamming74": {"family": "hamming74"},
    "hamming15": {"family": "bch", "m": 4, "t": 1},
    "bch1023": {"family": "bch", "m": 10, "t": 10},
}


class CliError(Exception):
    def __init__(self, kind: str, code: int, message: str, **extra):
        super().__init__(message)
        self.kind, self.code, self.extra = kind, code, extra


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("invalid_params", EXIT_INVALID, message)


# ---------------------------------------------------------------------------
# argument helpers


def _probability(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"probability {v} outside [0, 1]")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


def _pos_int(text: str) -> int:
    v = _nonneg_int(text)
    if v == 0:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _descriptor(text: str) -> dict:
    """Alias, inline JSON, or path to a JSON file."""
    if text in CODE_ALIASES:
        return dict(CODE_ALIASES[text])
    if text.lstrip().startswith("{"):
        return json.loads(text)
    path = Path(text)
    if path.is_file():
        return json.loads(path.read_text())
    raise argparse.ArgumentTypeError(
        f"unknown code {text!r}; use one of {sorted(CODE_ALIASES)}, a JSON object, or a JSON file"
    )


def _add_code_flags(p, need_l=True):
    p.add_argument("--code", type=_descriptor, help="alias, JSON descriptor, or JSON file")
    p.add_argument("--n", type=_pos_int)
    p.add_argument("--k", type=_nonneg_int)
    if need_l:
        p.add_argument("--l", type=_nonneg_int, default=None)


def _code_desc(args) -> dict:
    if args.code is not None:
        return args.code
    if args.n is None or args.k is None:
        raise CliError("invalid_params", EXIT_INVALID, "give --code or both --n and --k")
    return {"family": "pbch", "n": args.n, "k": args.k, "l": getattr(args, "l", None) or 0}


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _note(msg: str):
    print(msg, file=sys.stderr)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# subcommands


def cmd_code_info(args):
    code = codes.build_code(_code_desc(args))
    info = codes.describe(code)
    try:
        d = codes.minimum_distance(code)
        info["d_min"] = {"value": d.value, "how": d.how}
    except codes.BudgetExceeded:
        info["d_min"] = None
    if args.export_dir:
        out = Path(args.export_dir)
        out.mkdir(parents=True, exist_ok=True)
        mats = (
            {"G1": code.G1, "G0": code.G0, "H0": code.H0, "Htilde": code.Htilde}
            if isinstance(code, PartitionedCode)
            else {"G": code.G, "H": code.H}
        )
        for name, M in mats.items():
            gf2.save_matrix(out / f"{name}.txt", M)
        info["exported"] = sorted(mats)
    _emit(json.dumps(info, indent=2, sort_keys=True) + "\n", args.out)
    _note(f"{info.get('family')} n={code.n} k={code.k}")


def _profile_inputs(args, n, k, channel):
    """(distance, weight distribution) for the per-count profile."""
    if args.code is not None:
        code = codes.build_code(args.code)
        if channel == "bec":
            lin = code if isinstance(code, LinearCode) else LinearCode(code.G1, code.Htilde, code.name)
            d = codes.minimum_distance(lin).value
            redundancy = lin.n - lin.k
            if args.weights == "exact":
                if lin.k > codes.ENUMERATION_BUDGET:
                    raise codes.BudgetExceeded(f"exact weights need k <= {codes.ENUMERATION_BUDGET}")
                return d, codes.weight_distribution_exact(lin.G)
            return d, codes.weight_distribution_binomial(lin.n, redundancy)
        if not isinstance(code, PartitionedCode):
            raise codes.UnrealizableCode("defect profile needs a partitioned code")
        d = codes.minimum_distance(code).value
        if args.weights == "exact":
            inner = code.n - code.l
            if inner > codes.ENUMERATION_BUDGET:
                raise codes.BudgetExceeded(f"exact weights need n - l <= {codes.ENUMERATION_BUDGET}")
            return d, codes.weight_distribution_exact(gf2.null_space(code.G0.T))
        return d, codes.weight_distribution_binomial(code.n, code.l)
    if args.weights == "exact":
        raise CliError("invalid_params", EXIT_INVALID, "--weights exact needs --code")
    red = n - k
    if channel == "bec":
        try:
            d = codes.pbch_distances(n, k, 0)["d1"]
        except (codes.UnrealizableCode, ValueError):
            d = 1
    else:
        try:
            d = codes.pbch_distances(n, 0, red)["d0"] if red else 0
        except (codes.UnrealizableCode, ValueError):
            d = 1
    return d, codes.weight_distribution_binomial(n, red)


def cmd_bound(args):
    ch = args.channel
    if args.code is not None:
        c = codes.build_code(args.code)
        n, k = c.n, c.k
        l_def = c.l if isinstance(c, PartitionedCode) else 0
    else:
        if args.n is None or args.k is None:
            raise CliError("invalid_params", EXIT_INVALID, "give --code or both --n and --k")
        n, k, l_def = args.n, args.k, None
    if k > n:
        raise CliError("invalid_params", EXIT_INVALID, f"need k <= n, got k={k}, n={n}")
    if args.profile and ch == "bdec":
        raise CliError("invalid_params", EXIT_INVALID, "--profile applies to bec and bdc only")
    red = n - k
    alpha, beta = args.alpha, args.beta
    ChannelParams(alpha, beta)
    if ch == "bec":
        if beta:
            raise CliError("invalid_params", EXIT_INVALID, "erasure channel takes no --beta")
        l, r = 0, red  # noqa: E741
    elif ch == "bdc":
        if alpha:
            raise CliError("invalid_params", EXIT_INVALID, "defect channel takes no --alpha")
        l, r = red, 0  # noqa: E741
    else:
        l = args.l if args.l is not None else l_def  # noqa: E741
        r = args.r if args.r is not None else (red - l if l is not None else None)
        if l is None:
            l = red - r if r is not None else None  # noqa: E741
        if l is None or r is None:
            raise CliError("invalid_params", EXIT_INVALID, "combined channel needs --l or --r")
        if l + r != red:
            raise CliError("invalid_params", EXIT_INVALID, f"need l + r = n - k = {red}, got {l} + {r}")

    head = ["channel", "n", "k", "l", "r", "alpha", "beta", "e_or_u", "kind", "value"]
    base = [ch, n, k, l, r, alpha, beta]
    rows = []
    if ch == "bdec":
        fb = bounds.bdec_finite_bound(n, k, l, r, alpha, beta)
        rows.append(base + ["", "Finite", _fmt(fb.value)])
        rows.append(base + ["", "FiniteClamped", _fmt(fb.clamped)])
        rows.append(base + ["", "MaskingTerm", _fmt(fb.masking_term)])
        rows.append(base + ["", "ErasureTerm", _fmt(fb.erasure_term)])
        summary = f"bound={fb.value:.6g}"
    else:
        value = bounds.bec_finite_bound(n, r, alpha) if ch == "bec" else bounds.bdc_finite_bound(n, l, beta)
        p = alpha if ch == "bec" else beta
        rows.append(base + ["", "Finite", _fmt(value)])
        rows.append(base + ["", "FiniteClamped", _fmt(min(1.0, value))])
        log2_form = bounds.bec_log2_bound if ch == "bec" else bounds.bdc_log2_bound
        rows.append(base + ["", "Log2Form", _fmt(log2_form(n, k / n, p))])
        summary = f"bound={value:.6g}"
        if args.profile:
            d, wd = _profile_inputs(args, n, k, ch)
            prof = bounds.bec_failure_profile if ch == "bec" else bounds.bdc_failure_profile
            for e in range(n + 1):
                bv = prof(n, wd, d, e)
                rows.append(base + [e, bv.kind.value, _fmt(bv.value)])
    _emit(_csv(rows, head), args.out)
    _note(summary)


def cmd_allocate(args):
    if args.k > args.n:
        raise CliError("invalid_params", EXIT_INVALID, f"need k <= n, got k={args.k}, n={args.n}")
    ChannelParams(args.alpha, args.beta)
    if args.candidates == "table":
        if (args.n, args.k) != (1023, 923):
            raise CliError("invalid_params", EXIT_INVALID, "the candidate table is for n=1023, k=923")
        cands = alloc.candidate_table_1023()
    elif args.candidates == "integer":
        cands = alloc.integer_candidates(args.n, args.k)
    else:
        cands = None
    sol = alloc.allocate(args.n, args.k, args.alpha, args.beta, cands)
    summary = _csv(
        [[args.n, args.k, args.alpha, args.beta, sol.l_hat, sol.r_hat,
          f"{sol.l_tilde:.4f}", f"{sol.r_tilde:.4f}", sol.regime.value]],
        ["n", "k", "alpha", "beta", "l_hat", "r_hat", "l_tilde", "r_tilde", "regime"],
    )
    table = _csv(
        [[c.l, c.r, "" if c.d0 is None else c.d0, "" if c.d1 is None else c.d1,
          _fmt(c.objective), _fmt(2.0**c.objective if c.objective < 1024 else float("inf"))]
         for c in sol.candidates],
        ["l", "r", "d0", "d1", "log2_objective", "objective"],
    )
    _emit(summary + "\n" + table, args.out)
    _note(f"l_hat={sol.l_hat} r_hat={sol.r_hat} l_tilde={sol.l_tilde:.1f} "
          f"r_tilde={sol.r_tilde:.1f} regime={sol.regime.value}")


def _sim_config(args) -> harness.ExperimentConfig:
    fields = {}
    if args.config:
        path = Path(args.config)
        fields.update(json.loads(path.read_text() if path.is_file() else args.config))
    for key in ("channel", "alpha", "beta", "trials", "encoder", "decoder"):
        v = getattr(args, key)
        if v is not None:
            fields[key] = v
    if args.code is not None or args.n is not None:
        fields["code"] = _code_desc(args)
    fields["seed"] = args.seed
    fields["workers"] = args.workers
    fields["output"] = args.out
    if "channel" not in fields or "code" not in fields:
        raise CliError("invalid_params", EXIT_INVALID, "simulate needs a channel and a code")
    try:
        return harness.ExperimentConfig(**fields)
    except TypeError as exc:
        raise CliError("invalid_params", EXIT_INVALID, str(exc)) from None


def cmd_simulate(args):
    cfg = _sim_config(args)
    res = harness.run_trials(cfg)
    run_id = args.run_id or f"{cfg.channel}-n{res.n}-k{res.k}-l{res.l}-s{cfg.seed}"
    _emit(harness.write_results_csv([res.row(run_id)]), args.out)
    _note(f"p_hat={res.p_hat['msg']:.6g} fail_M={res.failures_M} fail_D={res.failures_D} "
          f"trials={res.trials} bound={res.bound:.6g} wall={res.wall_time:.2f}s")


def cmd_oracle(args):
    desc = _code_desc(args)
    code = codes.build_code(desc)
    ch = args.channel
    if ch == "bec" and isinstance(code, PartitionedCode):
        if code.l:
            raise codes.UnrealizableCode("erasure channel needs a code without masking parity")
        code = LinearCode(code.G1, code.Htilde, code.name)
    if ch != "bec" and isinstance(code, LinearCode):
        code = codes.masking_dual_of(code) if ch == "bdc" else None
        if code is None:
            raise codes.UnrealizableCode("combined channel needs a partitioned code")
    params = ChannelParams(args.alpha, args.beta)
    res = harness.exact_failure_small(code, ch, params, stuck_values=args.stuck_values)
    rows = [
        ["P(D=0)", "", _fmt(res.p_D)],
        ["P(M=0)", "", _fmt(res.p_M)],
        ["P(msg)", "", _fmt(res.p_msg)],
    ]
    label = "P(D=0|e)" if ch == "bec" else "P(M=0|u)"
    rows += [[label, e, _fmt(v)] for e, v in sorted(res.conditional.items())]
    _emit(_csv(rows, ["quantity", "e_or_u", "value"]), args.out)
    _note(f"P(D=0)={res.p_D:.12g} P(M=0)={res.p_M:.12g}")


def cmd_duality(args):
    sizes = args.sizes.split(",")
    bad = [s for s in sizes if s not in harness.DUALITY_CODES]
    if bad:
        raise CliError("invalid_params", EXIT_INVALID, f"unknown sizes {bad}; choose from {sorted(harness.DUALITY_CODES)}")
    rows = []
    for r in harness.duality_check(sizes, p=args.p, trials=args.trials, seed=args.seed, workers=args.workers):
        ci_d = (_fmt(r.ci_decode.lo), _fmt(r.ci_decode.hi)) if r.ci_decode else ("", "")
        ci_m = (_fmt(r.ci_mask.lo), _fmt(r.ci_mask.hi)) if r.ci_mask else ("", "")
        rows.append([r.name, r.n, r.k, r.p, r.method, _fmt(r.p_decode_fail), _fmt(r.p_mask_fail),
                     *ci_d, *ci_m, int(r.agree)])
    head = ["name", "n", "k", "p", "method", "p_decode_fail", "p_mask_fail",
            "decode_ci_lo", "decode_ci_hi", "mask_ci_lo", "mask_ci_hi", "agree"]
    _emit(_csv(rows, head), args.out)
    _note(f"agree={all(r[-1] for r in rows)}")


def cmd_reproduce(args):
    bundle = harness.reproduce_tables(trials=args.trials, seed=args.seed, workers=args.workers)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in bundle.items():
            (out / f"{name}.csv").write_text(text)
        _note(f"wrote {', '.join(sorted(bundle))} to {out}")
        return
    _emit("\n".join(f"# {name}\n{text}" for name, text in bundle.items()), args.out)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bdec", description="Erasure, defect and combined channel coding toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    default_workers = os.cpu_count() or 1

    s = sub.add_parser("code-info", help="build a code and print its descriptor")
    _add_code_flags(s)
    s.add_argument("--export-dir", help="write matrices in text format to this directory")
    s.add_argument("--out")
    s.set_defaults(func=cmd_code_info)

    s = sub.add_parser("bound", help="closed-form bounds as CSV")
    s.add_argument("--channel", choices=harness.CHANNELS, required=True)
    _add_code_flags(s)
    s.add_argument("--r", type=_nonneg_int)
    s.add_argument("--alpha", type=_probability, default=0.0)
    s.add_argument("--beta", type=_probability, default=0.0)
    s.add_argument("--profile", action="store_true", help="add per-count failure rows")
    s.add_argument("--weights", choices=("binomial", "exact"), default="binomial")
    s.add_argument("--out")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("allocate", help="split parity between masking and erasure correction")
    s.add_argument("--n", type=_pos_int, required=True)
    s.add_argument("--k", type=_nonneg_int, required=True)
    s.add_argument("--alpha", type=_probability, required=True)
    s.add_argument("--beta", type=_probability, required=True)
    s.add_argument("--candidates", choices=("auto", "table", "integer"), default="auto")
    s.add_argument("--out")
    s.set_defaults(func=cmd_allocate)

    s = sub.add_parser("simulate", help="Monte-Carlo run; results CSV")
    s.add_argument("--config", help="JSON config (file or inline); flags override it")
    s.add_argument("--channel", choices=harness.CHANNELS)
    _add_code_flags(s)
    s.add_argument("--alpha", type=_probability)
    s.add_argument("--beta", type=_probability)
    s.add_argument("--trials", type=_nonneg_int)
    s.add_argument("--encoder", choices=("additive", "binning"))
    s.add_argument("--decoder", choices=("H", "G"))
    s.add_argument("--seed", type=_nonneg_int, required=True)
    s.add_argument("--workers", type=_pos_int, default=default_workers)
    s.add_argument("--run-id")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("oracle", help="exact failure probabilities by enumeration")
    s.add_argument("--channel", choices=harness.CHANNELS, required=True)
    _add_code_flags(s)
    s.add_argument("--alpha", type=_probability, default=0.0)
    s.add_argument("--beta", type=_probability, default=0.0)
    s.add_argument("--stuck-values", choices=("auto", "enumerate", "analytic"), default="auto")
    s.add_argument("--out")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("duality", help="erasure decoding vs matched defect masking")
    s.add_argument("--sizes", default="hamming74,hamming15")
    s.add_argument("--p", type=_probability, default=0.1)
    s.add_argument("--trials", type=_nonneg_int, default=100_000)
    s.add_argument("--seed", type=_nonneg_int, required=True)
    s.add_argument("--workers", type=_pos_int, default=default_workers)
    s.add_argument("--out")
    s.set_defaults(func=cmd_duality)

    s = sub.add_parser("reproduce", help="allocation study tables as CSV")
    s.add_argument("--trials", type=_nonneg_int, default=0, help="simulated points per candidate (0 skips)")
    s.add_argument("--seed", type=_nonneg_int, required=True)
    s.add_argument("--workers", type=_pos_int, default=default_workers)
    s.add_argument("--out-dir")
    s.add_argument("--out")
    s.set_defaults(func=cmd_reproduce)
    return p


def _fail(kind: str, code: int, message: str, **extra) -> int:
    print(json.dumps({"error": kind, "exit": code, "message": message, **extra}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except CliError as exc:
        return _fail(exc.kind, exc.code, str(exc), **exc.extra)
    except codes.UnrealizableCode as exc:
        extra = {"nearest": exc.nearest} if getattr(exc, "nearest", None) else {}
        return _fail("unrealizable_code", EXIT_UNREALIZABLE, str(exc), **extra)
    except codes.BudgetExceeded as exc:
        return _fail("budget_exceeded", EXIT_BUDGET, str(exc))
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail("invalid_params", EXIT_INVALID, str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
