"""``maccoop`` command-line entry point.

Every command prints one canonical JSON report (sorted keys, floats with 12
significant digits) or, for plot data, CSV.  Exit codes: 0 success,
1 validation error, 2 certificate failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .blockperm import ZeroOneMatrix, find_permutations, verify_permutations
from .capacity import (
    OptimizerConfig,
    SupportCurve,
    conferencing_calpha,
    continuity_checks,
    dueck_gap_report,
    dueck_witness,
    mac_avg_calpha,
    region_from_support,
)
from .channel import DEFAULT_MAX_LOG_SIZE, DiscreteMAC, SizeLimitError, binary_adder_mac, contraction_mac, extend
from .code import CooperationCode, ExactBudgetError, avg_error, blockwise_error, error_matrix, max_error
from .transform import (
    UncertifiedPlanError,
    apply_prop3,
    apply_theorem1,
    plan_prop3,
    plan_theorem1,
    verify_transform,
)

EXIT_OK, EXIT_INVALID, EXIT_CERT, EXIT_USAGE = 0, 1, 2, 64
BUILTIN_CHANNELS = {"contraction": contraction_mac, "adder": binary_adder_mac}


class UsageError(Exception):
    pass


class CertificateFailure(Exception):
    def __init__(self, result):
        super().__init__("certificate failure")
        self.result = result


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    seed: int
    tol: float
    max_log_y: float
    optimizer: OptimizerConfig
    fmt: str = "json"

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "tol": self.tol,
            "max_log_y": self.max_log_y,
            "optimizer": self.optimizer.to_dict(),
        }


# ---------------------------------------------------------------- output


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _canonical(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        x = float(format(x, ".12g"))
        return 0.0 if x == 0 else x
    return obj


def dumps(obj) -> str:
    return json.dumps(_canonical(obj), sort_keys=True, indent=2) + "\n"


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- inputs


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path} is not valid JSON: {exc}") from None


def load_channel(spec: str) -> DiscreteMAC:
    if spec in BUILTIN_CHANNELS:
        return BUILTIN_CHANNELS[spec]()
    return DiscreteMAC.from_dict(_load_json(spec))


def load_code(path: str) -> CooperationCode:
    return CooperationCode.from_dict(_load_json(path))


def load_matrix(path: str) -> ZeroOneMatrix:
    data = _load_json(path)
    if isinstance(data, dict):
        data = data.get("matrix", data.get("rows"))
    if data is None:
        raise ValueError("matrix file needs a list of 0/1 rows")
    return ZeroOneMatrix(np.array(data))


def parse_alphas(text: str) -> list[float]:
    """``"0:1:0.05"`` (inclusive of the stop) or a comma list ``"0,0.5,1"``."""
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            vals = [round(start + i * step, 12) for i in range(count)]
        else:
            vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse alpha list {text!r}") from None
    if not vals or any(not 0 <= a <= 1 for a in vals):
        raise UsageError("alphas must lie in [0, 1]")
    return vals


def _seeds_for(spec: str, alpha: float):
    return [dueck_witness(alpha)] if spec == "contraction" else []


# ---------------------------------------------------------------- commands


def cmd_channel_info(args, cfg):
    mac = load_channel(args.channel)
    return {
        "shape": list(mac.shape),
        "deterministic": mac.is_deterministic,
        "x1": [str(v) for v in mac.x1],
        "x2": [str(v) for v in mac.x2],
        "y": [str(v) for v in mac.y],
    }


def cmd_channel_extend(args, cfg):
    mac = load_channel(args.channel)
    ext = extend(mac, args.n, cfg.max_log_y)
    if args.out:
        Path(args.out).write_text(dumps(ext.to_dict()))
    return {"n": args.n, "shape": list(ext.shape), "deterministic": ext.is_deterministic, "out": args.out}


def cmd_code_eval(args, cfg):
    mac = load_channel(args.channel)
    code = load_code(args.code)
    em = error_matrix(code, mac, max_log_size=cfg.max_log_y, workers=args.workers)
    mode = "exact" if args.exact else "heuristic"
    bw = blockwise_error(em, args.r1, args.r2, code.n, mode=mode, budget=args.budget, seed=cfg.seed)
    return {
        "n": code.n,
        "messages": list(code.messages),
        "rates": list(code.rates()),
        "avg": avg_error(em),
        "max": max_error(em),
        "blockwise": bw.to_dict(),
        "certificates": [bw.bound_kind],
    }


def cmd_perm_search(args, cfg):
    a = load_matrix(args.matrix)
    res = find_permutations(a, args.k, budget=args.budget, seed=cfg.seed)
    status = "pass" if res.found and verify_permutations(a, args.k, res.perm1, res.perm2) is None else "fail"
    out = {**res.to_dict(), "k": args.k, "shape": [a.rows, a.cols], "ones": a.ones_count,
           "verification": status, "certificates": [res.certificate]}
    if status != "pass":
        raise CertificateFailure(out)
    return out


def cmd_transform_thm1(args, cfg):
    mac = load_channel(args.channel)
    code = load_code(args.code)
    k_star = args.k_star if args.k_star in ("adaptive", "measured") else int(args.k_star)
    try:
        plan = plan_theorem1(
            code, mac, args.r1, args.r2, args.delta, k_star=k_star, budget=args.budget,
            seed=cfg.seed, max_log_size=cfg.max_log_y, workers=args.workers,
        )
    except UncertifiedPlanError as exc:
        raise CertificateFailure({"error": str(exc), "best_attempt": exc.attempt,
                                  "certificates": ["uncertified"]}) from None
    new = apply_theorem1(plan, code, single_round=True if args.single_round else None)
    report = verify_transform(code, new, mac, args.r1, args.r2, plan=plan, delta=args.delta,
                              max_log_size=cfg.max_log_y, workers=args.workers)
    if args.out:
        Path(args.out).write_text(dumps(new.to_dict()))
    out = {"plan": plan.to_dict(), "verification": report, "out": args.out,
           "certificates": [plan.certificate, report["certificate"]["status"]]}
    if report["certificate"]["status"] != "pass":
        raise CertificateFailure(out)
    return out


def cmd_transform_prop3(args, cfg):
    mac = load_channel(args.channel)
    code = load_code(args.code)
    plan = plan_prop3(code, mac, args.c12, args.c21, max_log_size=cfg.max_log_y, workers=args.workers)
    new = apply_prop3(plan, code)
    report = verify_transform(code, new, mac, args.c12, args.c21, plan=plan,
                              max_log_size=cfg.max_log_y, workers=args.workers)
    if args.out:
        Path(args.out).write_text(dumps(new.to_dict()))
    out = {"plan": plan.to_dict(), "verification": report, "out": args.out,
           "certificates": [report["certificate"]["status"]]}
    if report["certificate"]["status"] != "pass":
        raise CertificateFailure(out)
    return out


def _calpha(spec, mac, alpha, args, cfg):
    if args.conf is not None:
        c12, c21 = args.conf
        return conferencing_calpha(mac, c12, c21, alpha, args.ucard, cfg.optimizer, full=True)
    return mac_avg_calpha(mac, alpha, cfg.optimizer, seeds=_seeds_for(spec, alpha), full=True)


def cmd_capacity_calpha(args, cfg):
    mac = load_channel(args.channel)
    res = _calpha(args.channel, mac, args.alpha, args, cfg)
    out = {"alpha": args.alpha, **res.to_dict(), "certificates": [res.bound_kind]}
    if args.conf is not None:
        out.update({"c12": args.conf[0], "c21": args.conf[1], "u_cardinality": args.ucard})
    return out


def cmd_capacity_dueck(args, cfg):
    rows = dueck_gap_report(parse_alphas(args.alphas))
    if cfg.fmt == "csv":
        return _csv([["alpha", "pstar", "avg_lower", "max_upper", "gap"]]
                    + [[r["alpha"], r["pstar"], r["avg_lower"], r["max_upper"], r["gap"]] for r in rows])
    return {"rows": rows, "certificates": ["exact"]}


def cmd_capacity_region(args, cfg):
    mac = load_channel(args.channel)
    alphas = parse_alphas(args.alphas)
    vals = [_calpha(args.channel, mac, a, args, cfg).value for a in alphas]
    curve = SupportCurve(alphas, vals)
    region = region_from_support(curve)
    if cfg.fmt == "csv":
        rows = [["alpha", "c_alpha"]] + [[a, v] for a, v in curve.rows()]
        rows += [[], ["vertex_x", "vertex_y"]] + [[float(x), float(y)] for x, y in region.vertices]
        return _csv(rows)
    return {
        "curve": [{"alpha": a, "c_alpha": v} for a, v in curve.rows()],
        "vertices": region.vertices.tolist(),
        "certificates": ["lower_bound"],
    }


def cmd_capacity_continuity(args, cfg):
    mac = load_channel(args.channel)
    levels = [float(t) for t in args.levels.split(",")]
    grid = [(a, b) for a in levels for b in levels]
    rep = continuity_checks(mac, grid, args.alpha, u_cardinality=args.ucard, config=cfg.optimizer, tau=cfg.tol)
    rep["certificates"] = ["lower_bound"]
    if not rep["all_hold"]:
        raise CertificateFailure(rep)
    return rep


# ---------------------------------------------------------------- parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run configuration")
    g.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    g.add_argument("--tol", type=float, default=0.02, help="tolerance tau for optimizer comparisons")
    g.add_argument("--max-log-y", type=float, default=DEFAULT_MAX_LOG_SIZE,
                   help="guard on n*log2|Y| for exact enumeration (default 24)")
    g.add_argument("--workers", type=int, default=None, help="worker threads (capped by MACCOOP_THREADS)")
    g.add_argument("--grid", type=int, default=21, help="line-search points per coordinate")
    g.add_argument("--sweeps", type=int, default=8, help="coordinate-ascent sweeps")
    g.add_argument("--restarts", type=int, default=16, help="random restarts")
    g.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="maccoop", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"maccoop {__version__}")
    top = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def leaf(sub, name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(fn=fn, command=name)
        return p

    ch = top.add_parser("channel", help="inspect or extend a channel").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    p = leaf(ch, "info", cmd_channel_info, "alphabet sizes and determinism of a channel")
    p.add_argument("--channel", required=True, help="JSON file or builtin name (contraction, adder)")
    p = leaf(ch, "extend", cmd_channel_extend, "build the n-th memoryless extension")
    p.add_argument("--channel", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", help="write the extended channel to this JSON file")

    co = top.add_parser("code", help="evaluate codes").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = leaf(co, "eval", cmd_code_eval, "average, maximal and (r1,r2) error of a code")
    p.add_argument("--channel", required=True)
    p.add_argument("--code", required=True)
    p.add_argument("--r1", type=float, default=0.0)
    p.add_argument("--r2", type=float, default=0.0)
    p.add_argument("--exact", action="store_true", help="exact minimum over permutations")
    p.add_argument("--budget", type=int, default=200, help="heuristic restarts")

    pe = top.add_parser("perm", help="block-zero permutations").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    p = leaf(pe, "search", cmd_perm_search, "find permutations with a zero in every k x k block")
    p.add_argument("--matrix", required=True, help="JSON list of 0/1 rows")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--budget", type=int, default=10_000)

    tr = top.add_parser("transform", help="code transformations").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    p = leaf(tr, "thm1", cmd_transform_thm1, "average-error code to (r1,r2)-error code with one more round")
    p.add_argument("--channel", required=True)
    p.add_argument("--code", required=True)
    p.add_argument("--r1", type=float, required=True)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--k-star", default="adaptive", help="adaptive, measured, or an integer")
    p.add_argument("--single-round", action="store_true")
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--out", help="write the transformed code to this JSON file")
    p = leaf(tr, "prop3", cmd_transform_prop3, "best-quarter selection for a conferencing code")
    p.add_argument("--channel", required=True)
    p.add_argument("--code", required=True)
    p.add_argument("--c12", type=float, required=True)
    p.add_argument("--c21", type=float, required=True)
    p.add_argument("--out")

    ca = top.add_parser("capacity", help="support functions and bounds").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    p = leaf(ca, "calpha", cmd_capacity_calpha, "best found C^alpha (a lower bound)")
    p.add_argument("--channel", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--conf", type=float, nargs=2, metavar=("C12", "C21"))
    p.add_argument("--ucard", type=int, default=4)
    p = leaf(ca, "dueck", cmd_capacity_dueck, "closed-form bounds for the contraction MAC")
    p.add_argument("--alphas", default="0:1:0.05")
    p.add_argument("--out", choices=("json", "csv"), dest="fmt_out")
    p = leaf(ca, "region", cmd_capacity_region, "support curve and reconstructed region")
    p.add_argument("--channel", required=True)
    p.add_argument("--alphas", default="0:1:0.05")
    p.add_argument("--conf", type=float, nargs=2, metavar=("C12", "C21"))
    p.add_argument("--ucard", type=int, default=4)
    p.add_argument("--out", choices=("json", "csv"), dest="fmt_out")
    p = leaf(ca, "continuity", cmd_capacity_continuity, "conferencing continuity inequalities on a grid")
    p.add_argument("--channel", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--levels", default="0,0.25,0.5", help="comma list of link capacities")
    p.add_argument("--ucard", type=int, default=4)
    return parser


def _report(args, cfg, status, payload) -> dict:
    return {
        "tool": "maccoop",
        "version": __version__,
        "command": f"{args.group} {args.command}",
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "status": status,
        "result": payload,
    }


def main(argv=None, stdout=None) -> int:
    out = stdout if stdout is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.tol <= 0:
            raise UsageError("--tol must be positive")
        fmt = getattr(args, "fmt_out", None) or args.fmt
        cfg = RunConfig(
            seed=args.seed, tol=args.tol, max_log_y=args.max_log_y, fmt=fmt,
            optimizer=OptimizerConfig(args.grid, args.sweeps, args.restarts, args.seed, args.workers),
        )
    except UsageError as exc:
        sys.stderr.write(f"maccoop: error: {exc}\n")
        return EXIT_USAGE
    try:
        payload = args.fn(args, cfg)
        status, code = "ok", EXIT_OK
    except UsageError as exc:
        sys.stderr.write(f"maccoop: error: {exc}\n")
        return EXIT_USAGE
    except CertificateFailure as exc:
        payload, status, code = exc.result, "certificate_failure", EXIT_CERT
    except (ValueError, SizeLimitError, ExactBudgetError) as exc:
        payload, status, code = {"error": str(exc)}, "invalid", EXIT_INVALID
    if isinstance(payload, str):
        header = json.dumps(_canonical(_report(args, cfg, status, None)), sort_keys=True)
        out.write(f"# {header}\n{payload}")
    else:
        out.write(dumps(_report(args, cfg, status, payload)))
    return code


if __name__ == "__main__":
    sys.exit(main())
