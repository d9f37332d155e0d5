"""Command-line entry point: ``frametop <subcommand> [options]``.

Exit codes: 0 on success, 2 on domain errors (bad input, infeasible requests,
failed acceptance), 1 on internal errors. Errors are reported on standard
error as a JSON object.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import BACKEND, __version__
from . import acceptance as acc
from . import io
from .config import RunConfig, default_seed, parse_seed
from .errors import FrametopError, ParseError
from .flow import energy, retract_to_level
from .hermitian import check_frame, factor_projection, gram_projection, projection_rank
from .homotopy import (
    connect_frames,
    contract_loop,
    random_level_loop,
    torus_windings,
    winding_cp1,
)
from .polytope import in_polytope, infer_rank, min_subset_sum, norm_vector, satisfies_hypothesis
from .rng import derive_rng
from .schur_horn import construct_frame, verify_membership
from .strata import enumerate_strata


def _global_flags(parser, suppress: bool):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=parse_seed, default=default(None),
                        help="64-bit run seed (default: $FRAMETOP_SEED or 0)")
    parser.add_argument("--tol-alg", type=float, default=default(1e-9))
    parser.add_argument("--f-tol", type=float, default=default(1e-12))
    parser.add_argument("--grad-tol", type=float, default=default(1e-9))
    parser.add_argument("--out-dir", default=default("."))
    parser.add_argument("--jobs", type=int, default=default(1))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frametop", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"frametop {__version__} ({BACKEND} kernels)")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="build a frame with prescribed column norms")
    p.add_argument("--d", required=True, help="norm vector: JSON file, inline JSON, or comma-separated")
    p.add_argument("--k", type=int)
    p.add_argument("--out", help="output path (default: <out-dir>/frame.json)")

    p = sub.add_parser("check", parents=[common], help="polytope membership and the subset-sum hypothesis")
    p.add_argument("--d", required=True)
    p.add_argument("--k", type=int)

    p = sub.add_parser("strata", parents=[common], help="enumerate critical strata of |mu - d|^2")
    p.add_argument("--d", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--max-n", type=int, default=9)
    p.add_argument("--out", help="CSV path (default: <out-dir>/strata.csv)")

    p = sub.add_parser("retract", parents=[common], help="flow a frame or projection to the level set")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--frame", help="frame JSON")
    src.add_argument("--projection", help="projection matrix JSON")
    p.add_argument("--d", required=True)
    p.add_argument("--step0", type=float, default=0.5)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--out", help="result JSON (default: <out-dir>/retract.json); trace goes next to it")

    p = sub.add_parser("connect", parents=[common], help="path between two frames with the same norms")
    p.add_argument("--f0", required=True)
    p.add_argument("--f1", required=True)
    p.add_argument("--d", required=True)
    p.add_argument("--out", help="path JSON (default: <out-dir>/connect.json)")

    p = sub.add_parser("contract-loop", parents=[common], help="contract a loop in the level set")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--loop", help="loop JSON {d, samples}")
    src.add_argument("--random", metavar="D", help="generate a seeded random loop in the level set of D")
    p.add_argument("--radius", type=float, default=0.2)
    p.add_argument("--S", type=int, default=32)
    p.add_argument("--T", type=int, default=32)
    p.add_argument("--out", help="report JSON (default: <out-dir>/contract.json)")

    p = sub.add_parser("winding", parents=[common], help="winding invariants of loops in small fibers")
    p.add_argument("--loop", required=True)
    p.add_argument("--mode", choices=["cp1", "torus", "ex53"], required=True,
                   help="cp1: relative phase of 1 x 2 frames; torus (alias ex53): the 2-torus fiber in C^4")

    p = sub.add_parser("acceptance", parents=[common], help="run the acceptance suite")
    p.add_argument("--only", action="append", help="criterion numbers or names (repeatable, comma-separated)")
    return parser


def _config(args, **extra) -> RunConfig:
    seed = default_seed() if args.seed is None else args.seed
    return RunConfig(seed=seed, tol_alg=args.tol_alg, f_tol=args.f_tol, grad_tol=args.grad_tol,
                     out_dir=args.out_dir, jobs=args.jobs, **extra)


def _out(cfg: RunConfig, explicit, default_name) -> Path:
    return Path(explicit) if explicit else Path(cfg.out_dir) / default_name


def _emit(obj):
    sys.stdout.write(io.dumps(obj))


def _load_d(text, k=None):
    d, k_file = io.parse_d(text)
    return d, k if k is not None else k_file


def cmd_construct(args) -> int:
    cfg = _config(args)
    d, k = _load_d(args.d, args.k)
    d, k = norm_vector(d, k, cfg.tol_poly)
    F = construct_frame(d, derive_rng(cfg.seed, "construct"), k)
    report = verify_membership(F, d, cfg.tol_alg)
    prov = io.provenance("construct", cfg.seed, cfg.to_dict())
    path = io.write_json(_out(cfg, args.out, "frame.json"), io.frame_to_json(F), prov)
    _emit({"out": str(path), "membership": report.to_dict()})
    return 0 if report.passed else 2


def cmd_check(args) -> int:
    cfg = _config(args)
    d, k = _load_d(args.d, args.k)
    if k is None:
        k = infer_rank(d)
    inside = in_polytope(d, k, cfg.tol_poly)
    _emit({
        "in_polytope": inside,
        "satisfies_hypothesis": bool(inside and satisfies_hypothesis(d, k, cfg.tol_poly)),
        "n": len(d),
        "k": k,
        "min_subset_sum": min_subset_sum(d, k) if 0 <= k <= len(d) else None,
    })
    return 0


def _joined(values, sep=";"):
    return sep.join(io.fmt(v) for v in values)


def cmd_strata(args) -> int:
    cfg = _config(args)
    d, k = _load_d(args.d, args.k)
    strata = enumerate_strata(d, k, args.max_n)
    rows = [(
        ";".join(" ".join(str(j + 1) for j in blk) for blk in s.blocks),
        _joined(s.capacities), _joined(s.levels), _joined(s.a), s.codim_complex, s.energy_level,
    ) for s in strata]
    prov = io.provenance("strata", cfg.seed, {**cfg.to_dict(), "d": d.tolist(), "max_n": args.max_n})
    path = io.write_csv(_out(cfg, args.out, "strata.csv"),
                        ["blocks", "capacities", "alphas", "a", "codim_complex", "energy_level"], rows, prov)
    positive = [s.codim_complex for s in strata if not s.is_minimum]
    _emit({"out": str(path), "strata": len(strata), "min_positive_codim": min(positive) if positive else None})
    return 0


def cmd_retract(args) -> int:
    cfg = _config(args)
    d, _ = _load_d(args.d)
    if args.frame:
        P = gram_projection(check_frame(io.read_frame(args.frame), cfg.tol_alg), cfg.tol_alg)
    else:
        P = io.matrix_from_json(io.read_json(args.projection))
        projection_rank(P, cfg.tol_alg)
    flow = cfg.flow(step0=args.step0, max_iter=args.max_iter)
    Q, trace = retract_to_level(P, d, flow)
    prov = io.provenance("retract", cfg.seed, {**cfg.to_dict(), "step0": args.step0, "max_iter": args.max_iter})
    out = _out(cfg, args.out, "retract.json")
    trace_path = io.write_csv(out.with_suffix(".trace.csv"), ["iter", "f", "gradnorm", "step"], trace.rows(), prov)
    result = {
        "outcome": trace.outcome.value,
        "shift": None if trace.shift is None else trace.shift.tolist(),
        "iterations": trace.iterations,
        "final_f": trace.final_f,
        "stalled": trace.stalled,
        "projection": io.matrix_to_json(Q),
        "frame": io.frame_to_json(factor_projection(Q)),
    }
    io.write_json(out, result, prov)
    _emit({"out": str(out), "trace": str(trace_path), "outcome": result["outcome"],
           "iterations": trace.iterations, "final_f": trace.final_f, "shift": result["shift"]})
    return 0


def cmd_connect(args) -> int:
    cfg = _config(args)
    d, _ = _load_d(args.d)
    F0, F1 = io.read_frame(args.f0), io.read_frame(args.f1)
    conn = connect_frames(F0, F1, d, cfg.homotopy(), derive_rng(cfg.seed, "connect"))
    prov = io.provenance("connect", cfg.seed, cfg.to_dict())
    out = _out(cfg, args.out, "connect.json")
    summary = conn.summary()
    io.write_json(out, {"summary": summary, "frames": [io.frame_to_json(F) for F in conn.frames]}, prov)
    rows = []
    for i, F in enumerate(conn.frames):
        rep = verify_membership(F, d)
        step = 0.0 if i == 0 else float(np.linalg.norm(F - conn.frames[i - 1]))
        rows.append((i, rep.tight_residual, rep.norm_residual, step))
    csv_path = io.write_csv(out.with_suffix(".csv"), ["sample", "tight_residual", "norm_residual", "step"], rows, prov)
    _emit({"out": str(out), "csv": str(csv_path), **summary})
    return 0 if conn.success else 2


def cmd_contract_loop(args) -> int:
    cfg = _config(args, S=args.S, T=args.T)
    hcfg = cfg.homotopy()
    extra = {}
    if args.random:
        d, k = _load_d(args.random)
        d, _ = norm_vector(d, k, cfg.tol_poly)
        loop = random_level_loop(d, derive_rng(cfg.seed, "contract-loop"), cfg.T, args.radius, hcfg.flow).samples
        extra = {"radius": args.radius, "d": d.tolist()}
    else:
        d, samples, are_frames = io.read_loop(args.loop)
        if d is None:
            raise ParseError("loop file must carry its norm vector 'd'")
        loop = [gram_projection(F) for F in samples] if are_frames else samples
    report = contract_loop(loop, d, hcfg)
    prov = io.provenance("contract-loop", cfg.seed, {**cfg.to_dict(), **extra})
    out = _out(cfg, args.out, "contract.json")
    summary = report.summary()
    io.write_json(out, {"summary": summary, "loop": io.loop_to_json(d, loop)}, prov)
    rows = [(s, t, float(np.sqrt(energy(P, d))), float(np.linalg.norm(P - loop[0])))
            for s, row in enumerate(report.grid) for t, P in enumerate(row)]
    csv_path = io.write_csv(out.with_suffix(".csv"), ["s", "t", "level_residual", "distance_to_base"], rows, prov)
    _emit({"out": str(out), "csv": str(csv_path), **summary})
    return 0


def cmd_winding(args) -> int:
    _config(args)
    d, samples, are_frames = io.read_loop(args.loop)
    if args.mode == "cp1":
        if not are_frames:
            raise ParseError("cp1 winding needs a loop of 1 x 2 frames")
        components = winding_cp1(samples)
    else:
        loop = [gram_projection(F) for F in samples] if are_frames else samples
        components = torus_windings(loop)
    _emit({"mode": args.mode, "components": list(components)})
    return 0


def cmd_acceptance(args) -> int:
    cfg = _config(args)
    results = acc.run(cfg, args.only, echo=lambda line: print(line, file=sys.stderr, flush=True))
    prov = io.provenance("acceptance", cfg.seed, cfg.to_dict())
    out = Path(cfg.out_dir)
    io.write_json(out / "acceptance.json", {"results": [r.to_dict() for r in results]}, prov)
    io.write_csv(out / "acceptance.csv", ["number", "name", "passed", "seconds", "detail"],
                 [(r.number, r.name, r.passed, r.seconds, r.detail) for r in results], prov)
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return 0 if passed == len(results) else 2


COMMANDS = {
    "construct": cmd_construct,
    "check": cmd_check,
    "strata": cmd_strata,
    "retract": cmd_retract,
    "connect": cmd_connect,
    "contract-loop": cmd_contract_loop,
    "winding": cmd_winding,
    "acceptance": cmd_acceptance,
}


def _error(kind: str, message: str, **extra) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FrametopError as exc:
        _error(type(exc).__name__, str(exc))
        return 2
    except ValueError as exc:
        # configuration values rejected by RunConfig / FlowConfig / the criterion filter
        _error("InvalidArgument", str(exc))
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort report for the exit-code contract
        _error("InternalError", str(exc), type=type(exc).__name__)
        return 1


if __name__ == "__main__":
    sys.exit(main())
