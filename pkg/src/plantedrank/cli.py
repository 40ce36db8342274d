"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 runtime error (bad input file,
invalid parameter, I/O failure).
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from typing import List, Optional

import numpy as np

from .detect import detect_aggregate, detect_dyadic
from .harness import ExperimentConfig, run_experiment, write_results
from .lowdeg import (PriorSpec, adv_bruteforce, adv_low_degree, detection_risk_lb, enumerate_templates,
                     estimation_corr_bound, estimation_risk_lb, expected_xstar)
from .model import (as_observations, format_permutation, gen_hard_instance, gen_isotonic,
                    make_block_matrix, random_block, read_matrix, read_permutation, sample_observations,
                    write_matrix)
from .peel import peel
from .rank import RankMethod, reconstruct
from .rng import RngSeed
from .support import est_combined


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _read_obs(path) -> np.ndarray:
    return as_observations(read_matrix(path).astype(np.int64))


def _out_matrix(A, path, integer=None) -> None:
    if path:
        write_matrix(path, A, integer)
    else:
        _print_matrix(A, integer)


def _print_matrix(A, integer) -> None:
    buf = io.StringIO()
    fmt = "%d" if integer else "%.17g"
    buf.write(f"{A.shape[0]} {A.shape[1]}\n")
    np.savetxt(buf, A, fmt=fmt, delimiter=" ")
    sys.stdout.write(buf.getvalue())


# -- subcommands ----------------------------------------------------------------

def cmd_gen(args) -> int:
    seed = RngSeed(args.seed).generator(0, "gen")
    pi = None
    if args.kind == "block":
        spec = random_block(args.n, args.d, args.lam, args.kn, args.kd, seed)
        M = make_block_matrix(spec, args.n, args.d)
    elif args.kind == "isotonic":
        M = gen_isotonic(args.n, args.d, seed, args.isotonic_kind)
        if args.shuffle:
            pi = seed.permutation(args.n)
            M = M[pi]
    else:
        M, pi = gen_hard_instance(args.n, args.d, args.groups, seed)
    _out_matrix(M, args.out, integer=False)
    if args.perm_out and pi is not None:
        with open(args.perm_out, "w") as fh:
            fh.write(format_permutation(pi) + "\n")
    return 0


def cmd_sample(args) -> int:
    M = read_matrix(args.input)
    Y = sample_observations(M, RngSeed(args.seed).generator(0, "sample"))
    _out_matrix(Y.astype(np.int64), args.out, integer=True)
    return 0


def cmd_detect(args) -> int:
    Y = _read_obs(args.input)
    n, d = Y.shape
    if args.dyadic:
        res = detect_dyadic(Y, args.m, args.delta)
    else:
        res = detect_aggregate(Y, args.m, args.kn or n, args.kd or d, args.delta)
    for part in res.parts:
        _emit(part.as_dict())
    _emit({"test": res.test, "decision": res.decision})
    return 0


def cmd_estimate(args) -> int:
    Y = _read_obs(args.input)
    n, d = Y.shape
    res = est_combined(Y, args.m, args.kn or n, args.kd or d, args.delta, args.row)
    _emit(res.as_dict())
    return 0


def cmd_rank(args) -> int:
    Y = _read_obs(args.input)
    pi = RankMethod(args.method, delta=args.delta).rank(Y)
    text = format_permutation(pi) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_reconstruct(args) -> int:
    Y = _read_obs(args.input)
    pi = read_permutation(args.perm)
    _out_matrix(reconstruct(Y, pi), args.out, integer=False)
    return 0


def cmd_peel(args) -> int:
    _emit(peel(read_matrix(args.input), args.p).as_dict())
    return 0


def cmd_lowdeg(args) -> int:
    if args.action == "catalog":
        catalog = enumerate_templates(args.D, args.variant)
        if args.text:
            sys.stdout.write(catalog.to_text())
        else:
            _emit({"D": args.D, "variant": args.variant, "count": len(catalog),
                   "templates": [t.as_dict() for t in catalog]})
        return 0
    if args.action == "adv":
        prior = PriorSpec.detection(args.n, args.d, args.lam, args.kn, args.kd)
        adv = adv_low_degree(prior, args.D)
        out = {"adv_sq": adv, "risk_lb": detection_risk_lb(adv, args.cbar, prior, args.D)}
        if args.bruteforce:
            out["adv_sq_bruteforce"] = adv_bruteforce(prior, args.D)
        _emit(out)
        return 0
    prior = PriorSpec.estimation(args.n, args.d, args.lam, args.kn, args.kd)
    raw, inflated = estimation_corr_bound(prior, args.D, args.cs, args.mode)
    _emit({"expected_xstar": expected_xstar(prior, args.mode), "corr_raw": raw, "corr_inflated": inflated,
           "risk_lb_raw": estimation_risk_lb(prior, raw, args.mode),
           "risk_lb": estimation_risk_lb(prior, inflated, args.mode)})
    return 0


def _write_experiment(cfg: ExperimentConfig, output: Optional[str]) -> str:
    records, summary = run_experiment(cfg)
    directory = output or cfg.output or f"results/{cfg.experiment_id}"
    path = write_results(records, summary, directory, cfg)
    print(path)
    return directory


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.workers:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "workers": args.workers})
    _write_experiment(cfg, args.output)
    return 0


def cmd_sweep(args) -> int:
    cfg = ExperimentConfig.from_dict({
        "kind": "separation-sweep", "n": args.n, "d": args.d, "m": args.m, "epsilon": args.epsilon,
        "rho_grid": args.rho, "replicates": args.replicates, "seed": args.seed, "workers": args.workers,
        "experiment_id": args.id})
    _write_experiment(cfg, args.output)
    return 0


# -- parser -----------------------------------------------------------------------

def _floats(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="plantedrank", description="Planted submatrix and permuted isotonic toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a signal matrix")
    g.add_argument("--kind", choices=["block", "isotonic", "hard"], default="block")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--lambda", dest="lam", type=float, default=1.0, help="block height")
    g.add_argument("--kn", type=int, default=1)
    g.add_argument("--kd", type=int, default=1)
    g.add_argument("--groups", type=int, default=1, help="number of groups m for --kind hard")
    g.add_argument("--isotonic-kind", default="column-sorted-uniform",
                   choices=["column-sorted-uniform", "cumulative-decrements"])
    g.add_argument("--shuffle", action="store_true", help="shuffle rows of isotonic output")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output matrix file (stdout if omitted)")
    g.add_argument("--perm-out", help="write the oracle permutation here")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sample", help="sample Y from a signal matrix")
    s.add_argument("--input", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    dt = sub.add_parser("detect", help="run detection tests on Y")
    dt.add_argument("--input", required=True)
    dt.add_argument("--delta", type=float, default=0.05)
    dt.add_argument("--m", type=int, default=1, help="scan size")
    dt.add_argument("--kn", type=int, help="block rows (default n)")
    dt.add_argument("--kd", type=int, help="block columns (default d)")
    dt.add_argument("--dyadic", action="store_true", help="aggregate over dyadic (kn, kd)")
    dt.set_defaults(func=cmd_detect)

    e = sub.add_parser("estimate", help="decide whether a row is in the planted block")
    e.add_argument("--input", required=True)
    e.add_argument("--row", type=int, default=0)
    e.add_argument("--delta", type=float, default=0.05)
    e.add_argument("--m", type=int, default=1)
    e.add_argument("--kn", type=int)
    e.add_argument("--kd", type=int)
    e.set_defaults(func=cmd_estimate)

    r = sub.add_parser("rank", help="estimate the row permutation")
    r.add_argument("--method", choices=["rowsum", "row-sum", "spectral", "block"], default="rowsum")
    r.add_argument("--input", required=True)
    r.add_argument("--delta", type=float, default=0.05, help="level used by --method block")
    r.add_argument("--out")
    r.set_defaults(func=cmd_rank)

    rc = sub.add_parser("reconstruct", help="isotonic reconstruction given a permutation")
    rc.add_argument("--input", required=True)
    rc.add_argument("--perm", required=True)
    rc.add_argument("--out")
    rc.set_defaults(func=cmd_reconstruct)

    pe = sub.add_parser("peel", help="extract a dominated block")
    pe.add_argument("--input", required=True)
    pe.add_argument("--p", type=int, default=4)
    pe.set_defaults(func=cmd_peel)

    ld = sub.add_parser("lowdeg", help="low-degree calculators")
    lsub = ld.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("adv", "corr"):
        q = lsub.add_parser(name, help="advantage bound" if name == "adv" else "correlation bound")
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--d", type=int, required=True)
        q.add_argument("--lambda", dest="lam", type=float, required=True)
        q.add_argument("--kn", type=int, required=True)
        q.add_argument("--kd", type=int, required=True)
        q.add_argument("--D", type=int, required=True)
        if name == "adv":
            q.add_argument("--cbar", type=float, help="report the certified bound when it applies")
            q.add_argument("--bruteforce", action="store_true", help="also enumerate cell subsets")
        else:
            q.add_argument("--cs", type=float, default=18.0)
            q.add_argument("--mode", choices=["exact", "row"], default="exact")
    c = lsub.add_parser("catalog", help="list templates")
    c.add_argument("--D", type=int, required=True)
    c.add_argument("--variant", choices=["detection", "estimation"], default="detection")
    c.add_argument("--text", action="store_true", help="edge-list text instead of JSON")
    ld.set_defaults(func=cmd_lowdeg)

    ru = sub.add_parser("run", help="run an experiment config")
    ru.add_argument("--config", required=True)
    ru.add_argument("--output", help="output directory (overrides the config)")
    ru.add_argument("--workers", type=int)
    ru.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="separation-distance sweep of the dyadic test")
    sw.add_argument("--n", type=int, required=True)
    sw.add_argument("--d", type=int, required=True)
    sw.add_argument("--m", type=int, default=1)
    sw.add_argument("--epsilon", type=float, default=0.1)
    sw.add_argument("--rho", type=_floats, required=True, help="comma-separated grid")
    sw.add_argument("--replicates", type=int, default=100)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--id", default="sweep")
    sw.add_argument("--output")
    sw.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
