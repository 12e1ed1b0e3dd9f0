"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 usage error.
The default seed is 0, overridable with the ONEWAYQC_SEED environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

import numpy as np

from . import algorithms as alg
from . import core, graphs, mbqc, oracles, photonic
from .verify import verify_all

SEED_ENV = "ONEWAYQC_SEED"
DIGITS = 12


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None
    if not 0 <= seed < 2**64:
        raise UsageError(f"{SEED_ENV} must be a 64-bit unsigned integer")
    return seed


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _dist(d: dict[str, float]) -> dict[str, float]:
    return {k: round(v, DIGITS) for k, v in sorted(d.items()) if round(v, DIGITS) != 0}


def _emit(doc: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False))
        return
    for key, value in doc.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True, ensure_ascii=False)
        print(f"{key}: {value}")


def _cmd_dj(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.oracle_file:
        try:
            o = oracles.OracleSpec.load(args.oracle_file)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read oracle file: {exc}") from exc
        if args.n is not None and args.n != o.n:
            raise UsageError(f"--n {args.n} does not match the oracle file (n={o.n})")
        bb = next((b for b in oracles.BlackBoxId if oracles.bb_truth_table(b) == o), None)
    else:
        bb = oracles.BlackBoxId.parse(args.bb)
        o = oracles.bb_truth_table(bb)
    use_mbqc = args.mbqc if args.mbqc is not None else (bb is not None and not args.refined)
    if use_mbqc:
        if bb is None:
            raise UsageError("--mbqc needs one of the eight two-bit black boxes")
        if args.refined:
            raise UsageError("the refined variant runs in the circuit model only")
        run = alg.run_dj_mbqc(bb, rng)
        doc = {
            "model": "mbqc",
            "bb": bb.value,
            "verdict": "constant" if run.query_outcome == "00" else "balanced",
            "query_outcome": run.query_outcome,
            "outcomes": {f"s{q}": s for q, s in sorted(run.record.outcomes.items())},
            "distribution": _dist(run.verdict.query_register_distribution),
            "p_all_zeros": round(run.verdict.p_all_zeros, DIGITS),
            "seed": args.seed,
        }
    else:
        try:
            res = alg.run_dj_circuit(o, refined=args.refined)
        except alg.PromiseViolation as exc:
            raise UsageError(str(exc)) from exc
        doc = {
            "model": "circuit",
            "refined": args.refined,
            "table": list(o.table),
            "verdict": res.verdict.value,
            "distribution": _dist(res.query_register_distribution),
            "amplitude_all_zeros": [round(res.amplitude_all_zeros.real, DIGITS), round(res.amplitude_all_zeros.imag, DIGITS)],
        }
        if bb is not None:
            doc["bb"] = bb.value
    _emit(doc, args.format)
    return 0


def _cmd_bv(args) -> int:
    try:
        oracles.parse_bits(args.s)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rng = np.random.default_rng(args.seed)
    if args.mbqc:
        if args.refined:
            raise UsageError("the refined variant runs in the circuit model only")
        if len(args.s) == 2:
            res, run = alg.run_bv_mbqc(args.s, rng)
            doc = {
                "model": "mbqc",
                "bb": res.bb.value,
                "recovered": res.recovered_s,
                "probability": round(res.probability, DIGITS),
                "distribution": _dist(run.verdict.query_register_distribution),
                "outcomes": {f"s{q}": s for q, s in sorted(run.record.outcomes.items())},
            }
        else:
            if len(args.s) < 2:
                raise UsageError("MBQC BV needs at least two bits")
            try:
                res = alg.run_bv_mbqc_general(args.s, rng)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
            doc = {"model": "mbqc", "recovered": res.recovered_s, "probability": round(res.probability, DIGITS)}
        doc["seed"] = args.seed
    else:
        if len(args.s) > core.MAX_QUBITS - 1:
            raise UsageError("hidden string too long for the simulator")
        res = alg.run_bv_circuit(args.s, refined=args.refined)
        doc = {
            "model": "circuit",
            "refined": args.refined,
            "recovered": res.recovered_s,
            "probability": round(res.probability, DIGITS),
        }
    doc["hidden"] = args.s
    _emit(doc, args.format)
    return 0


def _cmd_pattern(args) -> int:
    pattern = mbqc.pattern_for_bb(args.bb)
    print(pattern.dumps())
    return 0


def _cmd_graph(args) -> int:
    try:
        g, layout = graphs.dj_bv_graph(args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    doc = g.to_dict()
    doc["layout"] = {
        "query_inputs": list(layout.query_inputs),
        "ancilla_in": layout.ancilla_in,
        "ancilla_out": layout.ancilla_out,
        "oracle_qubits": list(layout.oracle_qubits),
    }
    print(json.dumps(doc, sort_keys=True))
    return 0


def _cmd_photonic(args) -> int:
    if args.network:
        try:
            net = photonic.FusionNetwork.load(args.network)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read network file: {exc}") from exc
    else:
        net = photonic.six_photon_network()
    if args.trials < 0 or args.workers < 1:
        raise UsageError("--trials must be >= 0 and --workers >= 1")
    run = photonic.generate_chip_state(net, args.trials, seed=args.seed, workers=args.workers, per_trial=args.per_trial)
    doc = {k: (round(v, DIGITS) if isinstance(v, float) else v) for k, v in run.to_dict().items()}
    doc.update(seed=args.seed, workers=args.workers, fusions=net.num_fusions)
    _emit(doc, args.format)
    return 0


def _cmd_verify(args) -> int:
    report = verify_all(filter=args.filter, seed=args.seed, workers=args.workers)
    if not report.checks:
        raise UsageError(f"no check matches {args.filter!r}")
    if args.format == "json":
        _emit(report.to_dict(timings=args.timings), "json")
    else:
        for c in report.checks:
            line = f"{'PASS' if c.passed else 'FAIL'}  {c.name:28s} residual={c.residual:.3e}"
            if args.timings:
                line += f" time={c.wall_time:.3f}s"
            print(f"{line}  {c.detail}")
        print(f"{'all checks passed' if report.passed else f'{len(report.failed())} check(s) failed'}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None, help=f"RNG seed (default ${SEED_ENV} or 0)")
    common.add_argument("--format", choices=["human", "json"], default="human")

    parser = argparse.ArgumentParser(prog="onewayqc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    dj = sub.add_parser("dj", parents=[common], help="Deutsch-Jozsa on a black box or oracle file")
    src = dj.add_mutually_exclusive_group(required=True)
    src.add_argument("--bb", choices=[b.value for b in oracles.BlackBoxId])
    src.add_argument("--oracle-file")
    dj.add_argument("--n", type=int)
    model = dj.add_mutually_exclusive_group()
    model.add_argument("--mbqc", dest="mbqc", action="store_true", default=None)
    model.add_argument("--circuit", dest="mbqc", action="store_false")
    dj.add_argument("--refined", action="store_true")
    dj.set_defaults(func=_cmd_dj)

    bv = sub.add_parser("bv", parents=[common], help="Bernstein-Vazirani for a hidden string")
    bv.add_argument("--s", required=True)
    model = bv.add_mutually_exclusive_group()
    model.add_argument("--mbqc", dest="mbqc", action="store_true", default=False)
    model.add_argument("--circuit", dest="mbqc", action="store_false")
    bv.add_argument("--refined", action="store_true")
    bv.set_defaults(func=_cmd_bv)

    pat = sub.add_parser("pattern", parents=[common], help="dump a black box's measurement program")
    pat.add_argument("--bb", required=True, choices=[b.value for b in oracles.BlackBoxId])
    pat.set_defaults(func=_cmd_pattern)

    gr = sub.add_parser("graph", parents=[common], help="dump the n-query resource graph")
    gr.add_argument("--n", type=int, required=True)
    gr.set_defaults(func=_cmd_graph)

    ph = sub.add_parser("photonic", parents=[common], help="Monte Carlo of fusion-based generation")
    ph.add_argument("--trials", type=int, default=100_000)
    ph.add_argument("--network")
    ph.add_argument("--workers", type=int, default=1)
    ph.add_argument("--per-trial", action="store_true", help="full state simulation for every trial")
    ph.set_defaults(func=_cmd_photonic)

    ver = sub.add_parser("verify", parents=[common], help="run the cross-model verification suite")
    ver.add_argument("--filter")
    ver.add_argument("--workers", type=int, default=1)
    ver.add_argument("--timings", action="store_true", help="include wall times (output no longer reproducible)")
    ver.set_defaults(func=_cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"onewayqc {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
