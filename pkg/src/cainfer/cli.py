"""``cainfer`` command line.

Exit status: 0 on success, 1 when ``--strict`` is set and the analysis
reached no conclusion (or a check failed), 2 on input errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from cainfer import io
from cainfer.algoinfo import COMPRESSORS, SlackBudget, StringCorpus, infer_string_ancestors
from cainfer.dag import MAX_GLOBAL_MARKOV_NODES, ObservationGroups, global_markov_holds, local_markov_holds
from cainfer.dag import ancestor_multiplicities, validate_dag_model
from cainfer.discrete import DiscreteMeasure, from_samples
from cainfer.errors import CainferError
from cainfer.inference import (
    DEFAULT_DECISION_TOL,
    ObservationValues,
    check_decomposition,
    epsilon_and_bound,
    infer_multiplicity,
)
from cainfer.measure import DEFAULT_TOL
from cainfer.oracle import VerifyConfig, verify_batch

EXIT_OK, EXIT_NO_CONCLUSION, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cainfer", description="Information-theoretic inference of common ancestors.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--strict", action="store_true", help="exit 1 when no conclusion is reached")
        p.add_argument("--tol-bits", type=_positive_float, default=DEFAULT_TOL)
        p.add_argument("--decision-tol-bits", type=_positive_float, default=DEFAULT_DECISION_TOL)
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("analyze", help="multi-information and redundancy of a distribution or samples")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dist")
    src.add_argument("--samples")
    p.add_argument("--groups", required=True, help='groups separated by ";", members by ","')
    p.add_argument("--y", help="comma-separated variables forming Y (default: Y is a copy of the groups)")
    p.add_argument("--c", type=int, help="the c whose conclusion decides --strict")
    common(p)

    p = sub.add_parser("infer", help="epsilon_c and information bound from observation values")
    p.add_argument("--values", required=True)
    cg = p.add_mutually_exclusive_group()
    cg.add_argument("--c-vec")
    cg.add_argument("--c", type=int)
    common(p)

    p = sub.add_parser("check-dag", help="Markov checks, DAG-model validation and decomposition slacks")
    p.add_argument("--dag", required=True)
    p.add_argument("--dist", required=True, help="distribution over the DAG nodes (and Y)")
    p.add_argument("--values", help="observation values to validate against (default: computed from --dist)")
    common(p)

    p = sub.add_parser("strings", help="common-ancestor inference for files via compression")
    p.add_argument("files", nargs="+")
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--slack-bits", type=_nonneg_float, default=None)
    p.add_argument("--compressor", choices=sorted(COMPRESSORS), default="lzma")
    common(p)

    p = sub.add_parser("verify", help="seeded batch verification of the inequalities on random nets")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--nodes", type=int, default=6)
    p.add_argument("--edge-prob", type=float, default=0.5)
    p.add_argument("--threads", type=int, default=1)
    common(p)
    return parser


def _analyze(args) -> tuple[dict, bool]:
    if args.dist:
        dist, empirical = io.load_distribution(args.dist), False
    else:
        dist, empirical = from_samples(io.load_samples(args.samples)), True
    groups = io.parse_groups(args.groups)
    y = [v.strip() for v in args.y.split(",")] if args.y else None
    report = infer_multiplicity(dist=dist, groups=groups, y=y, decision_tol=args.decision_tol_bits)
    out = report.to_dict()
    out["empirical"] = empirical
    if empirical:
        out["assumptions"].append("empirical: plug-in estimate from samples, not the true distribution")
    out["seed"] = args.seed
    if args.c is not None:
        if not 1 <= args.c <= len(groups) - 1:
            raise io.FormatError(f"--c must lie in [1, {len(groups) - 1}]")
        out["requested_c"] = args.c
        concluded = report.result(args.c).qualifies
    else:
        concluded = report.largest_c > 0
    return out, concluded


def _infer(args) -> tuple[dict, bool]:
    obs = io.load_values(args.values)
    report = infer_multiplicity(obs, decision_tol=args.decision_tol_bits)
    out = report.to_dict()
    out["seed"] = args.seed
    if args.c_vec or args.c is not None:
        c_vec = io.parse_int_list(args.c_vec, "--c-vec") if args.c_vec else [args.c] * obs.n
        eps, bound = epsilon_and_bound(obs, c_vec)
        concluded = eps > args.decision_tol_bits
        out["c_vec"] = c_vec
        out["epsilon_bits"] = eps
        out["epsilon_bound_bits"] = bound if concluded else None
        out["epsilon_claim"] = (
            "common_ancestor_of_O_i_and_c_i_others_for_some_i" if concluded else "no_conclusion"
        )
    else:
        concluded = report.largest_c > 0
    return out, concluded


def _check_dag(args) -> tuple[dict, bool]:
    dag, groups, y = io.load_dag(args.dag)
    dist = io.load_distribution(args.dist)
    measure = DiscreteMeasure(dist)
    tol = args.tol_bits
    out: dict = {"mode": "check-dag", "tolerance_bits": tol, "seed": args.seed}
    local = local_markov_holds(dag, measure, tol)
    out["local_markov"] = local.to_dict()
    if len(dag.nodes) <= MAX_GLOBAL_MARKOV_NODES:
        out["global_markov"] = global_markov_holds(dag, measure, tol).to_dict()
    else:
        out["global_markov"] = {"skipped": f"more than {MAX_GLOBAL_MARKOV_NODES} nodes"}
    ok = local.holds
    if groups:
        obs = ObservationGroups(dag, groups, y)
        out["d"] = ancestor_multiplicities(dag, obs)
        if y:
            if args.values:
                values = io.load_values(args.values)
                if values.n != obs.n:
                    raise io.FormatError(f"{args.values}: n={values.n} but the DAG declares {obs.n} groups")
            else:
                values = ObservationValues.from_distribution(dist, [sorted(g) for g in obs.groups], y)
            model = validate_dag_model(dag, measure, obs, values.values, tol)
            out["dag_model"] = model.to_dict()
            ok = ok and model.holds
            if local.holds:
                out["decomposition"] = check_decomposition(dag, measure, obs, tol=tol).to_dict()
    return out, ok


def _strings(args) -> tuple[dict, bool]:
    corpus = StringCorpus.from_files(args.files)
    slack = SlackBudget(args.slack_bits) if args.slack_bits is not None else SlackBudget.default(len(corpus))
    report = infer_string_ancestors(COMPRESSORS[args.compressor], corpus, args.c, slack)
    out = report.to_dict()
    out["seed"] = args.seed
    return out, report.largest_c > 0


def _verify(args) -> tuple[dict, bool]:
    seed = 0 if args.seed is None else args.seed
    config = VerifyConfig(trials=args.trials, n_nodes=args.nodes, edge_prob=args.edge_prob, seed=seed, tol=args.tol_bits)
    report = verify_batch(config, threads=max(1, args.threads))
    out = report.to_dict()
    out["mode"] = "verify"
    return out, report.violations == 0


COMMANDS = {
    "analyze": _analyze,
    "infer": _infer,
    "check-dag": _check_dag,
    "strings": _strings,
    "verify": _verify,
}


def run_cli(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        out, concluded = COMMANDS[args.command](args)
        io.write_report(out, args.out, stdout)
    except _UsageError as exc:
        print(f"cainfer: error: {exc}", file=stderr)
        return EXIT_INPUT
    except (CainferError, ValueError, KeyError, OSError) as exc:
        print(f"cainfer: error: {exc}", file=stderr)
        return EXIT_INPUT
    if args.strict and not concluded:
        return EXIT_NO_CONCLUSION
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
