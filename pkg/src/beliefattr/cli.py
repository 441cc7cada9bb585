"""Command line interface: ``beliefattr {simulate,factors,rank,fit,oracle}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import defaultdict
from dataclasses import asdict, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .gridworld import observe, transition
from .inference import joint_filter
from .oracle import OracleRefused, oracle_check
from .pipeline import FACTOR_COLUMNS, RANK_COLUMNS, compute_factors, factor_rows, fmt, rank_rows, to_csv, to_json
from .ranking import Coefficients, bootstrap_ci, fit, parse_factors
from .scenario import Scenario, load_manifest, load_scenario

log = logging.getLogger("beliefattr")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beta", type=float, help="policy inverse temperature")
    p.add_argument("--unreachable-penalty", type=float, help="cost assigned to unreachable goals")
    p.add_argument("--epsilon", type=float, default=1e-6, help="floor inside score logarithms")
    p.add_argument("--theta-believes", type=float)
    p.add_argument("--theta-knows", type=float)
    p.add_argument("--theta-certain", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="write output here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def _configure(sc: Scenario, args) -> Scenario:
    policy = sc.policy
    if args.beta is not None:
        policy = replace(policy, beta=args.beta)
    if args.unreachable_penalty is not None:
        policy = replace(policy, unreachable_penalty=args.unreachable_penalty)
    theta = sc.thresholds
    for name in ("believes", "knows", "certain"):
        value = getattr(args, f"theta_{name}")
        if value is not None:
            theta = replace(theta, **{name: value})
    return sc.with_overrides(policy, theta)


def _emit(text: str, args) -> None:
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)


def _render(rows, columns, args) -> str:
    if args.format == "json":
        return to_json([{c: r[c] for c in columns} for r in rows])
    return to_csv(rows, columns)


def _alphas(text: Optional[str], epsilon: float) -> Coefficients:
    values: Dict[str, float] = {}
    if text:
        for item in text.split(","):
            name, _, value = item.partition("=")
            key = {"acc": "alpha_acc", "info": "alpha_info", "info*": "alpha_info", "cnecc": "alpha_cnecc", "csuff": "alpha_csuff"}.get(name.strip().lower())
            if key is None:
                raise SystemExit(f"unknown coefficient {name!r}; use acc, info, cnecc, csuff")
            values[key] = float(value)
    return Coefficients(**values, epsilon=epsilon)


def cmd_simulate(args) -> int:
    sc = _configure(load_scenario(args.scenario), args)
    s = sc.true_state
    model = sc.build_model()
    post = joint_filter(model)
    lines = [f"scenario {sc.id}: {len(model.states)} worlds, {len(model.beliefs)} beliefs, {model.n_atoms} atoms"]
    for tau, a in enumerate(sc.trajectory, start=1):
        s = transition(s, a)
        o = observe(s)
        opened = ",".join(f"box{i + 1}={c or 'empty'}" for i, (c, op) in enumerate(zip(o.box_contents, o.box_opened)) if op)
        lines.append(f"{tau:3d} {str(a):<9} pos={s.agent_pos} inv={list(s.inventory)} opened=[{opened}]")
    top = sorted(post.atoms, key=lambda at: -at.weight)[:5]
    lines.append("trajectory consistent with the model; most probable (world, belief) atoms:")
    for at in top:
        lines.append(f"  world={at.s0} belief=[{at.belief}] p={fmt(at.weight)}")
    _emit("\n".join(lines) + "\n", args)
    return 0


def cmd_factors(args) -> int:
    sc = _configure(load_scenario(args.scenario), args)
    rows = factor_rows(compute_factors(sc))
    columns = list(FACTOR_COLUMNS)
    if args.listener == "sees-env":
        columns.remove("info_star")
    elif args.listener == "ignorant":
        columns.remove("info")
    _emit(_render(rows, columns, args), args)
    return 0


def cmd_rank(args) -> int:
    sc = _configure(load_scenario(args.scenario), args)
    factors = parse_factors(args.factors)
    coefs = _alphas(args.alpha, args.epsilon)
    sf = compute_factors(sc)
    _emit(_render(rank_rows(sc.id, sf.vectors, factors, coefs), RANK_COLUMNS, args), args)
    return 0


def read_human_ranks(path: Path) -> Dict[str, Dict[str, float]]:
    """Average rank per (scenario, statement) from a long-format CSV."""
    sums: Dict[str, Dict[str, List[float]]] = defaultdict(lambda: defaultdict(list))
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"scenario_id", "participant_id", "statement_id", "rank"} - set(reader.fieldnames or ())
        if missing:
            raise SystemExit(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            rank = float(row["rank"])
            if rank not in (1, 2, 3):
                raise SystemExit(f"{path}: rank must be 1, 2 or 3, got {row['rank']}")
            sums[row["scenario_id"].strip()][row["statement_id"].strip()].append(rank)
    return {s: {st: sum(v) / len(v) for st, v in d.items()} for s, d in sums.items()}


def cmd_fit(args) -> int:
    scenarios = [_configure(sc, args) for sc in load_manifest(args.manifest)]
    human = read_human_ranks(args.human)
    factors = parse_factors(args.factors)
    vectors, targets = [], []
    for sc in scenarios:
        if sc.id not in human:
            raise SystemExit(f"no human ranks for scenario {sc.id}")
        sf = compute_factors(sc)
        vectors.append(sf.vectors)
        try:
            targets.append([human[sc.id][fv.statement_id] for fv in sf.vectors])
        except KeyError as err:
            raise SystemExit(f"no human ranks for statement {err} of scenario {sc.id}")
    result = fit(vectors, targets, factors, grid=args.grid, epsilon=args.epsilon)
    ci = bootstrap_ci(result.model_ranks, targets, resamples=args.resamples, seed=args.seed)
    if args.format == "json":
        payload = {
            "factors": list(result.terms),
            "coefficients": asdict(result.coefficients),
            "r": result.r,
            "ci": {"low": ci.low, "high": ci.high, "level": ci.level, "degenerate": ci.degenerate},
            "scenarios": [
                {"scenario_id": sc.id, "statements": [fv.statement_id for fv in vs], "model_ranks": list(m), "human_ranks": h}
                for sc, vs, m, h in zip(scenarios, vectors, result.model_ranks, targets)
            ],
        }
        _emit(json.dumps(payload, indent=2) + "\n", args)
    else:
        c = result.coefficients
        rows = [
            ["alpha_acc", fmt(c.alpha_acc)], ["alpha_info", fmt(c.alpha_info)],
            ["alpha_cnecc", fmt(c.alpha_cnecc)], ["alpha_csuff", fmt(c.alpha_csuff)],
            ["epsilon", fmt(c.epsilon)], ["r", fmt(result.r)],
            ["ci_low", fmt(ci.low)], ["ci_high", fmt(ci.high)], ["ci_degenerate", str(ci.degenerate)],
        ]
        text = "key,value\n" + "".join(f"{k},{v}\n" for k, v in rows)
        text += "\nscenario_id,statement_id,model_rank,human_rank\n"
        for sc, vs, m, h in zip(scenarios, vectors, result.model_ranks, targets):
            for fv, mr, hr in zip(vs, m, h):
                text += f"{sc.id},{fv.statement_id},{fmt(mr)},{fmt(hr)}\n"
        _emit(text, args)
    return 0


def cmd_oracle(args) -> int:
    sc = _configure(load_scenario(args.scenario), args)
    try:
        report = oracle_check(sc, max_atoms=args.max_atoms, corrupt=args.corrupt)
    except OracleRefused as err:
        print(f"refused: {err}", file=sys.stderr)
        return 2
    _emit("\n".join(report.lines()) + f"\n{'PASS' if report.passed else 'FAIL'}\n", args)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beliefattr", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="replay a scenario and check it against the model")
    p.add_argument("scenario", type=Path)
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("factors", help="explanatory factors per statement")
    p.add_argument("scenario", type=Path)
    p.add_argument("--listener", choices=("sees-env", "ignorant", "both"), default="both")
    _common(p)
    p.set_defaults(func=cmd_factors)

    p = sub.add_parser("rank", help="scores and average ranks")
    p.add_argument("scenario", type=Path)
    p.add_argument("--factors", default="causal")
    p.add_argument("--alpha", help="e.g. acc=1.3,info=7.7,cnecc=1.6,csuff=10")
    _common(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("fit", help="fit coefficients to human average ranks")
    p.add_argument("manifest", type=Path)
    p.add_argument("human", type=Path)
    p.add_argument("--factors", default="causal")
    p.add_argument("--grid", choices=("coarse", "fine"), default="fine")
    p.add_argument("--resamples", type=int, default=1000)
    _common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("oracle", help="brute-force cross-check")
    p.add_argument("scenario", type=Path)
    p.add_argument("--max-atoms", type=int, default=5000)
    p.add_argument("--corrupt", help="fault injection: perturb one quantity")
    _common(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
