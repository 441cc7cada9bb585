"""End-to-end factor computation, scoring and export."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .causal import CausalParams, causal_necessity, causal_normality, causal_strength, causal_sufficiency, find_tc
from .inference import Listener, ObserverModel, accuracy, informativity, joint_filter
from .ranking import Coefficients, FactorVector, RankResult, attribute_probabilities, ranking_distribution, score
from .scenario import Scenario

FACTOR_COLUMNS = ("scenario_id", "statement_id", "t_c", "acc", "info", "info_star", "cnorm", "cnecc", "csuff", "causal")
RANK_COLUMNS = ("scenario_id", "statement_id", "score", "p_attribute", "average_rank")


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


@dataclass(frozen=True)
class ScenarioFactors:
    scenario_id: str
    t_c: int
    vectors: Tuple[FactorVector, ...]


def compute_factors(sc: Scenario, model: Optional[ObserverModel] = None) -> ScenarioFactors:
    model = model or sc.build_model()
    theta = sc.thresholds
    post = joint_filter(model)
    sees = joint_filter(model, listener=Listener.SEES_ENVIRONMENT)
    ignorant = joint_filter(model, listener=Listener.IGNORANT)
    ip = find_tc(model)
    vectors = []
    for st in sc.statements:
        phi = st.formula
        vectors.append(
            FactorVector(
                statement_id=st.id,
                acc=accuracy(phi, post, theta),
                info=informativity(phi, sees, theta),
                info_star=informativity(phi, ignorant, theta),
                cnorm=causal_normality(phi, ip, theta),
                cnecc=causal_necessity(phi, ip, model, theta),
                csuff=causal_sufficiency(phi, ip, model, theta),
            )
        )
    return ScenarioFactors(sc.id, ip.t_c, tuple(vectors))


def rank_factors(vectors: Sequence[FactorVector], factors, coefs: Coefficients, model_name: str = "") -> Tuple[List[float], RankResult]:
    scores = [score(fv, coefs, factors) for fv in vectors]
    return scores, ranking_distribution(scores, model_name or str(factors))


def run_pipeline(sc: Scenario, factors, coefs: Coefficients) -> Tuple[ScenarioFactors, RankResult]:
    sf = compute_factors(sc)
    _, rank = rank_factors(sf.vectors, factors, coefs)
    return sf, rank


def factor_rows(sf: ScenarioFactors, cp: CausalParams = CausalParams()) -> List[Dict]:
    rows = []
    for fv in sf.vectors:
        row = {"scenario_id": sf.scenario_id, "t_c": sf.t_c, **asdict(fv)}
        row["causal"] = causal_strength(fv.cnorm, fv.cnecc, fv.csuff, cp)
        rows.append(row)
    return rows


def rank_rows(scenario_id: str, vectors: Sequence[FactorVector], factors, coefs: Coefficients) -> List[Dict]:
    scores, rank = rank_factors(vectors, factors, coefs)
    probs = attribute_probabilities(scores)
    return [
        {
            "scenario_id": scenario_id,
            "statement_id": fv.statement_id,
            "score": s,
            "p_attribute": float(p),
            "average_rank": float(r),
        }
        for fv, s, p, r in zip(vectors, scores, probs, rank.average_rank)
    ]


def to_csv(rows: Sequence[Dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def to_json(rows: Sequence[Dict]) -> str:
    return json.dumps(list(rows), indent=2, sort_keys=True) + "\n"
