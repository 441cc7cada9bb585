import json

import pytest

from beliefattr.causal import CausalParams
from beliefattr.pipeline import FACTOR_COLUMNS, compute_factors, factor_rows, fmt, rank_rows, run_pipeline, to_csv, to_json
from beliefattr.ranking import Coefficients, FactorVector
from conftest import THREE_BOX_MAP, make_scenario


def test_fmt():
    assert fmt(0.1 + 0.2) == "0.3"
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(4) == "4"


def test_identical_vectors_rank_equally():
    v = [FactorVector(f"s{i}", 0.7, 0.5, 0.6, 0.4, 0.5, 0.2) for i in range(3)]
    rows = rank_rows("x", v, "all", Coefficients(1, 1, 1, 1))
    assert [r["average_rank"] for r in rows] == pytest.approx([2.0] * 3, abs=1e-12)


def test_guaranteed_statement_ranked_last_by_causal_first_by_acc():
    sc = make_scenario(
        THREE_BOX_MAP, ["blue"], {"box1": "blue"}, "W W W N N",
        [
            "believes(player, exists K. iscolor(K, blue))",
            "believes(player, exists K. iscolor(K, blue) and inside(K, box1))",
            "believes(player, empty(box2))",
        ],
    )
    sf, causal = run_pipeline(sc, "causal", Coefficients(alpha_cnecc=1, alpha_csuff=1))
    guaranteed = sf.vectors[0]
    assert guaranteed.cnorm == 1.0
    assert causal.average_rank[0] == max(causal.average_rank)
    assert causal.average_rank[0] > 2.9
    _, acc = run_pipeline(sc, "acc", Coefficients(alpha_acc=1))
    assert acc.average_rank[0] == min(acc.average_rank)


def test_rows_and_export(three_box):
    sf = compute_factors(three_box)
    rows = factor_rows(sf, CausalParams())
    assert [r["statement_id"] for r in rows] == ["s1", "s2", "s3"]
    text = to_csv(rows, FACTOR_COLUMNS)
    lines = text.splitlines()
    assert lines[0] == ",".join(FACTOR_COLUMNS)
    assert len(lines) == 4
    assert json.loads(to_json(rows))[0]["statement_id"] == "s1"
    assert to_csv(factor_rows(compute_factors(three_box)), FACTOR_COLUMNS) == text
