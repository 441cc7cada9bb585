from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from beliefattr.beliefs import Belief, Particle, enumerate_belief_prior
from beliefattr.elot import (
    And, Color, ELoTSyntaxError, Empty, EpistemicFormula, Exists, Inside, IsColor, Modal, ModalThresholds, Not, Or, Var,
    degree_of_belief, degree_of_belief_exact, eval_epistemic, eval_inner, inner_to_text, parse, parse_inner, to_text,
)
from beliefattr.gridworld import enumerate_initial_states, initial_state, parse_action, parse_map, transition
from conftest import THREE_BOX_MAP, FIX_A_MAP
from strategies import BOXES, COLORS, inners

def test_parse_disjunction_example():
    phi = parse("believes(player, exists K. iscolor(K, red) and (inside(K, box1) or inside(K, box2)))")
    assert phi == EpistemicFormula(
        Modal.BELIEVES, "player",
        Exists("K", And(IsColor(Var("K"), "red"), Or(Inside(Var("K"), "box1"), Inside(Var("K"), "box2")))),
    )


def test_parse_knows_and_certain():
    assert parse("knows(player, empty(box2))") == EpistemicFormula(Modal.KNOWS, "player", Empty("box2"))
    assert parse("CERTAIN(player, inside(blue, box1))").modal is Modal.CERTAIN
    assert parse("certain(player, inside(blue, box1))").inner == Inside(Color("blue"), "box1")


def test_unbound_variable():
    with pytest.raises(ELoTSyntaxError, match="unbound variable K"):
        parse("believes(player, inside(K, box1))")


@pytest.mark.parametrize("text", [
    "believes(player, )",
    "believes(player, empty(box1)",
    "wishes(player, empty(box1))",
    "believes(player, empty(box1)) extra",
    "believes(player, inside(K box1))",
    "believes(player, empty(box1) & empty(box2))",
])
def test_syntax_errors(text):
    with pytest.raises(ELoTSyntaxError):
        parse(text)


def test_constants_checked_against_map():
    with pytest.raises(ELoTSyntaxError):
        parse("believes(player, empty(box4))", colors=COLORS, boxes=BOXES)
    with pytest.raises(ELoTSyntaxError):
        parse("believes(player, inside(green, box1))", colors=COLORS, boxes=BOXES)


def test_precedence():
    f = parse_inner("not empty(box1) and empty(box2) or empty(box3)")
    assert f == Or(And(Not(Empty("box1")), Empty("box2")), Empty("box3"))
    g = parse_inner("exists K. inside(K, box1) or inside(K, box2)")
    assert g == Exists("K", Or(Inside(Var("K"), "box1"), Inside(Var("K"), "box2")))


@settings(max_examples=300, deadline=None)
@given(inners(), st.sampled_from(list(Modal)))
def test_print_parse_round_trip(inner, modal):
    phi = EpistemicFormula(modal, "player", inner)
    assert parse(to_text(phi)) == phi
    assert parse_inner(inner_to_text(inner)) == inner


def _three_box_states():
    m = parse_map(THREE_BOX_MAP)
    return enumerate_initial_states(m, ["blue"])


def test_empty_box_semantics():
    states = _three_box_states()
    w = next(s for s in states if s.box_contents == ("blue", None, None))
    assert eval_inner(Empty("box2"), w)
    assert not eval_inner(Empty("box1"), w)


def test_key_collected_no_longer_inside():
    m = parse_map(FIX_A_MAP)
    s = initial_state(m, ["red", None])
    f = parse_inner("exists K. iscolor(K, red) and inside(K, box1)")
    assert eval_inner(f, s)
    for tok in "W W open".split():
        s = transition(s, parse_action(tok))
    assert s.inventory == ("red",)
    assert not eval_inner(f, s)
    assert eval_inner(parse_inner("exists K. iscolor(K, red)"), s)


def _fix_a_belief():
    m = parse_map(FIX_A_MAP)
    states = enumerate_initial_states(m, ["red"])
    by = {s.box_contents: i for i, s in enumerate(states)}
    i1, i2 = by[("red", None)], by[(None, "red")]
    parts = sorted([Particle(i1, states[i1], Fraction(2, 3)), Particle(i2, states[i2], Fraction(1, 3))], key=lambda p: p.world)
    return Belief(tuple(parts)), states[i1], states[i2]


def test_degree_of_belief():
    b, s1, s2 = _fix_a_belief()
    assert degree_of_belief_exact(b, Inside(Color("red"), "box1")) == Fraction(2, 3)
    single = Belief((Particle(0, s1, Fraction(1)),))
    assert degree_of_belief(single, Inside(Color("red"), "box1")) == 1.0
    taut = Or(Empty("box1"), Not(Empty("box1")))
    assert degree_of_belief(b, taut) == 1.0


def test_modal_thresholds():
    b, s1, s2 = _fix_a_belief()
    red1 = Inside(Color("red"), "box1")
    assert eval_epistemic(EpistemicFormula(Modal.BELIEVES, "player", red1), s1, b)
    assert not eval_epistemic(EpistemicFormula(Modal.CERTAIN, "player", red1), s1, b)
    assert eval_epistemic(EpistemicFormula(Modal.BELIEVES, "player", red1), s1, b, ModalThresholds(believes=2 / 3 - 1e-12))


def test_knows_is_factive():
    b, s1, s2 = _fix_a_belief()
    single = Belief((Particle(0, s1, Fraction(1)),))  # believes box2 is empty
    phi = EpistemicFormula(Modal.KNOWS, "player", Empty("box2"))
    assert eval_epistemic(phi, s1, single)
    assert not eval_epistemic(phi, s2, single)


def test_threshold_validation():
    with pytest.raises(ValueError):
        ModalThresholds(believes=0.0)
    with pytest.raises(ValueError):
        ModalThresholds(certain=1.5)


@settings(max_examples=100, deadline=None)
@given(inners(depth=2), st.integers(0, 9), st.integers(0, 2))
def test_negation_complements_degree(inner, which, truth):
    states = _three_box_states()
    b = enumerate_belief_prior(states).beliefs[which]
    assert degree_of_belief_exact(b, inner) + degree_of_belief_exact(b, Not(inner)) == 1
    assert eval_inner(Not(inner), states[truth]) != eval_inner(inner, states[truth])


@settings(max_examples=100, deadline=None)
@given(inners(depth=2), st.integers(0, 9), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_believes_monotone_in_threshold(inner, which, t1, t2):
    states = _three_box_states()
    b = enumerate_belief_prior(states).beliefs[which]
    lo, hi = sorted((t1, t2))
    phi = EpistemicFormula(Modal.BELIEVES, "player", inner)
    if eval_epistemic(phi, states[0], b, ModalThresholds(believes=hi)):
        assert eval_epistemic(phi, states[0], b, ModalThresholds(believes=lo))


@settings(max_examples=100, deadline=None)
@given(inners(depth=2), st.integers(0, 9), st.integers(0, 2))
def test_knows_implies_believes_and_truth(inner, which, truth):
    states = _three_box_states()
    b = enumerate_belief_prior(states).beliefs[which]
    w = states[truth]
    if eval_epistemic(EpistemicFormula(Modal.KNOWS, "player", inner), w, b):
        assert eval_inner(inner, w)
        assert eval_epistemic(EpistemicFormula(Modal.BELIEVES, "player", inner), w, b)
