import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from beliefattr.beliefs import Belief, Particle
from beliefattr.elot import parse
from beliefattr.gridworld import (
    IllegalActionError, enumerate_initial_states, initial_state, legal_actions, observe, parse_actions, parse_map, transition,
)
from beliefattr.inference import (
    Atom, JointPosterior, Listener, ObserverModel, StatementUnassertable, TrajectoryImpossible, accuracy, informativity,
    joint_filter, kl_divergence, posterior_probability,
)
from beliefattr.oracle import brute_force
from beliefattr.planner import Planner
from beliefattr.scenario import load_scenario
from conftest import FIX_A_MAP, SCENARIOS, make_scenario

RED1 = "believes(player, exists K. iscolor(K, red) and inside(K, box1))"
RED2 = "believes(player, exists K. iscolor(K, red) and inside(K, box2))"
EMPTY2 = "believes(player, empty(box2))"


def fix_a(trajectory, alloc=None, **extra):
    return make_scenario(FIX_A_MAP, ["red"], alloc or {"box1": "red"}, trajectory, [RED1, RED2, EMPTY2], **extra)


def test_prior_recovered_at_t0():
    model = fix_a("W W").build_model()
    post = joint_filter(model, 0)
    assert len(post.atoms) == model.n_atoms == 2 * 4
    assert all(a.weight == pytest.approx(1 / 8, abs=1e-15) for a in post.atoms)


def test_filter_matches_per_atom_rollouts():
    sc = fix_a("W")
    model = sc.build_model()
    post = joint_filter(model)
    planner = Planner(sc.policy)
    true_obs = observe(model.true_trace[1])
    raw = {}
    for i, s0 in enumerate(model.states):
        for b, belief in enumerate(model.beliefs):
            ok = observe(model.traces[i][1]) == true_obs
            raw[(i, b)] = planner.trajectory_likelihood(s0, belief, sc.trajectory) if ok else 0.0
    z = sum(raw.values())
    got = {(a.s0, a.b0): a.weight for a in post.atoms}
    for k, v in raw.items():
        assert got.get(k, 0.0) == pytest.approx(v / z, abs=1e-15)
    # stepping toward box1 shifts mass to beliefs favouring box1
    lean1 = post.mass(lambda a: a.belief.weights.get(_world(model, ("red", None)), 0) > 0.5)
    assert lean1 > 0.5


def _world(model, contents):
    return next(i for i, s in enumerate(model.states) if s.box_contents == contents)


def test_observation_rules_out_worlds():
    model = fix_a("W W open", alloc={"box2": "red"}).build_model()
    post = joint_filter(model)
    w1 = _world(model, ("red", None))
    assert all(a.s0 != w1 for a in post.atoms)
    assert math.fsum(a.weight for a in post.atoms) == pytest.approx(1.0)


def test_illegal_trajectory():
    with pytest.raises(ValueError):
        fix_a("N")  # walks into the wall
    sc = fix_a("W")
    with pytest.raises(IllegalActionError):
        ObserverModel(sc.map, ["red"], parse_actions("N"), sc.true_state)


def test_accuracy_exceeds_half_toward_box1():
    sc = fix_a("W W")
    model = sc.build_model()
    post = joint_filter(model)
    phi = sc.statements[0].formula
    acc = accuracy(phi, post)
    _, _, _, ref = brute_force(sc)
    assert acc > 0.5
    assert acc == pytest.approx(ref["s1"]["acc"], abs=1e-12)


def test_tautology_accuracy_one():
    sc = fix_a("W W")
    post = joint_filter(sc.build_model())
    phi = parse("believes(player, empty(box1) or not empty(box1))")
    assert accuracy(phi, post) == 1.0
    assert posterior_probability(phi, post) == pytest.approx(1.0)


def test_fifty_fifty_with_uniform_policy():
    sc = fix_a("W W", policy={"beta": 0.0})
    post = joint_filter(sc.build_model())
    for st_ in sc.statements:
        assert accuracy(st_.formula, post) == pytest.approx(0.5, abs=1e-12)


def test_kl_basics():
    assert kl_divergence({"a": 1.0}, {"a": 0.5, "b": 0.5}) == pytest.approx(math.log(2), abs=1e-15)
    assert kl_divergence({"a": 0.5, "b": 0.5}, {"a": 0.5, "b": 0.5}) == 0.0
    assert kl_divergence({"a": 1.0}, {"b": 1.0}) == math.inf


def _synthetic_posterior(weights):
    """Atoms over two FIX-A worlds with singleton beliefs, custom weights."""
    m = parse_map(FIX_A_MAP)
    states = enumerate_initial_states(m, ["red"])
    atoms = []
    for n, w in enumerate(weights):
        i = n % 2
        belief = Belief((Particle(i, states[i], Fraction(1)),))
        atoms.append(Atom(i, n, states[i], belief, w, w, ()))
    return JointPosterior(tuple(atoms), 0), states


def test_info_uniform_half_is_log2():
    post, states = _synthetic_posterior([0.25] * 4)
    box = "box1" if states[0].box_contents[0] else "box2"
    phi = parse(f"believes(player, inside(red, {box}))")
    assert informativity(phi, post) == pytest.approx(math.log(2), abs=1e-12)


def test_info_zero_when_certain():
    sc = fix_a("W W")
    sees = joint_filter(sc.build_model(), listener=Listener.SEES_ENVIRONMENT)
    phi = parse("believes(player, exists K. iscolor(K, red))")
    assert informativity(phi, sees) == 0.0


def test_unassertable():
    sc = fix_a("W W")
    sees = joint_filter(sc.build_model(), listener=Listener.SEES_ENVIRONMENT)
    with pytest.raises(StatementUnassertable):
        informativity(parse("believes(player, inside(blue, box1))"), sees)


def test_listeners_differ_when_observation_informative():
    # box2 is seen to be empty: the ignorant listener still entertains a key there
    sc = load_scenario(SCENARIOS / "m1b.yaml")
    model = sc.build_model()
    sees = joint_filter(model, listener=Listener.SEES_ENVIRONMENT)
    blind = joint_filter(model, listener=Listener.IGNORANT)
    _, _, _, ref = brute_force(sc)
    for st_ in sc.statements:
        assert informativity(st_.formula, sees) == pytest.approx(ref[st_.id]["info"], abs=1e-12)
        assert informativity(st_.formula, blind) == pytest.approx(ref[st_.id]["info_star"], abs=1e-12)
    phi = sc.statements[0].formula
    assert informativity(phi, blind) - informativity(phi, sees) > 0.1


def test_oracle_reports_unassertable():
    sc = make_scenario(FIX_A_MAP, ["red"], {"box1": "red"}, "E E open", [RED1, RED2, EMPTY2])
    with pytest.raises(StatementUnassertable):
        brute_force(sc)


def test_trajectory_impossible_under_model():
    # waiting is never optimal; at this inverse temperature its probability underflows to zero
    sc = fix_a("noop", policy={"beta": 3000.0})
    with pytest.raises(TrajectoryImpossible):
        joint_filter(sc.build_model())


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=1, max_size=6), st.sampled_from(["box1", "box2"]))
def test_filter_agrees_with_rollouts_on_random_walks(choices, where):
    m = parse_map(FIX_A_MAP)
    s = initial_state(m, ["red", None] if where == "box1" else [None, "red"])
    tokens = []
    for c in choices:
        acts = legal_actions(s)
        a = acts[c % len(acts)]
        s = transition(s, a)
        tokens.append(str(a))
    sc = fix_a(" ".join(tokens), alloc={where: "red"})
    model = sc.build_model()
    planner = Planner(sc.policy)
    raw = {}
    for i, s0 in enumerate(model.states):
        if not model.consistent(i, model.t):
            continue
        for b, belief in enumerate(model.beliefs):
            raw[(i, b)] = planner.trajectory_likelihood(s0, belief, sc.trajectory)
    z = sum(raw.values())
    post = joint_filter(model)
    assert math.fsum(a.weight for a in post.atoms) == pytest.approx(1.0, abs=1e-12)
    got = {(a.s0, a.b0): a.weight for a in post.atoms}
    for k, v in raw.items():
        assert got.get(k, 0.0) == pytest.approx(v / z, abs=1e-12)
