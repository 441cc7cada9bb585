"""Brute-force cross-check of the pipeline.

Every (initial world, initial belief) pair is simulated step by step through
the full generative model with no sharing between pairs, and every quantity
is read off as a ratio of joint sums. Only the gridworld primitives, the
fully observable cost-to-go and the inner-formula evaluator are shared with
the main code path.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .elot import EpistemicFormula, Modal, ModalThresholds, eval_inner
from .gridworld import IllegalActionError, enumerate_initial_states, legal_actions, observe, transition
from .inference import StatementUnassertable, joint_filter
from .pipeline import compute_factors
from .planner import Planner
from .scenario import Scenario

QUANTITIES = ("posterior", "acc", "info", "info_star", "cnorm", "cnecc", "csuff")


class OracleRefused(ValueError):
    pass


@dataclass
class OracleReport:
    scenario_id: str
    n_atoms: int
    deviations: Dict[str, float]
    t_c: Tuple[int, int]
    tolerance: float = 1e-6
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def lines(self) -> List[str]:
        out = [f"scenario {self.scenario_id}: {self.n_atoms} atoms, t_c pipeline={self.t_c[0]} oracle={self.t_c[1]}"]
        for q in QUANTITIES:
            status = "FAIL" if q in self.failures else "ok"
            out.append(f"  {q:<10} max |dev| = {self.deviations[q]:.3e}  {status}")
        if "t_c" in self.failures:
            out.append("  t_c        mismatch  FAIL")
        return out


@dataclass
class _Run:
    probs: List[float]
    uprobs: List[float]
    obs_ok: List[bool]
    snapshots: List[Optional[tuple]]  # (state, {world: (state, weight)}) per step, None once dead
    changed: List[bool]


def _holds(phi: EpistemicFormula, snap, theta: ModalThresholds) -> bool:
    state, particles = snap
    degree = sum((w for s, w in particles.values() if eval_inner(phi.inner, s)), Fraction(0))
    if phi.modal is Modal.BELIEVES:
        return degree >= Fraction(theta.believes)
    if phi.modal is Modal.CERTAIN:
        return degree >= Fraction(theta.certain)
    return degree >= Fraction(theta.knows) and eval_inner(phi.inner, state)


def _simulate(sc: Scenario, max_atoms: int):
    states = enumerate_initial_states(sc.map, sc.hidden_keys)
    beliefs = []
    for combo in itertools.combinations_with_replacement(range(len(states)), sc.K):
        beliefs.append({j: Fraction(c, sc.K) for j, c in Counter(combo).items()})
    n_atoms = len(states) * len(beliefs)
    if n_atoms > max_atoms:
        raise OracleRefused(f"{n_atoms} atoms exceeds the limit of {max_atoms}")

    true = [sc.true_state]
    for a in sc.trajectory:
        true.append(transition(true[-1], a))
    true_obs = [observe(s) for s in true]

    planner = Planner(sc.policy)
    beta = sc.policy.beta
    policy_memo: Dict[tuple, Dict] = {}

    def policy(tau, particles):
        key = (tau, tuple(sorted((j, w) for j, (_, w) in particles.items())))
        if key in policy_memo:
            return policy_memo[key]
        some_state = next(iter(particles.values()))[0]
        q = {}
        for a in legal_actions(some_state):
            q[a] = sum(float(w) * (1.0 + planner.optimal_cost(transition(s, a))) for s, w in particles.values())
        low = min(q.values())
        expq = {a: math.exp(-beta * (v - low)) for a, v in q.items()}
        z = sum(expq.values())
        policy_memo[key] = {a: v / z for a, v in expq.items()}
        return policy_memo[key]

    runs: Dict[Tuple[int, int], _Run] = {}
    for i, s0 in enumerate(states):
        for b, b0 in enumerate(beliefs):
            state = s0
            particles = {j: (states[j], w) for j, w in b0.items()}
            run = _Run([], [], [], [(state, particles)], [])
            for tau, a in enumerate(sc.trajectory, start=1):
                if run.snapshots[-1] is None or a not in legal_actions(state):
                    run.probs.append(0.0)
                    run.uprobs.append(0.0)
                    run.obs_ok.append(False)
                    run.snapshots.append(None)
                    run.changed.append(False)
                    continue
                run.probs.append(policy(tau - 1, particles).get(a, 0.0))
                run.uprobs.append(1.0 / len(legal_actions(state)))
                state = transition(state, a)
                o = observe(state)
                run.obs_ok.append(o == true_obs[tau])
                moved = {}
                for j, (s, w) in particles.items():
                    try:
                        nxt = transition(s, a)
                    except IllegalActionError:
                        continue
                    if observe(nxt) == o:
                        moved[j] = (nxt, w)
                if not moved:
                    run.snapshots.append(None)
                    run.changed.append(False)
                    continue
                z = sum(w for _, w in moved.values())
                moved = {j: (s, w / z) for j, (s, w) in moved.items()}
                run.changed.append({j: w for j, (_, w) in moved.items()} != {j: w for j, (_, w) in particles.items()})
                particles = moved
                run.snapshots.append((state, particles))
            runs[(i, b)] = run
    return n_atoms, runs


def _prod(xs) -> float:
    out = 1.0
    for x in xs:
        out *= x
    return out


def brute_force(sc: Scenario, max_atoms: int = 5000):
    """Exhaustive values of every factor; returns (n_atoms, t_c, posterior, per-statement dict)."""
    n_atoms, runs = _simulate(sc, max_atoms)
    t = len(sc.trajectory)
    theta = sc.thresholds

    def weight(run, upto, obs_upto, policy=True, observed=True):
        if run.snapshots[upto] is None:
            return 0.0
        if observed and not all(run.obs_ok[:obs_upto]):
            return 0.0
        return _prod((run.probs if policy else run.uprobs)[:upto])

    joint = {k: weight(r, t, t) for k, r in runs.items()}
    z = math.fsum(joint.values())
    posterior = {k: v / z for k, v in joint.items()}
    sees = {k: weight(r, t, t, policy=False) for k, r in runs.items()}
    blind = {k: weight(r, t, t, policy=False, observed=False) for k, r in runs.items()}

    changes = [tau for k, r in runs.items() if posterior[k] > 0 for tau, c in enumerate(r.changed, start=1) if c]
    t_c = max(changes) + 1 if changes else 1
    past = {k: weight(r, t_c - 1, t_c - 1) for k, r in runs.items()}
    full = {k: (weight(r, t, t_c - 1) if t_c <= t else past[k]) for k, r in runs.items()}

    values = {}
    for st in sc.statements:
        phi = st.formula
        now = {k: r.snapshots[t] is not None and _holds(phi, r.snapshots[t], theta) for k, r in runs.items()}
        then = {k: r.snapshots[t_c - 1] is not None and _holds(phi, r.snapshots[t_c - 1], theta) for k, r in runs.items()}

        pt = math.fsum(posterior[k] for k in runs if now[k])
        pf = math.fsum(posterior[k] for k in runs if not now[k])
        st_t = math.fsum(sees[k] for k in runs if now[k])
        st_f = math.fsum(sees[k] for k in runs if not now[k])
        if st_f == 0:
            acc = 1.0
        elif st_t == 0:
            acc = 0.0
        else:
            acc = (pt / st_t) / (pt / st_t + pf / st_f)
        bt = math.fsum(blind[k] for k in runs if now[k])
        if st_t <= 0 or bt <= 0:
            raise StatementUnassertable(f"statement {st.id} unassertable for listener")
        info = -math.log(st_t / (st_t + st_f))
        info_star = -math.log(bt / math.fsum(blind.values()))

        past_t = math.fsum(past[k] for k in runs if then[k])
        past_f = math.fsum(past[k] for k in runs if not then[k])
        cnorm = past_t / (past_t + past_f)
        full_t = math.fsum(full[k] for k in runs if then[k])
        full_f = math.fsum(full[k] for k in runs if not then[k])
        csuff = full_t / past_t if past_t > 0 else 0.0
        cnecc = 1.0 - full_f / past_f if past_f > 0 else 0.0
        values[st.id] = {"acc": acc, "info": info, "info_star": info_star, "cnorm": cnorm, "cnecc": cnecc, "csuff": csuff}
    return n_atoms, t_c, posterior, values


def oracle_check(sc: Scenario, max_atoms: int = 5000, tolerance: float = 1e-6, corrupt: Optional[str] = None) -> OracleReport:
    """Compare pipeline values against brute force. ``corrupt`` names a
    quantity to perturb by 1e-3 before comparison (fault injection)."""
    if corrupt is not None and corrupt not in QUANTITIES:
        raise ValueError(f"unknown quantity {corrupt!r}")
    n_atoms, t_c, posterior, values = brute_force(sc, max_atoms)

    model = sc.build_model()
    sf = compute_factors(sc, model)
    post = joint_filter(model)
    got = {(a.s0, a.b0): a.weight for a in post.atoms}

    def bump(q):
        return 1e-3 if q == corrupt else 0.0

    dev = {q: 0.0 for q in QUANTITIES}
    dev["posterior"] = max(abs(got.get(k, 0.0) + bump("posterior") - v) for k, v in posterior.items())
    for fv in sf.vectors:
        ref = values[fv.statement_id]
        for q in QUANTITIES[1:]:
            dev[q] = max(dev[q], abs(getattr(fv, q) + bump(q) - ref[q]))
    failures = [q for q in QUANTITIES if not dev[q] <= tolerance]
    if sf.t_c != t_c:
        failures.append("t_c")
    return OracleReport(sc.id, n_atoms, dev, (sf.t_c, t_c), tolerance, failures)
