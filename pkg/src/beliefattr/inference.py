"""Exact joint filtering over (world, belief) pairs, accuracy and informativity.

An atom is a pair (initial world, initial belief) together with its rollout
under the observed actions. Across all atoms the agent's candidate worlds
follow the same action sequence, so the state of world ``j`` after ``tau``
steps is shared, and an agent's belief after ``tau`` steps depends only on its
initial belief and the observations it received. ``ObserverModel`` memoises
belief rollouts on exactly that key.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .beliefs import Belief, Particle, belief_changed, enumerate_belief_prior
from .elot import EpistemicFormula, ModalThresholds, eval_epistemic
from .gridworld import Action, GridMap, IllegalActionError, Observation, WorldState, enumerate_initial_states, legal_actions, observe, transition
from .planner import Planner, PolicyParams


class TrajectoryImpossible(ValueError):
    pass


class StatementUnassertable(ValueError):
    pass


class Listener(enum.Enum):
    """Action-blind listeners used for informativity."""

    SEES_ENVIRONMENT = "sees-env"
    IGNORANT = "ignorant"


@dataclass
class _Node:
    belief: Optional[Belief]
    factor: float
    ufactor: float
    lik: float
    ulik: float
    changes: Tuple[int, ...]
    parent: Optional["_Node"]


@dataclass(frozen=True)
class Atom:
    s0: int
    b0: int
    state: WorldState
    belief: Belief
    weight: float
    base: float
    changes: Tuple[int, ...]


@dataclass(frozen=True)
class JointPosterior:
    """Distribution over atoms after ``t`` steps.

    ``weight`` conditions on actions and observations; ``base`` replaces the
    agent's policy with a uniform choice among legal actions (an observer who
    sees the environment but ignores why the agent acted). Both are normalised.
    """

    atoms: Tuple[Atom, ...]
    t: int

    def mass(self, pred: Callable[[Atom], bool]) -> float:
        return math.fsum(a.weight for a in self.atoms if pred(a))


class ObserverModel:
    """Generative model of one map and one observed trajectory."""

    def __init__(
        self,
        gmap: GridMap,
        hidden_keys: Sequence[str],
        actions: Sequence[Action],
        true_state: WorldState,
        params: PolicyParams = PolicyParams(),
        K: int = 3,
    ):
        self.map = gmap
        self.actions = tuple(actions)
        self.t = len(self.actions)
        self.params = params
        self.planner = Planner(params)
        self.states = enumerate_initial_states(gmap, hidden_keys)
        self.beliefs = enumerate_belief_prior(self.states, K).beliefs
        self.prior = 1.0 / (len(self.states) * len(self.beliefs))

        self._pid_index: Dict[Tuple[int, Observation], int] = {}
        self._pid_obs: List[Optional[Observation]] = [None]
        self.traces = [self._trace(s) for s in self.states]
        self.obs_ids = [self._prefix_ids(tr) for tr in self.traces]

        true_trace = self._trace(true_state)
        if len(true_trace) <= self.t:
            bad = len(true_trace)
            raise IllegalActionError(f"action {bad} ({self.actions[bad - 1]}) is illegal in the true world")
        self.true_trace = true_trace
        self.observations = tuple(observe(s) for s in true_trace[1:])
        self.true_ids = self._prefix_ids(true_trace)

        self._nodes: Dict[Tuple[int, int, int], Optional[_Node]] = {}
        self._policy: Dict[Tuple[int, tuple], Dict[Action, float]] = {}

    @property
    def n_atoms(self) -> int:
        return len(self.states) * len(self.beliefs)

    def _trace(self, s: WorldState) -> List[WorldState]:
        out = [s]
        for a in self.actions:
            if a not in legal_actions(s):
                break
            s = transition(s, a)
            out.append(s)
        return out

    def _prefix_ids(self, trace: Sequence[WorldState]) -> List[int]:
        ids = [0]
        for s in trace[1:]:
            key = (ids[-1], observe(s))
            if key not in self._pid_index:
                self._pid_index[key] = len(self._pid_obs)
                self._pid_obs.append(key[1])
            ids.append(self._pid_index[key])
        return ids

    def consistent(self, world: int, tau: int) -> bool:
        """Whether ``world`` produces the observed o_1..o_tau."""
        ids = self.obs_ids[world]
        return len(ids) > tau and ids[tau] == self.true_ids[tau]

    def policy(self, tau: int, belief: Belief) -> Dict[Action, float]:
        """Action distribution of a belief held after ``tau`` steps."""
        key = (tau, belief.key)
        dist = self._policy.get(key)
        if dist is None:
            dist = self._policy[key] = self.planner.action_distribution(belief)
        return dist

    def node(self, b0: int, world: int, tau: int) -> Optional[_Node]:
        """Belief rollout for initial belief ``b0`` in ``world`` after ``tau``
        steps, or None when the action is illegal or the belief is annihilated."""
        ids = self.obs_ids[world]
        if len(ids) <= tau:
            return None
        return self._node(b0, tau, ids[tau], world)

    def _node(self, b0: int, tau: int, pid: int, world: int) -> Optional[_Node]:
        key = (b0, tau, pid)
        if key in self._nodes:
            return self._nodes[key]
        if tau == 0:
            node = _Node(self.beliefs[b0], 1.0, 1.0, 1.0, 1.0, (), None)
        else:
            parent = self._node(b0, tau - 1, self.obs_ids[world][tau - 1], world)
            node = None if parent is None else self._extend(parent, tau, pid)
        self._nodes[key] = node
        return node

    def _extend(self, parent: _Node, tau: int, pid: int) -> Optional[_Node]:
        a = self.actions[tau - 1]
        prev = parent.belief
        factor = self.policy(tau - 1, prev).get(a, 0.0)
        ufactor = 1.0 / len(legal_actions(prev.particles[0].state))
        kept = []
        for p in prev.particles:
            ids = self.obs_ids[p.world]
            if len(ids) > tau and ids[tau] == pid:
                kept.append(p)
        if not kept:
            return None
        total = sum(p.weight for p in kept)
        belief = Belief(tuple(Particle(p.world, self.traces[p.world][tau], p.weight / total) for p in kept))
        changes = parent.changes + ((tau,) if belief_changed(prev, belief) else ())
        return _Node(belief, factor, ufactor, parent.lik * factor, parent.ulik * ufactor, changes, parent)

    def rollout_probability(self, b0: int, world: int, start: int, end: int) -> float:
        """P(a_start..a_end | belief path) for atom (world, b0); steps are 1-based."""
        node = self.node(b0, world, end)
        if node is None:
            return 0.0
        prob = 1.0
        for _ in range(end, start - 1, -1):
            prob *= node.factor
            node = node.parent
        return prob


def joint_filter(model: ObserverModel, t: Optional[int] = None, listener: Optional[Listener] = None) -> JointPosterior:
    """Posterior over atoms after ``t`` steps (default: the whole trajectory).

    With ``listener=None`` atoms are weighted by the agent's policy; a listener
    replaces every action factor with the uniform distribution over legal
    actions, and the ignorant listener also drops observation conditioning.
    """
    t = model.t if t is None else t
    if not 0 <= t <= model.t:
        raise ValueError(f"t must lie in [0, {model.t}]")
    raw = []
    for i in range(len(model.states)):
        seen = model.consistent(i, t)
        if listener is not Listener.IGNORANT and not seen:
            continue
        for b in range(len(model.beliefs)):
            node = model.node(b, i, t)
            if node is None:
                continue
            base = model.prior * node.ulik if seen else 0.0
            if listener is None:
                weight = model.prior * node.lik
            else:
                weight = model.prior * node.ulik
                if listener is Listener.IGNORANT:
                    base = weight
            if base > 0 or weight > 0:
                raw.append((i, b, node, weight, base))
    total = math.fsum(r[3] for r in raw)
    base_total = math.fsum(r[4] for r in raw)
    if total <= 0:
        raise TrajectoryImpossible("trajectory impossible under model")
    base_total = base_total or 1.0
    atoms = tuple(
        Atom(i, b, model.traces[i][t], node.belief, w / total, base / base_total, node.changes)
        for i, b, node, w, base in raw
    )
    return JointPosterior(atoms, t)


def truth_table(phi: EpistemicFormula, post: JointPosterior, theta: ModalThresholds) -> List[bool]:
    cache: Dict[tuple, bool] = {}
    out = []
    for a in post.atoms:
        key = (a.s0, a.belief.key)
        if key not in cache:
            cache[key] = eval_epistemic(phi, a.state, a.belief, theta)
        out.append(cache[key])
    return out


def posterior_probability(phi: EpistemicFormula, post: JointPosterior, theta: ModalThresholds = ModalThresholds()) -> float:
    truth = truth_table(phi, post, theta)
    return math.fsum(a.weight for a, v in zip(post.atoms, truth) if v)


def accuracy(phi: EpistemicFormula, post: JointPosterior, theta: ModalThresholds = ModalThresholds()) -> float:
    """Posterior probability of the statement under a 50-50 prior on its truth.

    Each atom's weight is multiplied by 0.5/pi_T or 0.5/pi_F, the masses of
    true and false atoms before action likelihoods are applied.
    """
    truth = truth_table(phi, post, theta)
    pi_t = math.fsum(a.base for a, v in zip(post.atoms, truth) if v)
    pi_f = math.fsum(a.base for a, v in zip(post.atoms, truth) if not v)
    if pi_f == 0:
        return 1.0
    if pi_t == 0:
        return 0.0
    m_t = math.fsum(a.weight * 0.5 / pi_t for a, v in zip(post.atoms, truth) if v)
    m_f = math.fsum(a.weight * 0.5 / pi_f for a, v in zip(post.atoms, truth) if not v)
    return m_t / (m_t + m_f)


def kl_divergence(p: Dict, q: Dict) -> float:
    """KL(p || q) in nats with 0 log 0 = 0."""
    total = 0.0
    for k, pk in p.items():
        if pk > 0:
            qk = q.get(k, 0.0)
            if qk <= 0:
                return math.inf
            total += pk * math.log(pk / qk)
    return max(total, 0.0)


def informativity(phi: EpistemicFormula, listener_post: JointPosterior, theta: ModalThresholds = ModalThresholds()) -> float:
    """Information gain of asserting ``phi`` to a listener, over (state, belief)."""
    truth = truth_table(phi, listener_post, theta)
    base: Dict[tuple, float] = {}
    cond: Dict[tuple, float] = {}
    for a, v in zip(listener_post.atoms, truth):
        key = (a.s0, a.belief.key)
        base[key] = base.get(key, 0.0) + a.weight
        if v:
            cond[key] = cond.get(key, 0.0) + a.weight
    mass = math.fsum(cond.values())
    if mass <= 0:
        raise StatementUnassertable("statement unassertable for listener")
    cond = {k: v / mass for k, v in cond.items()}
    return kl_divergence(cond, base)
