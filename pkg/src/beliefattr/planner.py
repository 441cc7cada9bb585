"""Goal-directed cost estimates and the Boltzmann-rational policy.

Belief-state action costs use the QMDP approximation: the expected
fully-observable cost-to-go over the belief's particles.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

from .beliefs import Belief, BeliefAnnihilated, advance, update
from .gridworld import Action, IllegalActionError, NOOP, WorldState, legal_actions, observe, successors, transition


@dataclass(frozen=True)
class PolicyParams:
    beta: float = 1.0
    unreachable_penalty: float = 1000.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        if self.unreachable_penalty <= 0:
            raise ValueError("unreachable_penalty must be positive")


def softmax_policy(q_values: Mapping[Action, float], beta: float) -> Dict[Action, float]:
    """P(a) proportional to exp(-beta * q(a))."""
    if not q_values:
        raise ValueError("no legal actions")
    logits = {a: -beta * q for a, q in q_values.items()}
    top = max(logits.values())
    weights = {a: math.exp(v - top) for a, v in logits.items()}
    total = sum(weights.values())
    return {a: w / total for a, w in weights.items()}


class Planner:
    """Boltzmann-rational agent with QMDP action costs.

    Fully observable costs-to-go are computed by exploring the state graph
    reachable from a queried state and running a backward breadth-first
    search from the goal states; every explored state gets its exact distance,
    so each world is explored once.
    """

    def __init__(self, params: PolicyParams = PolicyParams()):
        self.params = params
        self._dist: Dict[WorldState, Optional[int]] = {}

    def _explore(self, root: WorldState) -> None:
        preds: Dict[WorldState, List[WorldState]] = {root: []}
        frontier = deque([root])
        goals = []
        while frontier:
            cur = frontier.popleft()
            if cur.chest_taken:
                goals.append(cur)
                continue
            for a, nxt in successors(cur):
                if a == NOOP:
                    continue
                if nxt not in preds:
                    preds[nxt] = []
                    frontier.append(nxt)
                preds[nxt].append(cur)
        dist: Dict[WorldState, int] = {g: 0 for g in goals}
        frontier = deque(goals)
        while frontier:
            cur = frontier.popleft()
            for prev in preds[cur]:
                if prev not in dist:
                    dist[prev] = dist[cur] + 1
                    frontier.append(prev)
        for s in preds:
            self._dist[s] = dist.get(s)

    def shortest_plan_length(self, w: WorldState) -> Optional[int]:
        if w not in self._dist:
            self._explore(w)
        return self._dist[w]

    def optimal_cost(self, w: WorldState) -> float:
        n = self.shortest_plan_length(w)
        return self.params.unreachable_penalty if n is None else float(n)

    def q_value(self, b: Belief, a: Action) -> float:
        total = 0.0
        for p in b.particles:
            try:
                nxt = transition(p.state, a)
            except IllegalActionError as err:
                raise IllegalActionError(f"{a} is not legal in particle world {p.world}") from err
            total += float(p.weight) * (1.0 + self.optimal_cost(nxt))
        return total

    def q_values(self, b: Belief) -> Dict[Action, float]:
        return {a: self.q_value(b, a) for a in legal_actions(b.particles[0].state)}

    def action_distribution(self, b: Belief) -> Dict[Action, float]:
        return softmax_policy(self.q_values(b), self.params.beta)

    def trajectory_likelihood(self, s0: WorldState, b0: Belief, actions: Sequence[Action]) -> float:
        """Probability that an agent in ``s0`` with belief ``b0`` takes ``actions``."""
        s, b, prob = s0, b0, 1.0
        for a in actions:
            if a not in legal_actions(s):
                return 0.0
            prob *= self.action_distribution(b)[a]
            s = transition(s, a)
            try:
                b = update(advance(b, a), observe(s))
            except BeliefAnnihilated:
                return 0.0
        return prob


def optimal_cost(w: WorldState, params: PolicyParams = PolicyParams()) -> float:
    return Planner(params).optimal_cost(w)


def action_distribution(b: Belief, params: PolicyParams = PolicyParams()) -> Dict[Action, float]:
    return Planner(params).action_distribution(b)
