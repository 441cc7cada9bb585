"""Causal normality, necessity and sufficiency of belief statements.

Interventions are hypothetical: the statement's truth value is conditioned on
at the intervention step, holding the past fixed, and the agent is then rolled
forward under its own policy and its own world's observations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

from .elot import EpistemicFormula, ModalThresholds
from .inference import Atom, JointPosterior, ObserverModel, joint_filter, truth_table


class InterventionImpossible(ValueError):
    pass


@dataclass(frozen=True)
class InterventionPoint:
    """``t_c`` is the first step whose action follows the last belief change.

    ``past_posterior`` conditions on a_1..a_{t_c-1} and o_1..o_{t_c-1}; its
    atoms carry the (state, belief) that governs action ``t_c``.
    """

    t_c: int
    past_posterior: JointPosterior


@dataclass(frozen=True)
class CausalParams:
    alpha_cnecc: float = 1.0
    alpha_csuff: float = 1.0

    def __post_init__(self):
        if self.alpha_cnecc < 0 or self.alpha_csuff < 0:
            raise ValueError("causal exponents must be non-negative")


def find_tc(model: ObserverModel) -> InterventionPoint:
    final = joint_filter(model)
    steps = [tau for a in final.atoms if a.weight > 0 for tau in a.changes]
    t_c = max(steps) + 1 if steps else 1
    return InterventionPoint(t_c, joint_filter(model, t_c - 1))


def causal_normality(phi: EpistemicFormula, ip: InterventionPoint, theta: ModalThresholds = ModalThresholds()) -> float:
    post = ip.past_posterior
    truth = truth_table(phi, post, theta)
    support = [v for a, v in zip(post.atoms, truth) if a.weight > 0]
    if all(support):
        return 1.0
    if not any(support):
        return 0.0
    return min(1.0, math.fsum(a.weight for a, v in zip(post.atoms, truth) if v))


def intervene(
    ip: InterventionPoint, phi: EpistemicFormula, value: bool, theta: ModalThresholds = ModalThresholds()
) -> List[Tuple[Atom, float]]:
    """Past posterior restricted to atoms where the statement equals ``value``."""
    post = ip.past_posterior
    truth = truth_table(phi, post, theta)
    kept = [(a, a.weight) for a, v in zip(post.atoms, truth) if v == value and a.weight > 0]
    total = math.fsum(w for _, w in kept)
    if total <= 0:
        raise InterventionImpossible(f"no atom with statement = {value}")
    return [(a, w / total) for a, w in kept]


def rollout_match(model: ObserverModel, ip: InterventionPoint, dist: List[Tuple[Atom, float]]) -> float:
    """Probability that the agent takes the observed actions t_c..t."""
    if ip.t_c > model.t:
        return 1.0
    total = math.fsum(w * model.rollout_probability(a.b0, a.s0, ip.t_c, model.t) for a, w in dist)
    return min(1.0, total)


def causal_necessity(
    phi: EpistemicFormula, ip: InterventionPoint, model: ObserverModel, theta: ModalThresholds = ModalThresholds()
) -> float:
    try:
        dist = intervene(ip, phi, False, theta)
    except InterventionImpossible:
        return 0.0
    return 1.0 - rollout_match(model, ip, dist)


def causal_sufficiency(
    phi: EpistemicFormula, ip: InterventionPoint, model: ObserverModel, theta: ModalThresholds = ModalThresholds()
) -> float:
    try:
        dist = intervene(ip, phi, True, theta)
    except InterventionImpossible:
        return 0.0
    return rollout_match(model, ip, dist)


def causal_strength(cnorm: float, cnecc: float, csuff: float, cp: CausalParams = CausalParams()) -> float:
    return ((1.0 - cnorm) * cnecc) ** cp.alpha_cnecc * (cnorm * csuff) ** cp.alpha_csuff
