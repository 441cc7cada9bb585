"""Particle beliefs over candidate worlds."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Sequence, Tuple

from .gridworld import Action, Observation, WorldState, observe, transition


class BeliefAnnihilated(ValueError):
    """Every particle contradicts the observation."""


@dataclass(frozen=True)
class Particle:
    world: int
    state: WorldState
    weight: Fraction


@dataclass(frozen=True)
class Belief:
    """Weighted candidate worlds. ``world`` indexes the initial-state list;
    ``state`` is that world advanced by the agent's own actions."""

    particles: Tuple[Particle, ...]

    def __post_init__(self):
        if not self.particles:
            raise ValueError("belief needs at least one particle")
        worlds = [p.world for p in self.particles]
        if len(set(worlds)) != len(worlds):
            raise ValueError("duplicate world in belief")
        if any(p.weight <= 0 for p in self.particles):
            raise ValueError("particle weights must be positive")
        if sum(p.weight for p in self.particles) != 1:
            raise ValueError("particle weights must sum to 1")

    @property
    def key(self) -> Tuple[Tuple[int, Fraction], ...]:
        return tuple((p.world, p.weight) for p in self.particles)

    @property
    def weights(self) -> Dict[int, float]:
        return {p.world: float(p.weight) for p in self.particles}

    def __str__(self) -> str:
        return " ".join(f"{p.world}:{float(p.weight):.6g}" for p in self.particles)


@dataclass(frozen=True)
class BeliefPriorSupport:
    beliefs: Tuple[Belief, ...]
    K: int = 3


def enumerate_belief_prior(states: Sequence[WorldState], K: int = 3) -> BeliefPriorSupport:
    """One belief per multiset of size ``K`` over ``states``; a world drawn
    ``c`` times gets weight ``c/K``."""
    if not states:
        raise ValueError("need at least one state")
    beliefs = []
    for combo in itertools.combinations_with_replacement(range(len(states)), K):
        counts = Counter(combo)
        beliefs.append(Belief(tuple(Particle(w, states[w], Fraction(c, K)) for w, c in sorted(counts.items()))))
    return BeliefPriorSupport(tuple(beliefs), K)


def advance(b: Belief, a: Action) -> Belief:
    """Apply the agent's own action inside every candidate world."""
    return Belief(tuple(Particle(p.world, transition(p.state, a), p.weight) for p in b.particles))


def update(b: Belief, o: Observation) -> Belief:
    kept = [p for p in b.particles if observe(p.state) == o]
    if not kept:
        raise BeliefAnnihilated("belief annihilated")
    if len(kept) == len(b.particles):
        return b
    total = sum(p.weight for p in kept)
    return Belief(tuple(Particle(p.world, p.state, p.weight / total) for p in kept))


def belief_changed(prev: Belief, nxt: Belief, tol: float = 1e-12) -> bool:
    before = {p.world: p.weight for p in prev.particles}
    after = {p.world: p.weight for p in nxt.particles}
    if before.keys() != after.keys():
        return True
    return any(abs(float(before[w] - after[w])) > tol for w in before)

