"""Scores, Plackett-Luce rankings and coefficient fitting."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

TERMS = ("acc", "info", "info_star", "cnecc", "csuff")
_ALPHA = {"acc": "alpha_acc", "info": "alpha_info", "info_star": "alpha_info", "cnecc": "alpha_cnecc", "csuff": "alpha_csuff"}
_ALIASES = {
    "acc": ("acc",),
    "info": ("info",),
    "info*": ("info_star",),
    "info_star": ("info_star",),
    "causal": ("cnecc", "csuff"),
    "cnecc": ("cnecc",),
    "csuff": ("csuff",),
    "all": ("acc", "info", "cnecc", "csuff"),
}

GRIDS = {"coarse": (1.0, 0.1), "fine": (0.2, 0.02)}


@dataclass(frozen=True)
class FactorVector:
    statement_id: str
    acc: float
    info: float
    info_star: float
    cnorm: float
    cnecc: float
    csuff: float


@dataclass(frozen=True)
class Coefficients:
    alpha_acc: float = 0.0
    alpha_info: float = 0.0
    alpha_cnecc: float = 0.0
    alpha_csuff: float = 0.0
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        for name in ("alpha_acc", "alpha_info", "alpha_cnecc", "alpha_csuff"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class RankResult:
    permutations: Tuple[Tuple[Tuple[int, ...], float], ...]
    average_rank: Tuple[float, ...]
    model_name: str = ""


def parse_factors(spec) -> Tuple[str, ...]:
    """Selector such as ``"acc,info,causal"`` to score terms, in canonical order."""
    names = spec.split(",") if isinstance(spec, str) else list(spec)
    terms = set()
    for name in names:
        name = name.strip().lower()
        if not name:
            continue
        if name not in _ALIASES:
            raise ValueError(f"unknown factor {name!r}")
        terms.update(_ALIASES[name])
    if {"info", "info_star"} <= terms:
        raise ValueError("info and info* share one coefficient; select only one")
    if not terms:
        raise ValueError("no factors selected")
    return tuple(t for t in TERMS if t in terms)


def log_terms(fv: FactorVector, terms: Sequence[str], epsilon: float = 1e-6) -> Dict[str, float]:
    """Per-unit-coefficient contribution of each term to the score.

    Informativity is already a log quantity and enters linearly; the causal
    factor splits into its necessity and sufficiency parts.
    """
    out = {}
    for term in terms:
        if term == "acc":
            out[term] = math.log(max(fv.acc, epsilon))
        elif term == "info":
            out[term] = fv.info
        elif term == "info_star":
            out[term] = fv.info_star
        elif term == "cnecc":
            out[term] = math.log(max((1.0 - fv.cnorm) * fv.cnecc, epsilon))
        elif term == "csuff":
            out[term] = math.log(max(fv.cnorm * fv.csuff, epsilon))
        else:
            raise ValueError(f"unknown term {term!r}")
    return out


def score(fv: FactorVector, c: Coefficients, factors) -> float:
    terms = parse_factors(factors)
    logs = log_terms(fv, terms, c.epsilon)
    return math.fsum(getattr(c, _ALPHA[t]) * logs[t] for t in terms)


def attribute_probabilities(scores: Sequence[float]) -> np.ndarray:
    s = np.asarray(scores, dtype=float)
    if s.size == 0:
        raise ValueError("need at least one statement")
    e = np.exp(s - s.max())
    return e / e.sum()


def _perm_log_probs(scores: np.ndarray) -> Tuple[List[Tuple[int, ...]], np.ndarray]:
    """Plackett-Luce log probability of every permutation along the last axis."""
    n = scores.shape[-1]
    perms = list(itertools.permutations(range(n)))
    out = np.empty(scores.shape[:-1] + (len(perms),))
    for k, perm in enumerate(perms):
        total = np.zeros(scores.shape[:-1])
        for i in range(n):
            rest = scores[..., list(perm[i:])]
            total = total + scores[..., perm[i]] - np.logaddexp.reduce(rest, axis=-1)
        out[..., k] = total
    return perms, out


def average_ranks(scores: np.ndarray) -> np.ndarray:
    """Expected position (1 = best) of each item, vectorised over leading axes."""
    scores = np.asarray(scores, dtype=float)
    perms, logp = _perm_log_probs(scores)
    probs = np.exp(logp)
    n = scores.shape[-1]
    position = np.zeros((len(perms), n))
    for k, perm in enumerate(perms):
        for pos, item in enumerate(perm):
            position[k, item] = pos + 1
    return probs @ position


def ranking_distribution(scores: Sequence[float], model_name: str = "") -> RankResult:
    s = np.asarray(scores, dtype=float)
    perms, logp = _perm_log_probs(s)
    probs = np.exp(logp)
    avg = [0.0] * len(s)
    for perm, p in zip(perms, probs):
        for pos, item in enumerate(perm):
            avg[item] += p * (pos + 1)
    return RankResult(tuple((perm, float(p)) for perm, p in zip(perms, probs)), tuple(avg), model_name)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("pearson needs two equal-length samples of size >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0 or sy == 0:
        raise ValueError("correlation undefined for zero-variance data")
    return float(np.clip((dx @ dy) / (sx * sy), -1.0, 1.0))


def _pearson_rows(model: np.ndarray, human: np.ndarray) -> np.ndarray:
    dm = model - model.mean(axis=1, keepdims=True)
    dh = human - human.mean()
    num = dm @ dh
    den = np.sqrt((dm * dm).sum(axis=1)) * math.sqrt(float(dh @ dh))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = num / den
    # constant model rankings have no defined correlation
    r[~(den > 1e-12)] = np.nan
    return r


@dataclass(frozen=True)
class FitResult:
    coefficients: Coefficients
    r: float
    terms: Tuple[str, ...]
    model_ranks: Tuple[Tuple[float, ...], ...]


def _term_matrix(scenarios: Sequence[Sequence[FactorVector]], terms, epsilon) -> np.ndarray:
    n = len(scenarios[0])
    if any(len(sc) != n for sc in scenarios):
        raise ValueError("every scenario needs the same number of statements")
    return np.array([[[log_terms(fv, terms, epsilon)[t] for t in terms] for fv in sc] for sc in scenarios])


def _search(L: np.ndarray, human: np.ndarray, axes: Sequence[np.ndarray], chunk: int = 20000):
    best_r, best_cell = -math.inf, None
    cells = itertools.product(*axes)
    while True:
        block = np.array(list(itertools.islice(cells, chunk)), dtype=float)
        if block.size == 0:
            break
        scores = np.einsum("mk,snk->msn", block, L)
        ranks = average_ranks(scores).reshape(len(block), -1)
        r = _pearson_rows(ranks, human)
        r = np.where(np.isnan(r), -np.inf, r)
        k = int(np.argmax(r))
        if r[k] > best_r:
            best_r, best_cell = float(r[k]), block[k]
    return best_r, best_cell


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(round((hi - lo) / step))
    return np.round(lo + step * np.arange(n + 1), 10)


def fit(
    scenarios: Sequence[Sequence[FactorVector]],
    human: Sequence[Sequence[float]],
    factors,
    grid: str = "fine",
    epsilon: float = 1e-6,
    bounds: Tuple[float, float] = (0.0, 10.0),
) -> FitResult:
    """Grid search for coefficients maximising the pooled Pearson correlation
    between model and human average ranks.

    A coarse pass over ``bounds`` is followed by one finer pass around the
    best coarse cell. The first maximum in lexicographic order wins.
    """
    terms = parse_factors(factors)
    coarse, finer = GRIDS[grid]
    h = np.array([r for sc in human for r in sc], dtype=float)
    if h.std() == 0:
        raise ValueError("human ranks are constant; correlation undefined")
    L = _term_matrix(scenarios, terms, epsilon)
    if L.shape[0] * L.shape[1] != h.size:
        raise ValueError("human ranks must cover every scenario statement")
    lo, hi = bounds
    best_r, cell = _search(L, h, [_axis(lo, hi, coarse)] * len(terms))
    if cell is None:
        raise ValueError("model rankings are constant for every coefficient; correlation undefined")
    axes = [_axis(max(lo, c - coarse), min(hi, c + coarse), finer) for c in cell]
    fine_r, fine_cell = _search(L, h, axes)
    if fine_cell is not None and fine_r > best_r:
        best_r, cell = fine_r, fine_cell
    alphas = {name: 0.0 for name in ("alpha_acc", "alpha_info", "alpha_cnecc", "alpha_csuff")}
    for t, value in zip(terms, cell):
        alphas[_ALPHA[t]] = float(value)
    coef = Coefficients(**alphas, epsilon=epsilon)
    ranks = average_ranks(np.einsum("k,snk->sn", np.asarray(cell, dtype=float), L))
    return FitResult(coef, best_r, terms, tuple(tuple(map(float, row)) for row in ranks))


@dataclass(frozen=True)
class BootstrapInterval:
    low: float
    high: float
    level: float
    resamples: int
    valid: int
    degenerate: bool


def bootstrap_ci(
    model_ranks: Sequence[Sequence[float]],
    human_ranks: Sequence[Sequence[float]],
    resamples: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> BootstrapInterval:
    """Percentile bootstrap of the pooled correlation, resampling scenarios."""
    if len(model_ranks) < 2 or len(model_ranks) != len(human_ranks):
        raise ValueError("need at least two scenarios with matching model and human ranks")
    m = [np.asarray(r, dtype=float) for r in model_ranks]
    h = [np.asarray(r, dtype=float) for r in human_ranks]
    rng = np.random.default_rng(seed)
    values = []
    n = len(m)
    for _ in range(resamples):
        idx = rng.integers(0, n, size=n)
        x = np.concatenate([m[i] for i in idx])
        y = np.concatenate([h[i] for i in idx])
        try:
            values.append(pearson(x, y))
        except ValueError:
            continue
    n_points = sum(len(r) for r in m)
    if not values:
        return BootstrapInterval(math.nan, math.nan, level, resamples, 0, True)
    tail = (1.0 - level) / 2.0
    low, high = np.quantile(values, [tail, 1.0 - tail])
    degenerate = n_points <= 2 or len(values) < resamples / 2
    return BootstrapInterval(float(low), float(high), level, resamples, len(values), degenerate)
