"""Scenario files (YAML, one scenario per file) and manifests."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import yaml

from .elot import ELoTSyntaxError, EpistemicFormula, ModalThresholds, parse
from .gridworld import Action, GridMap, MapParseError, enumerate_initial_states, initial_state, legal_actions, parse_action, parse_map, transition
from .inference import ObserverModel
from .planner import PolicyParams

N_STATEMENTS = 3


class ScenarioError(ValueError):
    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class Statement:
    id: str
    text: str
    formula: EpistemicFormula


@dataclass(frozen=True)
class Scenario:
    id: str
    map_text: str
    map: GridMap
    hidden_keys: Tuple[str, ...]
    box_contents: Tuple[Optional[str], ...]
    trajectory: Tuple[Action, ...]
    statements: Tuple[Statement, ...]
    goal: str = "chest"
    policy: PolicyParams = PolicyParams()
    thresholds: ModalThresholds = ModalThresholds()
    K: int = 3

    @property
    def true_state(self):
        return initial_state(self.map, self.box_contents)

    def build_model(self) -> ObserverModel:
        return ObserverModel(self.map, self.hidden_keys, self.trajectory, self.true_state, self.policy, self.K)

    def with_overrides(self, policy: Optional[PolicyParams] = None, thresholds: Optional[ModalThresholds] = None) -> "Scenario":
        return replace(self, policy=policy or self.policy, thresholds=thresholds or self.thresholds)


def _require(data: Mapping, key: str, path: str):
    if key not in data:
        raise ScenarioError(f"missing required field {key!r}", path)
    return data[key]


def _numbers(data: Any, path: str, allowed: Sequence[str]) -> Dict[str, float]:
    if data is None:
        return {}
    if not isinstance(data, Mapping):
        raise ScenarioError("expected a mapping", path)
    out = {}
    for k, v in data.items():
        if k not in allowed:
            raise ScenarioError(f"unknown field {k!r}", path)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ScenarioError(f"{k} must be a number", f"{path}.{k}")
        out[k] = float(v)
    return out


def scenario_from_dict(data: Mapping, source: str = "") -> Scenario:
    if not isinstance(data, Mapping):
        raise ScenarioError("scenario must be a mapping", source)
    sid = str(_require(data, "id", "id"))
    map_text = _require(data, "map", "map")
    if not isinstance(map_text, str):
        raise ScenarioError("map must be a text block", "map")
    try:
        gmap = parse_map(map_text)
    except (MapParseError, ValueError) as err:
        raise ScenarioError(str(err), "map") from err

    hidden = data.get("hidden_keys", [])
    if not isinstance(hidden, list) or not all(isinstance(c, str) for c in hidden):
        raise ScenarioError("expected a list of colors", "hidden_keys")
    if len(hidden) > 2:
        raise ScenarioError("at most 2 hidden keys", "hidden_keys")
    hidden_keys = tuple(c.lower() for c in hidden)

    alloc = data.get("key_allocation") or {}
    if not isinstance(alloc, Mapping):
        raise ScenarioError("expected a mapping of box -> color", "key_allocation")
    contents: List[Optional[str]] = [None] * len(gmap.boxes)
    for box, color in alloc.items():
        if box not in gmap.box_names:
            raise ScenarioError(f"unknown box {box!r}", f"key_allocation.{box}")
        contents[gmap.box_names.index(box)] = str(color).lower()
    remaining = list(hidden_keys)
    for c in contents:
        if c is None:
            continue
        if c not in remaining:
            raise ScenarioError(f"allocated key {c!r} is not among hidden_keys", "key_allocation")
        remaining.remove(c)

    goal = str(data.get("goal", "chest"))
    if goal != "chest":
        raise ScenarioError("only the 'chest' goal is supported", "goal")

    try:
        states = enumerate_initial_states(gmap, hidden_keys)
    except ValueError as err:
        raise ScenarioError(str(err), "hidden_keys") from err
    true_state = initial_state(gmap, contents)
    if true_state not in states:
        raise ScenarioError("the goal is unreachable in the allocated world", "key_allocation")

    raw_traj = _require(data, "trajectory", "trajectory")
    tokens = raw_traj.split() if isinstance(raw_traj, str) else raw_traj
    if not isinstance(tokens, list):
        raise ScenarioError("expected a list or string of actions", "trajectory")
    actions = []
    s = true_state
    for i, tok in enumerate(tokens):
        try:
            a = parse_action(str(tok))
        except ValueError as err:
            raise ScenarioError(str(err), f"trajectory[{i}]") from err
        if a not in legal_actions(s):
            raise ScenarioError(f"action {a} is illegal at step {i + 1} (agent at {s.agent_pos})", f"trajectory[{i}]")
        s = transition(s, a)
        actions.append(a)

    raw_statements = _require(data, "statements", "statements")
    if not isinstance(raw_statements, list):
        raise ScenarioError("expected a list", "statements")
    if len(raw_statements) != N_STATEMENTS:
        raise ScenarioError(f"expected exactly {N_STATEMENTS} statements, got {len(raw_statements)}", "statements")
    colors = gmap.colors | set(hidden_keys)
    statements = []
    for i, item in enumerate(raw_statements):
        path = f"statements[{i}]"
        if isinstance(item, str):
            st_id, text = f"s{i + 1}", item
        elif isinstance(item, Mapping):
            st_id = str(item.get("id", f"s{i + 1}"))
            text = _require(item, "text", path)
        else:
            raise ScenarioError("expected a string or a mapping with 'text'", path)
        try:
            formula = parse(str(text), colors=colors, boxes=gmap.box_names)
        except ELoTSyntaxError as err:
            raise ScenarioError(str(err), path) from err
        statements.append(Statement(st_id, str(text), formula))
    if len({st.id for st in statements}) != len(statements):
        raise ScenarioError("statement ids must be unique", "statements")

    try:
        policy = PolicyParams(**_numbers(data.get("policy"), "policy", ("beta", "unreachable_penalty")))
        thresholds = ModalThresholds(**_numbers(data.get("thresholds"), "thresholds", ("believes", "knows", "certain")))
    except ValueError as err:
        if isinstance(err, ScenarioError):
            raise
        raise ScenarioError(str(err), "policy/thresholds") from err
    K = data.get("K", 3)
    if not isinstance(K, int) or K < 1:
        raise ScenarioError("K must be a positive integer", "K")

    return Scenario(
        id=sid,
        map_text=map_text,
        map=gmap,
        hidden_keys=hidden_keys,
        box_contents=tuple(contents),
        trajectory=tuple(actions),
        statements=tuple(statements),
        goal=goal,
        policy=policy,
        thresholds=thresholds,
        K=K,
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    with path.open() as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as err:
            raise ScenarioError(f"invalid YAML: {err}", str(path)) from err
    return scenario_from_dict(data, str(path))


def load_manifest(path: Union[str, Path]) -> List[Scenario]:
    """A manifest is a YAML mapping with a ``scenarios`` list of paths
    relative to the manifest file."""
    path = Path(path)
    with path.open() as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, Mapping) or not isinstance(data.get("scenarios"), list):
        raise ScenarioError("manifest needs a 'scenarios' list", str(path))
    return [load_scenario(path.parent / p) for p in data["scenarios"]]
