"""Doors, keys and boxes gridworld.

Coordinates are ``(x, y)`` with ``x`` the column and ``y`` the row, counted
from the top-left corner. ``N`` decreases ``y``.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

Cell = Tuple[int, int]

DIRECTIONS: Dict[str, Cell] = {"N": (0, -1), "S": (0, 1), "E": (1, 0), "W": (-1, 0)}

UNKNOWN = "?"


class MapParseError(ValueError):
    """Raised for malformed map text; carries the offending line and column."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class IllegalActionError(ValueError):
    pass


@dataclass(frozen=True)
class GridMap:
    width: int
    height: int
    walls: FrozenSet[Cell]
    doors: Tuple[Tuple[Cell, str], ...]
    boxes: Tuple[Cell, ...]
    chest: Cell
    agent_start: Cell
    visible_keys: Tuple[Tuple[Cell, str], ...] = ()

    def __post_init__(self):
        special = [self.chest, self.agent_start]
        special += [cell for cell, _ in self.doors] + list(self.boxes)
        special += [cell for cell, _ in self.visible_keys]
        for cell in special:
            if not self.in_bounds(cell):
                raise ValueError(f"cell {cell} is out of bounds")
            if cell in self.walls:
                raise ValueError(f"cell {cell} is a wall")
        if len(set(self.boxes)) != len(self.boxes):
            raise ValueError("box cells must be distinct")
        door_cells = [cell for cell, _ in self.doors]
        if len(set(door_cells)) != len(door_cells):
            raise ValueError("door cells must be distinct")

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    @cached_property
    def door_index(self) -> Dict[Cell, int]:
        return {cell: i for i, (cell, _) in enumerate(self.doors)}

    @cached_property
    def box_index(self) -> Dict[Cell, int]:
        return {cell: i for i, cell in enumerate(self.boxes)}

    @cached_property
    def key_index(self) -> Dict[Cell, int]:
        return {cell: i for i, (cell, _) in enumerate(self.visible_keys)}

    @property
    def box_names(self) -> Tuple[str, ...]:
        return tuple(f"box{i + 1}" for i in range(len(self.boxes)))

    @property
    def colors(self) -> FrozenSet[str]:
        return frozenset(c for _, c in self.doors) | frozenset(c for _, c in self.visible_keys)


@dataclass(frozen=True)
class Action:
    kind: str
    direction: Optional[str] = None

    def __str__(self) -> str:
        if self.kind == "move":
            return self.direction
        if self.kind == "unlock":
            return f"unlock-{self.direction}"
        return self.kind


MOVES = {d: Action("move", d) for d in DIRECTIONS}
UNLOCKS = {d: Action("unlock", d) for d in DIRECTIONS}
PICKUP = Action("pickup")
OPEN = Action("open")
NOOP = Action("noop")

ALL_ACTIONS: Tuple[Action, ...] = (
    *MOVES.values(), PICKUP, *UNLOCKS.values(), OPEN, NOOP
)


def parse_action(text: str) -> Action:
    token = text.strip()
    upper = token.upper()
    if upper in MOVES:
        return MOVES[upper]
    lower = token.lower()
    if lower in ("pickup", "open", "noop"):
        return {"pickup": PICKUP, "open": OPEN, "noop": NOOP}[lower]
    m = re.fullmatch(r"unlock-([nsewNSEW])", token)
    if m:
        return UNLOCKS[m.group(1).upper()]
    raise ValueError(f"unknown action {text!r}")


def parse_actions(spec) -> Tuple[Action, ...]:
    """Accepts a whitespace/comma separated string or a list of action tokens."""
    if isinstance(spec, str):
        tokens = [t for t in re.split(r"[\s,]+", spec) if t]
    else:
        tokens = list(spec)
    return tuple(parse_action(str(t)) for t in tokens)


@dataclass(frozen=True)
class WorldState:
    """Full environment state.

    ``box_contents`` records what each box held initially and never changes;
    opening a box moves its key (if any) to the inventory, so a key is inside a
    box exactly when the box holds one and is still closed.
    """

    map: GridMap = field(compare=False, repr=False)
    agent_pos: Cell
    inventory: Tuple[str, ...]
    door_open: Tuple[bool, ...]
    box_contents: Tuple[Optional[str], ...]
    box_opened: Tuple[bool, ...]
    keys_picked: Tuple[bool, ...]
    chest_taken: bool = False


@dataclass(frozen=True)
class Observation:
    agent_pos: Cell
    inventory: Tuple[str, ...]
    door_open: Tuple[bool, ...]
    box_contents: Tuple[Optional[str], ...]
    box_opened: Tuple[bool, ...]
    keys_picked: Tuple[bool, ...]
    chest_taken: bool


@dataclass(frozen=True)
class KeyObject:
    color: str
    location: Tuple  # ("box", i) | ("inventory", n) | ("floor", cell)


_LEGEND = re.compile(r"^\s*(door|key|box)\s*\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*:\s*([A-Za-z0-9_]+)\s*$")


def parse_map(text: str) -> GridMap:
    """Parse an ASCII grid followed by optional legend lines.

    Grid characters: ``#`` wall, ``.`` floor, ``P`` agent, ``C`` chest,
    ``D`` door, ``B`` box, ``k`` visible key. Spaces inside rows are ignored.
    Legend lines look like ``door (x,y): blue``, ``key (x,y): red`` or
    ``box (x,y): 2``. Boxes are numbered in row-major order unless every box
    has a ``box`` legend line.
    """
    rows: List[Tuple[int, str]] = []
    legend: List[Tuple[int, re.Match]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        m = _LEGEND.match(raw)
        if m:
            legend.append((lineno, m))
            continue
        if legend:
            raise MapParseError("grid row after legend lines", lineno)
        rows.append((lineno, raw.replace(" ", "").replace("\t", "")))
    if not rows:
        raise MapParseError("empty grid")
    width = len(rows[0][1])
    walls = set()
    door_cells: List[Cell] = []
    box_cells: List[Cell] = []
    key_cells: List[Cell] = []
    agent = chest = None
    for y, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise MapParseError(f"row has {len(row)} cells, expected {width}", lineno)
        for x, ch in enumerate(row):
            cell = (x, y)
            if ch == "#":
                walls.add(cell)
            elif ch == ".":
                pass
            elif ch == "P":
                if agent is not None:
                    raise MapParseError("duplicate agent", lineno, x + 1)
                agent = cell
            elif ch == "C":
                if chest is not None:
                    raise MapParseError("duplicate chest", lineno, x + 1)
                chest = cell
            elif ch == "D":
                door_cells.append(cell)
            elif ch == "B":
                box_cells.append(cell)
            elif ch == "k":
                key_cells.append(cell)
            else:
                raise MapParseError(f"unknown map symbol {ch!r}", lineno, x + 1)
    if agent is None:
        raise MapParseError("missing agent 'P'")
    if chest is None:
        raise MapParseError("missing chest 'C'")
    height = len(rows)

    door_colors: Dict[Cell, str] = {}
    key_colors: Dict[Cell, str] = {}
    box_numbers: Dict[Cell, int] = {}
    for lineno, m in legend:
        kind, cell, value = m.group(1), (int(m.group(2)), int(m.group(3))), m.group(4)
        if not (0 <= cell[0] < width and 0 <= cell[1] < height):
            raise MapParseError(f"{kind} legend cell {cell} is out of bounds", lineno)
        target = {"door": door_cells, "key": key_cells, "box": box_cells}[kind]
        if cell not in target:
            raise MapParseError(f"{kind} legend cell {cell} is not a {kind} cell", lineno)
        table = {"door": door_colors, "key": key_colors, "box": box_numbers}[kind]
        if cell in table:
            raise MapParseError(f"duplicate {kind} legend for {cell}", lineno)
        if kind == "box":
            if not value.isdigit():
                raise MapParseError(f"box number must be an integer, got {value!r}", lineno)
            box_numbers[cell] = int(value)
        else:
            table[cell] = value.lower()
    for cell in door_cells:
        if cell not in door_colors:
            raise MapParseError(f"door at {cell} has no color legend")
    for cell in key_cells:
        if cell not in key_colors:
            raise MapParseError(f"key at {cell} has no color legend")
    if box_numbers:
        if sorted(box_numbers.values()) != list(range(1, len(box_cells) + 1)) or len(box_numbers) != len(box_cells):
            raise MapParseError("box legend must number every box 1..n exactly once")
        box_cells = sorted(box_cells, key=lambda c: box_numbers[c])

    return GridMap(
        width=width,
        height=height,
        walls=frozenset(walls),
        doors=tuple((c, door_colors[c]) for c in door_cells),
        boxes=tuple(box_cells),
        chest=chest,
        agent_start=agent,
        visible_keys=tuple((c, key_colors[c]) for c in key_cells),
    )


def initial_state(m: GridMap, box_contents: Sequence[Optional[str]]) -> WorldState:
    if len(box_contents) != len(m.boxes):
        raise ValueError("box_contents must have one entry per box")
    return WorldState(
        map=m,
        agent_pos=m.agent_start,
        inventory=(),
        door_open=(False,) * len(m.doors),
        box_contents=tuple(box_contents),
        box_opened=(False,) * len(m.boxes),
        keys_picked=(False,) * len(m.visible_keys),
        chest_taken=m.agent_start == m.chest,
    )


def _step(cell: Cell, direction: str) -> Cell:
    dx, dy = DIRECTIONS[direction]
    return cell[0] + dx, cell[1] + dy


def _passable(s: WorldState, cell: Cell) -> bool:
    m = s.map
    if not m.in_bounds(cell) or cell in m.walls:
        return False
    d = m.door_index.get(cell)
    return d is None or s.door_open[d]


def legal_actions(s: WorldState) -> Tuple[Action, ...]:
    """Legal actions in canonical order. After the chest is taken only NoOp remains."""
    if s.chest_taken:
        return (NOOP,)
    m = s.map
    out = [MOVES[d] for d in DIRECTIONS if _passable(s, _step(s.agent_pos, d))]
    k = m.key_index.get(s.agent_pos)
    if k is not None and not s.keys_picked[k]:
        out.append(PICKUP)
    for d in DIRECTIONS:
        di = m.door_index.get(_step(s.agent_pos, d))
        if di is not None and not s.door_open[di] and m.doors[di][1] in s.inventory:
            out.append(UNLOCKS[d])
    b = m.box_index.get(s.agent_pos)
    if b is not None and not s.box_opened[b]:
        out.append(OPEN)
    out.append(NOOP)
    return tuple(out)


def _with_key(inventory: Tuple[str, ...], color: str) -> Tuple[str, ...]:
    return tuple(sorted(inventory + (color,)))


def _without_key(inventory: Tuple[str, ...], color: str) -> Tuple[str, ...]:
    items = list(inventory)
    items.remove(color)
    return tuple(items)


def transition(s: WorldState, a: Action) -> WorldState:
    """Deterministic successor state. Raises IllegalActionError for illegal actions."""
    m = s.map
    if s.chest_taken:
        if a != NOOP:
            raise IllegalActionError(f"{a} after the chest was taken")
        return s
    if a.kind == "move":
        target = _step(s.agent_pos, a.direction)
        if not _passable(s, target):
            raise IllegalActionError(f"cannot move {a.direction} from {s.agent_pos}")
        return _replace(s, agent_pos=target, chest_taken=target == m.chest)
    if a.kind == "pickup":
        k = m.key_index.get(s.agent_pos)
        if k is None or s.keys_picked[k]:
            raise IllegalActionError(f"no key to pick up at {s.agent_pos}")
        picked = s.keys_picked[:k] + (True,) + s.keys_picked[k + 1:]
        return _replace(s, inventory=_with_key(s.inventory, m.visible_keys[k][1]), keys_picked=picked)
    if a.kind == "unlock":
        di = m.door_index.get(_step(s.agent_pos, a.direction))
        if di is None or s.door_open[di]:
            raise IllegalActionError(f"no closed door {a.direction} of {s.agent_pos}")
        color = m.doors[di][1]
        if color not in s.inventory:
            raise IllegalActionError(f"no {color} key to unlock the door")
        opened = s.door_open[:di] + (True,) + s.door_open[di + 1:]
        return _replace(s, inventory=_without_key(s.inventory, color), door_open=opened)
    if a.kind == "open":
        b = m.box_index.get(s.agent_pos)
        if b is None or s.box_opened[b]:
            raise IllegalActionError(f"no unopened box at {s.agent_pos}")
        opened = s.box_opened[:b] + (True,) + s.box_opened[b + 1:]
        inventory = s.inventory
        if s.box_contents[b] is not None:
            inventory = _with_key(inventory, s.box_contents[b])
        return _replace(s, inventory=inventory, box_opened=opened)
    if a.kind == "noop":
        return s
    raise IllegalActionError(f"unknown action {a}")


def _replace(s: WorldState, **changes) -> WorldState:
    values = {
        "map": s.map,
        "agent_pos": s.agent_pos,
        "inventory": s.inventory,
        "door_open": s.door_open,
        "box_contents": s.box_contents,
        "box_opened": s.box_opened,
        "keys_picked": s.keys_picked,
        "chest_taken": s.chest_taken,
    }
    values.update(changes)
    return WorldState(**values)


def observe(s: WorldState) -> Observation:
    """Everything in ``s`` except the contents of unopened boxes."""
    contents = tuple(c if opened else UNKNOWN for c, opened in zip(s.box_contents, s.box_opened))
    return Observation(
        agent_pos=s.agent_pos,
        inventory=s.inventory,
        door_open=s.door_open,
        box_contents=contents,
        box_opened=s.box_opened,
        keys_picked=s.keys_picked,
        chest_taken=s.chest_taken,
    )


def world_keys(s: WorldState) -> Tuple[KeyObject, ...]:
    """Keys currently in the world. Keys spent on doors no longer exist."""
    keys = [KeyObject(c, ("floor", cell)) for (cell, c), picked in zip(s.map.visible_keys, s.keys_picked) if not picked]
    keys += [KeyObject(c, ("inventory", n)) for n, c in enumerate(s.inventory)]
    keys += [
        KeyObject(c, ("box", i))
        for i, (c, opened) in enumerate(zip(s.box_contents, s.box_opened))
        if c is not None and not opened
    ]
    return tuple(keys)


def successors(s: WorldState) -> Iterator[Tuple[Action, WorldState]]:
    for a in legal_actions(s):
        yield a, transition(s, a)


def is_goal_reachable(s: WorldState) -> bool:
    seen = {s}
    frontier = deque([s])
    while frontier:
        cur = frontier.popleft()
        if cur.chest_taken:
            return True
        for a, nxt in successors(cur):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return False


def enumerate_initial_states(m: GridMap, hidden_keys: Iterable[str]) -> List[WorldState]:
    """All placements of up to ``len(hidden_keys)`` of the hidden keys into
    distinct boxes from which the chest is reachable, in lexicographic order of
    box contents (empty before any color)."""
    hidden = [c.lower() for c in hidden_keys]
    if len(hidden) > 2:
        raise ValueError("at most 2 hidden keys are supported")
    n = len(m.boxes)
    placements = set()
    for r in range(len(hidden) + 1):
        for key_subset in itertools.combinations(hidden, r):
            for boxes in itertools.permutations(range(n), r):
                contents: List[Optional[str]] = [None] * n
                for color, b in zip(key_subset, boxes):
                    contents[b] = color
                placements.add(tuple(contents))
    ordered = sorted(placements, key=lambda cs: tuple((c is not None, c or "") for c in cs))
    states = [initial_state(m, cs) for cs in ordered]
    states = [s for s in states if is_goal_reachable(s)]
    if not states:
        raise ValueError("no reachable-goal configuration")
    return states


def key_counts(s: WorldState) -> Dict[str, int]:
    counts: Dict[str, int] = {}
    for k in world_keys(s):
        counts[k.color] = counts.get(k.color, 0) + 1
    return counts
