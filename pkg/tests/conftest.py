from pathlib import Path

import pytest

from beliefattr.gridworld import parse_map
from beliefattr.scenario import load_manifest, load_scenario, scenario_from_dict

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"

# Two boxes above a red door; the red key is hidden in one of them.
FIX_A_MAP = """\
#######
#B.P.B#
#.....#
###D###
#..C..#
#######
door (3,3): red
"""

THREE_BOX_MAP = """\
###########
#B.......B#
#.........#
#....P....#
#B........#
#######D###
#.....C...#
###########
door (7,5): blue
"""


def make_scenario(map_text, hidden, alloc, trajectory, statements, **extra):
    data = {
        "id": extra.pop("id", "t"),
        "map": map_text,
        "hidden_keys": list(hidden),
        "key_allocation": dict(alloc),
        "trajectory": trajectory,
        "statements": list(statements),
    }
    data.update(extra)
    return scenario_from_dict(data)


@pytest.fixture
def fix_a_map():
    return parse_map(FIX_A_MAP)


@pytest.fixture(scope="session")
def suite():
    return load_manifest(SCENARIOS / "manifest.yaml")


@pytest.fixture(scope="session")
def three_box():
    return load_scenario(SCENARIOS / "m1a.yaml")


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
