"""The theme must stay in sync with the scenario and cell-status vocabularies."""

from twinsim.bench import CELL_STATUSES
from twinsim.sim import Scenario
from twinsim.ui import theme


def test_every_scenario_has_a_header():
    assert set(theme.SCENARIO_HEADERS) == {s.value for s in Scenario}


def test_every_cell_status_has_a_color():
    missing = set(CELL_STATUSES) - set(theme.STATUS_COLORS)
    assert not missing, f"STATUS_COLORS lacks {sorted(missing)}"


def test_status_colors_are_role_colors():
    assert set(theme.STATUS_COLORS.values()) <= set(theme.ROLE_COLORS.values())
