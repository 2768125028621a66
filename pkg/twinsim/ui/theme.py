"""Colors and visual constants for console output.

Pure data layer: nothing here imports from the simulator.
"""

# ---------------------------------------------------------------------------
# Semantic colors. Keys are roles, not colors.
# ---------------------------------------------------------------------------
ROLE_COLORS: dict[str, str] = {
    "title": "cyan",
    "thread": "cyan",
    "number": "white",
    "error": "red",
    "success": "green",
    "warning": "yellow",
    "muted": "grey50",
}

# Cell status -> color. Unknown statuses fall back to ``error``.
STATUS_COLORS: dict[str, str] = {
    "ok": ROLE_COLORS["success"],
    "oracle_failure": ROLE_COLORS["error"],
    "fault": ROLE_COLORS["error"],
    "error": ROLE_COLORS["error"],
    "max_cycles": ROLE_COLORS["warning"],
    "invariant": ROLE_COLORS["warning"],
}

# Column headers for the four measurement configurations, keyed by Scenario value.
SCENARIO_HEADERS: dict[str, str] = {
    "single": "single",
    "inactive": "0 act / 1 inact",
    "spinning": "0 act / 1 spin",
    "dual": "0 act / 1 act",
}

# Speedup color bands: below 1.0 red, below GOOD yellow, else green.
SPEEDUP_GOOD = 1.5

OK_MARK = "✔"
FAIL_MARK = "✘"
