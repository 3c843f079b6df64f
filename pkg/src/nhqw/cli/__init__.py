"""Batch front-end: scenario files in, CSV datasets out."""
from nhqw.cli.runner import HEADERS, build_tables, run
from nhqw.cli.scenario import COMMANDS, Scenario, load_scenario, parse_scenario

__all__ = ["HEADERS", "COMMANDS", "Scenario", "build_tables", "load_scenario", "parse_scenario", "run"]
