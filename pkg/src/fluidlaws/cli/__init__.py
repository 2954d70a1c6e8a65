"""Scenario-driven command line interface."""

from .main import main
from .schema import Scenario, ScenarioError, load_scenario, parse_scenario
from .workflows import WORKFLOWS, Check, TaskResult, Workbench

__all__ = ["main", "Scenario", "ScenarioError", "load_scenario", "parse_scenario", "WORKFLOWS", "Check", "TaskResult", "Workbench"]
