"""Trace generators: a brownout web-tier simulator and closed-form step responses."""

from .closed_form import underdamped_response, underdamped_step
from .controller import ControllerConfig, ThresholdController, controller_step
from .plant import Actuation, PlantParams, PlantState, plant_step, response_time
from .scenario import (DisturbanceProfile, Scenario, StepScenario, WorkloadProfile, builtin_scenarios, load_scenario,
                       run_scenario, scenario_from_dict)

__all__ = [
    "Actuation", "ControllerConfig", "DisturbanceProfile", "PlantParams", "PlantState", "Scenario", "StepScenario",
    "ThresholdController", "WorkloadProfile", "builtin_scenarios", "controller_step", "load_scenario",
    "plant_step", "response_time", "run_scenario", "scenario_from_dict", "underdamped_response",
    "underdamped_step",
]
