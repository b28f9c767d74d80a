"""ratreg - regular register emulation with rational malicious servers."""

__version__ = "0.1.0"

from .checker import Verdict, evaluate
from .experiment import ExperimentResult, ExperimentSummary, run_experiment, sweep
from .report import Report, emit_report
from .scenario import Scenario, load_scenario, parse_scenario
from .simnet import Trace
from .simulation import Simulation, SimulationResult, simulate

__all__ = [
    "Scenario",
    "parse_scenario",
    "load_scenario",
    "Simulation",
    "SimulationResult",
    "simulate",
    "run_experiment",
    "sweep",
    "ExperimentResult",
    "ExperimentSummary",
    "Report",
    "emit_report",
    "Trace",
    "Verdict",
    "evaluate",
]
