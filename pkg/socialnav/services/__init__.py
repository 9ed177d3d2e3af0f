"""
Módulo de serviços numéricos.

Contém a dinâmica do robô, percepção, custos sociais, o MPC,
o catálogo de controladores, a simulação da multidão, os geradores
de cena e a agregação dos resultados.
"""

from socialnav.services.dynamics import rollout, step_unicycle
from socialnav.services.perception import covariance_growth, ghost_update, predict_cv, sense
from socialnav.services.socialcost import Weights
from socialnav.services.controllers import (
    ConstraintKind,
    ControllerSpec,
    CostComponent,
    build_custom,
    build_named,
    list_benchmark_controllers,
)
from socialnav.services.nmpc import HorizonProblem, SolveReport, SolveStatus, mpc_step, solve, transcribe
from socialnav.services.crowd import WorldState, run_episode, simulate_episode
from socialnav.services.scenarios import gen_circular, gen_parallel, gen_random, generate_suite
from socialnav.services.metrics import aggregate, emit
from socialnav.services.suite_runner import SuiteRunner, run_suite

__all__ = [
    "rollout",
    "step_unicycle",
    "covariance_growth",
    "ghost_update",
    "predict_cv",
    "sense",
    "Weights",
    "ConstraintKind",
    "ControllerSpec",
    "CostComponent",
    "build_custom",
    "build_named",
    "list_benchmark_controllers",
    "HorizonProblem",
    "SolveReport",
    "SolveStatus",
    "mpc_step",
    "solve",
    "transcribe",
    "WorldState",
    "run_episode",
    "simulate_episode",
    "gen_circular",
    "gen_parallel",
    "gen_random",
    "generate_suite",
    "aggregate",
    "emit",
    "SuiteRunner",
    "run_suite",
]
