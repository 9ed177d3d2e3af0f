"""
Geradores semeados de cenas.

Três famílias (cruzamento circular, aleatório e paralelo) mais a
regra de amostragem do objetivo local do robô. Toda cena nasce de
uma semente própria derivada de (semente mestre, família, n_ped,
índice), então cada controlador recebe exatamente a mesma cena.
"""

import math
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from socialnav.config import BenchConfig
from socialnav.models.schemas import ScenarioKind, SceneInstance
from socialnav.utils.exceptions import ConfigurationError, GenerationError
from socialnav.utils.logger import get_logger

logger = get_logger(__name__)

_KIND_INDEX = {kind: i for i, kind in enumerate(ScenarioKind)}

N_PED_RANGE = (3, 8)


def scene_seed(master_seed: int, kind: ScenarioKind, n_ped: int, index: int) -> int:
    """Semente de 64 bits da cena (kind, n_ped, index) sob a semente mestre."""
    sequence = np.random.SeedSequence([master_seed, _KIND_INDEX[ScenarioKind(kind)], n_ped, index])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


class _Sampler:
    """Amostragem por rejeição com orçamento compartilhado de tentativas."""

    def __init__(self, rng: np.random.Generator, params: BenchConfig, cell: dict):
        self.rng = rng
        self.params = params
        self.cell = cell
        self.attempts = 0
        geometry = params.safety
        slack = params.scenario_params.spawn_slack
        self.ped_gap = 2 * geometry.r_ped + slack
        self.robot_gap = geometry.r_rob + geometry.r_ped + slack

    def tick(self, what: str) -> None:
        self.attempts += 1
        if self.attempts > self.params.scenario_params.max_attempts:
            raise GenerationError(
                f"Amostragem por rejeição esgotou {self.params.scenario_params.max_attempts} "
                f"tentativas ({what})",
                cell={**self.cell, "attempts": self.attempts},
            )

    @staticmethod
    def clear_of(point: np.ndarray, others: list[np.ndarray], gap: float) -> bool:
        return all(np.hypot(*(point - other)) > gap for other in others)


def _annulus_point(rng: np.random.Generator, r_min: float, r_max: float) -> np.ndarray:
    # uniforme em área: r = sqrt(U(r_min^2, r_max^2))
    radius = math.sqrt(rng.uniform(r_min ** 2, r_max ** 2))
    angle = rng.uniform(-math.pi, math.pi)
    return radius * np.array([math.cos(angle), math.sin(angle)])


def _inside_square(point: np.ndarray, half_size: float) -> bool:
    return bool(np.all(np.abs(point) <= half_size))


def sample_robot_goal(
    robot_start: tuple[float, float],
    rng: np.random.Generator,
    params: BenchConfig,
    cell: Optional[dict] = None
) -> tuple[float, float]:
    """
    Objetivo local do robô.

    Uniforme na interseção do anel [d_min, H*v_max*dt + eps] em torno
    do início com o quadrado [-L, L]^2, por rejeição.

    Raises:
        GenerationError: Interseção vazia ou tentativas esgotadas
    """
    scenario = params.scenario_params
    half_size = scenario.area_half_size
    r_min = scenario.goal_min_distance
    r_max = params.control.horizon * params.control.v_max * params.simulation.dt + scenario.goal_range_slack
    start = np.asarray(robot_start, dtype=float)

    farthest = max(
        math.hypot(cx - start[0], cy - start[1])
        for cx in (-half_size, half_size)
        for cy in (-half_size, half_size)
    )
    if farthest < r_min or r_max < r_min:
        raise GenerationError(
            f"Região do objetivo vazia para início {tuple(start)}",
            cell={**(cell or {}), "r_min": r_min, "r_max": r_max},
        )

    for _ in range(scenario.max_attempts):
        point = start + _annulus_point(rng, r_min, r_max)
        if _inside_square(point, half_size):
            return float(point[0]), float(point[1])
    raise GenerationError(
        "Amostragem do objetivo do robô esgotou as tentativas",
        cell={**(cell or {}), "attempts": scenario.max_attempts},
    )


def _check_n_ped(n_ped: int) -> None:
    low, high = N_PED_RANGE
    if not low <= n_ped <= high:
        raise ConfigurationError(f"n_ped fora de {low}..{high}: {n_ped}", {"n_ped": n_ped})


def _finish(
    kind: ScenarioKind,
    starts: list[np.ndarray],
    goals: list[np.ndarray],
    robot: np.ndarray,
    sampler: _Sampler,
    seed: int,
    scene_id: int
) -> SceneInstance:
    goal = sample_robot_goal((float(robot[0]), float(robot[1])), sampler.rng, sampler.params, sampler.cell)
    heading = math.atan2(goal[1] - robot[1], goal[0] - robot[0])
    return SceneInstance(
        scenario_kind=kind,
        n_ped=len(starts),
        ped_starts=tuple((float(p[0]), float(p[1])) for p in starts),
        ped_goals=tuple((float(p[0]), float(p[1])) for p in goals),
        robot_start=(float(robot[0]), float(robot[1]), heading),
        robot_goal=goal,
        seed=seed,
        scene_id=scene_id,
    )


def _sample_robot(sampler: _Sampler, starts: list[np.ndarray], draw) -> np.ndarray:
    while True:
        sampler.tick("robô")
        robot = draw()
        if sampler.clear_of(robot, starts, sampler.robot_gap):
            return robot


def gen_circular(n_ped: int, seed: int, params: BenchConfig, scene_id: int = 0) -> SceneInstance:
    """
    Cruzamento circular.

    Pedestres uniformes no anel [ring_inner, ring_outer] com objetivo
    antipodal (-início); robô uniforme no disco de raio ring_inner.
    """
    _check_n_ped(n_ped)
    scenario = params.scenario_params
    rng = np.random.default_rng(seed)
    sampler = _Sampler(rng, params, {"scenario": "circular", "n_ped": n_ped, "scene_id": scene_id})

    starts: list[np.ndarray] = []
    while len(starts) < n_ped:
        sampler.tick("pedestre")
        point = _annulus_point(rng, scenario.ring_inner, scenario.ring_outer)
        if sampler.clear_of(point, starts, sampler.ped_gap):
            starts.append(point)
    goals = [-p for p in starts]

    robot = _sample_robot(sampler, starts, lambda: _annulus_point(rng, 0.0, scenario.ring_inner))
    return _finish(ScenarioKind.CIRCULAR, starts, goals, robot, sampler, seed, scene_id)


def gen_random(n_ped: int, seed: int, params: BenchConfig, scene_id: int = 0) -> SceneInstance:
    """Inícios, objetivos e robô uniformes no quadrado comum."""
    _check_n_ped(n_ped)
    half_size = params.scenario_params.area_half_size
    rng = np.random.default_rng(seed)
    sampler = _Sampler(rng, params, {"scenario": "random", "n_ped": n_ped, "scene_id": scene_id})

    def draw() -> np.ndarray:
        return rng.uniform(-half_size, half_size, size=2)

    starts: list[np.ndarray] = []
    goals: list[np.ndarray] = []
    while len(starts) < n_ped:
        sampler.tick("pedestre")
        point = draw()
        if sampler.clear_of(point, starts, sampler.ped_gap):
            starts.append(point)
            goals.append(draw())

    robot = _sample_robot(sampler, starts, draw)
    return _finish(ScenarioKind.RANDOM, starts, goals, robot, sampler, seed, scene_id)


def gen_parallel(n_ped: int, seed: int, params: BenchConfig, scene_id: int = 0) -> SceneInstance:
    """
    Cruzamento paralelo.

    Pedestres alternam entre as bordas esquerda e direita e caminham
    para a borda oposta (com desvio vertical de até goal_range_slack);
    o robô nasce na faixa central |x| <= parallel_band.
    """
    _check_n_ped(n_ped)
    scenario = params.scenario_params
    edge = scenario.area_half_size - scenario.parallel_edge_offset
    rng = np.random.default_rng(seed)
    sampler = _Sampler(rng, params, {"scenario": "parallel", "n_ped": n_ped, "scene_id": scene_id})

    starts: list[np.ndarray] = []
    goals: list[np.ndarray] = []
    while len(starts) < n_ped:
        sampler.tick("pedestre")
        side = -1.0 if len(starts) % 2 == 0 else 1.0
        point = np.array([side * edge, rng.uniform(-edge, edge)])
        if sampler.clear_of(point, starts, sampler.ped_gap):
            jitter = rng.uniform(-scenario.goal_range_slack, scenario.goal_range_slack)
            starts.append(point)
            goals.append(np.array([-side * edge, float(np.clip(point[1] + jitter, -edge, edge))]))

    robot = _sample_robot(
        sampler, starts,
        lambda: np.array([rng.uniform(-scenario.parallel_band, scenario.parallel_band), rng.uniform(-edge, edge)]),
    )
    return _finish(ScenarioKind.PARALLEL, starts, goals, robot, sampler, seed, scene_id)


_GENERATORS = {
    ScenarioKind.CIRCULAR: gen_circular,
    ScenarioKind.RANDOM: gen_random,
    ScenarioKind.PARALLEL: gen_parallel,
}


def generate_scene(
    kind: ScenarioKind,
    n_ped: int,
    index: int,
    master_seed: int,
    params: BenchConfig
) -> SceneInstance:
    """Cena da célula (kind, n_ped) no índice dado, sob a semente mestre."""
    kind = ScenarioKind(kind)
    return _GENERATORS[kind](n_ped, scene_seed(master_seed, kind, n_ped, index), params, scene_id=index)


def generate_suite(params: BenchConfig) -> list[SceneInstance]:
    """
    Todas as cenas da configuração, em ordem canônica.

    Raises:
        GenerationError: Identifica a célula que falhou
    """
    scenes = [
        generate_scene(kind, n_ped, index, params.master_seed, params)
        for kind in params.scenarios
        for n_ped in params.n_ped
        for index in range(params.scenes_per_cell)
    ]
    logger.info("Cenas geradas", count=len(scenes), master_seed=params.master_seed)
    return scenes


def write_scenes_jsonl(scenes: Iterable[SceneInstance], path: Path) -> int:
    """Grava uma cena por linha (JSON). Retorna o número de cenas."""
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for scene in scenes:
            f.write(scene.model_dump_json() + "\n")
            count += 1
    return count


def read_scenes_jsonl(path: Path) -> list[SceneInstance]:
    """Lê cenas gravadas por write_scenes_jsonl."""
    with open(path, encoding="utf-8") as f:
        return [SceneInstance.model_validate_json(line) for line in f if line.strip()]
