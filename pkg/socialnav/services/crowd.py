"""
Simulação da multidão e laço do episódio.

Pedestres seguem um modelo de força social (atração ao objetivo e
repulsão exponencial entre pedestres) e oscilam entre início e
objetivo. O robô é invisível para os pedestres. O controlador roda
a cada dt; o mundo avança a cada dt_sim com o comando mantido.
"""

import csv
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from socialnav.config import BenchConfig, SafetyGeometry, SfmParams
from socialnav.models.schemas import RunRecord, SceneInstance
from socialnav.models.state import STOP, ControlInput, PedestrianState, PredictedTrack, RobotState, wrap_angle
from socialnav.services.controllers import ControllerSpec
from socialnav.services.dynamics import step_unicycle
from socialnav.services.nmpc import SolveStatus, mpc_step
from socialnav.services.perception import ghost_update, sense
from socialnav.utils.exceptions import SocialNavException
from socialnav.utils.logger import episode_context, get_logger

logger = get_logger(__name__)

# Distâncias abaixo disso são tratadas como pedestres coincidentes
_COINCIDENT = 1e-9


@dataclass(eq=False)
class WorldState:
    """
    Estado do mundo simulado.

    Arrays de pedestres têm uma linha por pedestre; o id do pedestre é
    o índice da linha.

    Attributes:
        robot: Pose do robô
        positions: Posições dos pedestres (N, 2)
        velocities: Velocidades (N, 2)
        headings: Orientações (N,)
        starts: Origem da perna atual (N, 2)
        goals: Objetivo atual (N, 2)
        sim_step: Passos de simulação executados
        rng: Gerador semeado da cena
    """
    robot: RobotState
    positions: np.ndarray
    velocities: np.ndarray
    headings: np.ndarray
    starts: np.ndarray
    goals: np.ndarray
    rng: np.random.Generator
    sim_step: int = 0

    @property
    def n_ped(self) -> int:
        return self.positions.shape[0]

    @property
    def pedestrians(self) -> list[PedestrianState]:
        return [
            PedestrianState(
                position=(float(p[0]), float(p[1])),
                velocity=(float(v[0]), float(v[1])),
                id=i,
            )
            for i, (p, v) in enumerate(zip(self.positions, self.velocities))
        ]

    @classmethod
    def from_scene(cls, scene: SceneInstance) -> "WorldState":
        """Mundo inicial da cena, com pedestres parados e virados para o objetivo."""
        positions = np.array(scene.ped_starts, dtype=float).reshape(-1, 2)
        goals = np.array(scene.ped_goals, dtype=float).reshape(-1, 2)
        to_goal = goals - positions
        return cls(
            robot=RobotState(*scene.robot_start),
            positions=positions,
            velocities=np.zeros_like(positions),
            headings=np.arctan2(to_goal[:, 1], to_goal[:, 0]),
            starts=positions.copy(),
            goals=goals,
            rng=np.random.default_rng(scene.seed),
        )


def _social_forces(
    positions: np.ndarray,
    velocities: np.ndarray,
    goals: np.ndarray,
    p: SfmParams,
    rng: np.random.Generator
) -> np.ndarray:
    """Acelerações de força social para todos os pedestres, shape (N, 2)."""
    to_goal = goals - positions
    goal_distance = np.linalg.norm(to_goal, axis=-1, keepdims=True)
    direction = np.divide(to_goal, goal_distance, out=np.zeros_like(to_goal), where=goal_distance > _COINCIDENT)
    accel = (p.desired_speed * direction - velocities) / p.relaxation_time

    n_ped = positions.shape[0]
    if n_ped < 2:
        return accel

    rab = positions[:, None, :] - positions[None, :, :]
    distance = np.linalg.norm(rab, axis=-1)
    np.fill_diagonal(distance, np.inf)
    coincident = distance < _COINCIDENT
    unit = rab / np.where(coincident, 1.0, distance)[..., None]
    for a, b in zip(*np.nonzero(np.triu(coincident, k=1))):
        angle = rng.uniform(-math.pi, math.pi)
        unit[a, b] = (math.cos(angle), math.sin(angle))
        unit[b, a] = -unit[a, b]

    # diagonal com distância infinita: exp(-inf) = 0
    magnitude = p.repulsion_strength * np.exp((2.0 * p.pedestrian_radius - distance) / p.repulsion_range)
    return accel + np.sum(magnitude[..., None] * unit, axis=1)


def sfm_accel(
    ped: PedestrianState,
    others: Iterable[PedestrianState],
    goal: Sequence[float],
    p: SfmParams,
    rng: Optional[np.random.Generator] = None
) -> np.ndarray:
    """
    Aceleração de força social de um pedestre.

    (v_des * unit(goal - pos) - vel) / tau + sum_j A exp((2 r_ped - d_j) / B) unit(pos - pos_j).
    Pedestres coincidentes recebem direção de repulsão sorteada do rng.
    """
    others = [o for o in others if o.id != ped.id]
    positions = np.array([ped.position] + [o.position for o in others], dtype=float)
    velocities = np.array([ped.velocity] + [o.velocity for o in others], dtype=float)
    goals = np.tile(np.asarray(goal, dtype=float), (len(positions), 1))
    rng = rng if rng is not None else np.random.default_rng(0)
    return _social_forces(positions, velocities, goals, p, rng)[0]


def _capped(velocities: np.ndarray, max_speed: float) -> np.ndarray:
    speeds = np.linalg.norm(velocities, axis=-1)
    factor = np.minimum(1.0, max_speed / np.maximum(speeds, _COINCIDENT))
    return velocities * factor[:, None]


def step_world(
    w: WorldState,
    robot_control: ControlInput,
    dt_sim: float,
    p: SfmParams
) -> WorldState:
    """
    Avança o mundo um passo de simulação.

    Pedestres: velocidade e depois posição (semi-implícito), velocidade
    limitada a max_speed_factor * desired_speed; quem chega a menos de
    goal_tolerance do objetivo troca objetivo e origem. Robô: Euler do
    uniciclo com o comando mantido.
    """
    robot = step_unicycle(w.robot, robot_control, dt_sim)
    if w.n_ped == 0:
        return replace(w, robot=robot, sim_step=w.sim_step + 1)

    accel = _social_forces(w.positions, w.velocities, w.goals, p, w.rng)
    velocities = _capped(w.velocities + dt_sim * accel, p.max_speed_factor * p.desired_speed)
    positions = w.positions + dt_sim * velocities

    speeds = np.linalg.norm(velocities, axis=-1)
    target_heading = np.arctan2(velocities[:, 1], velocities[:, 0])
    turn = np.where(speeds > _COINCIDENT, wrap_angle(target_heading - w.headings), 0.0)
    headings = wrap_angle(w.headings + p.heading_gain * dt_sim * turn)

    starts, goals = w.starts.copy(), w.goals.copy()
    arrived = np.linalg.norm(goals - positions, axis=-1) < p.goal_tolerance
    starts[arrived], goals[arrived] = w.goals[arrived], w.starts[arrived]

    return WorldState(
        robot=robot,
        positions=positions,
        velocities=velocities,
        headings=headings,
        starts=starts,
        goals=goals,
        rng=w.rng,
        sim_step=w.sim_step + 1,
    )


def detect_collision(w: WorldState, g: SafetyGeometry) -> tuple[bool, list[int]]:
    """Colisão se algum pedestre está a menos de r_rob + r_ped do robô."""
    if w.n_ped == 0:
        return False, []
    distance = np.hypot(w.positions[:, 0] - w.robot.x, w.positions[:, 1] - w.robot.y)
    ids = [int(i) for i in np.nonzero(distance < g.contact_distance)[0]]
    return bool(ids), ids


class CollisionCounter:
    """
    Conta eventos de colisão por pedestre.

    Um intervalo contínuo de contato com o mesmo pedestre conta uma vez;
    um novo contato depois de separar conta de novo.
    """

    def __init__(self) -> None:
        self.total = 0
        self._in_contact: set[int] = set()

    def update(self, colliding: Iterable[int]) -> int:
        """Registra os pedestres em contato neste passo e devolve os novos eventos."""
        current = set(colliding)
        new_events = len(current - self._in_contact)
        self.total += new_events
        self._in_contact = current
        return new_events


def target_reached(w: WorldState, target: Sequence[float], g: SafetyGeometry, eps: float) -> bool:
    """||r - alvo|| - r_rob < eps."""
    return math.hypot(w.robot.x - target[0], w.robot.y - target[1]) - g.r_rob < eps


# =============================================================================
# EPISÓDIO
# =============================================================================

@dataclass
class EpisodeResult:
    """
    Resultado completo de um episódio.

    Attributes:
        record: Registro agregável
        path_length: Comprimento do caminho do robô [m]
        min_separation: Menor distância robô-pedestre nos passos de controle [m]
        trace: Linhas de trajetória por passo de controle (se pedido)
    """
    record: RunRecord
    path_length: float
    min_separation: float
    trace: list[dict[str, Any]] = field(default_factory=list)


def _trace_row(w: WorldState, control: ControlInput) -> dict[str, Any]:
    row: dict[str, Any] = {
        "sim_step": w.sim_step,
        "x": w.robot.x,
        "y": w.robot.y,
        "theta": w.robot.theta,
        "v": control.v,
        "omega": control.omega,
    }
    for i, (px, py) in enumerate(w.positions):
        row[f"ped{i}_x"] = float(px)
        row[f"ped{i}_y"] = float(py)
    return row


def episode_name(scene: SceneInstance, controller: str) -> str:
    return f"{scene.scenario_kind.value}-{scene.n_ped}-{scene.scene_id}-{controller}"


def simulate_episode(
    scene: SceneInstance,
    spec: ControllerSpec,
    params: BenchConfig,
    trace: bool = False
) -> EpisodeResult:
    """
    Roda um episódio completo.

    A cada steps_per_control passos: sense, ghost_update, mpc_step e o
    comando fica mantido. A cada passo: step_world, contagem de colisões
    (um intervalo contínuo de contato conta uma vez) e teste de chegada.
    Falhas do controlador caem no fallback (0, 0) e são contadas.
    """
    with episode_context(episode_name(scene, spec.name)):
        return _simulate(scene, spec, params, trace)


def _simulate(scene: SceneInstance, spec: ControllerSpec, params: BenchConfig, trace: bool) -> EpisodeResult:
    sim = params.simulation
    control_params = params.control
    geometry = params.safety
    target = scene.robot_goal

    world = WorldState.from_scene(scene)
    tracks: list[PredictedTrack] = []
    warm_start: Optional[np.ndarray] = None
    control = STOP
    collisions = CollisionCounter()
    failures = 0
    path_length = 0.0
    min_separation = math.inf
    rows: list[dict[str, Any]] = []
    steps: Optional[int] = None
    started = time.perf_counter()

    if target_reached(world, target, geometry, sim.goal_tolerance):
        steps = 0

    while steps is None and world.sim_step < sim.max_sim_steps:
        if world.sim_step % sim.steps_per_control == 0:
            visible = sense(world.robot, world.pedestrians, params.sensor)
            tracks = ghost_update(
                tracks, visible, control_params.horizon, control_params.ghost_horizon,
                sim.dt, params.growth,
            )
            if world.n_ped:
                separation = np.hypot(world.positions[:, 0] - world.robot.x, world.positions[:, 1] - world.robot.y)
                min_separation = min(min_separation, float(np.min(separation)))
            try:
                control, report = mpc_step(spec, world.robot, tracks, target, params, warm_start)
                if report.status is SolveStatus.INFEASIBLE:
                    failures += 1
                    warm_start = None
                else:
                    failures += int(report.fallback)
                    warm_start = report.warm_start
            except SocialNavException as e:
                failures += 1
                control, warm_start = STOP, None
                logger.warning("Falha do controlador, usando fallback", error=e.code, message=e.message)
            except Exception as e:
                # erros de numpy/scipy também caem no fallback
                failures += 1
                control, warm_start = STOP, None
                logger.warning("Erro inesperado do controlador, usando fallback", error=type(e).__name__, message=str(e))
            if trace:
                rows.append(_trace_row(world, control))

        previous = world.robot
        world = step_world(world, control, sim.dt_sim, params.sfm)
        path_length += math.hypot(world.robot.x - previous.x, world.robot.y - previous.y)

        _, colliding = detect_collision(world, geometry)
        collisions.update(colliding)

        if target_reached(world, target, geometry, sim.goal_tolerance):
            steps = world.sim_step

    wall_time = time.perf_counter() - started if params.record_wall_time else 0.0
    record = RunRecord(
        scenario=scene.scenario_kind,
        n_ped=scene.n_ped,
        scene_id=scene.scene_id,
        controller=spec.name,
        steps_to_target=steps,
        collisions=collisions.total,
        timeout=steps is None,
        solver_failures=failures,
        wall_time_s=wall_time,
    )
    logger.info(
        "Episódio concluído",
        steps=steps,
        collisions=collisions.total,
        timeout=record.timeout,
        solver_failures=failures,
    )
    return EpisodeResult(record, path_length, min_separation, rows)


def run_episode(scene: SceneInstance, spec: ControllerSpec, params: BenchConfig) -> RunRecord:
    """Roda um episódio e devolve apenas o registro."""
    return simulate_episode(scene, spec, params).record


def write_trace_csv(rows: list[dict[str, Any]], path: Path) -> None:
    """Grava o trace de um episódio (uma linha por passo de controle)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        if not rows:
            return
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: f"{v:.6f}" if isinstance(v, float) else v for k, v in row.items()})
