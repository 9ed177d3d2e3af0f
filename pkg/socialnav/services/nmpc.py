"""
MPC não linear de horizonte deslizante.

Transcreve um ControllerSpec e a estimativa atual do mundo em um
problema de single shooting (variáveis de decisão: os H comandos e,
nas restrições adaptativas, um delta compartilhado) e resolve com
Lagrangiano aumentado. O subproblema interno é resolvido pelo
L-BFGS-B do scipy, que projeta nas caixas dos controles.
"""

import functools
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from socialnav.config import BenchConfig, SolverParams
from socialnav.models.state import STOP, ControlInput, PredictedTrack, RobotState
from socialnav.services.controllers import ConstraintKind, ControllerSpec, CostComponent
from socialnav.services.dynamics import rollout_array
from socialnav.services.socialcost import (
    EllipseFrames,
    check_covariances,
    edc_batch,
    elc_batch,
    ellipse_frames,
    inverse_square_batch,
    invert_covariances,
    mdc_batch,
    mdc_threshold_batch,
    target_denominator,
)
from socialnav.utils.exceptions import ConfigurationError
from socialnav.utils.logger import get_logger
from socialnav.utils.validators import validate_horizon, validate_time_step

logger = get_logger(__name__)


class SolveStatus(str, Enum):
    """Resultado de uma resolução."""
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class SolveReport:
    """
    Relatório de uma resolução.

    Attributes:
        status: converged, max_iter ou infeasible
        iterations: Iterações internas consumidas
        final_cost: Objetivo no iterado retornado
        max_constraint_violation: max(0, -min resíduo) no iterado retornado
        first_control: Primeiro comando da sequência
        delta: Folga adaptativa (None se o controlador não é adaptativo)
        controls: Sequência completa, shape (H, 2)
        fallback: O plano aplicado não é o do solver (parada ou warm start)
    """
    status: SolveStatus
    iterations: int
    final_cost: float
    max_constraint_violation: float
    first_control: ControlInput
    delta: Optional[float]
    controls: np.ndarray
    fallback: bool = False

    @property
    def warm_start(self) -> np.ndarray:
        """Sequência deslocada um passo, repetindo o último comando."""
        return np.concatenate((self.controls[1:], self.controls[-1:]), axis=0)

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

    @classmethod
    def idle(cls, horizon: int) -> "SolveReport":
        """Relatório do atalho no alvo: nenhuma resolução, robô parado."""
        return cls(
            status=SolveStatus.CONVERGED,
            iterations=0,
            final_cost=0.0,
            max_constraint_violation=0.0,
            first_control=STOP,
            delta=None,
            controls=np.zeros((horizon, 2)),
        )


# =============================================================================
# BLOCOS DO PROBLEMA
# =============================================================================

@dataclass(eq=False)
class SocialCostBlock:
    """Custo euclidiano ou de Mahalanobis sobre r_1..r_H."""
    component: CostComponent
    weight: float
    means: np.ndarray
    inv_covs: Optional[np.ndarray] = None

    def evaluate(self, positions: np.ndarray) -> tuple[float, np.ndarray]:
        diff = positions[None, :, :] - self.means
        if self.component is CostComponent.MAHALANOBIS:
            mapped = np.einsum("nhij,nhj->nhi", self.inv_covs, diff)
            sq = np.einsum("nhi,nhi->nh", diff, mapped)
            sq_grad = 2.0 * mapped
        else:
            sq = np.sum(diff ** 2, axis=-1)
            sq_grad = 2.0 * diff
        value, grad, _ = inverse_square_batch(sq, sq_grad, self.weight)
        return value, np.sum(grad, axis=0)


@dataclass(eq=False)
class ConstraintBlock:
    """
    Resíduos de uma restrição para N pedestres x H passos.

    O passo k do horizonte compara r_{k+1} com a predição means[:, k].
    """
    kind: ConstraintKind
    means: np.ndarray
    margin: float
    inv_covs: Optional[np.ndarray] = None
    kappa: Optional[np.ndarray] = None
    frames: Optional[EllipseFrames] = None
    gamma: Optional[float] = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.means.shape[0], self.means.shape[1]

    def evaluate(
        self,
        positions: np.ndarray,
        delta: float
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Returns:
            tuple: (resíduos (N, H), gradiente em r (N, H, 2), derivada em delta (N, H))
        """
        diff = positions[None, :, :] - self.means
        if self.kind in (ConstraintKind.EDC, ConstraintKind.AEDC):
            return edc_batch(diff, self.margin, delta)
        if self.kind in (ConstraintKind.MDC, ConstraintKind.AMDC):
            return mdc_batch(diff, self.inv_covs, self.kappa, delta)
        return elc_batch(diff, self.frames, self.gamma, self.margin, delta)


@dataclass(eq=False)
class HorizonProblem:
    """
    Problema de horizonte finito em single shooting.

    Vetor de decisão z = [v_0, w_0, ..., v_{H-1}, w_{H-1}, (delta)].

    Attributes:
        horizon: H
        dt: Passo do controlador [s]
        state0: Pose inicial (x, y, theta)
        target: Alvo do robô
        weights: Pesos do objetivo
        augmented: Usa o custo de controle aumentado (com delta)
        bounds: Caixa de cada variável de decisão
        social_cost: Custo social opcional
        constraint: Restrições opcionais
        solver_params: Tolerâncias e orçamento do solver
        track_ids: Pedestres na ordem dos blocos
    """
    horizon: int
    dt: float
    state0: np.ndarray
    target: np.ndarray
    q_u: np.ndarray
    q_ubar: np.ndarray
    q_r: float
    augmented: bool
    bounds: list[tuple[float, float]]
    solver_params: SolverParams
    social_cost: Optional[SocialCostBlock] = None
    constraint: Optional[ConstraintBlock] = None
    track_ids: list[int] = field(default_factory=list)

    def __post_init__(self):
        self._denominator_sq = target_denominator(self.state0[:2], self.target) ** 2
        self._lower = np.array([b[0] for b in self.bounds])
        self._upper = np.array([b[1] for b in self.bounds])
        if not (np.all(np.isfinite(self._lower)) and np.all(np.isfinite(self._upper))
                and np.all(self._lower <= self._upper)):
            raise ConfigurationError("Limites das variáveis de decisão inválidos")

    @property
    def has_delta(self) -> bool:
        return self.augmented

    @property
    def n_vars(self) -> int:
        return 2 * self.horizon + (1 if self.has_delta else 0)

    @property
    def n_constraints(self) -> int:
        if self.constraint is None:
            return 0
        n_ped, horizon = self.constraint.shape
        return n_ped * horizon

    @property
    def lower(self) -> np.ndarray:
        return self._lower

    @property
    def upper(self) -> np.ndarray:
        return self._upper

    def split(self, z: np.ndarray) -> tuple[np.ndarray, float]:
        """Separa comandos (H, 2) e delta."""
        controls = z[: 2 * self.horizon].reshape(self.horizon, 2)
        delta = float(z[-1]) if self.has_delta else 0.0
        return controls, delta

    def positions(self, z: np.ndarray) -> np.ndarray:
        """Trajetória r_1..r_H do rollout, shape (H, 2)."""
        return rollout_array(self.state0, self.split(z)[0], self.dt)[0]

    def _controls_vjp(
        self,
        controls: np.ndarray,
        headings: np.ndarray,
        pos_grad: np.ndarray
    ) -> np.ndarray:
        # Pullback adjunto do rollout: gradientes em r_1..r_H -> gradientes em (v, w)
        dt = self.dt
        cos, sin = np.cos(headings), np.sin(headings)
        tail = np.cumsum(pos_grad[::-1], axis=0)[::-1]
        grad_v = dt * (cos * tail[:, 0] + sin * tail[:, 1])
        grad_theta = dt * controls[:, 0] * (-sin * tail[:, 0] + cos * tail[:, 1])
        theta_tail = np.cumsum(grad_theta[::-1])[::-1]
        grad_omega = dt * (theta_tail - grad_theta)
        return np.column_stack((grad_v, grad_omega))

    def _evaluate(
        self,
        z: np.ndarray,
        multipliers: Optional[np.ndarray] = None,
        penalty: Optional[float] = None
    ) -> tuple[float, np.ndarray]:
        controls, delta = self.split(z)
        positions, headings = rollout_array(self.state0, controls, self.dt)

        grad_delta = 0.0
        if self.augmented:
            u_bar = np.column_stack((controls, np.full(self.horizon, delta)))
            mapped = u_bar @ (self.q_ubar + self.q_ubar.T).T
            value = 0.5 * float(np.sum(u_bar * mapped))
            grad_controls = mapped[:, :2].copy()
            grad_delta += float(np.sum(mapped[:, 2]))
        else:
            mapped = controls @ (self.q_u + self.q_u.T).T
            value = 0.5 * float(np.sum(controls * mapped))
            grad_controls = mapped

        # r_0 entra como constante: soma de k=0..H
        start_offset = self.state0[:2] - self.target
        offsets = positions - self.target
        scale = self.q_r / self._denominator_sq
        value += scale * (float(start_offset @ start_offset) + float(np.sum(offsets ** 2)))
        pos_grad = 2.0 * scale * offsets

        if self.social_cost is not None:
            social_value, social_grad = self.social_cost.evaluate(positions)
            value += social_value
            pos_grad = pos_grad + social_grad

        if self.constraint is not None and multipliers is not None:
            residual, grad_r, grad_d = self.constraint.evaluate(positions, delta)
            active = np.maximum(0.0, multipliers - penalty * residual)
            value += float(np.sum(active ** 2 - multipliers ** 2)) / (2.0 * penalty)
            pos_grad = pos_grad - np.sum(active[..., None] * grad_r, axis=0)
            grad_delta -= float(np.sum(active * grad_d))

        grad = np.empty(self.n_vars)
        grad[: 2 * self.horizon] = (grad_controls + self._controls_vjp(controls, headings, pos_grad)).ravel()
        if self.has_delta:
            grad[-1] = grad_delta
        return value, grad

    def objective(self, z: np.ndarray) -> tuple[float, np.ndarray]:
        """Objetivo e gradiente (sem restrições)."""
        return self._evaluate(z)

    def lagrangian(
        self,
        z: np.ndarray,
        multipliers: np.ndarray,
        penalty: float
    ) -> tuple[float, np.ndarray]:
        """Objetivo mais a penalidade do Lagrangiano aumentado e gradiente."""
        return self._evaluate(z, multipliers, penalty)

    def constraint_values(self, z: np.ndarray) -> np.ndarray:
        """Resíduos (N, H); vazio se não há restrições."""
        if self.constraint is None:
            return np.zeros((0, self.horizon))
        controls, delta = self.split(z)
        positions = rollout_array(self.state0, controls, self.dt)[0]
        return self.constraint.evaluate(positions, delta)[0]

    def max_violation(self, z: np.ndarray) -> float:
        residual = self.constraint_values(z)
        if residual.size == 0:
            return 0.0
        return float(max(0.0, -np.min(residual)))

    def constraint_closures(self) -> list[Callable[[np.ndarray], float]]:
        """Um resíduo escalar por (pedestre, passo), na ordem de pedestres."""
        if self.constraint is None:
            return []
        n_ped, horizon = self.constraint.shape
        return [
            functools.partial(self._single_residual, i, k)
            for i in range(n_ped)
            for k in range(horizon)
        ]

    def _single_residual(self, i: int, k: int, z: np.ndarray) -> float:
        return float(self.constraint_values(z)[i, k])

    def initial_point(self, warm_start: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Ponto inicial projetado na caixa.

        Sem warm start: todos os comandos em (v_max/2, 0). Delta começa em 0.
        """
        z = np.zeros(self.n_vars)
        if warm_start is None:
            controls = np.tile([self.upper[0] / 2.0, 0.0], (self.horizon, 1))
        else:
            controls = np.asarray(warm_start, dtype=float)
            if controls.shape != (self.horizon, 2):
                raise ConfigurationError(
                    f"Warm start com shape {controls.shape}, esperado ({self.horizon}, 2)"
                )
        z[: 2 * self.horizon] = controls.ravel()
        return np.clip(z, self.lower, self.upper)

    def escape_points(self, omega: float) -> list[np.ndarray]:
        """Pontos frios curvos, (v_max/2, +omega) e (v_max/2, -omega)."""
        points = []
        for sign in (1.0, -1.0):
            controls = np.tile([self.upper[0] / 2.0, sign * omega], (self.horizon, 1))
            points.append(self.initial_point(controls))
        return points


# =============================================================================
# TRANSCRIÇÃO
# =============================================================================

def transcribe(
    spec: ControllerSpec,
    state: RobotState,
    tracks: Sequence[PredictedTrack],
    target: Sequence[float],
    params: BenchConfig
) -> HorizonProblem:
    """
    Monta o problema de horizonte finito do controlador.

    Args:
        spec: Controlador
        state: Pose atual do robô
        tracks: Trilhas previstas (visíveis e fantasmas)
        target: Alvo do robô
        params: Configuração (horizonte, limites, solver)

    Returns:
        HorizonProblem: n_constraints = H x pedestres nas formulações com restrição

    Raises:
        ConfigurationError: Horizonte das trilhas menor que H
        SingularCovarianceError: Covariância inválida em formulação que a usa
    """
    horizon = params.control.horizon
    dt = params.simulation.dt
    validate_horizon(horizon)
    validate_time_step(dt)

    tracks = list(tracks)
    for track in tracks:
        if track.horizon < horizon:
            raise ConfigurationError(
                f"Trilha {track.ped_id} tem horizonte {track.horizon} < H={horizon}",
                {"ped_id": track.ped_id, "horizon": track.horizon}
            )

    track_ids = [t.ped_id for t in tracks]
    if tracks:
        means = np.stack([t.means[:horizon] for t in tracks])
        covs = np.stack([t.covs[:horizon] for t in tracks])
    else:
        means = np.zeros((0, horizon, 2))
        covs = np.zeros((0, horizon, 2, 2))

    inv_covs = None
    if spec.needs_covariance and tracks:
        check_covariances(covs, track_ids)
        inv_covs = invert_covariances(covs)

    social_cost = None
    if tracks and spec.cost_component is CostComponent.EUCLIDEAN:
        social_cost = SocialCostBlock(spec.cost_component, spec.weights.q_ed, means)
    elif tracks and spec.cost_component is CostComponent.MAHALANOBIS:
        social_cost = SocialCostBlock(spec.cost_component, spec.weights.q_md, means, inv_covs)

    constraint = None
    if spec.constraint is not ConstraintKind.NONE and tracks:
        constraint = ConstraintBlock(kind=spec.constraint, means=means, margin=spec.geometry.margin)
        if spec.constraint in (ConstraintKind.MDC, ConstraintKind.AMDC):
            constraint.inv_covs = inv_covs
            constraint.kappa = mdc_threshold_batch(covs, spec.geometry)
        elif spec.constraint.is_elliptic:
            constraint.frames = ellipse_frames(covs)
            constraint.gamma = spec.gamma

    control = params.control
    bounds = [(control.v_min, control.v_max), (control.omega_min, control.omega_max)] * horizon
    delta_bounds = spec.delta_bounds()
    if delta_bounds is not None:
        bounds.append(delta_bounds)

    return HorizonProblem(
        horizon=horizon,
        dt=dt,
        state0=state.as_array(),
        target=np.asarray(target, dtype=float),
        q_u=spec.weights.q_u,
        q_ubar=spec.weights.q_ubar,
        q_r=spec.weights.q_r,
        augmented=spec.uses_augmented_cost,
        bounds=bounds,
        solver_params=params.solver,
        social_cost=social_cost,
        constraint=constraint,
        track_ids=track_ids,
    )


# =============================================================================
# SOLVER
# =============================================================================

@dataclass
class _Attempt:
    """Resultado de uma partida do Lagrangiano aumentado."""
    z: np.ndarray
    cost: float
    violation: float
    status: SolveStatus
    iterations: int


class AugmentedLagrangianSolver:
    """
    Lagrangiano aumentado para restrições c(z) >= 0.

    Iterações externas atualizam multiplicadores (lambda = max(0, lambda - rho*c))
    e a penalidade (x10 até penalty_max quando a violação não cai
    para um quarto). O orçamento max_iterations conta as iterações
    internas do L-BFGS-B de todas as partidas. Sempre devolve o melhor
    iterado, ordenado por (violação acima da tolerância, custo).

    Uma trajetória que atravessa o centro de um pedestre é ponto
    estacionário das restrições de distância: o gradiente lateral se
    anula. Quando a primeira partida termina violando as restrições,
    o solver recomeça dos pontos curvos de escape_points com o
    orçamento que sobrou.
    """

    # Iterações externas seguidas sem mover z que caracterizam estagnação
    STALL_ROUNDS = 2

    def __init__(self, params: Optional[SolverParams] = None):
        self.params = params or SolverParams()

    def _rank(self, violation: float, cost: float) -> tuple[float, float]:
        return (max(violation - self.params.tol_con, 0.0), cost)

    def _report(
        self,
        problem: HorizonProblem,
        z: np.ndarray,
        status: SolveStatus,
        iterations: int,
        cost: float,
        violation: float,
        fallback: bool = False
    ) -> SolveReport:
        controls, delta = problem.split(z)
        return SolveReport(
            status=status,
            iterations=iterations,
            final_cost=cost,
            max_constraint_violation=violation,
            first_control=ControlInput(float(controls[0, 0]), float(controls[0, 1])),
            delta=delta if problem.has_delta else None,
            controls=controls.copy(),
            fallback=fallback,
        )

    def _descend(self, problem: HorizonProblem, z: np.ndarray, budget: int) -> _Attempt:
        """Uma partida: iterações externas até convergir, estagnar ou esgotar o orçamento."""
        params = self.params
        cost = problem.objective(z)[0]
        violation = problem.max_violation(z)
        best = _Attempt(z, cost, violation, SolveStatus.MAX_ITER, 0)
        bounds = list(zip(problem.lower, problem.upper))
        multipliers = np.zeros((len(problem.track_ids), problem.horizon))
        penalty = params.penalty_init
        iterations = 0
        status = SolveStatus.MAX_ITER
        previous_cost, previous_violation = cost, violation
        frozen = 0

        for _ in range(params.max_outer):
            remaining = budget - iterations
            if remaining <= 0:
                break
            result = minimize(
                problem.lagrangian,
                z,
                args=(multipliers, penalty),
                jac=True,
                method="L-BFGS-B",
                bounds=bounds,
                options={"maxiter": remaining},
            )
            iterations += max(int(result.nit), 1)
            z_next = np.clip(result.x, problem.lower, problem.upper)
            moved = float(np.max(np.abs(z_next - z))) > 1e-8
            z = z_next
            cost = problem.objective(z)[0]
            residual = problem.constraint_values(z)
            violation = float(max(0.0, -np.min(residual))) if residual.size else 0.0

            if np.isfinite(cost) and self._rank(violation, cost) < self._rank(best.violation, best.cost):
                best = _Attempt(z, cost, violation, SolveStatus.MAX_ITER, 0)

            stalled = abs(cost - previous_cost) <= params.tol_obj * max(1.0, abs(cost))
            if violation <= params.tol_con and (result.success or stalled):
                status = SolveStatus.CONVERGED
                break

            frozen = 0 if moved else frozen + 1
            if frozen >= self.STALL_ROUNDS:
                logger.debug("Solver estagnado", iterations=iterations, violation=violation)
                break

            if residual.size:
                multipliers = np.maximum(0.0, multipliers - penalty * residual)
                if violation > 0.25 * previous_violation:
                    penalty = min(penalty * params.penalty_growth, params.penalty_max)
            previous_cost, previous_violation = cost, violation

        if status is SolveStatus.CONVERGED and best.violation > params.tol_con:
            status = SolveStatus.MAX_ITER
        best.status = status
        best.iterations = iterations
        return best

    def solve(
        self,
        problem: HorizonProblem,
        warm_start: Optional[np.ndarray] = None
    ) -> SolveReport:
        """
        Resolve o problema a partir do warm start (ou do ponto frio).

        Returns:
            SolveReport: Relatório do melhor iterado entre as partidas
        """
        params = self.params
        z = problem.initial_point(warm_start)
        cost, grad = problem.objective(z)
        violation = problem.max_violation(z)
        if not (np.isfinite(cost) and np.all(np.isfinite(grad)) and np.isfinite(violation)):
            logger.warning("Objetivo não finito no ponto inicial", cost=cost, violation=violation)
            return self._report(problem, z, SolveStatus.INFEASIBLE, 0, float("inf"), float("inf"))

        best = self._descend(problem, z, params.max_iterations)
        iterations = best.iterations
        restarts = problem.escape_points(params.escape_omega) if problem.n_constraints else []
        for start in restarts:
            remaining = params.max_iterations - iterations
            if best.violation <= params.tol_con or remaining <= 0:
                break
            attempt = self._descend(problem, start, remaining)
            iterations += attempt.iterations
            if self._rank(attempt.violation, attempt.cost) < self._rank(best.violation, best.cost):
                best = attempt

        if best.status is not SolveStatus.CONVERGED:
            logger.debug(
                "Solver sem convergência",
                iterations=iterations,
                violation=best.violation,
                cost=best.cost,
            )
        return self._report(problem, best.z, best.status, iterations, float(best.cost), float(best.violation))

    def least_violating(
        self,
        problem: HorizonProblem,
        report: SolveReport,
        warm_start: Optional[np.ndarray] = None
    ) -> SolveReport:
        """
        Compara o plano do solver com a parada e com o plano anterior deslocado.

        Returns:
            SolveReport: O de menor (violação, custo); fallback=True se não é o do solver
        """
        best = report
        candidates = [np.zeros((problem.horizon, 2))]
        if warm_start is not None:
            candidates.append(np.asarray(warm_start, dtype=float))
        for controls in candidates:
            z = problem.initial_point(controls)
            cost = problem.objective(z)[0]
            violation = problem.max_violation(z)
            if not np.isfinite(cost):
                continue
            if self._rank(violation, cost) < self._rank(best.max_constraint_violation, best.final_cost):
                best = self._report(
                    problem, z, report.status, report.iterations, float(cost), float(violation), fallback=True
                )
        return best


def solve(problem: HorizonProblem, warm_start: Optional[np.ndarray] = None) -> SolveReport:
    """Resolve com os parâmetros de solver embutidos no problema."""
    return AugmentedLagrangianSolver(problem.solver_params).solve(problem, warm_start)


def mpc_step(
    spec: ControllerSpec,
    state: RobotState,
    tracks: Sequence[PredictedTrack],
    target: Sequence[float],
    params: BenchConfig,
    warm_start: Optional[np.ndarray] = None
) -> tuple[ControlInput, SolveReport]:
    """
    Um passo de sample and hold: transcreve, resolve e devolve o primeiro comando.

    No alvo (||r - alvo|| < goal_tolerance) devolve (0, 0) sem resolver.
    Com status infeasible devolve o fallback (0, 0) junto com o relatório.
    Se o plano do solver ainda viola as restrições além de tol_con, aplica
    o menos violado entre ele, a parada e o warm start recebido
    (report.fallback marca a troca). O warm start da próxima chamada é
    report.warm_start.
    """
    distance = float(np.hypot(state.x - target[0], state.y - target[1]))
    if distance < params.simulation.goal_tolerance:
        return STOP, SolveReport.idle(params.control.horizon)

    problem = transcribe(spec, state, tracks, target, params)
    solver = AugmentedLagrangianSolver(problem.solver_params)
    report = solver.solve(problem, warm_start)
    if report.status is SolveStatus.INFEASIBLE:
        logger.warning("Fallback para parada", controller=spec.name)
        return STOP, report
    if report.max_constraint_violation > problem.solver_params.tol_con:
        report = solver.least_violating(problem, report, warm_start)
        if report.fallback:
            logger.debug(
                "Plano do solver inseguro, usando fallback",
                controller=spec.name,
                violation=report.max_constraint_violation,
            )
    return report.first_control, report
