"""
Termos de custo e resíduos de restrição da navegação social.

Todas as funções são puras e têm gradiente analítico em relação à
posição do robô (e a delta, nas formas adaptativas). As versões
escalares servem de referência e de oráculo nos testes; os kernels
em lote (sufixo _batch) são o que o solver avalia, vetorizados sobre
pedestres e passos do horizonte.

Convenção de sinal dos resíduos: restrição satisfeita se resíduo >= 0.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from socialnav.config import SafetyGeometry, WeightParams
from socialnav.models.state import ControlInput, Covariance2, EllipseParams
from socialnav.utils.exceptions import ConfigurationError, SingularCovarianceError
from socialnav.utils.validators import is_symmetric_psd

# Limite inferior da distância nos custos de inverso do quadrado [m]
EPS_DIV = 1e-3
# Denominador mínimo do custo de alvo [m]
EPS_DEN = 1e-6
# Determinante mínimo aceito em covariâncias [m^4]
EPS_DET = 1e-12


@dataclass(frozen=True, eq=False)
class Weights:
    """
    Pesos da função objetivo.

    Attributes:
        q_u: Peso 2x2 do controle
        q_ubar: Peso 3x3 do controle aumentado (v, omega, delta)
        q_r: Fator de inalcançabilidade da posição
        q_ed: Peso do custo euclidiano
        q_md: Peso do custo de Mahalanobis
    """
    q_u: np.ndarray
    q_ubar: np.ndarray
    q_r: float
    q_ed: float
    q_md: float

    def __post_init__(self):
        object.__setattr__(self, "q_u", np.asarray(self.q_u, dtype=float))
        object.__setattr__(self, "q_ubar", np.asarray(self.q_ubar, dtype=float))
        if self.q_u.shape != (2, 2) or not is_symmetric_psd(self.q_u):
            raise ConfigurationError("Q_u precisa ser 2x2 simétrica PSD", {"q_u": self.q_u.tolist()})
        if self.q_ubar.shape != (3, 3) or not is_symmetric_psd(self.q_ubar):
            raise ConfigurationError("Q_ubar precisa ser 3x3 simétrica PSD", {"q_ubar": self.q_ubar.tolist()})
        for name in ("q_r", "q_ed", "q_md"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigurationError(f"{name} precisa ser não negativo", {name: value})

    @classmethod
    def from_params(cls, params: WeightParams, q_r: float) -> "Weights":
        return cls(
            q_u=np.array(params.q_u),
            q_ubar=np.array(params.q_ubar),
            q_r=q_r,
            q_ed=params.q_ed,
            q_md=params.q_md,
        )


class PenaltyEvaluation(NamedTuple):
    """Valor, gradiente em relação à posição e flag de saturação."""
    value: float
    gradient: np.ndarray
    saturated: bool


# =============================================================================
# CUSTOS DE CONTROLE E DE ALVO
# =============================================================================

def control_cost(u: ControlInput, w: Weights) -> float:
    """u^T Q_u u."""
    vec = u.as_array()
    return float(vec @ w.q_u @ vec)


def control_cost_gradient(u: ControlInput, w: Weights) -> np.ndarray:
    return (w.q_u + w.q_u.T) @ u.as_array()


def augmented_control_cost(u_bar: Sequence[float], w: Weights) -> float:
    """ubar^T Q_ubar ubar, com ubar = (v, omega, delta)."""
    vec = np.asarray(u_bar, dtype=float)
    return float(vec @ w.q_ubar @ vec)


def augmented_control_cost_gradient(u_bar: Sequence[float], w: Weights) -> np.ndarray:
    return (w.q_ubar + w.q_ubar.T) @ np.asarray(u_bar, dtype=float)


def target_denominator(r_0: Sequence[float], r_target: Sequence[float]) -> float:
    """Distância inicial até o alvo, limitada por baixo em EPS_DEN."""
    return max(float(np.hypot(*(np.asarray(r_0) - np.asarray(r_target)))), EPS_DEN)


def target_cost(
    r_k: Sequence[float],
    r_0: Sequence[float],
    r_target: Sequence[float],
    q_r: float
) -> float:
    """
    Q_r * (||r_k - alvo|| / ||r_0 - alvo||)^2.

    Com o robô praticamente no alvo o denominador vale EPS_DEN.
    """
    diff = np.asarray(r_k, dtype=float) - np.asarray(r_target, dtype=float)
    return float(q_r * (diff @ diff) / target_denominator(r_0, r_target) ** 2)


def target_cost_gradient(
    r_k: Sequence[float],
    r_0: Sequence[float],
    r_target: Sequence[float],
    q_r: float
) -> np.ndarray:
    diff = np.asarray(r_k, dtype=float) - np.asarray(r_target, dtype=float)
    return 2.0 * q_r * diff / target_denominator(r_0, r_target) ** 2


def terminal_cost(
    r_h: Sequence[float],
    r_0: Sequence[float],
    r_target: Sequence[float],
    q_r: float
) -> float:
    return target_cost(r_h, r_0, r_target, q_r)


def stage_cost(
    u: ControlInput,
    r_k: Sequence[float],
    r_0: Sequence[float],
    r_target: Sequence[float],
    w: Weights
) -> float:
    return control_cost(u, w) + target_cost(r_k, r_0, r_target, w.q_r)


# =============================================================================
# DISTÂNCIAS
# =============================================================================

def euclidean_distance(r: Sequence[float], p: Sequence[float]) -> float:
    return float(math.hypot(r[0] - p[0], r[1] - p[1]))


def check_covariances(covs: np.ndarray, track_ids: Optional[Sequence[int]] = None) -> None:
    """
    Verifica que cada covariância (..., 2, 2) é positiva definida.

    Raises:
        SingularCovarianceError: Identifica a primeira trilha inválida
    """
    covs = np.asarray(covs, dtype=float)
    det = covs[..., 0, 0] * covs[..., 1, 1] - covs[..., 0, 1] * covs[..., 1, 0]
    bad = ~((covs[..., 0, 0] > 0) & (det >= EPS_DET))
    if np.any(bad):
        index = np.argwhere(bad)[0]
        track_id = None
        if track_ids is not None and covs.ndim > 2:
            track_id = int(track_ids[int(index[0])])
        raise SingularCovarianceError(track_id, float(det[tuple(index)]))


def invert_covariances(covs: np.ndarray) -> np.ndarray:
    """Inversa fechada de covariâncias 2x2 em lote."""
    covs = np.asarray(covs, dtype=float)
    det = covs[..., 0, 0] * covs[..., 1, 1] - covs[..., 0, 1] * covs[..., 1, 0]
    inv = np.empty_like(covs)
    inv[..., 0, 0] = covs[..., 1, 1] / det
    inv[..., 1, 1] = covs[..., 0, 0] / det
    inv[..., 0, 1] = -covs[..., 0, 1] / det
    inv[..., 1, 0] = -covs[..., 1, 0] / det
    return inv


def _quad_form(diff: np.ndarray, inv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # diff^T inv diff e seu gradiente 2 inv diff (inv simétrica)
    mapped = np.einsum("...ij,...j->...i", inv, diff)
    return np.einsum("...i,...i->...", diff, mapped), 2.0 * mapped


def mahalanobis_distance(
    r: Sequence[float],
    p: Sequence[float],
    cov: Covariance2,
    track_id: Optional[int] = None
) -> float:
    """
    sqrt((r-p)^T S^-1 (r-p)).

    Raises:
        SingularCovarianceError: Se S não é positiva definida
    """
    matrix = cov.as_matrix()
    check_covariances(matrix[None], None if track_id is None else [track_id])
    diff = np.asarray(r, dtype=float) - np.asarray(p, dtype=float)
    value, _ = _quad_form(diff, invert_covariances(matrix))
    return float(math.sqrt(max(float(value), 0.0)))


# =============================================================================
# CUSTOS DE INVERSO DO QUADRADO
# =============================================================================

def inverse_square_batch(
    sq_distance: np.ndarray,
    sq_distance_grad: np.ndarray,
    weight: float
) -> tuple[float, np.ndarray, bool]:
    """
    weight * sum(1 / d^2) com d limitado por baixo em EPS_DIV.

    Args:
        sq_distance: d^2 por termo, shape (...)
        sq_distance_grad: Gradiente de d^2 em relação à posição, shape (..., 2)
        weight: Peso do custo

    Returns:
        tuple: (valor, gradiente por termo com shape (..., 2), saturado)
    """
    floor = EPS_DIV ** 2
    clamped = sq_distance < floor
    safe = np.where(clamped, floor, sq_distance)
    value = weight * float(np.sum(1.0 / safe))
    scale = np.where(clamped, 0.0, -weight / safe ** 2)
    return value, scale[..., None] * sq_distance_grad, bool(np.any(clamped))


def ed_penalty(r: Sequence[float], means: np.ndarray, q_ed: float) -> PenaltyEvaluation:
    """Custo euclidiano de um passo com gradiente e flag de saturação."""
    means = np.asarray(means, dtype=float).reshape(-1, 2)
    diff = np.asarray(r, dtype=float) - means
    value, grad, saturated = inverse_square_batch(np.sum(diff ** 2, axis=-1), 2.0 * diff, q_ed)
    return PenaltyEvaluation(value, np.sum(grad, axis=0), saturated)


def ed_cost(r: Sequence[float], means: np.ndarray, q_ed: float) -> float:
    """Q_ED * sum_i 1 / d_i^2 sobre os pedestres rastreados no passo."""
    return ed_penalty(r, means, q_ed).value


def ed_cost_gradient(r: Sequence[float], means: np.ndarray, q_ed: float) -> np.ndarray:
    return ed_penalty(r, means, q_ed).gradient


def md_penalty(
    r: Sequence[float],
    means: np.ndarray,
    covs: np.ndarray,
    q_md: float,
    track_ids: Optional[Sequence[int]] = None
) -> PenaltyEvaluation:
    """Custo de Mahalanobis de um passo com gradiente e flag de saturação."""
    means = np.asarray(means, dtype=float).reshape(-1, 2)
    covs = np.asarray(covs, dtype=float).reshape(-1, 2, 2)
    check_covariances(covs, track_ids)
    diff = np.asarray(r, dtype=float) - means
    sq, sq_grad = _quad_form(diff, invert_covariances(covs))
    value, grad, saturated = inverse_square_batch(sq, sq_grad, q_md)
    return PenaltyEvaluation(value, np.sum(grad, axis=0), saturated)


def md_cost(r: Sequence[float], means: np.ndarray, covs: np.ndarray, q_md: float) -> float:
    """Q_MD * sum_i 1 / d_MD,i^2; mesma regra de saturação do custo euclidiano."""
    return md_penalty(r, means, covs, q_md).value


def md_cost_gradient(r: Sequence[float], means: np.ndarray, covs: np.ndarray, q_md: float) -> np.ndarray:
    return md_penalty(r, means, covs, q_md).gradient


# =============================================================================
# RESTRIÇÃO EUCLIDIANA (EDC / AEDC)
# =============================================================================

def edc_batch(
    diff: np.ndarray,
    margin: float,
    delta: float = 0.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Resíduo ||r-p||^2 - m^2 - delta em lote.

    Returns:
        tuple: (resíduos, gradiente em r com shape (..., 2), derivada em delta)
    """
    residual = np.sum(diff ** 2, axis=-1) - margin ** 2 - delta
    return residual, 2.0 * diff, np.full(residual.shape, -1.0)


def edc_delta_residual(
    r: Sequence[float],
    p: Sequence[float],
    g: SafetyGeometry,
    delta: float
) -> float:
    diff = np.asarray(r, dtype=float) - np.asarray(p, dtype=float)
    return float(edc_batch(diff, g.margin, delta)[0])


def edc_delta_residual_gradient(
    r: Sequence[float],
    p: Sequence[float],
    g: SafetyGeometry,
    delta: float
) -> tuple[np.ndarray, float]:
    diff = np.asarray(r, dtype=float) - np.asarray(p, dtype=float)
    _, grad_r, grad_delta = edc_batch(diff, g.margin, delta)
    return grad_r, float(grad_delta)


def edc_residual(r: Sequence[float], p: Sequence[float], g: SafetyGeometry) -> float:
    """||r-p||^2 - (r_rob + r_ped + d_safe)^2."""
    return edc_delta_residual(r, p, g, 0.0)


def edc_residual_gradient(r: Sequence[float], p: Sequence[float], g: SafetyGeometry) -> np.ndarray:
    return edc_delta_residual_gradient(r, p, g, 0.0)[0]


# =============================================================================
# RESTRIÇÃO DE MAHALANOBIS (MDC / AMDC)
# =============================================================================

def mdc_threshold_batch(covs: np.ndarray, g: SafetyGeometry) -> np.ndarray:
    """kappa para covariâncias (..., 2, 2) já verificadas."""
    covs = np.asarray(covs, dtype=float)
    det = covs[..., 0, 0] * covs[..., 1, 1] - covs[..., 0, 1] * covs[..., 1, 0]
    # sqrt(det(2 pi S)) = 2 pi sqrt(det S) para matrizes 2x2
    argument = 2.0 * math.pi * np.sqrt(det) * g.p_col / g.sphere_volume
    return np.maximum(0.0, -2.0 * np.log(argument))


def mdc_threshold(cov: Covariance2, g: SafetyGeometry) -> float:
    """
    Limiar kappa da restrição de Mahalanobis.

    kappa = max(0, -2 ln(sqrt(det(2 pi S)) * P_col / V_S)); a restrição
    usada pelo solver é d_MD^2 - kappa >= 0.
    """
    matrix = cov.as_matrix()
    check_covariances(matrix[None])
    return float(mdc_threshold_batch(matrix, g))


def mdc_batch(
    diff: np.ndarray,
    inv_covs: np.ndarray,
    kappa: np.ndarray,
    delta: float = 0.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Resíduo d_MD^2 - kappa - delta em lote."""
    sq, grad = _quad_form(diff, inv_covs)
    residual = sq - kappa - delta
    return residual, grad, np.full(residual.shape, -1.0)


def mdc_delta_residual(
    r: Sequence[float],
    p: Sequence[float],
    cov: Covariance2,
    g: SafetyGeometry,
    delta: float
) -> float:
    kappa = mdc_threshold(cov, g)
    diff = np.asarray(r, dtype=float) - np.asarray(p, dtype=float)
    return float(mdc_batch(diff, invert_covariances(cov.as_matrix()), kappa, delta)[0])


def mdc_delta_residual_gradient(
    r: Sequence[float],
    p: Sequence[float],
    cov: Covariance2,
    g: SafetyGeometry,
    delta: float
) -> tuple[np.ndarray, float]:
    kappa = mdc_threshold(cov, g)
    diff = np.asarray(r, dtype=float) - np.asarray(p, dtype=float)
    _, grad_r, grad_delta = mdc_batch(diff, invert_covariances(cov.as_matrix()), kappa, delta)
    return grad_r, float(grad_delta)


def mdc_residual(r: Sequence[float], p: Sequence[float], cov: Covariance2, g: SafetyGeometry) -> float:
    return mdc_delta_residual(r, p, cov, g, 0.0)


# =============================================================================
# RESTRIÇÃO ELÍPTICA (ELC / AELC)
# =============================================================================

class EllipseFrames(NamedTuple):
    """Raízes dos autovalores e orientação de covariâncias em lote."""
    sqrt_l1: np.ndarray
    sqrt_l2: np.ndarray
    cos_psi: np.ndarray
    sin_psi: np.ndarray
    psi: np.ndarray


def ellipse_frames(covs: np.ndarray) -> EllipseFrames:
    """
    Autodecomposição fechada de covariâncias 2x2.

    psi é a orientação do autovetor do maior autovalor, em [-pi/2, pi/2);
    em matrizes isotrópicas psi = 0.
    """
    covs = np.asarray(covs, dtype=float)
    sxx, sxy, syy = covs[..., 0, 0], covs[..., 0, 1], covs[..., 1, 1]
    mean = 0.5 * (sxx + syy)
    radius = np.hypot(0.5 * (sxx - syy), sxy)
    l1 = mean + radius
    l2 = np.maximum(mean - radius, 0.0)
    isotropic = radius <= 1e-15 * np.maximum(mean, 1.0)
    psi = np.where(isotropic, 0.0, 0.5 * np.arctan2(2.0 * sxy, sxx - syy))
    psi = np.where(psi >= math.pi / 2, psi - math.pi, psi)
    return EllipseFrames(np.sqrt(l1), np.sqrt(l2), np.cos(psi), np.sin(psi), psi)


def ellipse_from_covariance(
    cov: Covariance2,
    gamma: float,
    g: SafetyGeometry,
    delta: float = 0.0
) -> EllipseParams:
    """
    Semi-eixos e orientação da elipse de exclusão.

    a = gamma*sqrt(l1)*(1-delta) + m, b = gamma*sqrt(l2)*(1-delta) + m,
    com m = r_rob + r_ped + d_safe.

    Raises:
        SingularCovarianceError: Se S não é positiva definida
        ConfigurationError: Se gamma <= 0 ou delta fora de [0, 1)
    """
    if not gamma > 0:
        raise ConfigurationError(f"gamma precisa ser positivo: {gamma}", {"gamma": gamma})
    if not 0.0 <= delta < 1.0:
        raise ConfigurationError(f"delta fora de [0, 1): {delta}", {"delta": delta})
    matrix = cov.as_matrix()
    check_covariances(matrix[None])
    frames = ellipse_frames(matrix)
    scale = gamma * (1.0 - delta)
    return EllipseParams(
        a=float(scale * frames.sqrt_l1 + g.margin),
        b=float(scale * frames.sqrt_l2 + g.margin),
        psi=float(frames.psi),
    )


def elc_batch(
    diff: np.ndarray,
    frames: EllipseFrames,
    gamma: float,
    margin: float,
    delta: float = 0.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Resíduo q^T D q - 1 em lote, q no referencial da elipse.

    Returns:
        tuple: (resíduos, gradiente em r com shape (..., 2), derivada em delta)
    """
    c, s = frames.cos_psi, frames.sin_psi
    a = gamma * frames.sqrt_l1 * (1.0 - delta) + margin
    b = gamma * frames.sqrt_l2 * (1.0 - delta) + margin
    q1 = c * diff[..., 0] + s * diff[..., 1]
    q2 = -s * diff[..., 0] + c * diff[..., 1]
    residual = q1 ** 2 / a ** 2 + q2 ** 2 / b ** 2 - 1.0
    g1 = 2.0 * q1 / a ** 2
    g2 = 2.0 * q2 / b ** 2
    grad_r = np.stack((c * g1 - s * g2, s * g1 + c * g2), axis=-1)
    grad_delta = (
        2.0 * q1 ** 2 * gamma * frames.sqrt_l1 / a ** 3
        + 2.0 * q2 ** 2 * gamma * frames.sqrt_l2 / b ** 3
    )
    return residual, grad_r, grad_delta


def _single_frame(e: EllipseParams) -> tuple[float, float]:
    return math.cos(e.psi), math.sin(e.psi)


def elc_residual(r: Sequence[float], p: Sequence[float], e: EllipseParams) -> float:
    """
    q^T diag(1/a^2, 1/b^2) q - 1 com q = Rot(psi)(r - p).

    Rot(psi) leva do mundo para o referencial da elipse.
    """
    c, s = _single_frame(e)
    dx, dy = r[0] - p[0], r[1] - p[1]
    q1 = c * dx + s * dy
    q2 = -s * dx + c * dy
    return q1 ** 2 / e.a ** 2 + q2 ** 2 / e.b ** 2 - 1.0


def elc_residual_gradient(r: Sequence[float], p: Sequence[float], e: EllipseParams) -> np.ndarray:
    c, s = _single_frame(e)
    dx, dy = r[0] - p[0], r[1] - p[1]
    g1 = 2.0 * (c * dx + s * dy) / e.a ** 2
    g2 = 2.0 * (-s * dx + c * dy) / e.b ** 2
    return np.array([c * g1 - s * g2, s * g1 + c * g2])


def elc_delta_residual(
    r: Sequence[float],
    p: Sequence[float],
    cov: Covariance2,
    gamma: float,
    g: SafetyGeometry,
    delta: float
) -> float:
    """Resíduo elíptico com semi-eixos ajustados por delta."""
    return elc_residual(r, p, ellipse_from_covariance(cov, gamma, g, delta))


def elc_delta_residual_gradient(
    r: Sequence[float],
    p: Sequence[float],
    cov: Covariance2,
    gamma: float,
    g: SafetyGeometry,
    delta: float
) -> tuple[np.ndarray, float]:
    matrix = cov.as_matrix()
    check_covariances(matrix[None])
    diff = np.asarray(r, dtype=float) - np.asarray(p, dtype=float)
    _, grad_r, grad_delta = elc_batch(diff, ellipse_frames(matrix), gamma, g.margin, delta)
    return grad_r, float(grad_delta)
