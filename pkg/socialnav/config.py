"""
Configurações centralizadas da aplicação.

Utiliza Pydantic Settings para as variáveis de ambiente do processo
e modelos Pydantic para a configuração do benchmark (arquivo TOML),
com validação de tipos e os valores padrão da configuração experimental.
"""

import json
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from socialnav import __version__
from socialnav.models.schemas import ScenarioKind


class Settings(BaseSettings):
    """
    Configurações do processo carregadas de variáveis de ambiente.

    Attributes:
        app_name: Nome exibido nos logs e no manifesto
        app_version: Versão atual do pacote
        debug: Modo debug (logs coloridos, nível DEBUG)
        log_json: Renderiza logs em JSON (para coleta por ferramentas)
    """

    model_config = SettingsConfigDict(
        env_prefix="SOCIALNAV_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    app_name: str = "Social Navigation MPC Bench"
    app_version: str = __version__
    debug: bool = False
    log_json: bool = False


@lru_cache()
def get_settings() -> Settings:
    """
    Retorna instância cacheada das configurações.

    Returns:
        Settings: Configurações do processo
    """
    return Settings()


class EnvOverrides(BaseSettings):
    """Variáveis de ambiente que sobrescrevem o arquivo de configuração."""

    model_config = SettingsConfigDict(case_sensitive=False, extra="ignore")

    bench_seed: Optional[int] = Field(None, ge=0, lt=2**64)


# =============================================================================
# SEÇÕES DA CONFIGURAÇÃO DO BENCHMARK
# =============================================================================

class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class SimulationParams(_Section):
    """Escalas de tempo e critério de chegada."""
    dt: float = Field(0.1, gt=0, description="Passo do controlador [s]")
    dt_sim: float = Field(0.01, gt=0, description="Passo da simulação [s]")
    max_sim_steps: int = Field(2000, ge=1, description="T_sim, orçamento de passos")
    goal_tolerance: float = Field(0.1, gt=0, description="epsilon do critério de chegada [m]")

    @model_validator(mode="after")
    def _integral_ratio(self) -> "SimulationParams":
        ratio = self.dt / self.dt_sim
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError(f"dt/dt_sim precisa ser inteiro, recebido {ratio}")
        return self

    @property
    def steps_per_control(self) -> int:
        return int(round(self.dt / self.dt_sim))


class ControlParams(_Section):
    """Horizonte, limites de controle e retenção de pedestres fantasmas."""
    horizon: int = Field(25, ge=1, description="H, passos do horizonte")
    v_min: float = 0.0
    v_max: float = 2.0
    omega_min: float = -2.0
    omega_max: float = 2.0
    ghost_horizon: int = Field(20, ge=0, description="H_ghost, passos de retenção")

    @model_validator(mode="after")
    def _ordered_bounds(self) -> "ControlParams":
        for lo, hi in ((self.v_min, self.v_max), (self.omega_min, self.omega_max)):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"Limites de controle inválidos: [{lo}, {hi}]")
        return self


class WeightParams(_Section):
    """Pesos dos termos de custo."""
    q_u: list[list[float]] = [[1.0, 0.0], [0.0, 1.0]]
    q_ubar: list[list[float]] = [
        [0.005, 0.0, 0.0],
        [0.0, 0.005, 0.0],
        [0.0, 0.0, 100000.0],
    ]
    q_ed: float = Field(500.0, ge=0)
    q_md: float = Field(1000.0, ge=0)
    q_r_euclidean: float = Field(100.0, ge=0, description="Q_r quando o custo extra é euclidiano")
    q_r_default: float = Field(1000.0, ge=0, description="Q_r nos demais casos")

    @field_validator("q_u", "q_ubar")
    @classmethod
    def _square(cls, v: list[list[float]]) -> list[list[float]]:
        if any(len(row) != len(v) for row in v):
            raise ValueError("Matriz de peso precisa ser quadrada")
        return v


class SafetyGeometry(_Section):
    """
    Raios, margem de segurança e probabilidade de colisão.

    Attributes:
        r_rob: Raio do robô [m]
        r_ped: Raio do pedestre [m]
        d_safe: Distância de segurança entre as circunferências [m]
        p_col: Limiar de probabilidade de colisão
        elc_delta_max: Limite superior de delta nas restrições elípticas adaptativas
    """
    r_rob: float = Field(0.35, gt=0)
    r_ped: float = Field(0.3, gt=0)
    d_safe: float = Field(0.3, ge=0)
    p_col: float = Field(0.01, gt=0, lt=1)
    elc_delta_max: float = Field(0.5, ge=0, lt=1)

    @property
    def margin(self) -> float:
        """r_rob + r_ped + d_safe."""
        return self.r_rob + self.r_ped + self.d_safe

    @property
    def contact_distance(self) -> float:
        """Distância entre centros em que os corpos se tocam."""
        return self.r_rob + self.r_ped

    @property
    def sphere_volume(self) -> float:
        """V_S da esfera de raio r_rob + r_ped + d_safe [m³]."""
        return 4.0 / 3.0 * math.pi * self.margin ** 3

    @property
    def aedc_delta_min(self) -> float:
        """Menor delta admissível em AEDC/AMDC (margem efetiva = contato físico)."""
        return self.contact_distance ** 2 - self.margin ** 2


class SensorConfig(_Section):
    """Campo de visão do robô."""
    vis_range: float = Field(5.0, gt=0, description="Alcance de visão [m]")
    vis_angle: float = Field(2 * math.pi, gt=0, le=2 * math.pi, description="Abertura do campo de visão [rad]")


class CovarianceGrowth(_Section):
    """
    Modelo paramétrico de crescimento da incerteza da predição.

    sigma0 não é restrito aqui: a validação acontece no uso e gera
    ConfigurationError.
    """
    sigma0: float = 0.1
    alpha_long: float = Field(0.3, ge=0)
    alpha_lat: float = Field(0.1, ge=0)
    min_speed: float = Field(0.01, gt=0)


class SolverParams(_Section):
    """Tolerâncias e orçamento do Lagrangiano aumentado."""
    tol_con: float = Field(1e-3, gt=0)
    tol_obj: float = Field(1e-6, gt=0)
    max_iterations: int = Field(200, ge=1, description="Orçamento total de iterações internas")
    escape_omega: float = Field(0.5, gt=0, description="omega dos pontos de reinício curvos [rad/s]")
    max_outer: int = Field(25, ge=1)
    penalty_init: float = Field(10.0, gt=0)
    penalty_growth: float = Field(10.0, gt=1)
    penalty_max: float = Field(1e8, gt=0)


class SfmParams(_Section):
    """Parâmetros do modelo de força social dos pedestres."""
    desired_speed: float = Field(1.5, gt=0)
    relaxation_time: float = Field(0.5, gt=0)
    repulsion_strength: float = Field(2.0, gt=0)
    repulsion_range: float = Field(0.35, gt=0)
    heading_gain: float = Field(4.0, gt=0)
    pedestrian_radius: float = Field(0.3, gt=0)
    goal_tolerance: float = Field(0.3, gt=0)
    max_speed_factor: float = Field(1.3, gt=1)


class ScenarioParams(_Section):
    """Geometria dos geradores de cenário."""
    area_half_size: float = Field(4.0, gt=0, description="Área comum [-L, L]²")
    ring_inner: float = Field(2.0, gt=0)
    ring_outer: float = Field(3.5, gt=0)
    goal_min_distance: float = Field(2.0, ge=0, description="d_min do objetivo local")
    goal_range_slack: float = Field(1.0, ge=0, description="epsilon do alcance máximo")
    spawn_slack: float = Field(0.1, ge=0)
    parallel_band: float = Field(0.5, gt=0)
    parallel_edge_offset: float = Field(0.5, ge=0)
    max_attempts: int = Field(10_000, ge=1)

    @model_validator(mode="after")
    def _ring(self) -> "ScenarioParams":
        if not (self.ring_inner < self.ring_outer <= self.area_half_size):
            raise ValueError("Anel precisa satisfazer r_inner < r_outer <= L")
        return self


def _benchmark_controllers() -> list[str]:
    from socialnav.services.controllers import list_benchmark_controllers
    return list_benchmark_controllers()


class BenchConfig(BaseModel):
    """
    Configuração completa de uma execução do benchmark.

    Attributes:
        controllers: Controladores avaliados
        scenarios: Famílias de cenário
        n_ped: Quantidades de pedestres avaliadas
        scenes_per_cell: Cenas por (cenário, n_ped)
        master_seed: Semente mestre (BENCH_SEED sobrescreve)
        output_dir: Diretório dos CSVs e do manifesto
        jobs: Episódios simultâneos
        trace: Emite CSV de trajetória por episódio
        record_wall_time: Grava o tempo de parede real (quebra a estabilidade byte a byte)
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    controllers: list[str] = Field(default_factory=_benchmark_controllers)
    scenarios: list[ScenarioKind] = Field(default_factory=lambda: list(ScenarioKind))
    n_ped: list[int] = Field(default_factory=lambda: [3, 4, 5, 6, 7, 8])
    scenes_per_cell: int = Field(2, ge=1)
    master_seed: int = Field(0, ge=0, lt=2**64)
    output_dir: str = "./results"
    jobs: int = Field(1, ge=1)
    trace: bool = False
    record_wall_time: bool = False

    simulation: SimulationParams = SimulationParams()
    control: ControlParams = ControlParams()
    weights: WeightParams = WeightParams()
    safety: SafetyGeometry = SafetyGeometry()
    sensor: SensorConfig = SensorConfig()
    growth: CovarianceGrowth = CovarianceGrowth()
    solver: SolverParams = SolverParams()
    sfm: SfmParams = SfmParams()
    scenario_params: ScenarioParams = ScenarioParams()

    @field_validator("controllers")
    @classmethod
    def _known_controllers(cls, v: list[str]) -> list[str]:
        from socialnav.services.controllers import known_controller_names
        from socialnav.utils.validators import invalid_names

        valid = known_controller_names()
        bad = invalid_names(v, valid)
        if bad:
            raise ValueError(f"Controladores desconhecidos: {bad}. Válidos: {valid}")
        if not v:
            raise ValueError("Lista de controladores vazia")
        return v

    @field_validator("n_ped")
    @classmethod
    def _n_ped_range(cls, v: list[int]) -> list[int]:
        if not v or any(n < 3 or n > 8 for n in v):
            raise ValueError(f"n_ped precisa estar em 3..8, recebido {v}")
        return v

    @field_validator("scenarios")
    @classmethod
    def _non_empty(cls, v: list[ScenarioKind]) -> list[ScenarioKind]:
        if not v:
            raise ValueError("Lista de cenários vazia")
        return v

    def with_overrides(self, **updates: Any) -> "BenchConfig":
        """Retorna cópia revalidada com campos substituídos (None é ignorado)."""
        data = self.model_dump(mode="json")
        data.update({k: v for k, v in updates.items() if v is not None})
        return BenchConfig.model_validate(data)


# =============================================================================
# TOML
# =============================================================================

def load_bench_config(path: Optional[Path] = None) -> BenchConfig:
    """
    Carrega configuração do benchmark.

    Ordem de precedência: padrões < arquivo TOML < BENCH_SEED.
    Flags da CLI são aplicadas depois, via BenchConfig.with_overrides.

    Args:
        path: Arquivo TOML (None usa apenas os padrões)

    Returns:
        BenchConfig: Configuração validada

    Raises:
        ConfigurationError: Se o arquivo não existe ou não é TOML válido
    """
    from socialnav.utils.exceptions import ConfigurationError

    data: dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except FileNotFoundError:
            raise ConfigurationError(f"Arquivo de configuração não encontrado: {path}")
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"TOML inválido em {path}: {e}")

    overrides = EnvOverrides()
    if overrides.bench_seed is not None:
        data["master_seed"] = overrides.bench_seed

    return BenchConfig.model_validate(data)


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, list):
        return "[" + ", ".join(_toml_value(item) for item in value) + "]"
    raise TypeError(f"Valor sem representação TOML: {value!r}")


def dump_toml(config: BenchConfig) -> str:
    """
    Renderiza a configuração como TOML (chaves simples, depois tabelas).

    Args:
        config: Configuração a renderizar

    Returns:
        str: Texto TOML que recarrega para uma configuração igual
    """
    data = config.model_dump(mode="json")
    lines: list[str] = []
    tables: list[tuple[str, dict]] = []
    for key, value in data.items():
        if isinstance(value, dict):
            tables.append((key, value))
        else:
            lines.append(f"{key} = {_toml_value(value)}")
    for name, table in tables:
        lines.append("")
        lines.append(f"[{name}]")
        for key, value in table.items():
            lines.append(f"{key} = {_toml_value(value)}")
    return "\n".join(lines) + "\n"
