"""
Módulo de modelos de dados.

Contém os schemas Pydantic dos registros (cenas, execuções, resumos).
Os tipos de valor numéricos ficam em socialnav.models.state.
"""

from socialnav.models.schemas import (
    MetricsSummary,
    QuartileStats,
    RunManifest,
    RunRecord,
    ScenarioKind,
    SceneInstance,
)

__all__ = [
    "MetricsSummary",
    "QuartileStats",
    "RunManifest",
    "RunRecord",
    "ScenarioKind",
    "SceneInstance",
]
