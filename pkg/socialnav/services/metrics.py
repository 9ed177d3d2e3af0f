"""
Agregação e emissão dos resultados do benchmark.

Quartis por interpolação linear, tabela no formato
"Q1 | Mediana | Média | Q3" e arquivos estáveis byte a byte:
registros CSV, resumo CSV, tabela de texto alinhada e manifesto JSON.
"""

import csv
import json
import os
from collections import defaultdict
from importlib import metadata
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from socialnav import __version__
from socialnav.config import BenchConfig
from socialnav.models.schemas import MetricsSummary, QuartileStats, RunManifest, RunRecord, ScenarioKind
from socialnav.utils.exceptions import ConfigurationError, OutputPathError
from socialnav.utils.logger import get_logger

logger = get_logger(__name__)

QUARTILE_METHOD = "linear"

RECORD_COLUMNS = [
    "scenario", "n_ped", "scene_id", "controller", "steps_to_target",
    "collisions", "timeout", "solver_failures", "wall_time_s",
]

_METRICS = ("steps", "collisions", "timeouts")
SUMMARY_COLUMNS = ["scenario", "n_ped", "controller"] + [
    f"{metric}_{stat}"
    for metric in _METRICS
    for stat in ("q1", "median", "mean", "q3", "count")
]

RECORDS_FILE = "records.csv"
SUMMARY_FILE = "summary.csv"
TABLE_FILE = "summary.txt"
MANIFEST_FILE = "manifest.json"


def quartile_stats(values: Sequence[float]) -> QuartileStats:
    """Q1, mediana, média e Q3 por interpolação linear."""
    data = np.asarray(values, dtype=float)
    q1, median, q3 = np.percentile(data, [25, 50, 75], method=QUARTILE_METHOD)
    return QuartileStats(
        q1=float(q1), median=float(median), mean=float(np.mean(data)), q3=float(q3), count=len(data)
    )


def aggregate(records: Iterable[RunRecord]) -> list[MetricsSummary]:
    """
    Resume registros por (cenário, n_ped, controlador).

    Registros com timeout ficam fora das estatísticas de passos e
    entram nas de timeout (0/1 por cena).

    Returns:
        list: Resumos em ordem canônica
    """
    groups: dict[tuple, list[RunRecord]] = defaultdict(list)
    for record in records:
        groups[record.group_key].append(record)

    summaries = []
    for (scenario, n_ped, controller), group in groups.items():
        steps = [r.steps_to_target for r in group if not r.timeout]
        summaries.append(MetricsSummary(
            scenario=ScenarioKind(scenario),
            n_ped=n_ped,
            controller=controller,
            steps_to_target=quartile_stats(steps) if steps else None,
            collisions=quartile_stats([r.collisions for r in group]),
            timeouts=quartile_stats([1.0 if r.timeout else 0.0 for r in group]),
        ))
    return sorted(summaries, key=lambda s: s.group_key)


def format_quartiles(stats: Optional[QuartileStats], mean_digits: int = 2) -> str:
    """
    Linha "Q1 | Mediana | Média | Q3".

    Quartis com uma casa decimal; média com mean_digits casas.

    Example:
        format_quartiles(stats)  # "1.0 | 2.0 | 1.62 | 2.0"
    """
    if stats is None:
        return "-"
    return (
        f"{stats.q1:.1f} | {stats.median:.1f} | "
        f"{stats.mean:.{mean_digits}f} | {stats.q3:.1f}"
    )


# =============================================================================
# CSV DE REGISTROS
# =============================================================================

def _record_row(record: RunRecord, record_wall_time: bool) -> list[str]:
    return [
        record.scenario.value,
        str(record.n_ped),
        str(record.scene_id),
        record.controller,
        "" if record.steps_to_target is None else str(record.steps_to_target),
        str(record.collisions),
        "true" if record.timeout else "false",
        str(record.solver_failures),
        f"{record.wall_time_s if record_wall_time else 0.0:.3f}",
    ]


def write_records_csv(records: Iterable[RunRecord], path: Path, record_wall_time: bool = False) -> None:
    """Registros em ordem canônica; wall_time_s é 0.000 salvo record_wall_time."""
    ordered = sorted(records, key=lambda r: r.sort_key)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        for record in ordered:
            writer.writerow(_record_row(record, record_wall_time))


def read_records_csv(path: Path) -> list[RunRecord]:
    """
    Lê um CSV de registros.

    Raises:
        ConfigurationError: Arquivo ausente ou cabeçalho diferente
    """
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != RECORD_COLUMNS:
                raise ConfigurationError(
                    f"Cabeçalho inesperado em {path}",
                    {"header": reader.fieldnames, "expected": RECORD_COLUMNS}
                )
            return [
                RunRecord(
                    scenario=row["scenario"],
                    n_ped=int(row["n_ped"]),
                    scene_id=int(row["scene_id"]),
                    controller=row["controller"],
                    steps_to_target=int(row["steps_to_target"]) if row["steps_to_target"] else None,
                    collisions=int(row["collisions"]),
                    timeout=row["timeout"] == "true",
                    solver_failures=int(row["solver_failures"]),
                    wall_time_s=float(row["wall_time_s"]),
                )
                for row in reader
            ]
    except FileNotFoundError:
        raise ConfigurationError(f"Arquivo de registros não encontrado: {path}")


# =============================================================================
# RESUMO
# =============================================================================

def _stat_fields(stats: Optional[QuartileStats]) -> list[str]:
    if stats is None:
        return ["", "", "", "", "0"]
    return [f"{stats.q1:.4f}", f"{stats.median:.4f}", f"{stats.mean:.4f}", f"{stats.q3:.4f}", str(stats.count)]


def write_summary_csv(summaries: Iterable[MetricsSummary], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for summary in summaries:
            writer.writerow(
                [summary.scenario.value, str(summary.n_ped), summary.controller]
                + _stat_fields(summary.steps_to_target)
                + _stat_fields(summary.collisions)
                + _stat_fields(summary.timeouts)
            )


def render_table(summaries: Iterable[MetricsSummary]) -> str:
    """Tabela de texto alinhada no formato da tabela de resultados."""
    header = [
        "Scenario", "N", "Controller",
        "Steps to Target", "Collisions", "Timeouts",
    ]
    rows = [header, ["", "", "", *(["Q1 | Median | Mean | Q3"] * 3)]]
    for summary in summaries:
        rows.append([
            summary.scenario.value,
            str(summary.n_ped),
            summary.controller,
            format_quartiles(summary.steps_to_target, mean_digits=1),
            format_quartiles(summary.collisions),
            format_quartiles(summary.timeouts),
        ])
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


# =============================================================================
# MANIFESTO E EMISSÃO
# =============================================================================

def _library_versions() -> dict[str, str]:
    versions = {}
    for name in ("numpy", "scipy", "pydantic", "pydantic-settings", "structlog"):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def build_manifest(cfg: BenchConfig, scene_seeds: Optional[dict[str, int]] = None) -> RunManifest:
    """Eco da configuração, sementes das cenas e versões (sem timestamps)."""
    return RunManifest(
        package_version=__version__,
        library_versions=_library_versions(),
        quartile_method=QUARTILE_METHOD,
        master_seed=cfg.master_seed,
        scene_seeds=dict(sorted((scene_seeds or {}).items())),
        config=cfg.model_dump(mode="json"),
    )


def preflight_output(path: Path) -> Path:
    """
    Garante que o diretório de saída existe e é gravável.

    Roda antes de qualquer episódio.

    Raises:
        OutputPathError: Se não é possível criar ou gravar no diretório
    """
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputPathError(str(path), str(e))
    if not path.is_dir():
        raise OutputPathError(str(path), "não é um diretório")
    probe = path / ".write_probe"
    try:
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as e:
        raise OutputPathError(str(path), str(e))
    if not os.access(path, os.W_OK):
        raise OutputPathError(str(path), "sem permissão de escrita")
    return path


def emit(
    summaries: Sequence[MetricsSummary],
    records: Sequence[RunRecord],
    cfg: BenchConfig,
    scene_seeds: Optional[dict[str, int]] = None,
    output_dir: Optional[Path] = None
) -> dict[str, Path]:
    """
    Grava registros CSV, resumo CSV, tabela alinhada e manifesto.

    Returns:
        dict: Caminho de cada arquivo gravado
    """
    out = preflight_output(Path(output_dir or cfg.output_dir))
    paths = {
        "records": out / RECORDS_FILE,
        "summary": out / SUMMARY_FILE,
        "table": out / TABLE_FILE,
        "manifest": out / MANIFEST_FILE,
    }
    write_records_csv(records, paths["records"], cfg.record_wall_time)
    write_summary_csv(summaries, paths["summary"])
    paths["table"].write_text(render_table(summaries), encoding="utf-8")
    manifest = build_manifest(cfg, scene_seeds)
    paths["manifest"].write_text(
        json.dumps(manifest.model_dump(mode="json"), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    logger.info("Resultados gravados", output_dir=str(out), records=len(records))
    return paths
