"""
Execução da suíte de episódios.

Cada (cena, controlador) vira uma tarefa; um semáforo limita quantos
episódios rodam ao mesmo tempo (jobs) e cada episódio roda em thread
própria. A ordem de conclusão não importa: os registros são
ordenados canonicamente antes de sair.
"""

import asyncio
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from socialnav.config import BenchConfig
from socialnav.models.schemas import RunRecord, SceneInstance
from socialnav.services.controllers import ControllerSpec, build_named
from socialnav.services.crowd import episode_name, simulate_episode, write_trace_csv
from socialnav.services.scenarios import generate_suite
from socialnav.utils.logger import get_logger

logger = get_logger(__name__)


class EpisodeStatus(str, Enum):
    """Status possíveis de um episódio."""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class EpisodeTask:
    """Um episódio da suíte."""
    id: str
    scene: SceneInstance
    spec: ControllerSpec
    status: EpisodeStatus = EpisodeStatus.PENDING
    record: Optional[RunRecord] = None
    error: Optional[BaseException] = None


class SuiteRunner:
    """
    Executa episódios com concorrência limitada.

    Features:
    - Limite de episódios simultâneos (jobs)
    - Status por episódio
    - Trace opcional por episódio
    """

    def __init__(self, cfg: BenchConfig, trace_dir: Optional[Path] = None):
        self.cfg = cfg
        self.trace_dir = trace_dir
        self._tasks: dict[str, EpisodeTask] = {}
        self._semaphore: Optional[asyncio.Semaphore] = None

    def submit(self, scene: SceneInstance, spec: ControllerSpec) -> str:
        """
        Registra um episódio.

        Returns:
            str: ID do episódio
        """
        task_id = episode_name(scene, spec.name)
        self._tasks[task_id] = EpisodeTask(id=task_id, scene=scene, spec=spec)
        return task_id

    def _run_one(self, task: EpisodeTask) -> RunRecord:
        result = simulate_episode(task.scene, task.spec, self.cfg, trace=self.trace_dir is not None)
        if self.trace_dir is not None:
            write_trace_csv(result.trace, self.trace_dir / f"{task.id}.csv")
        return result.record

    async def _execute(self, task: EpisodeTask) -> None:
        """Executa episódio com controle de concorrência."""
        async with self._semaphore:
            task.status = EpisodeStatus.RUNNING
            logger.debug("Episódio iniciado", episode=task.id)
            try:
                task.record = await asyncio.to_thread(self._run_one, task)
                task.status = EpisodeStatus.COMPLETED
            except Exception as e:
                task.status = EpisodeStatus.FAILED
                task.error = e
                logger.error("Episódio falhou", episode=task.id, error=str(e))

    async def run(self) -> list[RunRecord]:
        """
        Executa todos os episódios registrados.

        Raises:
            Exception: O primeiro erro inesperado de episódio
        """
        self._semaphore = asyncio.Semaphore(self.cfg.jobs)
        await asyncio.gather(*(self._execute(task) for task in self._tasks.values()))
        failed = [task for task in self._tasks.values() if task.status is EpisodeStatus.FAILED]
        if failed:
            raise failed[0].error
        return sorted((task.record for task in self._tasks.values()), key=lambda r: r.sort_key)

    def get_status(self, task_id: str) -> Optional[dict]:
        task = self._tasks.get(task_id)
        if not task:
            return None
        return {
            "episode": task.id,
            "status": task.status.value,
            "record": task.record.model_dump(mode="json") if task.record else None,
            "error": str(task.error) if task.error else None,
        }

    def get_stats(self) -> dict[str, int]:
        """Contagem de episódios por status."""
        stats = {status.value: 0 for status in EpisodeStatus}
        for task in self._tasks.values():
            stats[task.status.value] += 1
        stats["total"] = len(self._tasks)
        return stats


def run_suite(
    cfg: BenchConfig,
    scenes: Optional[Sequence[SceneInstance]] = None
) -> list[RunRecord]:
    """
    Roda todos os controladores em todas as cenas.

    Cada cena é gerada uma única vez e reutilizada por todos os
    controladores (comparação pareada).

    Args:
        cfg: Configuração validada
        scenes: Cenas fixadas (None gera a partir da configuração)

    Returns:
        list: Um registro por (cena, controlador), em ordem canônica

    Raises:
        GenerationError: Identifica a célula que falhou
    """
    if scenes is None:
        scenes = generate_suite(cfg)
    specs = [build_named(name, cfg) for name in cfg.controllers]
    trace_dir = Path(cfg.output_dir) / "traces" if cfg.trace else None

    runner = SuiteRunner(cfg, trace_dir)
    for scene in scenes:
        for spec in specs:
            runner.submit(scene, spec)

    logger.info("Suíte iniciada", episodes=runner.get_stats()["total"], jobs=cfg.jobs)
    records = asyncio.run(runner.run())
    logger.info("Suíte concluída", **runner.get_stats())
    return records
