"""
Configuração de logging estruturado.

Utiliza structlog: JSON quando SOCIALNAV_LOG_JSON está ligado, console
no resto. Tudo vai para stderr; stdout fica livre para a saída da CLI
(tabelas, configuração padrão, lista de controladores).
"""

import logging
import sys
from contextlib import contextmanager
from typing import Any, Iterator, Optional

import structlog
from structlog.types import Processor

from socialnav.config import get_settings

_QUIET_LOGGERS = ("scipy",)


def setup_logging(level: Optional[int] = None) -> None:
    """
    Configura structlog e o logging padrão.

    Args:
        level: Nível explícito; sem ele, DEBUG em modo debug e INFO fora dele
    """
    settings = get_settings()
    if level is None:
        level = logging.DEBUG if settings.debug else logging.INFO

    processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.dev.set_exc_info,
    ]
    if settings.log_json:
        processors += [structlog.processors.dict_tracebacks, structlog.processors.JSONRenderer()]
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=settings.debug))

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=_stderr_logger_factory,
        cache_logger_on_first_use=False,
    )

    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level)
    for name in _QUIET_LOGGERS:
        logging.getLogger(name).setLevel(max(level, logging.WARNING))


def _stderr_logger_factory(*args: Any) -> structlog.PrintLogger:
    # sys.stderr resolvido por logger: o stream pode mudar depois da configuração
    return structlog.PrintLogger(sys.stderr)


@contextmanager
def episode_context(episode_id: str) -> Iterator[None]:
    """
    Anexa episode_id a todo evento logado dentro do bloco.

    Vale por thread e por task: episódios concorrentes não se misturam.
    """
    with structlog.contextvars.bound_contextvars(episode_id=episode_id):
        yield


def get_logger(name: str) -> structlog.BoundLogger:
    """
    Obtém logger configurado para um módulo.

    Example:
        logger = get_logger(__name__)
        logger.info("Episódio concluído", steps=412, collisions=0)
    """
    return structlog.get_logger(name)
