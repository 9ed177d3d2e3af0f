"""
Entry point de linha de comando do benchmark.

Subcomandos: run, aggregate, list-controllers, print-default-config
e generate-scenes. Códigos de saída: 0 sucesso, 1 erro de
configuração, 2 erro de geração de cena.
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from socialnav.config import BenchConfig, dump_toml, load_bench_config
from socialnav.models.schemas import ScenarioKind
from socialnav.services.controllers import known_controller_names, list_benchmark_controllers
from socialnav.services.metrics import (
    SUMMARY_FILE,
    TABLE_FILE,
    aggregate,
    emit,
    preflight_output,
    read_records_csv,
    render_table,
    write_summary_csv,
)
from socialnav.services.scenarios import generate_suite, read_scenes_jsonl, write_scenes_jsonl
from socialnav.services.suite_runner import run_suite
from socialnav.utils.exceptions import ConfigurationError, GenerationError
from socialnav.utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_GENERATION = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Benchmark de controladores MPC para navegação social",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Roda a suíte e grava os resultados")
    run.add_argument("--config", type=Path, help="Arquivo TOML de configuração")
    run.add_argument("--controller", action="append", dest="controllers", metavar="NAME",
                     help="Controlador a avaliar (repetível)")
    run.add_argument("--scenario", action="append", dest="scenarios", metavar="KIND",
                     choices=[k.value for k in ScenarioKind], help="Família de cenário (repetível)")
    run.add_argument("--seed", type=int, help="Semente mestre (sobrescreve BENCH_SEED)")
    run.add_argument("--scenes", type=int, help="Cenas por célula")
    run.add_argument("--jobs", type=int, help="Episódios simultâneos")
    run.add_argument("--trace", action="store_true", help="Grava trace CSV por episódio")
    run.add_argument("--output", help="Diretório de saída")
    run.add_argument("--scenes-file", type=Path, help="Cenas fixadas (JSON por linha)")

    agg = sub.add_parser("aggregate", help="Reagrega um CSV de registros")
    agg.add_argument("--records", type=Path, required=True)
    agg.add_argument("--output", type=Path, help="Grava resumo CSV e tabela neste diretório")

    lst = sub.add_parser("list-controllers", help="Lista os controladores")
    lst.add_argument("--all", action="store_true", help="Inclui os fora da tabela de métodos")

    sub.add_parser("print-default-config", help="Imprime a configuração padrão em TOML")

    gen = sub.add_parser("generate-scenes", help="Gera e fixa as cenas da configuração")
    gen.add_argument("--config", type=Path)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", type=Path, required=True)
    return parser


def _resolve_config(args: argparse.Namespace) -> BenchConfig:
    cfg = load_bench_config(args.config)
    return cfg.with_overrides(
        controllers=getattr(args, "controllers", None),
        scenarios=getattr(args, "scenarios", None),
        master_seed=args.seed,
        scenes_per_cell=getattr(args, "scenes", None),
        jobs=getattr(args, "jobs", None),
        trace=True if getattr(args, "trace", False) else None,
        output_dir=getattr(args, "output", None),
    )


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    preflight_output(Path(cfg.output_dir))

    if args.scenes_file is not None:
        try:
            scenes = read_scenes_jsonl(args.scenes_file)
        except FileNotFoundError:
            raise ConfigurationError(f"Arquivo de cenas não encontrado: {args.scenes_file}")
    else:
        scenes = generate_suite(cfg)

    records = run_suite(cfg, scenes)
    summaries = aggregate(records)
    seeds = {f"{s.scenario_kind.value}/{s.n_ped}/{s.scene_id}": s.seed for s in scenes}
    emit(summaries, records, cfg, scene_seeds=seeds)
    sys.stdout.write(render_table(summaries))
    return EXIT_OK


def _cmd_aggregate(args: argparse.Namespace) -> int:
    summaries = aggregate(read_records_csv(args.records))
    table = render_table(summaries)
    if args.output is not None:
        out = preflight_output(args.output)
        write_summary_csv(summaries, out / SUMMARY_FILE)
        (out / TABLE_FILE).write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return EXIT_OK


def _cmd_list_controllers(args: argparse.Namespace) -> int:
    names = known_controller_names() if args.all else list_benchmark_controllers()
    sys.stdout.write("\n".join(names) + "\n")
    return EXIT_OK


def _cmd_print_default_config(args: argparse.Namespace) -> int:
    sys.stdout.write(dump_toml(BenchConfig()))
    return EXIT_OK


def _cmd_generate_scenes(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    count = write_scenes_jsonl(generate_suite(cfg), args.out)
    logger.info("Cenas fixadas", path=str(args.out), count=count)
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "aggregate": _cmd_aggregate,
    "list-controllers": _cmd_list_controllers,
    "print-default-config": _cmd_print_default_config,
    "generate-scenes": _cmd_generate_scenes,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Executa a CLI.

    Returns:
        int: Código de saída
    """
    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigurationError as e:
        logger.error("Erro de configuração", **e.to_dict())
        sys.stderr.write(f"erro de configuração: {e.message}\n")
        return EXIT_CONFIG
    except ValidationError as e:
        logger.error("Configuração inválida", errors=e.error_count())
        sys.stderr.write(f"erro de configuração: {e}\n")
        return EXIT_CONFIG
    except GenerationError as e:
        logger.error("Erro de geração de cena", **e.to_dict())
        sys.stderr.write(f"erro de geração: {e.message} {e.cell}\n")
        return EXIT_GENERATION


if __name__ == "__main__":
    sys.exit(main())
