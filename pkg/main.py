import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from config import APP_VERSION, OUTPUT_DIR
from errors import NestedSearchError
from handlers import register_handlers

log = logging.getLogger(__name__)


# ---------- ЛОГИРОВАНИЕ ----------


def setup_logging(output_dir: str, verbose: bool = False) -> None:
    """Файл <output>/logs/nas.log плюс консоль."""
    level = logging.DEBUG if verbose else logging.INFO

    logs_dir = Path(output_dir) / "logs"
    logs_dir.mkdir(parents=True, exist_ok=True)

    # файл всегда перезаписываем (mode="w") → свежий лог на каждый запуск
    file_handler = logging.FileHandler(logs_dir / "nas.log", encoding="utf-8", mode="w")
    file_handler.setLevel(level)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)

    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        handlers=[file_handler, console_handler],
        force=True,
    )


# ---------- РАЗБОР АРГУМЕНТОВ ----------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nas",
        description="Симулятор вложенного адиабатического поиска для задач CSP",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_VERSION}")
    parser.add_argument("--verbose", "-v", action="store_true", help="логировать на уровне DEBUG")
    parser.add_argument(
        "--output-dir",
        dest="output_dir",
        help=f"папка для отчётов и логов (по умолчанию NAS_OUTPUT_DIR или {OUTPUT_DIR})",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_handlers(subparsers)
    return parser


# ---------- ТОЧКА ВХОДА ----------


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse: 2 при ошибке использования, 0 при --help/--version
        return int(e.code or 0)

    setup_logging(args.output_dir or OUTPUT_DIR, args.verbose)
    log.info("Команда %s, версия %s", args.command, APP_VERSION)

    try:
        return int(args.handler(args))
    except NestedSearchError as e:
        log.error("Команда %s: %s", args.command, e)
        print(f"ошибка: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        log.exception("Команда %s: ошибка ввода-вывода: %s", args.command, e)
        print(f"ошибка ввода-вывода: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
