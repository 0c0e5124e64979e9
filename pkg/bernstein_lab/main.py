import sys
import logging
from typing import Sequence

from bernstein_lab.core.config import Config
from bernstein_lab.core.exceptions import ConfigError
from bernstein_lab.cli.parser import parse_config
from bernstein_lab.cli.handlers import run

logging.basicConfig(level=Config.LOG_LEVEL)  # Лог файл не создается, логи выводятся в консоль


def main(argv: Sequence[str] | None = None) -> int:
    """
    Точка входа: разбор конфигурации, выполнение команды, код завершения.
    """
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as e:
        logging.error(e.message)
        print(e.message, file=sys.stderr)
        return e.exit_code

    manifest = run(config)
    if not config.manifest:
        print(manifest.model_dump_json(indent=2))
    elif manifest.message:
        print(manifest.message, file=sys.stderr)
    return manifest.exit_status


if __name__ == "__main__":
    sys.exit(main())
