import sys

from logging_config import root_logger
from src.cli_runner import main


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        root_logger.info("interrupted")
        sys.exit(130)
