import logging
import sys
from typing import Optional

from autoreg import config


def setup_logger(level: Optional[str] = None):
    logging.basicConfig(
        level=getattr(logging, (level or config.log_level()).upper(), logging.INFO),
        format='[%(asctime)s] %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )
