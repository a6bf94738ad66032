# trawlkit/core/config.py
#
# Environment-driven settings and logging setup.
#
# Notes:
# - `.env` in the working directory is loaded once at import; real environment
#   variables win over it.
# - Config files given with --config use the same flat `key = value` syntax
#   and are parsed with python-dotenv as well.

import logging
import os
from os import getenv
from pathlib import Path
from typing import Dict, Optional, Union

from dotenv import dotenv_values, load_dotenv

load_dotenv()

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Settings:
    """Process-wide defaults read from ``TRAWLKIT_*`` environment variables."""

    def __init__(self) -> None:
        self.log_level = getenv("TRAWLKIT_LOG_LEVEL", default="WARNING").upper()
        self.threads = int(getenv("TRAWLKIT_THREADS", default="1"))
        self.out_dir = Path(getenv("TRAWLKIT_OUT_DIR", default="."))
        self.seed = int(getenv("TRAWLKIT_SEED", default="0"))
        # Location of the converted SMARD download; the gated data tests read it.
        self.smard_csv: Optional[str] = os.getenv("TRAWLKIT_SMARD_CSV") or None


def get_settings() -> Settings:
    """Fresh settings snapshot; cheap, and picks up monkeypatched env in tests."""
    return Settings()


def configure_logging(level: Union[str, int, None] = None) -> None:
    """Install a single stderr handler on the ``trawlkit`` logger."""
    if level is None:
        level = get_settings().log_level
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING

    root = logging.getLogger("trawlkit")
    root.setLevel(level)
    if not any(getattr(h, "_trawlkit", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._trawlkit = True  # type: ignore[attr-defined]
        root.addHandler(handler)


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Parse a flat ``key = value`` file; keys are normalised to snake_case."""
    values = dotenv_values(path)
    return {
        key.strip().lower().replace("-", "_"): value
        for key, value in values.items()
        if value is not None
    }


def write_config_file(path: Union[str, Path], values: Dict[str, object]) -> None:
    """Write ``values`` as sorted ``key = value`` lines readable by read_config_file."""
    lines = []
    for key in sorted(values):
        value = values[key]
        if value is None:
            continue
        text = str(value)
        if any(ch in text for ch in " #'\""):
            text = '"' + text.replace('"', '\\"') + '"'
        lines.append(f"{key} = {text}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
