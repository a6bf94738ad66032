# trawlkit/cli/common.py
#
# Option tables, config resolution and output helpers shared by the commands.
#
# Notes:
# - Every command flag defaults to None in argparse so the resolver can tell
#   "not given" apart from a value; precedence is flag > --config file >
#   environment (global flags only) > built-in default.
# - Tables are written with pandas' default float formatting, which is the
#   shortest round-trip representation and does not depend on the locale.

import argparse
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Optional

import numpy as np
import pandas as pd

from trawlkit.core.config import get_settings, write_config_file
from trawlkit.core.errors import ConfigurationError
from trawlkit.models import ModelSpec, RunConfig

logger = logging.getLogger(__name__)

RUN_CONFIG_NAME = "run_config.env"


def to_bool(text: Any) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off", ""):
        return False
    raise ConfigurationError(f"expected a boolean, got '{text}'")


class Option(NamedTuple):
    """One command flag: ``dest`` is also the config-file key."""

    dest: str
    type: Callable[[Any], Any]
    default: Any
    help: str
    choices: Optional[List[str]] = None
    alias: Optional[str] = None

    @property
    def flags(self) -> List[str]:
        flags = ["--" + self.dest.replace("_", "-")]
        if self.alias:
            flags.append(self.alias)
        return flags


def add_options(parser: argparse.ArgumentParser, options: Iterable[Option]) -> None:
    for option in options:
        if option.type is to_bool:
            parser.add_argument(*option.flags, dest=option.dest, action="store_true", default=None,
                                help=option.help)
        else:
            parser.add_argument(*option.flags, dest=option.dest, type=option.type, default=None,
                                choices=option.choices, help=option.help)


def resolve(args: argparse.Namespace, options: Iterable[Option], config: Dict[str, str]) -> None:
    """Fill unset flags from the config file, then from the option default."""
    for option in options:
        if getattr(args, option.dest, None) is not None:
            continue
        if option.dest in config:
            raw = config[option.dest]
            try:
                value = option.type(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigurationError(f"config key '{option.dest}': {exc}") from exc
            if option.choices and value not in option.choices:
                raise ConfigurationError(
                    f"config key '{option.dest}': '{value}' not one of {option.choices}"
                )
        else:
            value = option.default() if callable(option.default) else option.default
        setattr(args, option.dest, value)


GLOBAL_OPTIONS = [
    Option("seed", int, lambda: get_settings().seed, "master seed of the random streams"),
    Option("threads", int, lambda: get_settings().threads, "worker threads"),
    Option("out_dir", str, lambda: str(get_settings().out_dir), "output directory"),
    Option("log_level", str, lambda: get_settings().log_level, "DEBUG, INFO, WARNING or ERROR"),
    Option("plot", to_bool, False, "also write SVG plots"),
]


def add_command(
    subparsers: argparse._SubParsersAction,
    name: str,
    help: str,
    options: List[Option],
    handler: Callable[[argparse.Namespace], int],
) -> argparse.ArgumentParser:
    """Leaf command parser carrying its own flags, the global flags and --config."""
    parser = subparsers.add_parser(name, help=help)
    add_options(parser, options + GLOBAL_OPTIONS)
    parser.add_argument("--config", default=None, help="flat key = value file with defaults")
    parser.set_defaults(handler=handler, options=options + GLOBAL_OPTIONS)
    return parser


MODEL_OPTIONS = [
    Option("levy", str, "gaussian(0,1)", "Levy seed, e.g. gaussian(0,1), poisson(2), gamma(1,2)"),
    Option("trawl", str, "exp(1)", "trawl function, e.g. exp(1), supgamma(1,2.5)"),
    Option("p", str, "one", "periodic kernel, e.g. one, sine(3), fourier(5;0.5,0.2)"),
    Option("delta", float, 1.0, "grid step"),
    Option("n", int, 1000, "number of grid steps"),
]

SERIES_OPTIONS = [
    Option("input", str, None, "input CSV file", alias="--in"),
    Option("date_col", str, "date", "timestamp column"),
    Option("value_col", str, "value", "value column"),
    Option("delta", float, None, "sampling step (inferred from the timestamps when omitted)"),
]


def model_from_args(args: argparse.Namespace) -> ModelSpec:
    return ModelSpec.from_strings(args.levy, args.trawl, args.p, args.delta, args.n)


def output_dir(args: argparse.Namespace) -> Path:
    path = Path(args.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_table(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info("wrote %s", path)
    return path


def write_matrix(matrix: np.ndarray, path: Path, labels: Optional[List[str]] = None) -> Path:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    labels = labels or [str(k) for k in range(matrix.shape[1])]
    frame = pd.DataFrame(matrix, columns=labels)
    frame.insert(0, "row", labels[: matrix.shape[0]])
    return write_table(frame, path)


def write_run_config(args: argparse.Namespace, out_dir: Path) -> Path:
    """Serialise every resolved option next to the outputs."""
    values = {
        key: value
        for key, value in vars(args).items()
        if key not in ("handler", "options") and not callable(value)
    }
    config = RunConfig(**values)
    path = out_dir / RUN_CONFIG_NAME
    write_config_file(path, config.as_env())
    return path
