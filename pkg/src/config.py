import logging
import os
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv
from pydantic import ValidationError

from .errors import ConfigError
from .state import ExperimentConfig

load_dotenv()


class Config:

    # ==================== Report Configuration ====================
    # Where JSON/CSV reports are written (overridden per run by --out)
    REPORT_DIR = os.getenv("MAXRESTRICT_REPORT_DIR", "./reports")

    # Config file used when a subcommand is run without --config
    DEFAULT_CONFIG = os.getenv("MAXRESTRICT_CONFIG", "")

    # ==================== API Configuration ====================
    API_HOST = os.getenv("API_HOST", "0.0.0.0")
    API_PORT = int(os.getenv("API_PORT", "8000"))

    # ==================== Logging Configuration ====================
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")  # DEBUG, INFO, WARNING, ERROR
    LOG_FILE = os.getenv("LOG_FILE", "./logs/maxrestrict.log")

    # ==================== Validation ====================
    @classmethod
    def validate(cls):
        """
        Validate process-level settings
        Call this at startup to catch bad environment values early
        """
        if cls.LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Invalid LOG_LEVEL: {cls.LOG_LEVEL}. Please check your .env file.")
        if not 0 < cls.API_PORT < 65536:
            raise ValueError(f"Invalid API_PORT: {cls.API_PORT}. Please check your .env file.")
        if not cls.REPORT_DIR:
            raise ValueError("MAXRESTRICT_REPORT_DIR must not be empty. Please check your .env file.")


_configured = False


def configure_logging(level: Optional[str] = None) -> None:
    """Install a stderr handler and a file handler on the root logger (once per process)"""
    global _configured
    if _configured:
        return
    root = logging.getLogger()
    root.setLevel((level or Config.LOG_LEVEL).upper())
    formatter = logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")

    stream = logging.StreamHandler()
    stream.setFormatter(formatter)
    root.addHandler(stream)

    log_dir = os.path.dirname(Config.LOG_FILE)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
    file_handler = logging.FileHandler(Config.LOG_FILE)
    file_handler.setFormatter(formatter)
    root.addHandler(file_handler)
    _configured = True


# ==================== Experiment Config Files ====================

def _key_lines(text: str) -> Dict[str, int]:
    """1-based line of each top-level key; rejects nesting and duplicate keys"""
    node = yaml.compose(text, Loader=yaml.SafeLoader)
    if node is None:
        return {}
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError("config must be a list of 'key: value' lines", node.start_mark.line + 1)
    lines: Dict[str, int] = {}
    for key_node, value_node in node.value:
        line = key_node.start_mark.line + 1
        key = key_node.value
        if key in lines:
            raise ConfigError(f"duplicate key '{key}'", line)
        if isinstance(value_node, yaml.MappingNode):
            raise ConfigError(f"nested values are not allowed for '{key}'", line)
        if isinstance(value_node, yaml.SequenceNode) and any(
            not isinstance(item, yaml.ScalarNode) for item in value_node.value
        ):
            raise ConfigError(f"list '{key}' must hold plain values", line)
        lines[key] = line
    return lines


def parse_experiment_config(text: str) -> ExperimentConfig:
    """
    Parse config text into an ExperimentConfig

    Grammar: one `key: value` per line, `#` comments, numbers, booleans, strings,
    rationals as "num/den", flow lists [a, b, c].

    Raises:
        ConfigError: syntax or validation problem, with the offending line when known
    """
    try:
        lines = _key_lines(text)
        data: Any = yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        raise ConfigError(f"syntax error: {e.problem}", mark.line + 1 if mark else None) from e
    except yaml.YAMLError as e:
        raise ConfigError(f"syntax error: {e}") from e

    try:
        return ExperimentConfig(**(data or {}))
    except ValidationError as e:
        first = e.errors()[0]
        loc = first.get("loc") or ()
        key = str(loc[0]) if loc else ""
        raise ConfigError(f"{key}: {first.get('msg')}" if key else first.get("msg"), lines.get(key)) from e


def load_experiment_config(path: Optional[str]) -> ExperimentConfig:
    """Read a config file; None (and no MAXRESTRICT_CONFIG) gives the acceptance defaults"""
    path = path or Config.DEFAULT_CONFIG
    if not path:
        return ExperimentConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror}") from e
    return parse_experiment_config(text)
