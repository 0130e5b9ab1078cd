"""Run-configuration files: flat ``key = value`` pairs under INI sections.

Recognized sections are [train], [model], and [ablation]; every key maps
onto one TrainConfig field (see docs/config.md). Parse and value errors
carry the offending line number.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from riskgraph.errors import ConfigError
from riskgraph.train_eval.pipeline import TrainConfig

_BOOL_KEYS = {
    "raw_hour",
    "scale_interaction",
    "include_reserved_slot",
    "class_balanced_loss",
    "without_kg",
    "disable_neighbour_attention",
    "disable_property_attention",
}
_INT_KEYS = {"epochs", "seed", "class_count", "batch_size", "lstm_hidden", "max_posts"}
_FLOAT_KEYS = {"learning_rate", "beta1", "beta2", "eps"}
_STR_KEYS = {"optimizer", "sigma"}
_LIST_KEYS = {"disable_categories"}

_KNOWN_KEYS = _BOOL_KEYS | _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _LIST_KEYS
_KNOWN_SECTIONS = ("train", "model", "ablation")


def _line_of(text: str, key: str) -> int:
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if stripped.startswith(key) and "=" in stripped:
            name = stripped.split("=", 1)[0].strip()
            if name == key:
                return lineno
    return 0


def parse_train_config(path: str | Path) -> TrainConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    text = path.read_text(encoding="utf-8")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path))
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: missing [section] header") from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else 0
        raise ConfigError(f"{path}:{lineno}: malformed config line") from exc

    values: dict[str, object] = {}
    for section in parser.sections():
        if section not in _KNOWN_SECTIONS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            lineno = _line_of(text, key)
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r} in [{section}]")
            try:
                if key in _BOOL_KEYS:
                    lowered = raw.strip().lower()
                    if lowered not in ("true", "false", "yes", "no", "1", "0"):
                        raise ValueError(raw)
                    values[key] = lowered in ("true", "yes", "1")
                elif key in _INT_KEYS:
                    values[key] = int(raw)
                elif key in _FLOAT_KEYS:
                    values[key] = float(raw)
                elif key in _LIST_KEYS:
                    values[key] = tuple(
                        item.strip() for item in raw.split(",") if item.strip()
                    )
                else:
                    values[key] = raw.strip()
            except ValueError as exc:
                raise ConfigError(
                    f"{path}:{lineno}: bad value {raw!r} for key {key!r}"
                ) from exc

    config = TrainConfig(**values)
    try:
        config.validate()
        config.layout()
        config.net_config()
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config
