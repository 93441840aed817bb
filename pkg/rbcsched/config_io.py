"""Flat YAML config files.

Every key is optional; missing keys keep the defaults of the dataclasses in
``sim_config`` (the reference charging scenario: eta = 0.2, 200 slots of 1 us,
1 s segments, 1000 mAh cells peaking at 4.2 W, 21 W driving power). Example::

    schema_version: 1
    scheduler: tdma
    n_receivers: 50
    drive_power_w: 50

Lines written as `key = value` are read as `key: value`.
"""

import re
from dataclasses import asdict, fields, replace

import yaml

from rbcsched.sim_config import (
    SCHEMA_VERSION,
    BatterySpec,
    ConfigError,
    DriveSettings,
    EfficiencyChain,
    SimConfig,
)

SECTIONS = {
    "efficiency": EfficiencyChain,
    "drive": DriveSettings,
    "battery": BatterySpec,
}
OPTIONAL_INT = ("seed",)
OPTIONAL_FLOAT = ("refresh_period_s",)
ASSIGNMENT = re.compile(r"^(\s*)([A-Za-z_]\w*)\s*=\s*", re.MULTILINE)


def _schema():
    """Flat key -> (section or None, declared type)."""
    schema = {"schema_version": (None, int)}
    for item in fields(SimConfig):
        if item.name in SECTIONS:
            for sub in fields(SECTIONS[item.name]):
                schema[sub.name] = (item.name, sub.type)
        else:
            schema[item.name] = (None, item.type)
    return schema


SCHEMA = _schema()


def _coerce(key, value, line):
    _, declared = SCHEMA[key]
    if value is None and key in OPTIONAL_INT + OPTIONAL_FLOAT:
        return None
    if key == "denied_receivers":
        if not isinstance(value, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in value
        ):
            raise ConfigError(key, "expected a list of receiver ids", line)
        return tuple(value)
    if declared in (int, "int") or key in OPTIONAL_INT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}", line)
        return value
    if declared in (float, "float") or key in OPTIONAL_FLOAT:
        if isinstance(value, bool):
            raise ConfigError(key, f"expected a number, got {value!r}", line)
        try:
            # YAML 1.1 reads 1e-6 (no dot) as a string
            return float(value)
        except (TypeError, ValueError) as ex:
            raise ConfigError(key, f"expected a number, got {value!r}", line) from ex
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a string, got {value!r}", line)
    return value


def loads_config(text: str) -> SimConfig:
    text = ASSIGNMENT.sub(r"\1\2: ", text)
    try:
        root = yaml.compose(text)
        values = yaml.safe_load(text)
    except yaml.YAMLError as ex:
        mark = getattr(ex, "problem_mark", None)
        line = mark.line + 1 if mark else None
        raise ConfigError("<file>", f"not valid YAML: {ex}", line) from ex
    if root is None:
        return SimConfig()
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError("<file>", "expected flat 'key: value' lines", 1)

    lines = {}
    for key_node, _ in root.value:
        line = key_node.start_mark.line + 1
        if key_node.value in lines:
            raise ConfigError(key_node.value, "duplicate key", line)
        lines[key_node.value] = line

    sections = {name: {} for name in SECTIONS}
    top = {}
    for key, value in values.items():
        key = str(key)
        line = lines.get(key)
        if key not in SCHEMA:
            raise ConfigError(key, "unknown key", line)
        value = _coerce(key, value, line)
        section, _ = SCHEMA[key]
        if key == "schema_version":
            if value != SCHEMA_VERSION:
                raise ConfigError(key, f"unsupported schema_version {value}", line)
        elif section:
            sections[section][key] = value
        else:
            top[key] = value

    try:
        built = {name: SECTIONS[name](**kwargs) for name, kwargs in sections.items()}
        return SimConfig(**top, **built)
    except ConfigError as ex:
        raise ConfigError(ex.key, ex.message, lines.get(ex.key)) from ex


def parse_config(path) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fp:
        return loads_config(fp.read())


def dumps_config(config: SimConfig) -> str:
    flat = {"schema_version": SCHEMA_VERSION}
    for key, value in asdict(config).items():
        if key in SECTIONS:
            flat.update(value)
        else:
            flat[key] = list(value) if isinstance(value, tuple) else value
    return yaml.safe_dump(flat, sort_keys=False)


def dump_config(config: SimConfig, path):
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(dumps_config(config))


def override(config: SimConfig, **changes) -> SimConfig:
    """Copy of ``config`` with flat keys replaced, validated like a file."""
    sections = {name: {} for name in SECTIONS}
    top = {}
    for key, value in changes.items():
        if key not in SCHEMA or key == "schema_version":
            raise ConfigError(key, "unknown key")
        section, _ = SCHEMA[key]
        if section:
            sections[section][key] = _coerce(key, value, None)
        else:
            top[key] = _coerce(key, value, None)
    built = {
        name: replace(getattr(config, name), **kwargs)
        for name, kwargs in sections.items()
        if kwargs
    }
    return replace(config, **top, **built)
