"""Scenario configuration files.

A config is a YAML mapping::

    schema_version: 1
    seed: 0
    scenarios:
      - name: amp
        model: {preset: amplitude-damping}
        params: {n_slots: 8, dt: 0.125}
        tolerances: {correlation: 1.0e-8}

A single scenario may also be given inline at the top level (keys
``name``, ``model``, ``params``, ``tolerances``). ``model`` holds exactly one
of ``preset`` (with optional ``seed``), ``file`` or ``inline``.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

from hpflow.checks import TOLERANCE_KEYS
from hpflow.models import ModelError, load_model, model_from_dict, preset
from hpflow.semigroups import ModelSpec

__all__ = ["SCHEMA_VERSION", "ConfigError", "Scenario", "RunConfig", "load_config", "parse_config"]

SCHEMA_VERSION = 1

PARAM_KEYS = {
    "n_slots": int,
    "dt": float,
    "dt_list": list,
    "times": list,
    "t": float,
    "tol_rank": float,
    "samples": int,
    "perturbation": float,
    "max_slots": int,
    "memory_cap": int,
}


class ConfigError(ValueError):
    def __init__(self, message: str, field: str = "", line: Optional[int] = None):
        self.field = field
        self.line = line
        where = field or "config"
        if line is not None:
            where = f"line {line}: {where}"
        super().__init__(f"{where}: {message}")


def _line_map(text: str) -> Dict[Tuple, int]:
    """Map key paths of a YAML document to 1-based line numbers."""
    out: Dict[Tuple, int] = {}

    def walk(node, path):
        out[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                walk(v, path + (k.value,))
                out[path + (k.value,)] = k.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    root = yaml.compose(text)
    if root is not None:
        walk(root, ())
    return out


@dataclass(frozen=True)
class Scenario:
    name: str
    model: ModelSpec
    model_echo: Dict[str, Any]
    params: Dict[str, Any] = field(default_factory=dict)
    tolerances: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    schema_version: int
    seed: int
    scenarios: Tuple[Scenario, ...]
    raw: Dict[str, Any]


def _fmt_path(path: Tuple) -> str:
    parts = []
    for p in path:
        parts.append(f"[{p}]" if isinstance(p, int) else (("." if parts else "") + str(p)))
    return "".join(parts)


def parse_config(data: Any, base_dir: Path = Path("."), lines: Optional[Dict[Tuple, int]] = None) -> RunConfig:
    lines = lines or {}

    def fail(msg, path=()):
        raise ConfigError(msg, _fmt_path(path), lines.get(path))

    if not isinstance(data, dict):
        fail("top level must be a mapping")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        fail(f"unsupported or missing schema_version {version!r} (expected {SCHEMA_VERSION})", ("schema_version",))
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        fail(f"seed must be a nonnegative integer, got {seed!r}", ("seed",))

    if "scenarios" in data:
        entries = data["scenarios"]
        if not isinstance(entries, list) or not entries:
            fail("must be a nonempty list", ("scenarios",))
        items = [(entry, ("scenarios", i)) for i, entry in enumerate(entries)]
    else:
        items = [(data, ())]

    scenarios = []
    names = set()
    for entry, path in items:
        if not isinstance(entry, dict):
            fail("scenario must be a mapping", path)
        fallback = f"scenario{path[1]}" if path else "default"
        name = entry.get("name", fallback)
        if not isinstance(name, str) or not name or any(c in name for c in "/\\ "):
            fail(f"invalid scenario name {name!r}", path + ("name",))
        if name in names:
            fail(f"duplicate scenario name {name!r}", path + ("name",))
        names.add(name)
        model, echo = _parse_model(entry.get("model"), path + ("model",), base_dir, fail)
        params = entry.get("params", {}) or {}
        if not isinstance(params, dict):
            fail("must be a mapping", path + ("params",))
        for key, value in params.items():
            if key not in PARAM_KEYS:
                fail(f"unknown parameter {key!r}", path + ("params", key))
            kind = PARAM_KEYS[key]
            if kind is float:
                ok = isinstance(value, (int, float))
            else:
                ok = isinstance(value, kind)
            ok = ok and not isinstance(value, bool)
            if not ok:
                fail(f"expected {kind.__name__}, got {value!r}", path + ("params", key))
            if kind is list and not all(isinstance(x, (int, float)) and x > 0 for x in value):
                fail("entries must be positive numbers", path + ("params", key))
        tolerances = entry.get("tolerances", {}) or {}
        if not isinstance(tolerances, dict):
            fail("must be a mapping", path + ("tolerances",))
        for key, value in tolerances.items():
            if key not in TOLERANCE_KEYS:
                fail(f"unknown tolerance {key!r}", path + ("tolerances", key))
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
                fail(f"tolerance must be > 0, got {value!r}", path + ("tolerances", key))
        scenarios.append(Scenario(name, model, echo, dict(params), {k: float(v) for k, v in tolerances.items()}))
    return RunConfig(SCHEMA_VERSION, seed, tuple(scenarios), data)


def _parse_model(spec, path, base_dir: Path, fail):
    if not isinstance(spec, dict):
        fail("missing model (expected a mapping with one of preset/file/inline)", path)
    kinds = [k for k in ("preset", "file", "inline") if k in spec]
    if len(kinds) != 1:
        fail(f"exactly one of preset/file/inline required, got {kinds or 'none'}", path)
    kind = kinds[0]
    try:
        if kind == "preset":
            seed = spec.get("seed")
            if seed is not None and (not isinstance(seed, int) or seed < 0):
                fail(f"seed must be a nonnegative integer, got {seed!r}", path + ("seed",))
            model = preset(spec["preset"], seed)
            echo = {"preset": spec["preset"], **({"seed": seed} if seed is not None else {})}
        elif kind == "file":
            target = Path(spec["file"])
            if not target.is_absolute():
                target = base_dir / target
            model = load_model(target)
            echo = {"file": str(spec["file"])}
        else:
            model = model_from_dict(spec["inline"], where=_fmt_path(path + ("inline",)))
            echo = {"inline": spec["inline"]}
    except ModelError as exc:
        fail(str(exc), path + (kind,))
    except ValueError as exc:
        fail(str(exc), path + (kind,))
    return model, echo


def load_config(path: Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", str(path)) from None
    try:
        data = yaml.safe_load(text)
        lines = _line_map(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"malformed YAML: {getattr(exc, 'problem', exc)}", str(path),
                          mark.line + 1 if mark else None) from None
    return parse_config(data, path.parent, lines)
