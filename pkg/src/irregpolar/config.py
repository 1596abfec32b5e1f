"""YAML experiment configs: channel profiles, adversary specs, run options.

Channel profiles look like one of::

    {kind: bec, eps: 0.1}
    {kind: bsc, p: 0.11}
    {kind: table, outputs: [a, b, c], rows: [[0.5, 0.3, 0.2], [0.2, 0.3, 0.5]]}

Errors carry the line number of the offending node when it is known.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .awtc import AdversarySpec, random_adversary
from .channels import DiscreteChannel, ErasureChannel, bsc

ROW_TOL = 1e-9


class ConfigError(ValueError):
    """Invalid experiment configuration."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        where = ""
        if source is not None:
            where = f"{source}:{line}: " if line is not None else f"{source}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
        self.line = line


@dataclass
class Document:
    """Parsed YAML plus a map from key paths to 1-based source lines."""

    data: dict
    lines: dict
    source: str | None = None

    def line(self, *path) -> int | None:
        while path:
            if path in self.lines:
                return self.lines[path]
            path = path[:-1]
        return None

    def error(self, message: str, *path) -> ConfigError:
        return ConfigError(message, self.line(*path), self.source)


def _record_lines(node, path, out):
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            _record_lines(v, path + (k.value,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _record_lines(v, path + (i,), out)


def parse_text(text: str, source: str | None = None) -> Document:
    try:
        data = yaml.safe_load(text)
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"malformed YAML: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None, source) from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", 1, source)
    lines = {}
    if node is not None:
        _record_lines(node, (), lines)
    return Document(data, lines, source)


def load(path) -> Document:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    return parse_text(text, str(path))


# --------------------------------------------------------------------------
# channels

def _number(doc, value, *path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise doc.error(f"expected a number, got {value!r}", *path)
    return float(value)


def channel_from(doc: Document, spec, *path) -> DiscreteChannel:
    """Build a channel from a profile mapping found at ``path``."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise doc.error("channel profile needs a 'kind' (bec, bsc or table)", *path)
    kind = spec["kind"]
    try:
        if kind == "bec":
            return ErasureChannel(_number(doc, spec.get("eps"), *path, "eps"))
        if kind == "bsc":
            return bsc(_number(doc, spec.get("p"), *path, "p"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise doc.error(str(exc), *path) from None
    if kind != "table":
        raise doc.error(f"unknown channel kind {kind!r}", *path, "kind")
    rows = spec.get("rows")
    if not isinstance(rows, list) or len(rows) != 2:
        raise doc.error("table channel needs 'rows' with exactly two rows", *path, "rows")
    clean = []
    for r, row in enumerate(rows):
        if not isinstance(row, list) or not row:
            raise doc.error("each row must be a non-empty list of probabilities", *path, "rows", r)
        vals = np.array([_number(doc, v, *path, "rows", r, k) for k, v in enumerate(row)])
        if np.any(vals < 0):
            raise doc.error(f"row {r} has a negative entry", *path, "rows", r)
        if abs(vals.sum() - 1.0) > ROW_TOL:
            raise doc.error(f"row {r} sums to {vals.sum()!r}, not 1", *path, "rows", r)
        clean.append(vals / vals.sum())
    if len(clean[0]) != len(clean[1]):
        raise doc.error("rows have different lengths", *path, "rows")
    outputs = spec.get("outputs")
    try:
        return DiscreteChannel(clean[0], clean[1], outputs)
    except ValueError as exc:
        raise doc.error(str(exc), *path) from None


def leaves_from(doc: Document, key: str = "leaves") -> list:
    """A list of profiles, or ``{kind: bec, eps: [...]}`` as shorthand."""
    spec = doc.data.get(key)
    if isinstance(spec, dict) and spec.get("kind") == "bec" and isinstance(spec.get("eps"), list):
        return [channel_from(doc, {"kind": "bec", "eps": e}, key, "eps", i)
                for i, e in enumerate(spec["eps"])]
    if not isinstance(spec, list) or not spec:
        raise doc.error(f"'{key}' must be a non-empty list of channel profiles", key)
    return [channel_from(doc, s, key, i) for i, s in enumerate(spec)]


# --------------------------------------------------------------------------
# adversary

def adversary_from(doc: Document, N: int, T: int | None = None, key: str = "adversary") -> AdversarySpec:
    """Explicit ``read_sets``/``write_sets`` lists, or a ``seed`` for random ones."""
    spec = doc.data.get(key)
    if not isinstance(spec, dict):
        raise doc.error(f"'{key}' must be a mapping", key)
    rho_r = _number(doc, spec.get("rho_r"), key, "rho_r")
    rho_w = _number(doc, spec.get("rho_w"), key, "rho_w")
    try:
        if "read_sets" in spec or "write_sets" in spec:
            reads, writes = spec.get("read_sets"), spec.get("write_sets")
            if not isinstance(reads, list) or not isinstance(writes, list):
                raise doc.error("give both 'read_sets' and 'write_sets' as lists", key)
            if T is not None and len(reads) != T:
                raise doc.error(f"{len(reads)} read sets for T={T} blocks", key, "read_sets")
            return AdversarySpec(N, rho_r, rho_w, tuple(reads), tuple(writes))
        T = T if T is not None else int(spec.get("T", 1))
        seed = spec.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise doc.error("seed must be an integer", key, "seed")
        return random_adversary(N, T, rho_r, rho_w, seed)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise doc.error(str(exc), key) from None
