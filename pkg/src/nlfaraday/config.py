"""Scenario configuration: structured key=value text with unit suffixes.

Grammar, one entry per line::

    key = value [unit]     # trailing comments allowed

Blank lines and lines starting with '#' are skipped.  Values are parsed
as int when possible, then float, else kept as strings.  A unit suffix
rescales to internal units:

- time: s, ms, us, ns          -> seconds
- length: m, mm, um, nm        -> meters
- frequency: hz, khz, mhz, ghz -> angular frequency (rad/s), i.e. the
  stated ordinary frequency multiplied by 2*pi, because every internal
  API works with angular frequencies.

Unsuffixed numbers are taken to be in internal units already, so a
manifest written by ``format_config`` (plain SI, no suffixes) parses
back to the identical configuration.
"""
from __future__ import annotations

import math

from .exceptions import InvalidConfig

_UNIT_SCALES = {
    "s": 1.0,
    "ms": 1e-3,
    "us": 1e-6,
    "ns": 1e-9,
    "m": 1.0,
    "mm": 1e-3,
    "um": 1e-6,
    "nm": 1e-9,
    "hz": 2.0 * math.pi,
    "khz": 2.0 * math.pi * 1e3,
    "mhz": 2.0 * math.pi * 1e6,
    "ghz": 2.0 * math.pi * 1e9,
    "rad": 1.0,
    "mrad": 1e-3,
    "urad": 1e-6,
}


def parse_entry(raw: str):
    """Parse one 'value [unit]' fragment into int, float, or str."""
    parts = raw.split()
    if not parts:
        raise InvalidConfig("empty value")
    if len(parts) > 2:
        raise InvalidConfig(f"cannot parse value {raw!r}")
    token = parts[0]
    if len(parts) == 2:
        unit = parts[1].lower()
        if unit not in _UNIT_SCALES:
            raise InvalidConfig(f"unknown unit {parts[1]!r}")
        try:
            return float(token) * _UNIT_SCALES[unit]
        except ValueError:
            raise InvalidConfig(f"non-numeric value {token!r} with unit") from None
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        return token


def parse_config_text(text: str) -> dict:
    """Parse configuration text into an ordered key -> value dict."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise InvalidConfig(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = body.partition("=")
        key = key.strip()
        if not key or not key.replace("_", "").isalnum():
            raise InvalidConfig(f"line {lineno}: bad key {key!r}")
        if key in out:
            raise InvalidConfig(f"line {lineno}: duplicate key {key!r}")
        try:
            out[key] = parse_entry(raw.strip())
        except InvalidConfig as exc:
            raise InvalidConfig(f"line {lineno}: {exc}") from None
    return out


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def format_config(config: dict, header: str = "") -> str:
    """Canonical re-parseable text: plain internal units, sorted keys."""
    lines = [f"# {h}" for h in header.splitlines() if h.strip()]
    for key in sorted(config):
        lines.append(f"{key} = {_format_value(config[key])}")
    return "\n".join(lines) + "\n"


def write_manifest(path, config: dict, version: str, command: str = ""):
    """Echo the fully resolved configuration next to the run outputs."""
    header = f"manifest for {command}" if command else "run manifest"
    resolved = dict(config)
    resolved["package_version"] = version
    text = format_config(resolved, header=header)
    with open(path, "w") as fh:
        fh.write(text)
    return text
