"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Keys are fixed (see
:data:`KEYS`); values are parsed to the listed type. The canonical form
written by :func:`dumps` has one ``key = value`` line per key, sorted.
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Callable


class ConfigError(ValueError):
    pass


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in {"1", "true", "yes", "on"}:
        return True
    if v in {"0", "false", "no", "off"}:
        return False
    raise ConfigError(f"not a boolean: {text!r}")


KEYS: dict[str, Callable[[str], Any]] = {
    # protocol
    "n": int, "error": str, "error_party": int, "F": float, "mixture": str,
    "seed": int, "trials": int, "out": str, "exact": _bool,
    # sweep / iterate
    "F_min": float, "F_max": float, "F_step": float,
    "rounds": int, "target": float, "efficiencies": _bool,
    # cavity
    "omega_c": float, "omega_0": float, "omega_p": float,
    "kappa": float, "gamma": float, "g": float, "ideal_point": _bool,
    "omega_p_min": float, "omega_p_max": float, "points": int,
    # efficiencies
    "T_f": float, "eta_0": float, "eta_d": float, "eta_a": float,
    "per_photon_losses": _bool, "n_max": int,
}


def parse_value(key: str, text: str) -> Any:
    if key not in KEYS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return KEYS[key](text.strip())
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc


def loads(text: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in out:
            raise ConfigError(f"line {lineno}: {key} set twice")
        out[key] = parse_value(key, value)
    return out


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dumps(cfg: dict[str, Any]) -> str:
    for key in cfg:
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    return "".join(f"{k} = {format_value(cfg[k])}\n" for k in sorted(cfg))


def load(path: str | Path) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)
