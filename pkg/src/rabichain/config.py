"""JSON run configuration.

A config file holds up to four sections: "ssh" (band-model parameters),
"system" (coupled-chain parameters), "initial" (wave-packet shape) and
"analysis" (time horizon and spectral settings).  Keys outside the known
sets are rejected outright — a silently ignored typo in a physics parameter
is worse than a failed run.  The JSON key "lambda" feeds the ``lam`` field
of the system config, since the bare word is reserved in Python.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .rabi_dynamics import SystemConfig
from .ssh_band import SSHParams

__all__ = ["ConfigError", "PacketSpec", "AnalysisSpec", "RunConfig",
           "parse_config", "load_config"]


class ConfigError(ValueError):
    """A config file is malformed; the message names the section and key."""


@dataclass(frozen=True)
class PacketSpec:
    m0: float | None = None
    sigma: float | None = None
    k0: float = 0.0
    chain: int = 0


@dataclass(frozen=True)
class AnalysisSpec:
    t_end: float = 100.0
    dt: float | None = None
    record_every: int = 1
    window: str = "hann"
    pad_factor: int = 4
    prominence_frac: float = 0.05
    min_separation: float | None = None
    window_frac: float = 0.2
    scale: float = 1.0
    extra_tolerance: float = 0.0
    g_values: tuple[float, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    ssh: SSHParams | None = None
    system: SystemConfig | None = None
    initial: PacketSpec = PacketSpec()
    analysis: AnalysisSpec = AnalysisSpec()


_SSH_KEYS = {"t0", "alpha", "K", "a", "N"}
_SSH_REQUIRED = {"t0", "alpha", "K"}
_SYSTEM_KEYS = {"n_chains", "n_sites", "omega0", "omega", "g", "lambda",
                "l_photons", "k_wave", "a", "xi1", "xi2", "boundary"}
_SYSTEM_REQUIRED = {"n_chains", "n_sites", "omega0", "omega", "g", "xi1", "xi2"}
_INITIAL_KEYS = {"m0", "sigma", "k0", "chain"}
_ANALYSIS_KEYS = {"t_end", "dt", "record_every", "window", "pad_factor",
                  "prominence_frac", "min_separation", "window_frac", "scale",
                  "extra_tolerance", "g_values"}
_SECTIONS = {"ssh", "system", "initial", "analysis"}


def _check_keys(section: str, given: dict, allowed: set, required: set = frozenset()):
    unknown = set(given) - allowed
    if unknown:
        raise ConfigError(
            f"section '{section}': unknown key(s) {sorted(unknown)}; "
            f"allowed keys are {sorted(allowed)}")
    missing = required - set(given)
    if missing:
        raise ConfigError(f"section '{section}': missing required key(s) "
                          f"{sorted(missing)}")


def _ssh_from(sec: dict) -> SSHParams:
    _check_keys("ssh", sec, _SSH_KEYS, _SSH_REQUIRED)
    try:
        return SSHParams(t0=float(sec["t0"]), alpha=float(sec["alpha"]),
                         K=float(sec["K"]), a=float(sec.get("a", 1.0)),
                         N=int(sec.get("N", 1)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"section 'ssh': {exc}") from exc


def _system_from(sec: dict) -> SystemConfig:
    _check_keys("system", sec, _SYSTEM_KEYS, _SYSTEM_REQUIRED)
    try:
        return SystemConfig(
            n_chains=int(sec["n_chains"]),
            n_sites=int(sec["n_sites"]),
            omega0=float(sec["omega0"]),
            omega=float(sec["omega"]),
            g=float(sec["g"]),
            lam=float(sec.get("lambda", 0.0)),
            l_photons=int(sec.get("l_photons", 0)),
            k_wave=float(sec.get("k_wave", 0.0)),
            a=float(sec.get("a", 1.0)),
            xi1=tuple(float(v) for v in sec["xi1"]),
            xi2=tuple(float(v) for v in sec["xi2"]),
            boundary=str(sec.get("boundary", "periodic")),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"section 'system': {exc}") from exc


def _initial_from(sec: dict) -> PacketSpec:
    _check_keys("initial", sec, _INITIAL_KEYS)
    try:
        return PacketSpec(
            m0=None if sec.get("m0") is None else float(sec["m0"]),
            sigma=None if sec.get("sigma") is None else float(sec["sigma"]),
            k0=float(sec.get("k0", 0.0)),
            chain=int(sec.get("chain", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"section 'initial': {exc}") from exc


def _analysis_from(sec: dict) -> AnalysisSpec:
    _check_keys("analysis", sec, _ANALYSIS_KEYS)
    defaults = AnalysisSpec()
    try:
        return AnalysisSpec(
            t_end=float(sec.get("t_end", defaults.t_end)),
            dt=None if sec.get("dt") is None else float(sec["dt"]),
            record_every=int(sec.get("record_every", defaults.record_every)),
            window=str(sec.get("window", defaults.window)),
            pad_factor=int(sec.get("pad_factor", defaults.pad_factor)),
            prominence_frac=float(sec.get("prominence_frac",
                                          defaults.prominence_frac)),
            min_separation=None if sec.get("min_separation") is None
            else float(sec["min_separation"]),
            window_frac=float(sec.get("window_frac", defaults.window_frac)),
            scale=float(sec.get("scale", defaults.scale)),
            extra_tolerance=float(sec.get("extra_tolerance",
                                          defaults.extra_tolerance)),
            g_values=tuple(float(v) for v in sec.get("g_values", ())),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"section 'analysis': {exc}") from exc


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level of a config file must be a JSON object")
    unknown = set(raw) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown section(s) {sorted(unknown)}; "
                          f"allowed sections are {sorted(_SECTIONS)}")
    return RunConfig(
        ssh=_ssh_from(raw["ssh"]) if "ssh" in raw else None,
        system=_system_from(raw["system"]) if "system" in raw else None,
        initial=_initial_from(raw.get("initial", {})),
        analysis=_analysis_from(raw.get("analysis", {})),
    )


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return parse_config(raw)
