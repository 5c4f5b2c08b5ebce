"""Experiment configuration: TOML parsing, validation, canonical emission and hashing."""

from __future__ import annotations

import hashlib
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dynamics import DEFAULT_STEP, NoiseModel
from .errors import ConfigError
from .model import (
    DEFAULT_ANHARMONICITY_MHZ, DEFAULT_COUPLING_KHZ, DEFAULT_FSR_MHZ, DEFAULT_QUBIT_GHZ,
    DeviceModel, default_mode_offsets_mhz, mhz,
)
from .protocol import DEFAULT_MODE_ORDER, ScheduleOptions

MEASURED = "reported device value"
ASSUMED = "assumed, not reported for the device"
TOOL = "tool setting"


@dataclass(frozen=True)
class Key:
    name: str
    kind: str  # float, int, bool, float_list, int_list
    source: str
    positive: bool = False
    nonneg: bool = False


SCHEMA: dict[str, tuple[Key, ...]] = {
    "device": (
        Key("qubit_freq_ghz", "float", ASSUMED, positive=True),
        Key("anharmonicity_mhz", "float", ASSUMED, positive=True),
        Key("fsr_mhz", "float", MEASURED, positive=True),
        Key("mode_offsets_mhz", "float_list", MEASURED),
        Key("couplings_khz", "float_list", MEASURED, positive=True),
        Key("qubit_levels", "int", TOOL, positive=True),
        Key("fock_dim", "int", TOOL, positive=True),
    ),
    "noise": (
        Key("qubit_t1_us", "float", MEASURED, positive=True),
        Key("qubit_tphi_us", "float", MEASURED, positive=True),
        Key("bath_temp_mk", "float", MEASURED, nonneg=True),
        Key("phonon_t1_us", "float_list", ASSUMED, positive=True),
        Key("phonon_nbar", "float_list", MEASURED, nonneg=True),
    ),
    "protocol": (
        Key("mode_order", "int_list", MEASURED, positive=True),
        Key("n_swaps", "int", MEASURED, nonneg=True),
        Key("pi_fidelity", "float", MEASURED, nonneg=True),
        Key("prepare_pi_pulse", "bool", MEASURED),
        Key("park_detuning_mhz", "float", ASSUMED),
        Key("ramp_pad_us", "float", ASSUMED, nonneg=True),
        Key("park_hold_us", "float", ASSUMED, nonneg=True),
    ),
    "integrator": (
        Key("step_ns", "float", TOOL, positive=True),
    ),
    "analysis": (
        Key("prior_low", "float", TOOL),
        Key("prior_high", "float", TOOL),
        Key("ci_level", "float", TOOL, positive=True),
    ),
    "synthesis": (
        Key("p_true", "float", MEASURED, nonneg=True),
        Key("sigma_mean", "float", MEASURED, positive=True),
        Key("n_records", "int", ASSUMED, positive=True),
    ),
}
TOP_LEVEL = (Key("seed", "int", TOOL, nonneg=True),)


def _mode_defaults(n: int) -> dict[str, list]:
    t1 = [150.0] * n
    if n >= 4:
        t1[3] = 400.0
    return {
        "couplings_khz": [DEFAULT_COUPLING_KHZ] * n,
        "phonon_t1_us": t1,
        "phonon_nbar": [1e-4] * n,
    }


def _scalar_defaults() -> dict[str, dict[str, Any]]:
    return {
        "device": {
            "qubit_freq_ghz": DEFAULT_QUBIT_GHZ,
            "anharmonicity_mhz": DEFAULT_ANHARMONICITY_MHZ,
            "fsr_mhz": DEFAULT_FSR_MHZ,
            "mode_offsets_mhz": default_mode_offsets_mhz(5),
            "qubit_levels": 2,
            "fock_dim": 3,
        },
        "noise": {"qubit_t1_us": 23.1, "qubit_tphi_us": 17.1, "bath_temp_mk": 45.0},
        "protocol": {
            "mode_order": list(DEFAULT_MODE_ORDER),
            "n_swaps": 4,
            "pi_fidelity": 0.966,
            "prepare_pi_pulse": True,
            "park_detuning_mhz": -70.0,
            "ramp_pad_us": 0.01,
            "park_hold_us": 0.02,
        },
        "integrator": {"step_ns": DEFAULT_STEP * 1e3},
        "analysis": {"prior_low": 0.0, "prior_high": 1.0, "ci_level": 0.95},
        "synthesis": {"p_true": 8.3e-5, "sigma_mean": 1.39e-4, "n_records": 84},
    }


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration.  ``values`` maps section -> key -> value."""

    values: dict[str, dict[str, Any]]
    seed: int = 0
    explicit: frozenset = field(default=frozenset(), compare=False)

    def __getitem__(self, section: str) -> dict[str, Any]:
        return self.values[section]

    @property
    def n_modes(self) -> int:
        return len(self.values["device"]["mode_offsets_mhz"])

    def device(self) -> DeviceModel:
        d = self.values["device"]
        wq = mhz(d["qubit_freq_ghz"] * 1e3)
        return DeviceModel(
            qubit_freq=wq,
            anharmonicity=mhz(d["anharmonicity_mhz"]),
            mode_freqs=tuple(wq + mhz(o) for o in d["mode_offsets_mhz"]),
            couplings=tuple(mhz(g * 1e-3) for g in d["couplings_khz"]),
            fsr=mhz(d["fsr_mhz"]),
            qubit_levels=d["qubit_levels"],
            fock_dim=d["fock_dim"],
        )

    def noise(self) -> NoiseModel:
        n = self.values["noise"]
        return NoiseModel(
            qubit_t1=n["qubit_t1_us"],
            qubit_tphi=n["qubit_tphi_us"],
            bath_temp=n["bath_temp_mk"] * 1e-3,
            phonon_t1=tuple(n["phonon_t1_us"]),
            phonon_nbar=tuple(n["phonon_nbar"]),
        )

    def schedule_options(self) -> ScheduleOptions:
        p = self.values["protocol"]
        return ScheduleOptions(
            mode_order=tuple(p["mode_order"]),
            prepare_pi_pulse=p["prepare_pi_pulse"],
            pi_fidelity=p["pi_fidelity"],
            park_detuning=mhz(p["park_detuning_mhz"]),
            ramp_pad=p["ramp_pad_us"],
            park_hold=p["park_hold_us"],
        )

    @property
    def step(self) -> float:
        """Integrator step in microseconds."""
        return self.values["integrator"]["step_ns"] * 1e-3

    def with_overrides(self, **overrides) -> ExperimentConfig:
        """Copy with ``section__key=value`` overrides (or ``seed=``), revalidated."""
        raw: dict[str, Any] = {s: {} for s in SCHEMA}
        for name in self.explicit:
            sec, key = name.split(".")
            raw[sec][key] = self.values[sec][key]
        raw["seed"] = self.seed
        for k, v in overrides.items():
            if v is None:
                continue
            if k == "seed":
                raw["seed"] = v
            else:
                sec, key = k.split("__")
                raw[sec][key] = v
        return build_config(raw)


def _coerce(section: str, key: Key, value: Any) -> Any:
    where = f"{section}.{key.name}" if section else key.name

    def num(x, integer=False):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {x!r}")
        if integer:
            if isinstance(x, float):
                raise ConfigError(f"{where}: expected an integer, got {x!r}")
            return int(x)
        x = float(x)
        if not math.isfinite(x):
            raise ConfigError(f"{where}: value must be finite")
        return x

    def check(x):
        if key.positive and not x > 0:
            raise ConfigError(f"{where}: must be positive, got {x!r}")
        if key.nonneg and not x >= 0:
            raise ConfigError(f"{where}: must be non-negative, got {x!r}")
        return x

    if key.kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true or false, got {value!r}")
        return value
    if key.kind in ("float", "int"):
        return check(num(value, key.kind == "int"))
    if not isinstance(value, list):
        raise ConfigError(f"{where}: expected a list, got {value!r}")
    return [check(num(x, key.kind == "int_list")) for x in value]


def build_config(raw: dict[str, Any]) -> ExperimentConfig:
    """Validate a raw mapping (as parsed from TOML) and fill defaults."""
    known = set(SCHEMA) | {k.name for k in TOP_LEVEL}
    for name in raw:
        if name not in known:
            raise ConfigError(f"unknown key or section {name!r}")
    values = _scalar_defaults()
    explicit = set()
    for section, keys in SCHEMA.items():
        given = raw.get(section, {})
        if not isinstance(given, dict):
            raise ConfigError(f"{section}: expected a section")
        names = {k.name: k for k in keys}
        for name in given:
            if name not in names:
                raise ConfigError(f"unknown key {section}.{name}")
        for name, value in given.items():
            values[section][name] = _coerce(section, names[name], value)
            explicit.add(f"{section}.{name}")

    n = len(values["device"]["mode_offsets_mhz"])
    if n < 1:
        raise ConfigError("device.mode_offsets_mhz: need at least one mode")
    for key, default in _mode_defaults(n).items():
        section = "device" if key == "couplings_khz" else "noise"
        values[section].setdefault(key, default)
        if len(values[section][key]) != n:
            raise ConfigError(
                f"{section}.{key}: expected {n} entries (one per mode), got {len(values[section][key])}")
    for i, nb in enumerate(values["noise"]["phonon_nbar"]):
        if nb >= 1:
            raise ConfigError(f"noise.phonon_nbar: entry {i + 1} must be < 1")

    d, p, a = values["device"], values["protocol"], values["analysis"]
    if d["qubit_levels"] < 2 or d["fock_dim"] < 2:
        raise ConfigError("device.qubit_levels and device.fock_dim must be >= 2")
    order = p["mode_order"]
    for m in order:
        if not 1 <= m <= n:
            raise ConfigError(f"protocol.mode_order: mode {m} outside 1..{n}")
    if len(set(order)) != len(order):
        raise ConfigError("protocol.mode_order: modes must not repeat")
    if p["n_swaps"] > len(order):
        raise ConfigError(f"protocol.n_swaps: {p['n_swaps']} exceeds the {len(order)} modes in mode_order")
    if p["pi_fidelity"] > 1:
        raise ConfigError("protocol.pi_fidelity: must lie in [0, 1]")
    if not a["prior_low"] < a["prior_high"]:
        raise ConfigError("analysis.prior_low: must be below analysis.prior_high")
    if not a["ci_level"] < 1:
        raise ConfigError("analysis.ci_level: must lie in (0, 1)")

    seed = _coerce("", TOP_LEVEL[0], raw["seed"]) if "seed" in raw else 0
    cfg = ExperimentConfig(values, seed, frozenset(explicit))
    # surface physical inconsistencies (mode ordering, park position) as config errors
    cfg.device()
    cfg.noise()
    cfg.schedule_options()
    return cfg


def parse_config_text(text: str) -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    return build_config(raw)


def parse_config(path: str | Path | None) -> ExperimentConfig:
    """Read a TOML config; ``None`` gives the full default configuration."""
    if path is None:
        return build_config({})
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"))


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    return "[" + ", ".join(_fmt(v) for v in value) + "]"


def emit_config(cfg: ExperimentConfig, comments: bool = True) -> str:
    """Canonical TOML text: fixed section and key order, shortest round-trip floats."""
    lines = []
    seed_key = TOP_LEVEL[0]
    lines.append(f"seed = {cfg.seed}" + (f"  # {seed_key.source}" if comments else ""))
    for section, keys in SCHEMA.items():
        lines.append("")
        lines.append(f"[{section}]")
        for key in keys:
            line = f"{key.name} = {_fmt(cfg.values[section][key.name])}"
            if comments:
                origin = "set" if f"{section}.{key.name}" in cfg.explicit else "default"
                line += f"  # {origin}; {key.source}"
            lines.append(line)
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    """sha256 of the comment-free canonical form."""
    return hashlib.sha256(emit_config(cfg, comments=False).encode()).hexdigest()


def config_fields() -> list[str]:
    return [k.name for k in TOP_LEVEL] + [f"{s}.{k.name}" for s, ks in SCHEMA.items() for k in ks]


__all__ = [
    "ExperimentConfig", "build_config", "parse_config", "parse_config_text", "emit_config",
    "config_hash", "config_fields", "SCHEMA",
]
