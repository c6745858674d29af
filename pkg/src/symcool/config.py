"""Run configuration: the ``[run]`` section of a config file plus command-line overrides.

Energies are given in eV together with a frame tag (``cm`` or ``lab``) and
are turned into CM hartree only through :meth:`RunConfig.energy`, so every
core call sees a resolved energy.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .cascade import CONVENTIONS, resolve_energy
from .ensemble import CoolingScenario
from .species import SpeciesFileError, SpeciesPair, SpeciesRegistry, read_sections
from .units import angular_mhz, um

# requested E_final = 0 is replaced by this (eV); the integral forms need E > 0
E_FLOOR_EV = 1e-4


class ConfigError(ValueError):
    """Bad run configuration; the CLI maps it to exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    mol: str = "MgH+"
    atom: str = "Mg+"
    scenario: str = "CC"
    d_um: float = 5.29
    trap_mhz: float = 1.0
    b_max_um: float | None = None
    E_init_eV: float = 2.0
    E_final_eV: float = 0.01
    frame: str = "cm"
    N: int = 512
    rule: str = "geometric"
    mode: str = "integral"
    budget: float = 0.05
    seed: int = 0
    convention: str = "strict"
    n_runs: int = 200

    def __post_init__(self):
        if self.scenario not in ("CC", "SA"):
            raise ConfigError(f"scenario must be CC or SA, got {self.scenario!r}")
        if self.frame not in ("cm", "lab"):
            raise ConfigError(f"frame must be cm or lab, got {self.frame!r}")
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"convention must be one of {', '.join(CONVENTIONS)}, got {self.convention!r}")
        if self.rule not in ("geometric", "uniform"):
            raise ConfigError(f"rule must be geometric or uniform, got {self.rule!r}")
        if self.mode not in ("sum", "integral"):
            raise ConfigError(f"mode must be sum or integral, got {self.mode!r}")
        for name in ("d_um", "trap_mhz"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.b_max_um is not None and not self.b_max_um > 0:
            raise ConfigError("b_max_um must be positive")
        if self.N < 1 or self.n_runs < 1:
            raise ConfigError("N and n_runs must be at least 1")
        if self.E_final_eV < 0 or self.E_init_eV < self.E_final_eV:
            raise ConfigError("need E_init_eV >= E_final_eV >= 0")

    def pair(self, registry: SpeciesRegistry) -> SpeciesPair:
        return registry.pair(self.mol, self.atom)

    def build_scenario(self) -> CoolingScenario:
        if self.scenario == "SA":
            return CoolingScenario.single_atom(angular_mhz(self.trap_mhz))
        b_max = um(self.b_max_um) if self.b_max_um is not None else None
        return CoolingScenario.crystal(um(self.d_um), b_max_override=b_max)

    def energy(self, value_ev: float, pair: SpeciesPair) -> float:
        return resolve_energy(value_ev, self.frame, pair, self.convention)

    @property
    def floored_E_final(self) -> float:
        return self.E_final_eV if self.E_final_eV > 0 else E_FLOOR_EV


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, raw: str):
    f = _FIELDS[key]
    kind = str(f.type)
    if raw.lower() in ("none", "") and "None" in kind:
        return None
    if kind.startswith("int"):
        return int(raw)
    if kind.startswith("float"):
        return float(raw)
    return raw


def with_values(cfg: RunConfig, values: dict[str, str | object], source: str = "<args>") -> RunConfig:
    """Copy of ``cfg`` with string (or already typed) values replaced."""
    changes = {}
    for key, raw in values.items():
        if key not in _FIELDS:
            raise ConfigError(f"{source}: unknown run key {key!r}")
        try:
            changes[key] = _coerce(key, raw) if isinstance(raw, str) else raw
        except ValueError:
            raise ConfigError(f"{source}: bad value {raw!r} for {key}") from None
    return dataclasses.replace(cfg, **changes)


def parse_run_config(text: str, source: str = "<config>", base: RunConfig | None = None) -> RunConfig:
    """Read the ``[run]`` section; other sections are ignored."""
    values = {}
    for sec in read_sections(text, source):
        if sec.name != "run":
            continue
        for key, (raw, lineno) in sec.entries.items():
            if key not in _FIELDS:
                raise SpeciesFileError(f"unknown run key {key!r}", lineno, source)
            try:
                values[key] = _coerce(key, raw)
            except ValueError:
                raise SpeciesFileError(f"bad value {raw!r} for {key}", lineno, source) from None
    return with_values(base or RunConfig(), values, source)


def load_run_config(path) -> RunConfig:
    path = Path(path)
    return parse_run_config(path.read_text(), str(path))
