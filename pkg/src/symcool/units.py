"""Conversions between laboratory units and Hartree atomic units.

Everything inside the package works in atomic units (hartree, bohr, electron
mass, atomic time). Laboratory units only appear at the user-facing edges.
"""

from __future__ import annotations

import math

HARTREE_EV = 27.211386
BOHR_M = 5.29177e-11
AMU_ME = 1822.888
AU_TIME_S = 2.4188843e-17
HARTREE_INVCM = 219474.6313632
AU_DIPOLE_DEBYE = 2.541746

# unit name -> (dimension, size of one unit in atomic units)
_UNITS: dict[str, tuple[str, float]] = {
    "hartree": ("energy", 1.0),
    "eV": ("energy", 1.0 / HARTREE_EV),
    "meV": ("energy", 1e-3 / HARTREE_EV),
    "invcm": ("energy", 1.0 / HARTREE_INVCM),
    "bohr": ("length", 1.0),
    "m": ("length", 1.0 / BOHR_M),
    "um": ("length", 1e-6 / BOHR_M),
    "nm": ("length", 1e-9 / BOHR_M),
    "angstrom": ("length", 1e-10 / BOHR_M),
    "me": ("mass", 1.0),
    "amu": ("mass", AMU_ME),
    "aut": ("time", 1.0),
    "s": ("time", 1.0 / AU_TIME_S),
    "ms": ("time", 1e-3 / AU_TIME_S),
    "us": ("time", 1e-6 / AU_TIME_S),
    "ns": ("time", 1e-9 / AU_TIME_S),
    "au_freq": ("frequency", 1.0),
    "Hz": ("frequency", AU_TIME_S),
    "kHz": ("frequency", 1e3 * AU_TIME_S),
    "MHz": ("frequency", 1e6 * AU_TIME_S),
    "ea0": ("dipole", 1.0),
    "debye": ("dipole", 1.0 / AU_DIPOLE_DEBYE),
}
_ALIASES = {"µm": "um", "μm": "um", "µs": "us", "μs": "us", "cm-1": "invcm", "Ha": "hartree", "D": "debye"}


class UnitError(ValueError):
    """Raised for unknown units or conversions across dimensions."""


def _lookup(unit: str) -> tuple[str, float]:
    try:
        return _UNITS[_ALIASES.get(unit, unit)]
    except KeyError:
        raise UnitError(f"unknown unit {unit!r}") from None


def convert(value, from_unit: str, to_unit: str):
    """Convert ``value`` from ``from_unit`` to ``to_unit``.

    Works on scalars and numpy arrays alike. Frequencies are ordinary
    (cycles per time); multiply by ``2*pi`` yourself for angular ones.

    Raises:
        UnitError: if either unit is unknown or the dimensions differ.
    """
    dim_a, fa = _lookup(from_unit)
    dim_b, fb = _lookup(to_unit)
    if dim_a != dim_b:
        raise UnitError(f"cannot convert {from_unit!r} ({dim_a}) to {to_unit!r} ({dim_b})")
    return value * (fa / fb)


def ev(x):
    """eV -> hartree."""
    return x / HARTREE_EV


def to_ev(x):
    return x * HARTREE_EV


def um(x):
    """Micrometres -> bohr."""
    return x * (1e-6 / BOHR_M)


def to_um(x):
    return x * (BOHR_M / 1e-6)


def to_ms(t):
    """Atomic time -> milliseconds."""
    return t * (AU_TIME_S / 1e-3)


def angular_mhz(f_mhz: float) -> float:
    """Trap frequency ``f`` in MHz -> angular frequency ``2*pi*f`` in atomic units."""
    return 2.0 * math.pi * f_mhz * 1e6 * AU_TIME_S
