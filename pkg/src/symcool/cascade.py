"""Discretised cooling cycle: collision counts and cooling times.

The energy range ``[E_min, E_max]`` is cut into intervals; on interval ``i``
the molecule needs ``n_i = dE_i / <dE>(E_i)`` collisions, each taking
``tau(E_i)``. Summing gives the collision number and cooling time; letting
the intervals shrink gives the integral form.

Core functions take CM energies in hartree. How user energies map onto those
is a convention (see :func:`resolve_energy`):

``strict``
    lab energies are converted to CM with ``E = E_lab / (1 + xi)``.
``lab-as-paper``
    lab energies are inserted unchanged where a CM energy is expected. The
    quoted 2 ms crystal example comes out this way.
``table1``
    as ``lab-as-paper``, plus the crystal cutoff is ``b_max`` (so ``d = 2
    b_max`` in the averages), the mean transfer is reported in the lab frame
    and the mean free time is ``b_max / v_lab`` (see :func:`table1_row`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ensemble
from .ensemble import CoolingScenario
from .numerics import RELATIVE_QUAD, integrate
from .species import SpeciesPair
from .units import ev

CONVENTIONS = ("strict", "table1", "lab-as-paper")
DEFAULT_INTERVALS = 512


def resolve_energy(value_ev: float, frame: str, pair: SpeciesPair, convention: str = "strict") -> float:
    """User energy in eV with a frame tag -> the energy (hartree) fed to the core."""
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    if frame not in ("cm", "lab"):
        raise ValueError(f"frame must be 'cm' or 'lab', got {frame!r}")
    E = ev(value_ev)
    if frame == "lab" and convention == "strict":
        return E / (1.0 + pair.xi)
    return E


@dataclass(frozen=True)
class EnergyGrid:
    """Descending interval edges ``E_0 > E_1 > ... > E_N``."""

    edges: np.ndarray
    rule: str

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if e.ndim != 1 or e.size < 2:
            raise ValueError("a grid needs at least two edges")
        if not (np.all(np.diff(e) < 0) and e[-1] > 0):
            raise ValueError("grid edges must be strictly descending and positive")
        object.__setattr__(self, "edges", e)

    @property
    def N(self) -> int:
        return self.edges.size - 1

    @property
    def upper(self) -> np.ndarray:
        """``E_i`` for ``i = 0..N-1``, the energy each interval is evaluated at."""
        return self.edges[:-1]

    @property
    def lower(self) -> np.ndarray:
        return self.edges[1:]

    @property
    def widths(self) -> np.ndarray:
        return self.edges[:-1] - self.edges[1:]


def build_grid(E_max: float, E_min: float, N: int = DEFAULT_INTERVALS, rule: str = "geometric") -> EnergyGrid:
    if not (E_max > E_min > 0):
        raise ValueError(f"need E_max > E_min > 0, got E_max={E_max!r}, E_min={E_min!r}")
    if N < 1:
        raise ValueError("need at least one interval")
    if rule == "uniform":
        edges = np.linspace(E_max, E_min, N + 1)
    elif rule == "geometric":
        edges = np.geomspace(E_max, E_min, N + 1)
    else:
        raise ValueError(f"unknown grid rule {rule!r}")
    edges[0], edges[-1] = E_max, E_min
    return EnergyGrid(edges, rule)


def step_grid(E_max: float, E_min: float, step: float) -> EnergyGrid:
    """Fixed steps down from ``E_max``; the last interval takes the remainder.

    A remainder shorter than ``1e-9 step`` is merged into the previous interval.
    """
    if not (E_max > E_min > 0 and step > 0):
        raise ValueError("need E_max > E_min > 0 and step > 0")
    n_full = int(math.floor((E_max - E_min) / step * (1 + 1e-12)))
    edges = E_max - step * np.arange(n_full + 1)
    if E_max - E_min - n_full * step > 1e-9 * step:
        edges = np.append(edges, E_min)
    else:
        edges[-1] = E_min
    return EnergyGrid(edges, "step")


def mean_energy_loss(E, pair: SpeciesPair, scenario: CoolingScenario):
    """Per-collision energy loss used by the cascade (the bound in the SA case)."""
    if scenario.kind == "CC":
        return ensemble.mean_energy_loss_cc(E, pair, 2.0 * scenario.b_max)
    s = ensemble.sigma(E, pair.mu, scenario.omega)
    return ensemble.mean_energy_loss_sa_bound(E, pair, s)


def collisions_per_interval(grid: EnergyGrid, pair: SpeciesPair, scenario: CoolingScenario) -> np.ndarray:
    """``n(E_i)``; in the SA case a lower bound because the loss is an upper bound."""
    return grid.widths / mean_energy_loss(grid.upper, pair, scenario)


def intercollision_time(E, pair: SpeciesPair, scenario: CoolingScenario):
    """Mean time between collisions: crystal transit ``mfp/v``, or half a trap period."""
    if scenario.kind == "CC":
        return scenario.mfp * np.sqrt(pair.mu / (2.0 * np.asarray(E, dtype=float)))
    return np.full_like(np.asarray(E, dtype=float), math.pi / scenario.omega)


@dataclass(frozen=True)
class CascadeResult:
    """Per-interval cooling records plus totals.

    ``time`` is the total for the requested ``mode``; ``time_sum`` is always
    the grid sum ``sum(n_i tau_i)`` so the two can be compared.
    """

    pair: SpeciesPair
    scenario: CoolingScenario
    grid: EnergyGrid
    mean_loss: np.ndarray
    collisions: np.ndarray
    tau: np.ndarray
    time: float
    mode: str
    lower_bound: bool
    convention: str = "strict"

    @property
    def energies(self) -> np.ndarray:
        return self.grid.upper

    @property
    def interval_times(self) -> np.ndarray:
        return self.collisions * self.tau

    @property
    def n_collisions(self) -> float:
        return float(math.fsum(self.collisions))

    @property
    def time_sum(self) -> float:
        return float(math.fsum(self.interval_times))

    @property
    def energy_removed(self) -> float:
        return float(math.fsum(self.collisions * self.mean_loss))


def cascade(grid: EnergyGrid, pair: SpeciesPair, scenario: CoolingScenario, convention: str = "strict") -> CascadeResult:
    """Grid-sum cascade on an explicit grid."""
    loss = mean_energy_loss(grid.upper, pair, scenario)
    n = grid.widths / loss
    tau = intercollision_time(grid.upper, pair, scenario)
    return CascadeResult(pair, scenario, grid, loss, n, tau, float(math.fsum(n * tau)), "sum",
                         scenario.kind == "SA", convention)


def _cc_time_integral(E_max, E_min, pair, scenario):
    q = pair.q_prod
    d = 2.0 * scenario.b_max
    pre = (1 + pair.xi) ** 2 * d * d * scenario.mfp * math.sqrt(pair.mu / 2.0) / (4.0 * pair.xi * q * q)
    val = integrate(lambda E: np.sqrt(E) / np.log1p((d * E / q) ** 2), E_min, E_max, RELATIVE_QUAD)
    return pre * val


def _sa_time_integral(E_max, E_min, pair, scenario):
    q = pair.q_prod
    st = ensemble.sigma_tilde(E_max, E_min, pair.mu, scenario.omega, q)
    pre = math.pi * math.sqrt(pair.mu) * st**3 * (1 + pair.xi) ** 2 / (pair.xi * q * q)
    val = integrate(lambda E: np.sqrt(E) / np.log1p((2.0 * st * E / q) ** 2), E_min, E_max, RELATIVE_QUAD)
    return pre * val


def total_cooling_time(E_max: float, E_min: float, pair: SpeciesPair, scenario: CoolingScenario,
                       mode: str = "sum", N: int = DEFAULT_INTERVALS, rule: str = "geometric",
                       convention: str = "strict") -> CascadeResult:
    """Total cooling time from ``E_max`` down to ``E_min`` (CM hartree).

    ``mode="sum"`` sums over the grid, with ``sigma`` re-evaluated per interval
    in the SA case. ``mode="integral"`` uses the continuum limit; for SA this
    holds ``sigma`` at its cycle average from :func:`ensemble.sigma_tilde`.
    SA results are lower bounds in either mode.
    """
    if mode not in ("sum", "integral"):
        raise ValueError(f"mode must be 'sum' or 'integral', got {mode!r}")
    res = cascade(build_grid(E_max, E_min, N, rule), pair, scenario, convention)
    if mode == "sum":
        return res
    if scenario.kind == "CC":
        T = _cc_time_integral(E_max, E_min, pair, scenario)
    else:
        T = _sa_time_integral(E_max, E_min, pair, scenario)
    return CascadeResult(pair, scenario, res.grid, res.mean_loss, res.collisions, res.tau, T,
                         "integral", res.lower_bound, convention)


@dataclass(frozen=True)
class TimeRatio:
    crude: float
    full: float
    T_sa: float
    T_cc: float
    sigma_tilde: float


def scenario_time_ratio(pair: SpeciesPair, E_max: float, E_min: float, omega: float, d: float) -> TimeRatio:
    """Single-atom over crystal cooling time: crude ``(sigma~/d)^3`` and full."""
    st = ensemble.sigma_tilde(E_max, E_min, pair.mu, omega, pair.q_prod)
    T_sa = total_cooling_time(E_max, E_min, pair, CoolingScenario.single_atom(omega), mode="integral").time
    T_cc = total_cooling_time(E_max, E_min, pair, CoolingScenario.crystal(d), mode="integral").time
    return TimeRatio((st / d) ** 3, T_sa / T_cc, T_sa, T_cc, st)


@dataclass(frozen=True)
class Table1Row:
    mean_loss_lab: float
    n_collisions: float
    tau: float
    time: float

    @property
    def collision_frequency(self) -> float:
        return 1.0 / self.tau


def table1_row(pair: SpeciesPair, E_lab: float, b_max: float, E_lab_min: float = 0.0) -> Table1Row:
    """One-interval crystal estimate under the ``table1`` convention.

    The lab energy is inserted as the scattering energy with the cutoff
    ``b_max`` (``d = 2 b_max``); the mean transfer is converted to the lab
    frame, ``n = (E_lab - E_lab_min) / <dE_lab>`` and ``tau = b_max / v_lab``.
    """
    loss = float(ensemble.mean_energy_loss_cc(E_lab, pair, 2.0 * b_max, lab=True))
    n = (E_lab - E_lab_min) / loss
    tau = b_max * math.sqrt(pair.m_mol / (2.0 * E_lab))
    return Table1Row(loss, n, tau, n * tau)
