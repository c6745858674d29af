"""Rotational excitation accumulated over a crystal cooling cycle.

Apolar molecules couple to the coolant's field through their quadrupole
moment; first-order perturbation theory gives a per-collision excitation
proportional to the cubed peak field, suppressed by an adiabaticity factor
in ``B sqrt(mu/E^3)``. Polar molecules with a small dipole are treated in a
two-level adiabatic model; for large dipoles (high-field regime) no closed
estimate exists and results are marked unreliable.

Summing ``n(E_i) * eps~(E_i)`` over the cooling grid gives the accumulated
excitation ``phi``. De-excitation is neglected, which is only sound while
``phi`` and every ``eps~`` stay well below one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import ensemble, kinematics
from .cascade import DEFAULT_INTERVALS, build_grid, step_grid
from .numerics import RELATIVE_QUAD, BracketError, RootSpec, find_root, integrate
from .species import SpeciesPair
from .units import ev

KAPPA = 1.86
# coefficient c in (c * Q_Z)**2; with c = 3 the cycle integral has the
# prefactor 3 kappa^2 (1+xi)^2 mu Q_Z^2 / (200 xi)
QUADRUPOLE_COUPLING = 3.0
EPS_WARN = 0.1
# dipole coupling at closest approach over B; above this the two-level
# low-field model is not trusted
LOW_FIELD_LIMIT = 20.0
DEFAULT_POLAR_STEP = ev(0.05)


class PolarityError(TypeError):
    """Operation called for a molecule of the wrong polarity."""


def _require(pair: SpeciesPair, polarity: str):
    if pair.mol.polarity != polarity:
        raise PolarityError(f"{pair.mol.name} is {pair.mol.polarity}, expected {polarity}")


def adiabatic_factor(E, pair: SpeciesPair):
    """``(1 + x) exp(-x)`` with ``x = 6 kappa B sqrt(mu/E^3)``."""
    E = np.asarray(E, dtype=float)
    x = 6.0 * KAPPA * pair.mol.B * np.sqrt(pair.mu / E**3)
    return (1.0 + x) * np.exp(-x)


def _apolar_field_coefficient(E, pair: SpeciesPair):
    """Excitation per unit cubed peak field at energy ``E``."""
    E = np.asarray(E, dtype=float)
    qz = QUADRUPOLE_COUPLING * pair.mol.QZ
    return KAPPA**2 * qz * qz * pair.mu / (180.0 * E**3) * adiabatic_factor(E, pair)


def apolar_single_collision(E, b, pair: SpeciesPair):
    """Excitation probability of one collision at ``(E, b)``.

    Proportional to the cubed peak field; its crystal average is
    :func:`apolar_mean_excitation` by construction.
    """
    _require(pair, "apolar")
    return _apolar_field_coefficient(E, pair) * kinematics.peak_field_cubed(E, b, pair.q_at, pair.q_prod)


def apolar_mean_excitation(E, pair: SpeciesPair, d: float, field_average: str = "auto"):
    """Crystal-averaged single-collision excitation ``eps~(E)``.

    ``field_average`` picks the cubed-field average: ``"approx"`` is the
    large-crystal form ``6 E^4 / (5 d^2)``, ``"exact"`` the full one, and
    ``"auto"`` switches to exact where the approximation is flagged invalid.
    """
    _require(pair, "apolar")
    if field_average not in ("auto", "approx", "exact"):
        raise ValueError(f"field_average must be auto, approx or exact, got {field_average!r}")
    E_arr = np.atleast_1d(np.asarray(E, dtype=float))
    r = pair.q_prod / (2.0 * E_arr)
    avg = 8.0 / (d * d) * pair.q_at**3 * 3.0 / (320.0 * r**4)
    if field_average != "approx":
        need = np.ones(E_arr.shape, bool) if field_average == "exact" else d * E_arr / pair.q_prod < ensemble.FIELD_APPROX_MIN_DE
        for k in np.flatnonzero(need):
            avg[k] = ensemble.mean_peak_field_cubed_cc(float(E_arr[k]), d, pair.q_at, pair.q_prod).exact
    out = _apolar_field_coefficient(E_arr, pair) * avg
    return out if np.ndim(E) else float(out[0])


@dataclass(frozen=True)
class ExcitationResult:
    """Accumulated excitation over a cooling cycle.

    ``eps`` and ``contributions`` are per-interval, evaluated at the interval
    tops ``energies``. ``phi`` is the total for ``method``; for polar
    molecules ``phi_lo``/``phi_hi`` bracket it by evaluating ``eps~`` at the
    bottom/top of each interval.
    """

    pair: SpeciesPair
    energies: np.ndarray
    widths: np.ndarray
    eps: np.ndarray
    collisions: np.ndarray
    phi: float
    method: str
    phi_lo: float | None = None
    phi_hi: float | None = None
    low_field: np.ndarray | None = None
    warnings: tuple[str, ...] = field(default=())

    @property
    def contributions(self) -> np.ndarray:
        return self.collisions * self.eps

    @property
    def eps_warning(self) -> bool:
        return bool(np.any(self.eps > EPS_WARN))

    @property
    def reliable(self) -> bool:
        low_ok = self.low_field is None or bool(np.all(self.low_field))
        return low_ok and not self.eps_warning


def _crystal_collisions(E, widths, pair, d):
    return widths / ensemble.mean_energy_loss_cc(E, pair, d)


def apolar_cycle_excitation(E_init: float, E_final: float, pair: SpeciesPair, d: float,
                            method: str = "integral", N: int = DEFAULT_INTERVALS,
                            rule: str = "geometric") -> ExcitationResult:
    """Accumulated apolar excitation cooling from ``E_init`` to ``E_final`` (CM hartree).

    ``method="integral"`` integrates ``eps~(E) / <dE>(E)`` with the
    large-crystal field average; ``method="sum"`` is the grid sum
    ``sum n(E_i) eps~(E_i)``.
    """
    _require(pair, "apolar")
    if method not in ("integral", "sum"):
        raise ValueError(f"method must be 'integral' or 'sum', got {method!r}")
    if E_init == E_final:
        empty = np.empty(0)
        return ExcitationResult(pair, empty, empty, empty, empty, 0.0, method)
    grid = build_grid(E_init, E_final, N, rule)
    E = grid.upper
    eps = apolar_mean_excitation(E, pair, d)
    n = _crystal_collisions(E, grid.widths, pair, d)
    if method == "sum":
        phi = math.fsum(n * eps)
    else:
        def integrand(e):
            return apolar_mean_excitation(e, pair, d, "approx") / ensemble.mean_energy_loss_cc(e, pair, d)

        phi = integrate(integrand, E_final, E_init, RELATIVE_QUAD)
    warnings = ("single-collision excitation above 0.1",) if np.any(eps > EPS_WARN) else ()
    return ExcitationResult(pair, E, grid.widths, eps, n, phi, method, warnings=warnings)


@dataclass(frozen=True)
class PolarExcitation:
    value: float
    field_ratio: float

    @property
    def low_field(self) -> bool:
        return self.field_ratio <= LOW_FIELD_LIMIT

    @property
    def estimate(self) -> float:
        """``value`` in the low-field regime, NaN otherwise."""
        return self.value if self.low_field else math.nan


def polar_field_ratio(E: float, pair: SpeciesPair) -> float:
    """Dipole coupling at the head-on closest approach, in units of ``B``."""
    r = kinematics.closest_approach(E, 0.0, pair.q_prod)
    return pair.mol.D * pair.q_at / (r * r) / pair.mol.B


def polar_mean_excitation(E: float, pair: SpeciesPair, b_max: float) -> PolarExcitation:
    """Two-level adiabatic estimate of ``eps~(E)`` for a polar molecule.

    Averages over a flat-in-area impact parameter up to ``b_max``. The value
    is always computed; check ``low_field`` before trusting it.
    """
    _require(pair, "polar")
    D, B, mu = pair.mol.D, pair.mol.B, pair.mu
    q_at, q = pair.q_at, pair.q_prod
    s = D * D / (3.0 * B * B)
    expo = 2.0 * KAPPA * B * math.sqrt(mu / E**3)

    def integrand(b):
        r = kinematics.closest_approach(E, b, q)
        f2 = (q_at / (r * r)) ** 2  # squared field
        g = s * f2
        return np.exp(-expo * np.sqrt(1.0 + g)) * f2 / (1.0 + g) * b

    r0 = q / (2.0 * E)
    knots = [0.0] + [k for k in (r0, 10 * r0, 100 * r0, 1000 * r0) if k < b_max] + [b_max]
    total = math.fsum(integrate(integrand, a, c, RELATIVE_QUAD) for a, c in zip(knots[:-1], knots[1:]))
    value = (KAPPA * math.pi * D) ** 2 * mu / (6.0 * E**3 * b_max**2) * total
    return PolarExcitation(value, polar_field_ratio(E, pair))


ESTIMATORS = ("mean", "upper", "lower")


def polar_cycle_excitation(E_init: float, E_final: float, pair: SpeciesPair, d: float,
                           step: float = DEFAULT_POLAR_STEP, estimator: str = "mean",
                           b_max: float | None = None) -> ExcitationResult:
    """Accumulated polar excitation on fixed energy steps down from ``E_init``.

    ``n`` is taken at each interval top; ``eps~`` at the top (``upper``),
    bottom (``lower``) or as the mean of both (``mean``, reported as ``phi``).
    """
    _require(pair, "polar")
    if estimator not in ESTIMATORS:
        raise ValueError(f"estimator must be one of {ESTIMATORS}")
    if E_init == E_final:
        empty = np.empty(0)
        return ExcitationResult(pair, empty, empty, empty, empty, 0.0, estimator, 0.0, 0.0, np.ones(0, bool))
    if b_max is None:
        b_max = 0.5 * d
    grid = step_grid(E_init, E_final, step)
    ests = [polar_mean_excitation(float(e), pair, b_max) for e in grid.edges]
    vals = np.array([p.value for p in ests])
    low = np.array([p.low_field for p in ests])
    hi, lo = vals[:-1], vals[1:]
    n = _crystal_collisions(grid.upper, grid.widths, pair, d)
    phi_hi = math.fsum(n * hi)
    phi_lo = math.fsum(n * lo)
    eps = {"upper": hi, "lower": lo, "mean": 0.5 * (hi + lo)}[estimator]
    interval_low = low[:-1] & low[1:]
    warnings = []
    if not np.all(interval_low):
        warnings.append("high-field regime: estimate unreliable")
    if np.any(eps > EPS_WARN):
        warnings.append("single-collision excitation above 0.1")
    return ExcitationResult(pair, grid.upper, grid.widths, eps, n, math.fsum(n * eps), estimator,
                            phi_lo, phi_hi, interval_low, tuple(warnings))


def cycle_excitation(E_init: float, E_final: float, pair: SpeciesPair, d: float, **kw) -> ExcitationResult:
    """Dispatch on the molecule's polarity."""
    if pair.mol.polarity == "apolar":
        return apolar_cycle_excitation(E_init, E_final, pair, d, **kw)
    if pair.mol.polarity == "polar":
        return polar_cycle_excitation(E_init, E_final, pair, d, **kw)
    raise PolarityError(f"{pair.mol.name} is not a molecule")


@dataclass(frozen=True)
class BudgetCrossing:
    E_cm: float
    E_lab: float
    phi: float


def excitation_budget_inverse(pair: SpeciesPair, d: float, E_final: float, budget: float,
                              E_hi: float = ev(20.0), tol: float = 1e-7, **kw) -> BudgetCrossing:
    """Initial CM energy at which the accumulated excitation reaches ``budget``.

    Searches ``[E_final, E_hi]``. Extra keywords go to the cycle function.

    Raises:
        ValueError: if the excitation is not increasing in ``E_init`` on a
            coarse scan of the bracket.
        BracketError: if ``budget`` is not reached below ``E_hi``.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    if budget == 0:
        return BudgetCrossing(E_final, float(kinematics.cm_to_lab(E_final, pair)), 0.0)

    def phi(E):
        return cycle_excitation(E, E_final, pair, d, **kw).phi if E > E_final else 0.0

    scan_E = np.geomspace(E_final * 1.05, E_hi, 7)
    scan = [phi(float(e)) for e in scan_E]
    if np.any(np.diff(scan) < 0):
        raise ValueError("accumulated excitation is not monotone in the initial energy on the bracket")
    if scan[-1] < budget:
        raise BracketError(E_final, E_hi, 0.0 - budget, scan[-1] - budget)
    k = int(np.searchsorted(scan, budget))
    lo = E_final if k == 0 else float(scan_E[k - 1])
    hi = float(scan_E[k])
    E_star = find_root(lambda E: phi(E) - budget, RootSpec((lo, hi), tol=tol * hi))
    return BudgetCrossing(E_star, float(kinematics.cm_to_lab(E_star, pair)), phi(E_star))
