"""Impact-parameter distributions and the averages taken over them.

Two scenarios: a single trapped coolant ion (SA), where the impact parameter
follows a Rayleigh law of width ``sigma(E)``, and an extended simple-cubic
Coulomb crystal (CC), where it is flat in area up to ``b_max = d/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kinematics
from .numerics import RELATIVE_QUAD, QuadratureSpec, integrate
from .species import SpeciesPair

# dE/Q below which the large-crystal field average is no longer trusted
FIELD_APPROX_MIN_DE = 10.0
SIGMA_TILDE_FACTOR = 6.0 / 7.0
SIGMA_TILDE_CUTOFF = 0.01


@dataclass(frozen=True)
class CoolingScenario:
    """Either ``kind="CC"`` with lattice spacing ``d`` or ``kind="SA"`` with trap frequency ``omega``.

    ``d`` is in bohr and ``omega`` is angular, in atomic units. ``b_max``
    overrides the crystal cutoff ``d/2`` and ``mean_free_path`` the distance
    travelled between collisions (``d`` by default).
    """

    kind: str
    d: float | None = None
    omega: float | None = None
    b_max_override: float | None = None
    mean_free_path: float | None = None

    def __post_init__(self):
        if self.kind == "CC":
            if self.d is None or not self.d > 0:
                raise ValueError("crystal scenario needs a positive lattice spacing d")
        elif self.kind == "SA":
            if self.omega is None or not self.omega > 0:
                raise ValueError("single-atom scenario needs a positive trap frequency omega")
        else:
            raise ValueError(f"scenario kind must be 'SA' or 'CC', got {self.kind!r}")

    @classmethod
    def crystal(cls, d: float, **kw) -> "CoolingScenario":
        return cls("CC", d=d, **kw)

    @classmethod
    def single_atom(cls, omega: float) -> "CoolingScenario":
        return cls("SA", omega=omega)

    @property
    def b_max(self) -> float:
        return self.b_max_override if self.b_max_override is not None else 0.5 * self.d

    @property
    def mfp(self) -> float:
        return self.mean_free_path if self.mean_free_path is not None else self.d


def sigma(E, mu, omega):
    """Effective trap length ``sqrt(E / (mu omega^2))`` at energy ``E``."""
    return np.sqrt(np.asarray(E) / mu) / omega


def pdf(scenario: CoolingScenario, b, E=None, mu=None):
    """Impact-parameter density. The SA case needs ``E`` and ``mu`` to fix ``sigma``."""
    b = np.asarray(b, dtype=float)
    if scenario.kind == "CC":
        bm = scenario.b_max
        return np.where((b >= 0) & (b <= bm), 2.0 * b / bm**2, 0.0)
    if E is None or mu is None:
        raise ValueError("the single-atom density needs E and mu")
    s = sigma(E, mu, scenario.omega)
    return np.where(b >= 0, b / s**2 * np.exp(-0.5 * (b / s) ** 2), 0.0)


def mean_energy_loss_cc(E, pair: SpeciesPair, d, lab: bool = False):
    """Crystal-averaged energy loss per collision, flat ``b`` up to ``d/2``.

    Returned in the CM frame, or multiplied by ``1 + xi`` when ``lab`` is set.
    """
    E = np.asarray(E, dtype=float)
    q = pair.q_prod
    xi = pair.xi
    out = 4.0 * xi * q * q * np.log1p((d * E / q) ** 2) / ((1.0 + xi) ** 2 * d * d * E)
    return out * (1.0 + xi) if lab else out


def mean_energy_loss_sa_bound(E, pair: SpeciesPair, sig):
    """Upper bound on the single-atom mean energy loss (valid when ``sigma`` is large)."""
    E = np.asarray(E, dtype=float)
    q = pair.q_prod
    xi = pair.xi
    return xi * q * q * np.log1p((2.0 * sig * E / q) ** 2) / ((1.0 + xi) ** 2 * sig * sig * E)


def mean_energy_loss_sa(E: float, pair: SpeciesPair, sig: float, spec: QuadratureSpec = RELATIVE_QUAD) -> float:
    """Single-atom mean energy loss by direct quadrature over the Rayleigh law."""
    def integrand(b):
        return kinematics.energy_transfer(E, b, pair) * b / sig**2 * np.exp(-0.5 * (b / sig) ** 2)

    # the Lorentzian factor lives on the scale q/(2E); split there so the
    # adaptive rule sees both scales
    knee = min(pair.q_prod / (2.0 * E), sig)
    return integrate(integrand, 0.0, knee, spec) + integrate(integrand, knee, math.inf, spec)


def mean_energy_loss_quadrature(E: float, pair: SpeciesPair, d: float, spec: QuadratureSpec = RELATIVE_QUAD) -> float:
    """Crystal mean energy loss by quadrature; an independent route to the closed form."""
    h = 0.5 * d

    def integrand(b):
        return kinematics.energy_transfer(E, b, pair) * 8.0 * b / d**2

    knee = min(pair.q_prod / (2.0 * E), h)
    return integrate(integrand, 0.0, knee, spec) + integrate(integrand, knee, h, spec)


@dataclass(frozen=True)
class FieldAverage:
    exact: float
    approx: float
    approx_valid: bool

    @property
    def rel_deviation(self) -> float:
        return (self.approx - self.exact) / self.exact


_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def _inverse_sixth_moment(r: float, h: float) -> float:
    """``int_0^h b db / (r + sqrt(r^2 + b^2))**6``.

    With ``u = r + sqrt(r^2 + b^2)`` this is ``int_{2r}^{U} (u - r) u^-6 du``.
    The antiderivative cancels badly when ``U`` is close to ``2r``, so that
    short interval is done with a fixed Gauss-Legendre rule instead.
    """
    delta = h * h / (r + math.sqrt(r * r + h * h))  # U - 2r without cancellation
    if delta < r:
        u = 2.0 * r + 0.5 * delta * (_GL_X + 1.0)
        return 0.5 * delta * float(_GL_W @ ((u - r) / u**6))
    U = 2.0 * r + delta
    return 3.0 / (320.0 * r**4) - 1.0 / (4.0 * U**4) + r / (5.0 * U**5)


def mean_peak_field_cubed_cc(E: float, d: float, q_at: float = 1.0, q_prod: float | None = None) -> FieldAverage:
    """Crystal average of the cubed peak field, exact and large-crystal forms.

    The approximation keeps only the ``3/(320 r^4)`` term; it is flagged
    invalid when ``d E / q_prod < 10``.
    """
    if q_prod is None:
        q_prod = q_at
    r = q_prod / (2.0 * E)
    h = 0.5 * d
    scale = 8.0 / (d * d) * q_at**3
    exact = scale * _inverse_sixth_moment(r, h)
    approx = scale * 3.0 / (320.0 * r**4)
    return FieldAverage(exact, approx, d * E / q_prod >= FIELD_APPROX_MIN_DE)


def sigma_tilde(E_max: float, E_min: float, mu: float, omega: float, q_prod: float = 1.0,
                spec: QuadratureSpec = RELATIVE_QUAD) -> float:
    """Collision-weighted mean trap length over a single-atom cooling cycle.

    For ``E_min/E_max < 0.01`` this is ``6/7 sigma(E_max)``; otherwise the two
    weighted integrals are done by quadrature, keeping the logarithm.
    """
    if not E_max >= E_min >= 0:
        raise ValueError("need E_max >= E_min >= 0")
    s_max = float(sigma(E_max, mu, omega))
    if E_min == E_max:
        return s_max
    if E_min / E_max < SIGMA_TILDE_CUTOFF:
        return SIGMA_TILDE_FACTOR * s_max

    # collision density per unit energy, up to E-independent factors
    def weight(E):
        s = sigma(E, mu, omega)
        return s * s * E / np.log1p((2.0 * s * E / q_prod) ** 2)

    num = integrate(lambda E: sigma(E, mu, omega) * weight(E), E_min, E_max, spec)
    den = integrate(weight, E_min, E_max, spec)
    return num / den
