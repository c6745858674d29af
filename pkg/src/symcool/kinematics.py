"""Two-body Coulomb collision: deflection, energy transfer, frames, peak field.

All energies are in hartree and lengths in bohr. Functions broadcast over
numpy arrays. The trap potential is ignored for the duration of a collision.
"""

from __future__ import annotations

import numpy as np

from .species import SpeciesPair


def scattering_angle(E, b, q_prod=1.0):
    """CM deflection angle in radians, ``pi`` for a head-on collision."""
    x = 2.0 * np.asarray(E) * np.asarray(b) / q_prod
    return 2.0 * np.arcsin(1.0 / np.sqrt(1.0 + x * x))


def transfer_fraction(E, b, xi, q_prod=1.0):
    """``dE/E`` for one collision, written without the angle.

    Uses ``1 - cos(theta) = 2/(1 + x**2)`` with ``x = 2 E b / q_prod``, which
    avoids the cancellation in ``1 - cos`` at grazing impact parameters.
    """
    x = 2.0 * np.asarray(E) * np.asarray(b) / q_prod
    return 4.0 * xi / (1.0 + xi) ** 2 / (1.0 + x * x)


def energy_transfer_lab(E_lab, theta, xi):
    """Lab-frame energy handed to a coolant at rest for deflection ``theta``."""
    return 2.0 * xi * (1.0 - np.cos(theta)) / (1.0 + xi) ** 2 * np.asarray(E_lab)


def energy_transfer(E, b, pair: SpeciesPair):
    """CM-frame energy lost by the molecule in one collision at ``(E, b)``."""
    return np.asarray(E) * transfer_fraction(E, b, pair.xi, pair.q_prod)


def cm_to_lab(E, pair: SpeciesPair):
    return np.asarray(E) * (1.0 + pair.xi)


def lab_to_cm(E_lab, pair: SpeciesPair):
    return np.asarray(E_lab) / (1.0 + pair.xi)


def closest_approach(E, b, q_prod=1.0):
    """Distance of closest approach on a repulsive Coulomb orbit."""
    r0 = q_prod / (2.0 * np.asarray(E))
    return r0 + np.sqrt(r0 * r0 + np.asarray(b) ** 2)


def peak_field_cubed(E, b, q_at=1.0, q_prod=None):
    """Cube of the coolant's field at closest approach, ``q_at**3 / r_min**6``.

    ``q_prod`` defaults to ``q_at`` (singly charged molecule).
    """
    if q_prod is None:
        q_prod = q_at
    r = closest_approach(E, b, q_prod)
    f = q_at / (r * r)
    return f * f * f
