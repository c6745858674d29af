"""Analytic model of sympathetic cooling of molecular ions by atomic ions.

Translational cooling times for a single trapped coolant ion or a Coulomb
crystal, the rotational excitation accumulated on the way down, and a Monte
Carlo collision cascade to cross-check the averages.
"""

__version__ = "0.1.0"
