"""Reference checks against published numbers, shared by the CLI and the tests.

Each check recomputes a quantity from the species registry and compares it
with the published target. ``run_checks`` returns them all; a single failure
makes ``symcool validate`` exit with status 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from . import cascade, ensemble, rotation
from .ensemble import CoolingScenario
from .numerics import Sampler
from .species import SpeciesRegistry, make_pair
from .units import angular_mhz, ev, to_ev, to_ms, to_um, um

CRYSTAL_D = um(5.29)
TABLE1_B_MAX = um(17.5)
TABLE1_E_LAB = ev(0.4)
# charge of the coolant -> (<dE_lab> eV, n_coll, T ms)
TABLE1 = {
    10: (1.15e-5, 3.47e4, 0.353),
    20: (4.80e-5, 8.34e3, 8.48e-2),
    30: (1.14e-4, 3.50e3, 3.56e-2),
    40: (2.11e-4, 1.89e3, 1.93e-2),
}
# molecule, coolant, lab crossing energy (eV)
APOLAR_CROSSINGS = (("N2+", "Ca+", 2.6), ("H2+", "Be+", 4.9), ("I2+", "Ca+", 2.8))
EXCITATION_BUDGET = 0.05
EXCITATION_E_FINAL = ev(0.1)


@dataclass(frozen=True)
class Check:
    name: str
    target: str
    computed: float
    tolerance: str
    passed: bool

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return f"{self.verdict}  {self.name}: computed {self.computed:.4g}, target {self.target} ({self.tolerance})"


def _within(value, target, rel):
    return abs(value - target) <= rel * abs(target)


def check_sigma(reg: SpeciesRegistry) -> list[Check]:
    pair = reg.pair("MgH+", "Mg+")
    s = to_um(float(ensemble.sigma(ev(2.0), pair.mu, angular_mhz(1.0))))
    return [Check("sigma MgH+/Mg+ 2 eV, 1 MHz [um]", "635", s, "1.5%", _within(s, 635.0, 0.015))]


def check_table1(reg: SpeciesRegistry, b_max: float = TABLE1_B_MAX) -> list[Check]:
    mol = reg["MgH+"]
    out = []
    for charge, (loss_t, n_t, T_t) in TABLE1.items():
        pair = make_pair(mol, reg["Mg+"].with_charge(charge))
        row = cascade.table1_row(pair, TABLE1_E_LAB, b_max)
        for label, got, want in (("<dE_lab> [eV]", to_ev(row.mean_loss_lab), loss_t),
                                 ("n_coll", row.n_collisions, n_t),
                                 ("T_CC [ms]", to_ms(row.time), T_t)):
            out.append(Check(f"table1 Mg{charge}+ {label}", f"{want:.3g}", got, "10%", _within(got, want, 0.10)))
    return out


def check_crystal_time(reg: SpeciesRegistry) -> list[Check]:
    pair = reg.pair("MgH+", "Mg+")
    sc = CoolingScenario.crystal(CRYSTAL_D)
    out = []
    for conv, tol in (("lab-as-paper", 1.5), ("strict", 3.0)):
        E_hi = cascade.resolve_energy(2.0, "lab", pair, conv)
        E_lo = cascade.resolve_energy(0.01, "lab", pair, conv)
        T = to_ms(cascade.total_cooling_time(E_hi, E_lo, pair, sc, mode="integral").time)
        out.append(Check(f"crystal cooling time MgH+ 2 -> 0.01 eV, {conv} [ms]", "2", T,
                         f"factor {tol:g}", 2.0 / tol <= T <= 2.0 * tol))
    return out


def check_scenario_ratio(reg: SpeciesRegistry) -> list[Check]:
    pair = reg.pair("MgH+", "Mg+")
    r = cascade.scenario_time_ratio(pair, ev(2.0), ev(0.01), angular_mhz(1.0), um(10.0))
    return [Check("T_SA/T_CC MgH+/Mg+ 2 eV, d = 10 um", "> 1e6", r.full, "lower bound", r.full > 1e6)]


def check_sigma_tilde(reg: SpeciesRegistry) -> list[Check]:
    pair = reg.pair("MgH+", "Mg+")
    om = angular_mhz(1.0)
    E = ev(2.0)
    s = float(ensemble.sigma(E, pair.mu, om))
    limit = ensemble.sigma_tilde(E, 0.0, pair.mu, om, pair.q_prod) / s
    quad = ensemble.sigma_tilde(E, 0.1 * E, pair.mu, om, pair.q_prod) / s
    return [Check("sigma~/sigma(E_max), E_min -> 0", "6/7", limit, "exact", limit == 6.0 / 7.0),
            Check("sigma~/sigma(E_max), E_min = 0.1 E_max", "6/7", quad, "3%", _within(quad, 6.0 / 7.0, 0.03))]


def check_field_average(reg: SpeciesRegistry, n: int = 20, seed: int = 7) -> list[Check]:
    rng = Sampler(seed)
    worst = 0.0
    for u1, u2 in zip(rng.uniform(n), rng.uniform(n)):
        E = ev(0.01) * 10 ** (3 * u1)
        d = 1e3 / E * 10 ** (2 * u2)  # dE/Q from 1e3 to 1e5
        fa = ensemble.mean_peak_field_cubed_cc(E, d)
        worst = max(worst, abs(fa.rel_deviation))
    return [Check("large-crystal <eps0^3> vs exact, dE/Q >= 1e3", "0", worst, "0.1%", worst <= 1e-3)]


def check_crossings(reg: SpeciesRegistry) -> list[Check]:
    out = []
    for mol, at, target in APOLAR_CROSSINGS:
        c = rotation.excitation_budget_inverse(reg.pair(mol, at), CRYSTAL_D, EXCITATION_E_FINAL, EXCITATION_BUDGET)
        got = to_ev(c.E_lab)
        out.append(Check(f"excitation crossing {mol}/{at} [eV lab]", f"{target:g}", got, "25%", _within(got, target, 0.25)))
    c = rotation.excitation_budget_inverse(reg.pair("HD+", "Be+"), CRYSTAL_D, EXCITATION_E_FINAL, EXCITATION_BUDGET)
    got = to_ev(c.E_lab)
    out.append(Check("excitation crossing HD+/Be+ [eV lab]", "(0.8, 1.6)", got, "window", 0.8 < got < 1.6))
    return out


CHECKS: tuple[Callable[[SpeciesRegistry], list[Check]], ...] = (
    check_sigma, check_table1, check_crystal_time, check_scenario_ratio,
    check_sigma_tilde, check_field_average, check_crossings,
)


def run_checks(reg: SpeciesRegistry) -> list[Check]:
    results = []
    for fn in CHECKS:
        results.extend(fn(reg))
    return results


def all_passed(results: list[Check]) -> bool:
    return all(c.passed for c in results) and not any(math.isnan(c.computed) for c in results)
