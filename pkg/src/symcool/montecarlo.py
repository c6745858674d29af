"""Stochastic collision cascade used to cross-check the analytic averages.

One molecular ion is followed collision by collision: draw an impact
parameter, lose the two-body CM energy transfer, add the time between
collisions and, for apolar molecules, the single-collision excitation. Runs
stop once the energy reaches ``E_final``. Each run reads its own random
stream ``Sampler(seed, stream=run_index)``, so results do not depend on how
runs are scheduled.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import ensemble
from .ensemble import CoolingScenario
from .numerics import Sampler
from .rotation import KAPPA, QUADRUPOLE_COUPLING
from .species import SpeciesPair
from .units import to_ev, to_ms, to_um

COLLISION_CAP = 10**9
_CHUNK_MIN = 1 << 12
_CHUNK_MAX = 1 << 20
_CC, _SA = 0, 1


@njit(nogil=True, cache=True, fastmath=True)
def _advance(u, E, t, phi, n, E_final, kind, h, mfp, omega, mu, c, q, excite, A, X, q_at3,
             cap, trace, tr):
    """Consume uniforms until the run ends; returns the new state and draws used."""
    used = 0
    for i in range(u.size):
        if E <= E_final or n >= cap:
            break
        if kind == 0:
            b = h * math.sqrt(u[i])
            dt = mfp * math.sqrt(mu / (2.0 * E))
        else:
            b = math.sqrt(E / mu) / omega * math.sqrt(-2.0 * math.log(u[i]))
            dt = math.pi / omega
        x = 2.0 * E * b / q
        dE = E * c / (1.0 + x * x)
        eps = 0.0
        if excite:
            r0 = q / (2.0 * E)
            r = r0 + math.sqrt(r0 * r0 + b * b)
            r2 = r * r
            y = X / (E * math.sqrt(E))
            eps = A / (E * E * E) * (1.0 + y) * math.exp(-y) * q_at3 / (r2 * r2 * r2)
        t += dt
        if trace:
            tr[i, 0] = E
            tr[i, 1] = b
            tr[i, 2] = 2.0 * math.asin(1.0 / math.sqrt(1.0 + x * x))
            tr[i, 3] = dE
            tr[i, 4] = eps
            tr[i, 5] = t
        E -= dE
        phi += eps
        n += 1
        used += 1
    return E, t, phi, n, used


@dataclass(frozen=True)
class McConfig:
    pair: SpeciesPair
    scenario: CoolingScenario
    E_init: float
    E_final: float
    seed: int = 0
    n_runs: int = 100
    record_trace: bool = False
    excitation: bool | None = None
    collision_cap: int = COLLISION_CAP
    workers: int = 1

    def __post_init__(self):
        if not (self.E_init >= self.E_final > 0):
            raise ValueError("need E_init >= E_final > 0")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if self.excitation and self.pair.mol.polarity != "apolar":
            raise ValueError(f"no per-collision excitation model for {self.pair.mol.polarity} {self.pair.mol.name}")

    @property
    def excite(self) -> bool:
        if self.excitation is None:
            return self.pair.mol.polarity == "apolar"
        return self.excitation


@dataclass(frozen=True)
class RunResult:
    n_collisions: int
    time: float
    phi: float
    E_end: float
    capped: bool
    trace: np.ndarray | None = None


def _mean_se(x: np.ndarray) -> tuple[float, float | None]:
    if x.size == 1:
        return float(x[0]), None
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


@dataclass(frozen=True)
class McSummary:
    """Mean and standard error over runs; ``se`` is ``None`` for a single run."""

    config: McConfig
    runs: tuple[RunResult, ...] = field(repr=False)

    @property
    def n_runs(self) -> int:
        return len(self.runs)

    @property
    def partial(self) -> bool:
        return any(r.capped for r in self.runs)

    def values(self, quantity: str) -> np.ndarray:
        attr = {"N_coll": "n_collisions", "T": "time", "phi": "phi"}[quantity]
        return np.array([getattr(r, attr) for r in self.runs], dtype=float)

    def stat(self, quantity: str) -> tuple[float, float | None]:
        return _mean_se(self.values(quantity))

    @property
    def traces(self) -> list[np.ndarray]:
        return [r.trace for r in self.runs if r.trace is not None]


def _run_one(cfg: McConfig, index: int) -> RunResult:
    pair, sc = cfg.pair, cfg.scenario
    sampler = Sampler(cfg.seed, stream=index)
    kind = _CC if sc.kind == "CC" else _SA
    h = sc.b_max if kind == _CC else 0.0
    mfp = sc.mfp if kind == _CC else 0.0
    omega = sc.omega if kind == _SA else 1.0
    excite = cfg.excite
    if excite:
        qz = QUADRUPOLE_COUPLING * pair.mol.QZ
        A = KAPPA**2 * qz * qz * pair.mu / 180.0
        X = 6.0 * KAPPA * pair.mol.B * math.sqrt(pair.mu)
    else:
        A = X = 0.0
    c = 4.0 * pair.xi / (1.0 + pair.xi) ** 2
    E, t, phi, n = float(cfg.E_init), 0.0, 0.0, 0
    chunks = []
    size = _CHUNK_MIN
    dummy = np.empty((1, 6))
    while E > cfg.E_final and n < cfg.collision_cap:
        u = sampler.uniform(size)
        tr = np.empty((size, 6)) if cfg.record_trace else dummy
        E, t, phi, n, used = _advance(u, E, t, phi, n, cfg.E_final, kind, h, mfp, omega, pair.mu, c,
                                      float(pair.q_prod), excite, A, X, float(pair.q_at) ** 3,
                                      cfg.collision_cap, cfg.record_trace, tr)
        if cfg.record_trace:
            chunks.append(tr[:used])
        size = min(2 * size, _CHUNK_MAX)
    trace = np.concatenate(chunks) if cfg.record_trace and chunks else (np.empty((0, 6)) if cfg.record_trace else None)
    return RunResult(n, t, phi, E, E > cfg.E_final, trace)


def run(cfg: McConfig) -> McSummary:
    """Simulate ``cfg.n_runs`` independent cooling histories."""
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            runs = list(pool.map(lambda i: _run_one(cfg, i), range(cfg.n_runs)))
    else:
        runs = [_run_one(cfg, i) for i in range(cfg.n_runs)]
    return McSummary(cfg, tuple(runs))


REPORT_COLUMNS = ("n_runs", "N_coll_mean", "N_coll_se", "T_ms_mean", "T_ms_se", "phi_mean", "phi_se")
TRACE_COLUMNS = ("k", "E_cm_eV", "b_um", "theta_rad", "dE_eV", "eps", "t_ms")


def _fmt(x) -> str:
    return "" if x is None else f"{x:.9g}"


def convergence_report(cfg: McConfig, schedule) -> list[dict]:
    """Mean and standard error after the first ``n`` runs, for each ``n`` in ``schedule``.

    The runs for smaller ``n`` are prefixes of the largest set, which is what
    a fresh run with that ``n_runs`` would produce anyway.
    """
    schedule = list(schedule)
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])) or schedule[0] < 1:
        raise ValueError("schedule must be a strictly ascending list of positive run counts")
    full = run(McConfig(**{**cfg.__dict__, "n_runs": schedule[-1], "record_trace": False}))
    rows = []
    for n in schedule:
        part = McSummary(full.config, full.runs[:n])
        N, N_se = part.stat("N_coll")
        T, T_se = part.stat("T")
        row = {"n_runs": n, "N_coll_mean": N, "N_coll_se": N_se,
               "T_ms_mean": to_ms(T), "T_ms_se": None if T_se is None else to_ms(T_se),
               "phi_mean": None, "phi_se": None}
        if cfg.excite:
            row["phi_mean"], row["phi_se"] = part.stat("phi")
        rows.append(row)
    return rows


def report_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for row in rows:
        w.writerow([row["n_runs"]] + [_fmt(row[c]) for c in REPORT_COLUMNS[1:]])
    return buf.getvalue()


def trace_csv(trace: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for k, (E, b, th, dE, eps, t) in enumerate(trace):
        w.writerow([k, _fmt(to_ev(E)), _fmt(to_um(b)), _fmt(th), _fmt(to_ev(dE)), _fmt(eps), _fmt(to_ms(t))])
    return buf.getvalue()


def sampled_impact_parameters(scenario: CoolingScenario, n: int, seed: int, E: float | None = None,
                              mu: float | None = None) -> np.ndarray:
    """Impact parameters exactly as the cascade draws them, for distribution checks."""
    s = Sampler(seed)
    if scenario.kind == "CC":
        return s.impact_cc(2.0 * scenario.b_max, n)
    return s.impact_sa(float(ensemble.sigma(E, mu, scenario.omega)), n)
