"""Numerical kernels: adaptive quadrature, bracketed root finding, seeded sampling."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

# 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KWEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[1:7:2] = _WG[:3]
_GWEIGHTS[7] = _WG[3]
_GWEIGHTS[9:15:2] = _WG[2::-1]

MIN_PANEL_FRACTION = 1e-15
_MAX_PANELS = 200_000


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    max_depth: int = 50

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


DEFAULT_QUAD = QuadratureSpec()
# For integrands whose natural scale is far from 1 in atomic units.
RELATIVE_QUAD = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-11, max_depth=60)


class QuadratureError(RuntimeError):
    """Adaptive refinement hit its depth limit before meeting the tolerance."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate {estimate!r}, error bound {error!r})")
        self.estimate = estimate
        self.error = error


def _as_vector(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    probe = np.array([0.25, 0.5])

    def scalar_loop(x):
        return np.array([f(float(xi)) for xi in x], dtype=float)

    try:
        out = np.asarray(f(probe), dtype=float)
    except Exception:
        return scalar_loop
    return f if out.shape == probe.shape else scalar_loop


def _kronrod(f, a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    fx = np.asarray(f(0.5 * (a + b) + half * _NODES), dtype=float)
    if not np.all(np.isfinite(fx)):
        raise ValueError(f"integrand not finite on [{a!r}, {b!r}]")
    k = half * float(fx @ _KWEIGHTS)
    g = half * float(fx @ _GWEIGHTS)
    return k, abs(k - g)


def integrate_err(f: Callable, a: float, b: float, spec: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]``, returning ``(value, error_bound)``.

    Globally adaptive bisection: the panel with the largest Kronrod-Gauss
    discrepancy is split until the summed discrepancy drops below
    ``max(abs_tol, rel_tol*|value|)``. ``f`` is called with arrays of nodes
    (scalar-only callables are looped automatically). ``b = inf`` is mapped to
    a finite interval with ``x = a + t/(1-t)``.

    Raises:
        QuadratureError: if a panel that still needs splitting is at
            ``max_depth`` or narrower than ``1e-15*(b-a)``.
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        val, err = integrate_err(f, b, a, spec)
        return -val, err
    fv = _as_vector(f)
    if math.isinf(b):
        if math.isinf(a):
            raise ValueError("only the upper limit may be infinite")
        inner = fv

        def fv(t):
            s = 1.0 - t
            return inner(a + t / s) / (s * s)

        a, b = 0.0, 1.0

    min_width = MIN_PANEL_FRACTION * (b - a)
    val, err = _kronrod(fv, a, b)
    heap = [(-err, a, b, 0, val)]
    total, total_err = val, err
    steps = 0
    while True:
        if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            break
        neg_err, lo, hi, depth, pval = heapq.heappop(heap)
        if depth >= spec.max_depth or (hi - lo) < min_width or len(heap) >= _MAX_PANELS:
            heapq.heappush(heap, (neg_err, lo, hi, depth, pval))
            raise QuadratureError("quadrature did not converge", total, total_err)
        mid = 0.5 * (lo + hi)
        v1, e1 = _kronrod(fv, lo, mid)
        v2, e2 = _kronrod(fv, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, depth + 1, v1))
        heapq.heappush(heap, (-e2, mid, hi, depth + 1, v2))
        total += v1 + v2 - pval
        total_err += e1 + e2 + neg_err
        steps += 1
        if steps % 64 == 0:
            # resum to stop drift from the incremental updates
            total = math.fsum(p[4] for p in heap)
            total_err = math.fsum(-p[0] for p in heap)
    return math.fsum(p[4] for p in heap), math.fsum(-p[0] for p in heap)


def integrate(f: Callable, a: float, b: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    return integrate_err(f, a, b, spec)[0]


@dataclass(frozen=True)
class RootSpec:
    bracket: tuple[float, float]
    tol: float = 1e-12
    max_iter: int = 200
    ftol: float = 0.0

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo < hi:
            raise ValueError(f"bracket must satisfy lo < hi, got {self.bracket}")


class BracketError(ValueError):
    def __init__(self, lo, hi, flo, fhi):
        super().__init__(f"no sign change on [{lo!r}, {hi!r}]: f = ({flo!r}, {fhi!r})")
        self.lo, self.hi, self.flo, self.fhi = lo, hi, flo, fhi


class RootError(RuntimeError):
    def __init__(self, lo, hi):
        super().__init__(f"root not converged; best bracket [{lo!r}, {hi!r}]")
        self.bracket = (lo, hi)


def find_root(f: Callable[[float], float], spec: RootSpec) -> float:
    """Root of ``f`` inside ``spec.bracket``.

    Regula falsi with the Illinois weight fix, falling back to a bisection
    whenever a step fails to halve the bracket. Stops once the bracket is
    narrower than ``tol`` or ``|f| <= ftol``.
    """
    lo, hi = map(float, spec.bracket)
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise BracketError(lo, hi, flo, fhi)
    side = 0
    for _ in range(spec.max_iter):
        width = hi - lo
        if width <= spec.tol:
            break
        x = (lo * fhi - hi * flo) / (fhi - flo)
        if not lo < x < hi:
            x = 0.5 * (lo + hi)
        fx = f(x)
        if abs(fx) <= spec.ftol:
            return x
        if math.copysign(1.0, fx) == math.copysign(1.0, flo):
            lo, flo = x, fx
            if side == -1:
                fhi *= 0.5
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo *= 0.5
            side = 1
        if hi - lo > 0.5 * width:
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if fm == 0.0:
                return mid
            if math.copysign(1.0, fm) == math.copysign(1.0, flo):
                lo, flo = mid, fm
            else:
                hi, fhi = mid, fm
            side = 0
    else:
        if hi - lo > spec.tol:
            raise RootError(lo, hi)
    return lo - flo * (hi - lo) / (fhi - flo) if fhi != flo else 0.5 * (lo + hi)


def cc_impact_from_uniform(u, d):
    """Inverse CDF of the flat crystal distribution ``8b/d**2`` on ``[0, d/2]``."""
    return 0.5 * d * np.sqrt(u)


def sa_impact_from_uniform(u, sigma):
    """Inverse CDF of the Rayleigh single-ion distribution, for ``u`` in ``(0, 1]``."""
    return sigma * np.sqrt(-2.0 * np.log(u))


class Sampler:
    """Seeded random stream.

    ``Sampler(seed, stream=k)`` gives independent, reproducible sub-streams
    for parallel workers or Monte Carlo runs.
    """

    def __init__(self, seed: int, stream: int | None = None):
        key = () if stream is None else (int(stream),)
        self.seed = seed
        self.stream = stream
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))

    def uniform(self, size=None):
        """Draws on ``(0, 1]`` (never exactly zero, so logs stay finite)."""
        return 1.0 - self._rng.random(size)

    def impact_cc(self, d: float, size=None):
        return cc_impact_from_uniform(self.uniform(size), d)

    def impact_sa(self, sigma: float, size=None):
        return sa_impact_from_uniform(self.uniform(size), sigma)
