"""Readout, closed-form populations, sensitivity and ambiguity resolution.

Readout convention: the spin starts in (|up> + |down>)/sqrt(2); after the
evolution a closing pi/2 rotation maps the spin coherence onto the
population, ``P_down = 1/2 (1 + 2 Re <up|rho|down>)``, so an undisturbed
spin gives ``P_down = 1``.

Sensitivity convention: ``Delta Omega = sqrt(T) Delta P / |dP/dOmega|`` with
binomial shot noise ``Delta P = sqrt(P (1 - P))`` and total accumulation time
``T = 4 M tau``; the result is in (rad/s)/sqrt(Hz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import fock
from . import phasespace as ps
from .model import PhysicalParams, gamma_decay, phi1, slope_kernel

__all__ = [
    "AmbiguityError",
    "ReadoutResult",
    "ScanResult",
    "SensitivityResult",
    "Candidate",
    "Disambiguation",
    "ramsey_population",
    "population_baseline",
    "population_pmdd",
    "pmdd_phase",
    "pmdd_slope_omega",
    "pmdd_slope_time",
    "sensitivity",
    "sensitivity_numeric",
    "decay_rate",
    "disambiguate",
]

# |slope_kernel| below this marks a dead point of dP/dOmega
DEAD_POINT_TOL = 1e-15


class AmbiguityError(ValueError):
    """The population carries no information to resolve candidates."""


@dataclass(frozen=True)
class ReadoutResult:
    p_down: float
    contrast: float
    rel_phase: float


@dataclass
class ScanResult:
    """Rows of a one-dimensional scan plus the metadata that produced them."""

    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


def ramsey_population(state) -> ReadoutResult:
    """Spin-down population after the closing pi/2 pulse, for either engine."""
    if isinstance(state, ps.HybridState):
        rho_ud = ps.spin_coherence(state)
    elif isinstance(state, fock.FockState):
        rho_ud = fock.reduced_spin_matrix(state)[0, 1]
    else:
        raise TypeError(f"unsupported state type {type(state).__name__}")
    contrast = 2.0 * abs(rho_ud)
    rel_phase = math.atan2(rho_ud.imag, rho_ud.real)
    return ReadoutResult(0.5 * (1.0 + 2.0 * rho_ud.real), contrast, rel_phase)


def population_baseline(params: PhysicalParams, t: float | None = None) -> float:
    """Closed-form population after one forward segment of length t.

    ``1/2 (1 + exp(-Gamma) cos(2 phi1))``: the relative spin phase of a
    single segment is twice the ``phi1`` exponent of exp(i phi1 sigma_z).
    """
    t = params.tau if t is None else t
    theta = params.theta(t)
    gamma = gamma_decay(params.alpha, params.omega_rot, theta, t=t)
    return 0.5 * (1.0 + math.exp(-gamma) * math.cos(2.0 * phi1(params, t)))


def pmdd_phase(params: PhysicalParams, tau: float | None = None) -> float:
    """Relative spin phase 8 M phi1 after M decoupling units."""
    return 8.0 * params.repetitions * phi1(params, tau)


def population_pmdd(params: PhysicalParams, tau: float | None = None) -> float:
    """1/2 (1 + cos(8 M phi1)): no contrast loss at any rotation angle."""
    return 0.5 * (1.0 + math.cos(pmdd_phase(params, tau)))


def pmdd_slope_omega(params: PhysicalParams) -> float:
    """Analytic dP/dOmega of the decoupled population at fixed tau and M."""
    tau = params.tau
    theta = params.theta()
    # dphi1/dOmega = -2 alpha beta tau^3 * slope_kernel(theta)
    dphi = -2.0 * params.alpha * params.beta * tau**3 * slope_kernel(theta)
    x = pmdd_phase(params)
    return -0.5 * math.sin(x) * 8.0 * params.repetitions * dphi


def pmdd_slope_time(params: PhysicalParams, tau: float | None = None, rel_step: float = 1e-4) -> float:
    """dP/dtau at fixed Omega and M, by Richardson-extrapolated central differences."""
    tau = params.tau if tau is None else tau
    h = rel_step * tau

    def central(step):
        return (population_pmdd(params, tau + step) - population_pmdd(params, tau - step)) / (2 * step)

    d1, d2 = central(h), central(h / 2)
    return (4.0 * d2 - d1) / 3.0


@dataclass(frozen=True)
class SensitivityResult:
    delta_omega: float
    small_angle: float
    ratio: float
    dead_point: bool


def sensitivity(params: PhysicalParams, total_time: float | None = None) -> SensitivityResult:
    """Shot-noise limited Delta Omega of the decoupled protocol.

    Full form ``Omega^3 sqrt(tau) / (8 sqrt(M) alpha beta |th + th cos th - 2 sin th|)``
    and small-angle form ``3 / (2 sqrt(4 M tau) alpha beta tau^2)``; they
    coincide as theta -> 0. At a dead point the full form is ``inf``.

    ``total_time`` replaces ``4 M tau`` by a given accumulation time, i.e.
    evaluates the formula at the (possibly fractional) ``M = T / (4 tau)``.
    """
    m, tau = params.repetitions, params.tau
    if total_time is not None:
        if not total_time > 0:
            raise ValueError("total_time must be positive")
        m = total_time / (4.0 * tau)
    ab = params.alpha * params.beta
    if ab == 0:
        raise ValueError("alpha * beta = 0: the population does not depend on Omega")
    small = 3.0 / (2.0 * math.sqrt(4 * m * tau) * ab * tau**2)
    k = abs(slope_kernel(params.theta()))
    if k < DEAD_POINT_TOL:
        return SensitivityResult(math.inf, small, math.inf, True)
    full = 1.0 / (8.0 * math.sqrt(m) * ab * tau**2.5 * k)
    return SensitivityResult(full, small, full / small, False)


def sensitivity_numeric(params: PhysicalParams, d_omega: float | None = None) -> float:
    """Delta Omega from a central finite difference of population_pmdd over Omega."""
    if d_omega is None:
        # resolve both the Omega scale and the fringe period of cos(8 M phi1)
        fringe = 8 * params.repetitions * 2 * params.alpha * params.beta * params.tau**3 / 6
        scale = min(abs(params.omega_rot) or 1.0, 1.0 / fringe if fringe else 1.0)
        d_omega = 1e-5 * scale

    def pop(w):
        return population_pmdd(_with_omega(params, w))

    w = params.omega_rot
    slope = (pop(w + d_omega) - pop(w - d_omega)) / (2 * d_omega)
    p = pop(w)
    dp = math.sqrt(max(p * (1 - p), 0.0))
    if slope == 0.0:
        return math.inf
    return math.sqrt(params.total_time) * dp / abs(slope)


def decay_rate(n_bar: float, omega_rot: float, t: float) -> float:
    """Contrast factor exp(-8 N_c sin^2(Omega t / 2)) of an undecoupled run."""
    return math.exp(-8.0 * n_bar * math.sin(omega_rot * t / 2.0) ** 2)


def _with_omega(params: PhysicalParams, omega: float) -> PhysicalParams:
    return replace(params, omega_rot=omega)


@dataclass(frozen=True)
class Candidate:
    omega: float
    slope: float


@dataclass
class Disambiguation:
    candidates: list
    ratios: list
    unresolved: list

    @property
    def min_ratio(self) -> float:
        return min(self.ratios) if self.ratios else math.inf


def disambiguate(
    p_target: float,
    t: float,
    params: PhysicalParams,
    omega_range: tuple[float, float],
    *,
    grid_points: int = 10_000,
    xtol: float = 1e-10,
    resolve_ratio: float = 1.0 + 1e-6,
) -> Disambiguation:
    """All Omega in ``omega_range`` with population_pmdd = p_target at duration t.

    Roots are bracketed by sign changes on a uniform grid and refined with
    Brent's method; touching roots (extrema that reach p_target) are refined
    by bounded minimisation. Each candidate carries dP/dt. Adjacent
    candidates (in Omega order) are compared by the ratio of their slope
    magnitudes; pairs whose ratio is below ``resolve_ratio`` are listed as
    unresolved.
    """
    lo, hi = omega_range
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise ValueError("omega_range must be a finite increasing interval")
    if params.alpha * params.beta == 0:
        raise AmbiguityError("population is flat (alpha * beta = 0); Omega cannot be resolved")

    def f(w):
        return population_pmdd(_with_omega(params, w), t) - p_target

    grid = np.linspace(lo, hi, grid_points)
    vals = np.array([f(w) for w in grid])
    roots = []
    for i in range(grid_points - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=xtol))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    # touching roots: local minima of |f| that do not change sign
    absv = np.abs(vals)
    for i in range(1, grid_points - 1):
        if absv[i] <= absv[i - 1] and absv[i] <= absv[i + 1] and vals[i - 1] * vals[i + 1] > 0:
            res = minimize_scalar(lambda w: f(w) ** 2, bounds=(grid[i - 1], grid[i + 1]),
                                  method="bounded", options={"xatol": xtol})
            if abs(f(res.x)) < 1e-9:
                roots.append(grid[i] if vals[i] == 0.0 else res.x)
    roots = sorted(roots)
    merged = []
    for r in roots:
        if not merged or abs(r - merged[-1]) > 10 * xtol:
            merged.append(r)

    candidates = [Candidate(w, pmdd_slope_time(_with_omega(params, w), t)) for w in merged]
    ratios, unresolved = [], []
    for c1, c2 in zip(candidates, candidates[1:]):
        s1, s2 = abs(c1.slope), abs(c2.slope)
        big, small = max(s1, s2), min(s1, s2)
        ratio = math.inf if small == 0 else big / small
        ratios.append(ratio)
        if ratio < resolve_ratio:
            unresolved.append((c1.omega, c2.omega))
    return Disambiguation(candidates, ratios, unresolved)
