"""Exact phase-space engine for spin-conditioned coherent states.

Every Hamiltonian used here commutes with sigma_z and is at most quadratic
in the mode operators, so a state that starts as

    c_up |up> e^{i phase_up} |amp_a, amp_b>  +  c_down |down> e^{i phase_down} |amp_a', amp_b'>

keeps that form forever. Displacements shift amplitudes and add the
composition phase ``Im(mu * conj(amp))``; the mode rotation generated by
``J_y`` mixes the amplitude pair; number-operator phase shifts multiply an
amplitude by ``exp(i phi)``. No Fock cutoff is involved, so amplitudes of
order 10^3 (the experimentally relevant cat sizes) cost nothing.

A forward segment ``U_+(t)`` is applied in the factorised order

    exp(i phi sigma_z) exp(i alpha t [A x_a + B x_b] sigma_z)
        exp(i beta t [A p_b - B p_a]) P(theta)

(rightmost first). The c-number phase ``phi`` is obtained here from the
area swept by the interaction-frame displacement path, not from
``model.phi1``; the test-suite checks the two against each other and
against the Fock oracle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from . import fock
from .model import PhysicalParams, a_theta, b_theta

__all__ = [
    "CoherentBranch",
    "HybridState",
    "initial_state",
    "displace",
    "rotate_modes",
    "phase_shift",
    "shift_state",
    "evolve_segment",
    "apply_u_plus",
    "apply_u_minus",
    "branch_overlap",
    "spin_coherence",
    "reduced_spin_matrix",
    "spin_entropy",
    "to_fock",
]


@dataclass(frozen=True)
class CoherentBranch:
    """The normalised motional state exp(i phase) |amp_a> (x) |amp_b>."""

    amp_a: complex = 0j
    amp_b: complex = 0j
    phase: float = 0.0


@dataclass(frozen=True)
class HybridState:
    c_up: complex
    c_down: complex
    branch_up: CoherentBranch
    branch_down: CoherentBranch

    def __post_init__(self):
        norm = abs(self.c_up) ** 2 + abs(self.c_down) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"spin amplitudes not normalised (|c|^2 sum = {norm!r})")

    def map_branches(self, fn) -> "HybridState":
        """Apply ``fn(branch, sigma)`` to both branches (sigma = +1 up, -1 down)."""
        return replace(self, branch_up=fn(self.branch_up, +1), branch_down=fn(self.branch_down, -1))

    @property
    def max_amplitude(self) -> float:
        b1, b2 = self.branch_up, self.branch_down
        return max(abs(b1.amp_a), abs(b1.amp_b), abs(b2.amp_a), abs(b2.amp_b))


def initial_state(amp_a: complex = 0j, amp_b: complex = 0j) -> HybridState:
    """(|up> + |down>)/sqrt(2) times the coherent state |amp_a, amp_b>."""
    c = 1.0 / math.sqrt(2.0)
    br = CoherentBranch(complex(amp_a), complex(amp_b), 0.0)
    return HybridState(c, c, br, br)


def displace(branch: CoherentBranch, mode: str, mu: complex) -> CoherentBranch:
    """Apply D_k(mu) = exp(mu k^dag - conj(mu) k) to mode k."""
    if mode == "a":
        old = branch.amp_a
        return CoherentBranch(old + mu, branch.amp_b, branch.phase + (mu * old.conjugate()).imag)
    if mode == "b":
        old = branch.amp_b
        return CoherentBranch(branch.amp_a, old + mu, branch.phase + (mu * old.conjugate()).imag)
    raise ValueError(f"unknown mode {mode!r}")


def rotate_modes(branch: CoherentBranch, theta: float) -> CoherentBranch:
    """Apply P(theta) = exp(i theta J_y).

    Coherent amplitudes transform as (a, b) -> (cos a - sin b, sin a + cos b)
    with no extra phase (J_y annihilates the vacuum).
    """
    c, s = math.cos(theta), math.sin(theta)
    a, b = branch.amp_a, branch.amp_b
    return CoherentBranch(c * a - s * b, s * a + c * b, branch.phase)


def phase_shift(branch: CoherentBranch, mode: str, phi: float) -> CoherentBranch:
    """Apply exp(i phi n_k); mode 'n' shifts both modes."""
    z = cmath.exp(1j * phi)
    if mode == "a":
        return CoherentBranch(z * branch.amp_a, branch.amp_b, branch.phase)
    if mode == "b":
        return CoherentBranch(branch.amp_a, z * branch.amp_b, branch.phase)
    if mode == "n":
        return CoherentBranch(z * branch.amp_a, z * branch.amp_b, branch.phase)
    raise ValueError(f"unknown mode {mode!r}")


def shift_state(state: HybridState, mode: str, phi: float = math.pi) -> HybridState:
    return state.map_branches(lambda br, _: phase_shift(br, mode, phi))


def _path_area(theta: float) -> float:
    # integral_0^1 (cos(theta s) - 1) ds / theta, i.e. (sin th - th)/th^2
    if abs(theta) < 5e-2:
        t2 = theta * theta
        return theta * (-1.0 / 6.0 + t2 * (1.0 / 120.0 + t2 * (-1.0 / 5040.0 + t2 / 362880.0)))
    return (math.sin(theta) - theta) / (theta * theta)


def _segment_phase(omega: float, alpha: float, beta: float, sigma: int, t: float) -> float:
    """C-number phase of the time-ordered displacement path of one segment.

    In the frame co-rotating with P(Omega s) each mode is displaced with
    velocity mu'(s) = u cos(Omega s) + v sin(Omega s). The product of the
    infinitesimal displacements carries the phase
    integral Im(mu'(s) conj(mu(s))) ds = Im(u conj(v)) t^2 (sin th - th)/th^2.
    """
    u_a, v_a = 1j * sigma * alpha, complex(-beta)
    u_b, v_b = complex(-beta), -1j * sigma * alpha
    area = t * t * _path_area(omega * t)
    return ((u_a * v_a.conjugate()).imag + (u_b * v_b.conjugate()).imag) * area


def evolve_segment(state: HybridState, omega: float, alpha: float, beta: float, t: float) -> HybridState:
    """exp(+i H t) for H = omega J_y + alpha x_a sigma_z + beta p_b."""
    if t < 0:
        raise ValueError("segment duration must be non-negative")
    theta = omega * t
    A, B = a_theta(theta), b_theta(theta)

    def step(br: CoherentBranch, sigma: int) -> CoherentBranch:
        br = rotate_modes(br, theta)
        # exp(i s p_k) = D_k(-s) and exp(i s x_k) = D_k(i s)
        br = displace(br, "b", -beta * t * A)
        br = displace(br, "a", beta * t * B)
        br = displace(br, "a", 1j * sigma * alpha * t * A)
        br = displace(br, "b", 1j * sigma * alpha * t * B)
        return replace(br, phase=br.phase + _segment_phase(omega, alpha, beta, sigma, t))

    return state.map_branches(step)


def apply_u_plus(state: HybridState, params: PhysicalParams, t: float | None = None) -> HybridState:
    """Forward segment generated by Omega J_y + alpha x_a sigma_z + beta p_b."""
    t = params.tau if t is None else t
    return evolve_segment(state, params.omega_rot, params.alpha, params.beta, t)


def apply_u_minus(state: HybridState, params: PhysicalParams, t: float | None = None) -> HybridState:
    """Reverse segment: the forward one with Omega -> -Omega and alpha -> -alpha."""
    t = params.tau if t is None else t
    return evolve_segment(state, -params.omega_rot, -params.alpha, params.beta, t)


def _coherent_overlap(x: complex, y: complex) -> complex:
    return cmath.exp(-abs(x) ** 2 / 2 - abs(y) ** 2 / 2 + x.conjugate() * y)


def branch_overlap(b1: CoherentBranch, b2: CoherentBranch) -> complex:
    """<b1|b2> including the branch phases."""
    return (
        cmath.exp(1j * (b2.phase - b1.phase))
        * _coherent_overlap(b1.amp_a, b2.amp_a)
        * _coherent_overlap(b1.amp_b, b2.amp_b)
    )


def spin_coherence(state: HybridState) -> complex:
    """Off-diagonal <up|rho_spin|down> = c_up conj(c_down) <m_down|m_up>."""
    return state.c_up * state.c_down.conjugate() * branch_overlap(state.branch_down, state.branch_up)


def reduced_spin_matrix(state: HybridState) -> np.ndarray:
    rho_ud = spin_coherence(state)
    return np.array(
        [[abs(state.c_up) ** 2, rho_ud], [rho_ud.conjugate(), abs(state.c_down) ** 2]],
        dtype=complex,
    )


def spin_entropy(state: HybridState) -> float:
    return fock.von_neumann_entropy(reduced_spin_matrix(state))


def to_fock(state: HybridState, config: fock.FockConfig | tuple[int, int]) -> fock.FockState:
    """Expand into the truncated Fock basis.

    Raises ``fock.TruncationError`` when the norm lost to the cutoff or the
    population of the top two shells exceeds ``config.leakage_tol``.
    """
    if not isinstance(config, fock.FockConfig):
        config = fock.FockConfig(*config)
    vec = np.zeros(config.shape, dtype=complex)
    worst = 0.0
    for idx, (c, br) in enumerate(((state.c_up, state.branch_up), (state.c_down, state.branch_down))):
        va = fock.coherent_vector(br.amp_a, config.cutoff_a)
        vb = fock.coherent_vector(br.amp_b, config.cutoff_b)
        lost = max(1.0 - float(np.vdot(va, va).real), 1.0 - float(np.vdot(vb, vb).real), 0.0)
        top = float(np.sum(np.abs(va[-2:]) ** 2) + np.sum(np.abs(vb[-2:]) ** 2))
        worst = max(worst, lost + top)
        vec[idx] = c * cmath.exp(1j * br.phase) * np.outer(va, vb)
    if worst > config.leakage_tol:
        raise fock.TruncationError(
            f"coherent amplitude {state.max_amplitude:.3g} too large for cutoffs "
            f"({config.cutoff_a}, {config.cutoff_b}): leakage {worst:.3e}",
            leakage=worst,
        )
    return fock.FockState(vec.reshape(-1), config)
