"""Truncated Fock-space oracle for the spin + two-mode oscillator.

States live on ``spin (2) x Fock_a (cutoff_a) x Fock_b (cutoff_b)`` with the
spin index slowest: ``index = s * cutoff_a * cutoff_b + n_a * cutoff_b + n_b``.
Operators are sparse CSR matrices on that space. Nothing in this module
knows the analytic solution; it is the ground truth the phase-space engine
is checked against.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .model import CONVENTIONS, PhysicalParams

__all__ = [
    "TruncationError",
    "AccuracyError",
    "FockConfig",
    "FockState",
    "OperatorSet",
    "build_operators",
    "hamiltonian_plus",
    "hamiltonian_minus",
    "Propagator",
    "propagate_static",
    "propagate_timedep",
    "timedep_error",
    "mode_phase_op",
    "fidelity",
    "reduced_spin_matrix",
    "spin_entropy",
    "von_neumann_entropy",
    "leakage",
    "basis_state",
    "coherent_vector",
    "product_state",
    "dump_state",
    "load_state",
]


class TruncationError(RuntimeError):
    """The truncated space can no longer represent the state faithfully."""

    def __init__(self, message, leakage=None, element_index=None):
        super().__init__(message)
        self.leakage = leakage
        self.element_index = element_index


class AccuracyError(RuntimeError):
    """Time step too coarse for the requested accuracy."""


@dataclass(frozen=True)
class FockConfig:
    cutoff_a: int = 40
    cutoff_b: int = 40
    leakage_tol: float = 1e-10
    max_dim: int = 20_000

    def __post_init__(self):
        if self.cutoff_a < 2 or self.cutoff_b < 2:
            raise ValueError("Fock cutoffs must be >= 2")
        if self.dim > self.max_dim:
            raise MemoryError(
                f"Hilbert space dimension {self.dim} exceeds budget {self.max_dim}"
            )

    @property
    def dim(self) -> int:
        return 2 * self.cutoff_a * self.cutoff_b

    @property
    def shape(self) -> tuple[int, int, int]:
        return (2, self.cutoff_a, self.cutoff_b)


@dataclass(frozen=True)
class FockState:
    vector: np.ndarray
    config: FockConfig

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=complex).reshape(-1)
        if vec.size != self.config.dim:
            raise ValueError(f"vector has size {vec.size}, expected {self.config.dim}")
        object.__setattr__(self, "vector", vec)

    @property
    def tensor(self) -> np.ndarray:
        """View with shape (2, cutoff_a, cutoff_b)."""
        return self.vector.reshape(self.config.shape)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


@dataclass(frozen=True)
class OperatorSet:
    config: FockConfig
    a: sp.csr_matrix
    adag: sp.csr_matrix
    b: sp.csr_matrix
    bdag: sp.csr_matrix
    x_a: sp.csr_matrix
    p_a: sp.csr_matrix
    x_b: sp.csr_matrix
    p_b: sp.csr_matrix
    j_y: sp.csr_matrix
    n_a: sp.csr_matrix
    n_b: sp.csr_matrix
    n_total: sp.csr_matrix
    sigma_z: sp.csr_matrix
    identity: sp.csr_matrix
    # diagonal number operators as arrays, handy for phase operators
    n_a_diag: np.ndarray = field(repr=False, default=None)
    n_b_diag: np.ndarray = field(repr=False, default=None)


def _ladder(n: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, shape=(n, n), format="csr")


@functools.lru_cache(maxsize=8)
def build_operators(config: FockConfig) -> OperatorSet:
    """Ladder and composite operators on the full spin x a x b space."""
    na, nb = config.cutoff_a, config.cutoff_b
    i2, ia, ib = sp.identity(2, format="csr"), sp.identity(na, format="csr"), sp.identity(nb, format="csr")
    sz = sp.diags([1.0, -1.0], format="csr")

    def lift(spin_op, a_op, b_op):
        return sp.kron(sp.kron(spin_op, a_op), b_op, format="csr").astype(complex)

    a = lift(i2, _ladder(na), ib)
    b = lift(i2, ia, _ladder(nb))
    adag, bdag = a.conj().T.tocsr(), b.conj().T.tocsr()
    n_a, n_b = (adag @ a).tocsr(), (bdag @ b).tocsr()
    j_y = (1j * (adag @ b - a @ bdag)).tocsr()
    return OperatorSet(
        config=config,
        a=a,
        adag=adag,
        b=b,
        bdag=bdag,
        x_a=(adag + a).tocsr(),
        p_a=(1j * (adag - a)).tocsr(),
        x_b=(bdag + b).tocsr(),
        p_b=(1j * (bdag - b)).tocsr(),
        j_y=j_y,
        n_a=n_a,
        n_b=n_b,
        n_total=(n_a + n_b).tocsr(),
        sigma_z=lift(sz, ia, ib),
        identity=sp.identity(config.dim, dtype=complex, format="csr"),
        n_a_diag=n_a.diagonal().real.copy(),
        n_b_diag=n_b.diagonal().real.copy(),
    )


def hamiltonian_plus(params: PhysicalParams, ops: OperatorSet) -> sp.csr_matrix:
    """Omega J_y + alpha x_a sigma_z + beta p_b."""
    h = params.omega_rot * ops.j_y + params.alpha * (ops.x_a @ ops.sigma_z) + params.beta * ops.p_b
    return h.tocsr()


def hamiltonian_minus(params: PhysicalParams, ops: OperatorSet) -> sp.csr_matrix:
    """-Omega J_y - alpha x_a sigma_z + beta p_b."""
    h = -params.omega_rot * ops.j_y - params.alpha * (ops.x_a @ ops.sigma_z) + params.beta * ops.p_b
    return h.tocsr()


def mode_phase_op(ops: OperatorSet, mode: str, phi: float) -> sp.csr_matrix:
    """Diagonal exp(i phi n_k) for k in {'a', 'b', 'n'} ('n' = both modes)."""
    if mode == "a":
        n = ops.n_a_diag
    elif mode == "b":
        n = ops.n_b_diag
    elif mode == "n":
        n = ops.n_a_diag + ops.n_b_diag
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return sp.diags(np.exp(1j * phi * n), format="csr")


class Propagator:
    """Applies exp(+i H t) for a fixed Hermitian H.

    Small spaces are diagonalised once (dense Hermitian eigendecomposition)
    and reused for every duration. Above ``dense_limit`` the sparse action
    ``expm_multiply`` is used instead.
    """

    def __init__(self, hamiltonian, dense_limit: int = 1200):
        self.hamiltonian = sp.csr_matrix(hamiltonian)
        self.dim = self.hamiltonian.shape[0]
        self.dense = self.dim <= dense_limit
        self._eig = None

    def _eigensystem(self):
        if self._eig is None:
            h = self.hamiltonian.toarray()
            self._eig = scipy.linalg.eigh(h)
        return self._eig

    def apply(self, vector: np.ndarray, t: float) -> np.ndarray:
        if t == 0:
            return np.array(vector, dtype=complex)
        if self.dense:
            w, v = self._eigensystem()
            return v @ (np.exp(1j * w * t) * (v.conj().T @ vector))
        return expm_multiply(1j * t * self.hamiltonian, vector)

    def matrix(self, t: float) -> np.ndarray:
        w, v = self._eigensystem()
        return (v * np.exp(1j * w * t)) @ v.conj().T


def _check_leakage(state: FockState, where: str = "") -> FockState:
    leak = leakage(state)
    if leak > state.config.leakage_tol:
        raise TruncationError(
            f"leakage {leak:.3e} exceeds tolerance {state.config.leakage_tol:.1e}{where}",
            leakage=leak,
        )
    return state


def propagate_static(state: FockState, hamiltonian, t: float, *, check: bool = True) -> FockState:
    """exp(+i H t) |state>, with a leakage check on the result."""
    if isinstance(hamiltonian, Propagator):
        prop = hamiltonian
    else:
        prop = Propagator(hamiltonian)
    out = FockState(prop.apply(state.vector, t), state.config)
    return _check_leakage(out) if check else out


def _taylor_step(matvec, vec: np.ndarray, dt: float) -> np.ndarray:
    # exp(i h dt) vec by Taylor series; ||h dt|| is small for the step sizes used
    out = vec.copy()
    term = vec
    scale = np.linalg.norm(vec)
    for k in range(1, 60):
        term = (1j * dt / k) * matvec(term)
        out += term
        if np.linalg.norm(term) < 1e-17 * scale:
            return out
    raise AccuracyError("Taylor series did not converge; reduce dt")


def propagate_timedep(
    state: FockState,
    params: PhysicalParams,
    t_total: float,
    dt: float,
    *,
    ops: OperatorSet | None = None,
    check: bool = True,
) -> FockState:
    """Propagate the driven two-mode Hamiltonian without the rotating-wave step.

    The lab-frame model is

        H(t) = w N + Omega J_y + 2 alpha cos(w_d t) x_a sigma_z + 2 beta cos(w_d t) p_b

    with trap frequency ``w = trap_freqs[0]`` (= ``trap_freqs[1]``) and drive
    frequency ``w_d = drive_freq``. Integration happens in the frame rotating
    at ``w``, so the returned state is directly comparable with
    ``propagate_static(state, hamiltonian_plus(...), t_total)``. Each step
    uses the Hamiltonian frozen at the step midpoint.
    """
    w_x, w_y, _ = params.trap_freqs
    if w_x != w_y:
        raise ValueError("only degenerate traps (omega_x == omega_y) are supported")
    w, wd = w_x, params.drive_freq
    if max(abs(w), abs(wd)) * dt > 0.1 + 1e-12:
        raise AccuracyError(f"dt={dt} does not resolve the drive (need omega*dt <= 0.1)")
    ops = ops or build_operators(state.config)
    k = CONVENTIONS.lab_drive_factor
    xa_s = (ops.x_a @ ops.sigma_z).tocsr()
    pa_s = (ops.p_a @ ops.sigma_z).tocsr()
    rot = (params.omega_rot * ops.j_y).tocsr()

    n_steps = max(1, int(math.ceil(t_total / dt - 1e-9)))
    h_step = t_total / n_steps
    vec = state.vector.copy()
    for n in range(n_steps):
        tm = (n + 0.5) * h_step
        c, s = math.cos(w * tm), math.sin(w * tm)
        fa = k * params.alpha * math.cos(wd * tm)
        fb = k * params.beta * math.cos(wd * tm)

        # x_a -> cos x_a - sin p_a and p_b -> cos p_b + sin x_b in the rotating frame
        def matvec(v, c=c, s=s, fa=fa, fb=fb):
            return (rot @ v + (fa * c) * (xa_s @ v) - (fa * s) * (pa_s @ v)
                    + (fb * c) * (ops.p_b @ v) + (fb * s) * (ops.x_b @ v))

        vec = _taylor_step(matvec, vec, h_step)
    out = FockState(vec, state.config)
    return _check_leakage(out) if check else out


def timedep_error(state, params, t_total, dt, *, ops=None) -> float:
    """Step-halving error estimate ||psi(dt/2) - psi(dt)|| / 3 of the midpoint rule."""
    coarse = propagate_timedep(state, params, t_total, dt, ops=ops, check=False)
    fine = propagate_timedep(state, params, t_total, dt / 2, ops=ops, check=False)
    return float(np.linalg.norm(fine.vector - coarse.vector) / 3.0)


def fidelity(s1: FockState, s2: FockState) -> float:
    """|<s1|s2>|^2 for normalised states."""
    return float(abs(np.vdot(s1.vector, s2.vector)) ** 2)


def von_neumann_entropy(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-300]
    return float(max(0.0, -np.sum(w * np.log(w))))


def reduced_spin_matrix(state: FockState) -> np.ndarray:
    psi = state.vector.reshape(2, -1)
    return psi @ psi.conj().T


def spin_entropy(state: FockState) -> float:
    """Von Neumann entropy (natural log) of the reduced spin state."""
    return von_neumann_entropy(reduced_spin_matrix(state))


def leakage(state: FockState) -> float:
    """Population in the top two Fock shells of either mode."""
    pop = np.abs(state.tensor) ** 2
    na, nb = state.config.cutoff_a, state.config.cutoff_b
    mask = np.zeros((na, nb), dtype=bool)
    mask[max(0, na - 2):, :] = True
    mask[:, max(0, nb - 2):] = True
    return float(pop[:, mask].sum())


def basis_state(config: FockConfig, spin: int, n_a: int = 0, n_b: int = 0) -> FockState:
    vec = np.zeros(config.shape, dtype=complex)
    vec[spin, n_a, n_b] = 1.0
    return FockState(vec.reshape(-1), config)


def coherent_vector(amp: complex, cutoff: int) -> np.ndarray:
    """Truncated coherent-state coefficients exp(-|amp|^2/2) amp^n / sqrt(n!)."""
    out = np.empty(cutoff, dtype=complex)
    out[0] = math.exp(-abs(amp) ** 2 / 2)
    for n in range(1, cutoff):
        out[n] = out[n - 1] * amp / math.sqrt(n)
    return out


def product_state(config: FockConfig, spin, mode_a, mode_b) -> FockState:
    """Tensor product of a spin 2-vector and two mode vectors."""
    vec = np.einsum("s,i,j->sij", np.asarray(spin, complex), np.asarray(mode_a, complex), np.asarray(mode_b, complex))
    return FockState(vec.reshape(-1), config)


def dump_state(state: FockState, stream) -> None:
    """Text dump for debugging: header, then 'index re im' per line."""
    cfg = state.config
    stream.write(f"# fock-state cutoff_a={cfg.cutoff_a} cutoff_b={cfg.cutoff_b} order=spin,n_a,n_b\n")
    for i, z in enumerate(state.vector):
        stream.write(f"{i} {z.real:.17g} {z.imag:.17g}\n")


def load_state(stream, leakage_tol: float = 1e-10) -> FockState:
    header = stream.readline().split()
    fields = dict(item.split("=") for item in header if "=" in item)
    cfg = FockConfig(int(fields["cutoff_a"]), int(fields["cutoff_b"]), leakage_tol=leakage_tol)
    vec = np.zeros(cfg.dim, dtype=complex)
    for line in stream:
        if line.strip():
            i, re, im = line.split()
            vec[int(i)] = complex(float(re), float(im))
    return FockState(vec, cfg)
