"""Physical parameters, sign conventions and closed-form scalar kernels.

Units: every rate (rotation speed, drive strengths, trap and drive
frequencies) is an angular frequency in rad/s, times are in seconds and the
rotation angle ``theta = omega_rot * t`` is dimensionless.

Conventions shared by both engines
----------------------------------
* Evolution operators are ``U(t) = exp(+i H t)``.
* Quadratures: ``x_k = k^dag + k`` and ``p_k = i (k^dag - k)``.
* Rotation generator: ``J_y = i (a^dag b - a b^dag)``.  This Hermitian
  operator makes ``exp(i theta J_y)`` rotate the quadrature pair
  ``(x_a, x_b)`` by the full angle ``theta``:
  ``exp(i th J) x_a exp(-i th J) = cos(th) x_a + sin(th) x_b``.
* Spin index 0 is spin up (``sigma_z = +1``), index 1 is spin down.
* The spin phase picked up by one forward segment is ``exp(i phi1 sigma_z)``
  with ``phi1 = -2 alpha beta t^2 (sin(th) - th) / th^2``.  The Fock
  oracle confirms this coefficient (see ``tests/test_calibration.py``).
  The relative up/down phase after one segment is therefore ``2 phi1``,
  and after one decoupling unit it is ``8 phi1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "DomainError",
    "PhysicalParams",
    "Conventions",
    "CONVENTIONS",
    "a_theta",
    "b_theta",
    "arc_kernel",
    "slope_kernel",
    "phi1",
    "gamma_decay",
]

# Below this |theta| the removable singularities of A and B use series.
SERIES_CUTOFF = 1e-6
# sin(th) - th and th + th cos(th) - 2 sin(th) cancel to O(th^3); their
# series are used up to this |theta| instead.
CANCELLATION_CUTOFF = 5e-2


class DomainError(ValueError):
    """Raised when a kernel is evaluated outside its domain."""


@dataclass(frozen=True)
class PhysicalParams:
    """Knobs of the interferometer.

    Attributes:
        omega_rot: rotation speed Omega (rad/s).
        alpha: spin-dependent drive strength on mode a (rad/s).
        beta: displacement drive strength on mode b (rad/s).
        tau: duration of one evolution segment (s).
        repetitions: number M of decoupling units.
        trap_freqs: (omega_x, omega_y, omega_z) in rad/s; only the lab-frame
            propagator reads them.
        drive_freq: carrier frequency of the cos(omega t) drives (rad/s),
            lab-frame propagator only.
    """

    omega_rot: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    tau: float = 1.0
    repetitions: int = 1
    trap_freqs: tuple[float, float, float] = (1.0e4, 1.0e4, 1.0e3)
    drive_freq: float = 1.0e4

    def __post_init__(self):
        for name in ("omega_rot", "alpha", "beta", "tau", "drive_freq"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.alpha < 0 or self.beta < 0:
            raise DomainError("alpha and beta must be non-negative")
        if self.tau <= 0:
            raise DomainError("tau must be positive")
        if int(self.repetitions) != self.repetitions or self.repetitions < 1:
            raise DomainError("repetitions must be a positive integer")
        object.__setattr__(self, "repetitions", int(self.repetitions))
        object.__setattr__(self, "trap_freqs", tuple(float(w) for w in self.trap_freqs))

    def theta(self, t: float | None = None) -> float:
        """Rotation angle omega_rot * t (t defaults to tau)."""
        return self.omega_rot * (self.tau if t is None else t)

    @property
    def total_time(self) -> float:
        """Phase accumulation time 4 M tau of a decoupled run."""
        return 4 * self.repetitions * self.tau


@dataclass(frozen=True)
class Conventions:
    evolution_sign: int = +1
    quadratures: str = "x_k = k^dag + k, p_k = i(k^dag - k)"
    rotation_generator: str = "J_y = i(a^dag b - a b^dag)"
    spin_order: str = "index 0 = up (sigma_z=+1), index 1 = down"
    fock_index_order: str = "(spin, n_a, n_b), spin slowest"
    phi1_coefficient: float = 2.0
    # lab-frame drives are 2*alpha*cos(wt), 2*beta*cos(wt) so that their
    # rotating-wave limit is exactly H_plus(alpha, beta)
    lab_drive_factor: float = 2.0


CONVENTIONS = Conventions()


def _check_finite(*values):
    for v in values:
        if not math.isfinite(v):
            raise DomainError(f"non-finite argument {v!r}")


def a_theta(theta: float) -> float:
    """sin(theta)/theta, equal to 1 at theta = 0."""
    _check_finite(theta)
    if abs(theta) < SERIES_CUTOFF:
        return 1.0 - theta * theta / 6.0
    return math.sin(theta) / theta


def b_theta(theta: float) -> float:
    """(1 - cos(theta))/theta, equal to 0 at theta = 0."""
    _check_finite(theta)
    if abs(theta) < SERIES_CUTOFF:
        return theta / 2.0 - theta**3 / 24.0
    # 1 - cos = 2 sin^2(th/2) avoids cancellation for small theta
    s = math.sin(theta / 2.0)
    return 2.0 * s * s / theta


def arc_kernel(theta: float) -> float:
    """(sin(theta) - theta)/theta^2, odd in theta, ~ -theta/6 near zero."""
    _check_finite(theta)
    if abs(theta) < CANCELLATION_CUTOFF:
        t2 = theta * theta
        return theta * (-1.0 / 6.0 + t2 * (1.0 / 120.0 + t2 * (-1.0 / 5040.0 + t2 / 362880.0)))
    return (math.sin(theta) - theta) / (theta * theta)


def slope_kernel(theta: float) -> float:
    """(theta + theta cos(theta) - 2 sin(theta))/theta^3, -1/6 at zero.

    Its zeros (theta = (2k+1) pi and tan(theta/2) = theta/2) are the dead
    points of the decoupled population as a function of Omega.
    """
    _check_finite(theta)
    if abs(theta) < CANCELLATION_CUTOFF:
        t2 = theta * theta
        return -1.0 / 6.0 + t2 * (1.0 / 40.0 + t2 * (-1.0 / 1008.0 + t2 / 51840.0))
    return (theta + theta * math.cos(theta) - 2.0 * math.sin(theta)) / theta**3


def phi1(params: PhysicalParams, t: float | None = None) -> float:
    """Spin phase of one forward segment of length t (defaults to tau).

    Returns ``-2 alpha beta t^2 (sin(th) - th)/th^2`` with ``th = omega_rot t``.
    """
    t = params.tau if t is None else t
    _check_finite(t)
    if t < 0:
        raise DomainError("t must be non-negative")
    th = params.omega_rot * t
    return -CONVENTIONS.phi1_coefficient * params.alpha * params.beta * t * t * arc_kernel(th)


def gamma_decay(alpha: float, omega_rot: float, theta: float, t: float | None = None) -> float:
    """Contrast exponent Gamma = 8 (alpha sin(theta/2)/Omega)^2.

    ``exp(-Gamma)`` is the modulus of the overlap between the two
    spin-conditioned motional states after one forward segment from vacuum.
    At Omega = 0 the limit 2 alpha^2 t^2 needs the segment duration ``t``.
    """
    _check_finite(alpha, omega_rot, theta)
    if omega_rot == 0.0:
        if t is None:
            raise DomainError("omega_rot = 0: pass t to use the limit 2 alpha^2 t^2")
        return 2.0 * alpha * alpha * t * t
    return 8.0 * (alpha * math.sin(theta / 2.0) / omega_rot) ** 2
