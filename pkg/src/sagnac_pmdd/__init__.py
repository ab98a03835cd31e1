"""Dynamical decoupling of a spin-controlled two-mode rotation sensor.

Modules:

- ``model``: parameters, conventions and closed-form kernels.
- ``phasespace``: exact engine on spin-conditioned coherent states.
- ``fock``: truncated Fock-space reference engine (the oracle).
- ``sequence``: pulse sequences and the shared executor.
- ``metrology``: readout, sensitivity and candidate disambiguation.
- ``cli``: command-line front end (``python -m sagnac_pmdd``).
"""

from . import fock, metrology, model, phasespace, sequence
from .model import CONVENTIONS, DomainError, PhysicalParams

__version__ = "0.1.0"

__all__ = ["fock", "metrology", "model", "phasespace", "sequence", "CONVENTIONS", "DomainError", "PhysicalParams"]
