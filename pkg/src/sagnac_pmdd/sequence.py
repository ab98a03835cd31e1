"""Pulse sequences and a single executor for both engines.

Sequence grammar (used by config files and the CLI)::

    sequence := "pmdd" | "ideal" | "baseline" | element ("," element)*
    element  := "fwd" [":" duration] | "rev" [":" duration] | "pa" | "pb" | "pn"

``fwd``/``rev`` are forward (H_plus) and reverse (H_minus) evolutions whose
duration defaults to tau; ``pa``, ``pb``, ``pn`` are pi phase shifts on mode
a, mode b or both. Elements are listed in time order (first applied first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fock
from . import phasespace as ps
from .model import PhysicalParams

__all__ = [
    "EvolveForward",
    "EvolveReverse",
    "PhaseShiftA",
    "PhaseShiftB",
    "PhaseShiftN",
    "SequenceSpec",
    "RunResult",
    "pmdd_unit",
    "ideal_unit",
    "baseline_unit",
    "parse_sequence",
    "format_sequence",
    "run",
]


@dataclass(frozen=True)
class EvolveForward:
    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("evolution durations must be positive")


@dataclass(frozen=True)
class EvolveReverse:
    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("evolution durations must be positive")


@dataclass(frozen=True)
class PhaseShiftA:
    pass


@dataclass(frozen=True)
class PhaseShiftB:
    pass


@dataclass(frozen=True)
class PhaseShiftN:
    """pi phase shift on both modes, exp(i pi (n_a + n_b))."""


PulseElement = EvolveForward | EvolveReverse | PhaseShiftA | PhaseShiftB | PhaseShiftN

_SHIFT_MODE = {PhaseShiftA: "a", PhaseShiftB: "b", PhaseShiftN: "n"}
_FRAME_NAMES = {(0, 0): "identity", (1, 0): "pi_a", (0, 1): "pi_b", (1, 1): "pi_n"}


@dataclass(frozen=True)
class SequenceSpec:
    elements: tuple = ()
    repetitions: int = 1
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if int(self.repetitions) != self.repetitions or self.repetitions < 1:
            raise ValueError("repetitions must be a positive integer")

    @property
    def unit_duration(self) -> float:
        return sum(getattr(e, "duration", 0.0) for e in self.elements)

    @property
    def total_duration(self) -> float:
        return self.repetitions * self.unit_duration


def pmdd_unit(tau: float, repetitions: int = 1) -> SequenceSpec:
    """tau, pi_a, tau, pi_b, tau, pi_a, tau: four forward segments."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    f = EvolveForward(tau)
    return SequenceSpec((f, PhaseShiftA(), f, PhaseShiftB(), f, PhaseShiftA(), f), repetitions, "pmdd")


def ideal_unit(tau: float, repetitions: int = 1) -> SequenceSpec:
    """U_+, U_-, pi_N, U_+, U_- in time order."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    f, r = EvolveForward(tau), EvolveReverse(tau)
    return SequenceSpec((f, r, PhaseShiftN(), f, r), repetitions, "ideal")


def baseline_unit(tau: float, repetitions: int = 1) -> SequenceSpec:
    """A single forward segment, no decoupling. tau = 0 gives the empty sequence."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    elements = (EvolveForward(tau),) if tau > 0 else ()
    return SequenceSpec(elements, repetitions, "baseline")


_BUILDERS = {"pmdd": pmdd_unit, "ideal": ideal_unit, "baseline": baseline_unit}


def parse_sequence(text: str, tau: float, repetitions: int = 1) -> SequenceSpec:
    text = text.strip()
    if text.lower() in _BUILDERS:
        return _BUILDERS[text.lower()](tau, repetitions)
    elements = []
    for token in text.replace(",", " ").split():
        name, _, dur = token.partition(":")
        name = name.lower()
        if name in ("fwd", "rev"):
            d = float(dur) if dur else tau
            elements.append(EvolveForward(d) if name == "fwd" else EvolveReverse(d))
        elif name == "pa":
            elements.append(PhaseShiftA())
        elif name == "pb":
            elements.append(PhaseShiftB())
        elif name == "pn":
            elements.append(PhaseShiftN())
        else:
            raise ValueError(f"unknown sequence element {token!r}")
    if not elements:
        raise ValueError("empty sequence")
    return SequenceSpec(tuple(elements), repetitions, "custom")


def format_sequence(spec: SequenceSpec) -> str:
    tokens = []
    for e in spec.elements:
        if isinstance(e, EvolveForward):
            tokens.append(f"fwd:{e.duration!r}")
        elif isinstance(e, EvolveReverse):
            tokens.append(f"rev:{e.duration!r}")
        else:
            tokens.append("p" + _SHIFT_MODE[type(e)])
    return ",".join(tokens)


@dataclass
class RunResult:
    state: object
    trace: list = field(default_factory=list)
    frame: str = "identity"
    engine: str = "phasespace"


class _FockExecutor:
    def __init__(self, params, config):
        self.config = config
        self.ops = fock.build_operators(config)
        self.forward = fock.Propagator(fock.hamiltonian_plus(params, self.ops))
        self.reverse = fock.Propagator(fock.hamiltonian_minus(params, self.ops))
        self.shifts = {m: fock.mode_phase_op(self.ops, m, math.pi) for m in "abn"}

    def apply(self, element, state):
        if isinstance(element, EvolveForward):
            return fock.propagate_static(state, self.forward, element.duration)
        if isinstance(element, EvolveReverse):
            return fock.propagate_static(state, self.reverse, element.duration)
        return fock.FockState(self.shifts[_SHIFT_MODE[type(element)]] @ state.vector, self.config)

    @staticmethod
    def diagnostics(state):
        return {"norm": state.norm(), "leakage": fock.leakage(state)}


class _PhaseSpaceExecutor:
    def __init__(self, params):
        self.params = params

    def apply(self, element, state):
        if isinstance(element, EvolveForward):
            return ps.apply_u_plus(state, self.params, element.duration)
        if isinstance(element, EvolveReverse):
            return ps.apply_u_minus(state, self.params, element.duration)
        return ps.shift_state(state, _SHIFT_MODE[type(element)], math.pi)

    @staticmethod
    def diagnostics(state):
        norm = math.sqrt(abs(state.c_up) ** 2 + abs(state.c_down) ** 2)
        return {"norm": norm, "max_amplitude": state.max_amplitude}


def run(
    spec: SequenceSpec,
    initial_state,
    params: PhysicalParams,
    engine: str = "phasespace",
    fock_config: fock.FockConfig | None = None,
) -> RunResult:
    """Apply ``spec`` (elements in time order, ``repetitions`` times).

    ``initial_state`` is a ``HybridState`` for either engine (it is expanded
    into the Fock basis for ``engine='fock'``) or a ``FockState`` for the
    oracle. The returned trace has one diagnostics dict per applied element;
    ``frame`` names the net pi phase-shift frame left on the modes.
    """
    if engine == "phasespace":
        if not isinstance(initial_state, ps.HybridState):
            raise TypeError("phasespace engine needs a HybridState")
        executor = _PhaseSpaceExecutor(params)
        state = initial_state
    elif engine == "fock":
        config = fock_config or fock.FockConfig()
        executor = _FockExecutor(params, config)
        if isinstance(initial_state, ps.HybridState):
            state = ps.to_fock(initial_state, config)
        else:
            state = initial_state
    else:
        raise ValueError(f"unknown engine {engine!r}")

    parity = np.zeros(2, dtype=int)
    trace = []
    index = 0
    for rep in range(spec.repetitions):
        for element in spec.elements:
            try:
                state = executor.apply(element, state)
            except fock.TruncationError as exc:
                exc.element_index = index
                raise
            mode = _SHIFT_MODE.get(type(element))
            if mode in ("a", "n"):
                parity[0] ^= 1
            if mode in ("b", "n"):
                parity[1] ^= 1
            trace.append({"index": index, "repetition": rep, "element": type(element).__name__,
                          **executor.diagnostics(state)})
            index += 1
    return RunResult(state, trace, _FRAME_NAMES[tuple(parity)], engine)
