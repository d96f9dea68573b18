"""Concrete quantum-memory models expressed as reduced five-coefficient maps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .bogoliubov import BogoliubovError, ReducedMemory, reduce_memory

# lowest-order wall-reflection noise of the two-pass memory at kappa = 2
REFLECTION_NOISE_FACTOR = 0.9
REFLECTION_KAPPA = 2.0


@dataclass(frozen=True)
class TwoPassParams:
    """Double-pass light-atom swap memory.

    Attributes:
        kappa: light-atom coupling strength.
        xi: reflection coefficient at the cell walls, in [0, 1).
    """

    kappa: float = 2.0
    xi: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not 0 <= self.xi < 1:
            raise ValueError(f"xi must lie in [0, 1), got {self.xi}")


@dataclass(frozen=True)
class OnePassParams:
    """Single-pass memory with measurement and feedback.

    Attributes:
        kappa: coupling strength.
        g: feedback gain.
        s: factor by which the atomic X-quadrature variance is squeezed
            before storage (s < 1 is squeezed below vacuum).
    """

    kappa: float = 1.0
    g: float = 1.0
    s: float = 1.0

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"squeezing factor s must be positive, got {self.s}")


def ideal() -> ReducedMemory:
    """The perfect memory ``a' = a``."""
    return ReducedMemory(1.0, 0.0, 0.0, 0.0, 0.0)


def generic(b1: float, b2: float = 0.0, c1: float = 0.0, c2: complex = 0.0, c3: float = 0.0) -> ReducedMemory:
    """Memory from explicit coefficients; validated on construction."""
    return ReducedMemory(b1, b2, c1, c2, c3)


def c1_memory(c1: float) -> ReducedMemory:
    """Memory that only mixes in the conjugate of the stored mode: ``b1 = sqrt(1 + c1^2)``."""
    return ReducedMemory(math.sqrt(1.0 + c1 * c1), 0.0, c1, 0.0, 0.0)


def two_pass(p: TwoPassParams) -> ReducedMemory:
    """Reduced map of the double-pass swap memory.

    Without reflections the retrieved mode is
    ``(e^{-k^2} - 1) a_L - e^{-k^2/2} sqrt(1 - e^{-k^2}) a_A + e^{-k^2/2} a_ret``,
    a passive map. Reflections (only modelled at ``kappa = 2``) add noise
    ``c3 = sqrt(0.9 xi)``; b1 is rescaled to keep the map unitary.

    Raises:
        BogoliubovError: for ``xi > 0`` with ``kappa != 2``.
    """
    e = math.exp(-p.kappa**2)
    b1 = e - 1.0
    b_aux = [-math.sqrt(e) * math.sqrt(1.0 - e), math.sqrt(e)]
    mem = reduce_memory(b1, 0.0, b_aux, [0.0, 0.0])
    if p.xi == 0:
        return mem
    if p.kappa != REFLECTION_KAPPA:
        raise BogoliubovError("the reflection noise model is only available for kappa = 2")
    c3 = math.sqrt(REFLECTION_NOISE_FACTOR * p.xi)
    b1_sq = 1.0 + c3**2 - mem.b2**2
    return ReducedMemory(math.copysign(math.sqrt(b1_sq), mem.b1), mem.b2, 0.0, 0.0, c3, input_phase=mem.input_phase)


def one_pass(p: OnePassParams) -> ReducedMemory:
    """Reduced map of the single-pass memory with a squeezed atomic mode.

    The retrieved mode is ``(1 - kg/2) a_A + (kg/2) a_A^dag + (k+g)/2 a_L
    - (k-g)/2 a_L^dag``, with ``a_A = cosh(rho) A - sinh(rho) A^dag`` for a
    vacuum mode ``A`` and ``e^{-2 rho} = s``. At ``kappa = g = 1`` the atomic
    contribution is ``sqrt(s)/2 (A + A^dag)``: b2 and c2 act on one shared
    auxiliary mode.
    """
    k, g = p.kappa, p.g
    rho = -0.5 * math.log(p.s)
    ch, sh = math.cosh(rho), math.sinh(rho)
    b_atom = (1 - k * g / 2) * ch - (k * g / 2) * sh
    c_atom = (k * g / 2) * ch - (1 - k * g / 2) * sh
    return reduce_memory(0.5 * (k + g), -0.5 * (k - g), [b_atom], [c_atom])


MEMORY_KINDS = ("ideal", "generic", "c1", "two_pass", "one_pass")


def from_config(values: Mapping[str, object]) -> ReducedMemory:
    """Build a memory from flat config keys.

    ``memory.kind`` selects the model; the remaining ``memory.*`` keys are
    its fields (``b1 b2 c1 c2 c3`` for generic, ``c1`` for the c1 family,
    ``kappa xi`` for two_pass, ``kappa g s`` for one_pass).
    """
    fields = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith("memory.")}
    kind = str(fields.pop("kind", "ideal"))
    allowed = {
        "ideal": set(),
        "generic": {"b1", "b2", "c1", "c2", "c3"},
        "c1": {"c1"},
        "two_pass": {"kappa", "xi"},
        "one_pass": {"kappa", "g", "s"},
    }
    if kind not in allowed:
        raise ValueError(f"unknown memory.kind {kind!r}; expected one of {', '.join(MEMORY_KINDS)}")
    extra = set(fields) - allowed[kind]
    if extra:
        raise ValueError(f"memory.kind = {kind} does not accept {', '.join(sorted('memory.' + e for e in extra))}")
    if kind == "ideal":
        return ideal()
    if kind == "generic":
        return ReducedMemory.from_config(fields)
    if kind == "c1":
        return c1_memory(float(fields.get("c1", 0.0)))
    if kind == "two_pass":
        return two_pass(TwoPassParams(**{k: float(v) for k, v in fields.items()}))
    return one_pass(OnePassParams(**{k: float(v) for k, v in fields.items()}))


def to_config(mem: ReducedMemory) -> dict[str, str]:
    """Flat ``memory.*`` keys reproducing ``mem`` as a generic memory."""
    c2 = mem.c2
    return {
        "memory.kind": "generic",
        "memory.b1": repr(mem.b1),
        "memory.b2": repr(mem.b2),
        "memory.c1": repr(mem.c1),
        "memory.c2": repr(complex(c2)),
        "memory.c3": repr(mem.c3),
    }
