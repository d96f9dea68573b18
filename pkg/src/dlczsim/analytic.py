"""Closed-form results for the repeater chain.

Perturbative Bell parameters are leading order in the distance
``L = L/L0 = 2**n`` and in the individual error sources; rates assume pure
photon loss with negligible multi-photon events.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

SQRT2 = math.sqrt(2.0)
SQRT8 = 2.0 * SQRT2
# Bell deficit 1 - S/(2 sqrt 2) at the classical bound S = 2
CLASSICAL_DEFICIT = 1.0 - 1.0 / SQRT2
LN2 = math.log(2.0)


class Detector(str, enum.Enum):
    COUNTING = "counting"
    NON_COUNTING = "non_counting"


class PerturbativeWarning(UserWarning):
    """A closed form was evaluated outside its perturbative regime."""


# ---------------------------------------------------------------------------
# Ideal-memory recurrence
# ---------------------------------------------------------------------------


def f_g_recurrence(f: float, g: float) -> tuple[float, float]:
    """One connection step of the (f, g) parametrization of the chain state."""
    if not 0 < f <= 1:
        raise ValueError(f"f must lie in (0, 1], got {f}")
    f_next = f / (2 - f)
    g_next = (4 * f * (4 + g) + 11 * f**3 - 20 * f**2 - 4) / (2 * f * (f - 2) ** 2)
    return f_next, g_next


def f_g_solution(n: int) -> tuple[float, float]:
    """Closed-form ``(f_n, g_n)`` starting from ``f_0 = 1/2, g_0 = 0``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = 2.0**n
    f = 1.0 / (x + 1.0)
    g = (-2.0 * x**3 + 6.0 * x**2 + 5.0 * x - 9.0) / (6.0 * (x + 1.0) ** 2)
    return f, g


def s_exact_c1(f: float, g: float, c1: float) -> float:
    """Bell parameter of the (f, g, c1) chain state, exact in c1."""
    num = (f - c1**2 * g) ** 2
    den = f**2 - (2 * f * g - (2 * f - 1) ** 2) * c1**2 - ((2 * f - 1 + g) ** 2 - 2 * g**2) * c1**4
    if den <= 0:
        raise ValueError("denominator is not positive; c1 is far outside the physical range")
    return SQRT8 * num / den


def s_ideal_memory_c1(L: float, c1: float) -> float:
    """Leading-order Bell parameter for the c1 memory without loss: ``2 sqrt2 (1 - (L-1)^2 c1^2)``."""
    return SQRT8 * (1.0 - (L - 1.0) ** 2 * c1**2)


# ---------------------------------------------------------------------------
# Perturbative Bell parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerturbativeInputs:
    """Error sources for the closed-form Bell parameters.

    Attributes:
        L: chain length in elementary segments (``2**n``).
        p_gen, p_con: generation and connection loss.
        c1, c2, c3: memory coefficients (only ``|c2|`` matters).
        n_dc: mean dark counts per detector per window.
        r: down-converter squeezing parameter.
        detector: counting or non-counting detectors.
    """

    L: float = 1.0
    p_gen: float = 0.0
    p_con: float = 0.0
    c1: float = 0.0
    c2: complex = 0.0
    c3: float = 0.0
    n_dc: float = 0.0
    r: float = 0.0
    detector: Detector = Detector.NON_COUNTING

    def __post_init__(self):
        object.__setattr__(self, "detector", Detector(self.detector))
        if self.L < 1:
            raise ValueError("L must be at least 1")
        for name in ("p_gen", "p_con"):
            v = getattr(self, name)
            if not 0 <= v < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")
        if self.n_dc < 0 or self.r < 0:
            raise ValueError("n_dc and r must be non-negative")

    @property
    def counting(self) -> bool:
        return self.detector is Detector.COUNTING


@dataclass(frozen=True)
class PerturbativeResult:
    """Closed-form Bell parameter with its validity assessment."""

    S: float
    deficit: float
    valid: bool
    warnings: tuple[str, ...] = field(default=())


def _result(deficit: float, inputs: PerturbativeInputs, small: dict) -> PerturbativeResult:
    notes = []
    if deficit >= 1:
        notes.append(f"error term {deficit:.3g} is not small")
    for name, value in small.items():
        if value >= 1:
            notes.append(f"{name} = {value:.3g} is not small")
    if inputs.n_dc >= 1 - inputs.p_con:
        notes.append("dark counts are not small compared to the transmission 1 - p_con")
    for note in notes:
        warnings.warn(note, PerturbativeWarning, stacklevel=3)
    return PerturbativeResult(SQRT8 * (1.0 - deficit), deficit, not notes, tuple(notes))


def memory_darkcount_deficit(x: PerturbativeInputs) -> float:
    L, p = x.L, x.p_con
    noise = abs(x.c2) ** 2 + x.c3**2 + x.n_dc / (1.0 - p)
    if x.counting:
        return L**2 * p**2 * x.c1**2 + 8 * L**2 * p * noise
    return (L - 1) ** 2 * (1 + p) ** 2 * x.c1**2 + 4 * L**2 * (1 + p) * noise


def s_memory_darkcount(x: PerturbativeInputs) -> PerturbativeResult:
    """Bell parameter for memory imperfections and connection dark counts."""
    return _result(memory_darkcount_deficit(x), x, {"c1": abs(x.c1), "c2": abs(x.c2), "c3": x.c3})


def finite_squeezing_deficit(x: PerturbativeInputs) -> float:
    L = x.L
    if x.counting:
        return 8 * L**2 * x.p_gen * x.p_con * x.r**2
    return 8 * L**2 * (1 + x.p_gen) / 2 * (1 + x.p_con) / 2 * x.r**2


def s_finite_squeezing(x: PerturbativeInputs) -> PerturbativeResult:
    """Bell parameter for multi-pair emission at squeezing ``r``."""
    return _result(finite_squeezing_deficit(x), x, {"r": x.r})


def generation_darkcount_deficit(x: PerturbativeInputs) -> float:
    L, pg = x.L, x.p_gen
    if x.counting:
        return 8 * L**2 * pg / (1 - pg) * x.n_dc
    return 4 * L**2 * (1 + pg) / (1 - pg) * x.n_dc


def s_generation_darkcount(x: PerturbativeInputs) -> PerturbativeResult:
    """Bell parameter for dark counts during entanglement generation."""
    return _result(generation_darkcount_deficit(x), x, {})


def summed_deficit(x: PerturbativeInputs, connection_n_dc: float = 0.0, generation_n_dc: float = 0.0) -> float:
    """Sum of the independent deficits (memory, squeezing, both dark-count sources)."""
    mem = memory_darkcount_deficit(
        PerturbativeInputs(x.L, x.p_gen, x.p_con, x.c1, x.c2, x.c3, connection_n_dc, 0.0, x.detector)
    )
    sq = finite_squeezing_deficit(x)
    gen = generation_darkcount_deficit(
        PerturbativeInputs(x.L, x.p_gen, x.p_con, 0, 0, 0, generation_n_dc, 0.0, x.detector)
    )
    return mem + sq + gen


# ---------------------------------------------------------------------------
# Thresholds
# ---------------------------------------------------------------------------


class Threshold(str, enum.Enum):
    SQUEEZING = "squeezing"
    GEN_DARKCOUNT = "gen_darkcount"
    TWO_PASS_XI = "two_pass_xi"
    ONE_PASS_S = "one_pass_s"


@dataclass(frozen=True)
class ThresholdResult:
    value: float
    degenerate: bool = False
    note: str = ""


def _distance(coefficient: float) -> ThresholdResult:
    """Solve ``coefficient * L^2 = classical deficit`` for L."""
    if coefficient <= 0:
        return ThresholdResult(math.inf, True, "error term vanishes: no distance limit")
    L = math.sqrt(CLASSICAL_DEFICIT / coefficient)
    if L < 1:
        return ThresholdResult(L, True, "S < 2 already for a single segment")
    return ThresholdResult(L)


def max_distance_squeezing(r: float, p_gen: float = 0.0, p_con: float = 0.0, detector=Detector.NON_COUNTING) -> ThresholdResult:
    """Largest ``L/L0`` with ``S >= 2`` for finite squeezing alone."""
    x = PerturbativeInputs(1.0, p_gen, p_con, r=r, detector=detector)
    return _distance(finite_squeezing_deficit(x))


def max_distance_gen_darkcount(n_dc: float, p_gen: float = 0.0, detector=Detector.NON_COUNTING) -> ThresholdResult:
    """Largest ``L/L0`` with ``S >= 2`` for generation dark counts alone."""
    if math.isinf(n_dc):
        return ThresholdResult(0.0, True, "infinite dark counts: no entanglement at any distance")
    x = PerturbativeInputs(1.0, p_gen, 0.0, n_dc=n_dc, detector=detector)
    return _distance(generation_darkcount_deficit(x))


def max_distance_two_pass(xi: float, p_con: float = 0.0) -> ThresholdResult:
    """Largest ``L/L0`` for the two-pass memory with wall reflection ``xi`` (non-counting)."""
    return _distance(4 * (1 + p_con) * 0.9 * xi)


def two_pass_xi_threshold(L: float, p_con: float = 0.0) -> float:
    """Reflection coefficient at which a chain of length L reaches ``S = 2`` (non-counting)."""
    return CLASSICAL_DEFICIT / (0.9 * 4 * (1 + p_con) * L**2)


def one_pass_s_threshold(L: float, p_con: float = 0.0) -> float:
    """Atomic squeezing factor at which a chain of length L reaches ``S = 2`` (non-counting)."""
    return CLASSICAL_DEFICIT / ((1 + p_con) * L**2)


def to_decibel(s: float) -> float:
    return 10.0 * math.log10(s)


def max_distance(which: Threshold | str, **params) -> ThresholdResult:
    """Dispatch to the threshold for one error source.

    ``squeezing``: ``r, p_gen, p_con, detector``; ``gen_darkcount``:
    ``n_dc, p_gen, detector``; ``two_pass_xi``: ``xi, p_con`` (returns L);
    ``one_pass_s``: ``L, p_con`` (returns the squeezing factor s).
    """
    which = Threshold(which)
    if which is Threshold.SQUEEZING:
        return max_distance_squeezing(**params)
    if which is Threshold.GEN_DARKCOUNT:
        return max_distance_gen_darkcount(**params)
    if which is Threshold.TWO_PASS_XI:
        return max_distance_two_pass(**params)
    return ThresholdResult(one_pass_s_threshold(**params))


def squeezing_for_deficit(deficit: float, L: float, p_gen: float, p_con: float, detector=Detector.NON_COUNTING) -> float:
    """Squeezing r that produces a given Bell deficit at distance L (inverse of the squeezing formula)."""
    x = PerturbativeInputs(L, p_gen, p_con, r=1.0, detector=detector)
    per_r2 = finite_squeezing_deficit(x)
    if per_r2 <= 0:
        raise ValueError("squeezing does not affect S for these parameters")
    return math.sqrt(deficit / per_r2)


@dataclass(frozen=True)
class Dominance:
    flag: str
    ratio: float


def cross_term_dominance(n_dc: float, r: float) -> Dominance:
    """Whether dark-count x memory cross terms spoil the summed independent formulas.

    The relative size of the cross terms is ``n_dc / r^2``.
    """
    if r <= 0:
        raise ValueError("r must be positive")
    ratio = n_dc / r**2
    return Dominance("dominant" if ratio > 1 else "negligible", ratio)


# ---------------------------------------------------------------------------
# Loss-only rates
# ---------------------------------------------------------------------------


def dilog(x: float) -> float:
    """Real dilogarithm ``Li2(x) = -int_0^x ln(1-t)/t dt`` for ``x <= 1``."""
    x = float(x)
    if x > 1:
        raise ValueError(f"real dilogarithm is undefined for x > 1 (got {x})")
    if x == 1:
        return math.pi**2 / 6
    if x == 0:
        return 0.0
    if x < -1:
        # inversion
        return -math.pi**2 / 6 - 0.5 * math.log(-x) ** 2 - dilog(1.0 / x)
    if x < -0.5:
        # Landen: maps [-1, -0.5) into [1/3, 1/2)
        return -dilog(x / (x - 1.0)) - 0.5 * math.log1p(-x) ** 2
    if x > 0.5:
        # reflection
        return math.pi**2 / 6 - math.log(x) * math.log1p(-x) - dilog(1.0 - x)
    total, term, k = 0.0, x, 1
    while True:
        inc = term / (k * k)
        total += inc
        if abs(inc) < 1e-18 * max(1.0, abs(total)):
            return total
        k += 1
        term *= x


def eta_solution(n: int, p_con: float, detector=Detector.COUNTING) -> float:
    """Weight of the single-excitation component after n loss-only connections."""
    if Detector(detector) is Detector.COUNTING:
        return 1.0 / (1.0 - p_con + 2.0**n * p_con)
    return 2.0 / ((1.0 - p_con) + 2.0**n * (1.0 + p_con))


def eta_recurrence(eta: float, p_con: float, detector=Detector.COUNTING) -> float:
    t = 1.0 - p_con
    if Detector(detector) is Detector.COUNTING:
        return eta / (2.0 - eta * t)
    return 2.0 * eta / (4.0 - eta * t)


def connection_success(eta: float, p_con: float, detector=Detector.COUNTING) -> float:
    """Heralding probability when connecting two loss-only pairs of weight eta."""
    t = 1.0 - p_con
    if Detector(detector) is Detector.COUNTING:
        return 0.5 * t * eta * (2.0 - eta * t)
    return 0.25 * t * eta * (4.0 - eta * t)


def eta_product(n: int, p_con: float, detector=Detector.COUNTING) -> float:
    """``prod_{i=1..n} eta_i`` evaluated term by term."""
    return math.exp(log_eta_product(n, p_con, detector))


def log_eta_product(n: int, p_con: float, detector=Detector.COUNTING) -> float:
    """Natural log of :func:`eta_product`; finite where the product underflows."""
    return sum(math.log(eta_solution(i, p_con, detector)) for i in range(1, n + 1))


def eta_product_estimate(n: int, p_con: float) -> float:
    """Dilogarithm estimate of ``prod_{i=1..n} eta_i`` for counting detectors."""
    return math.exp(log_eta_product_estimate(n, p_con))


def log_eta_product_estimate(n: int, p_con: float) -> float:
    """Natural log of :func:`eta_product_estimate`."""
    if not 0 <= p_con < 1:
        raise ValueError("p_con must lie in [0, 1)")
    if p_con == 0:
        return 0.0
    a = p_con / (p_con - 1.0)
    return (dilog(2.0 ** (n + 0.5) * a) - dilog(SQRT2 * a)) / LN2 - n * math.log1p(-p_con)


def _rate_prefactor(r, p_gen):
    return 2.0 / 3.0 * r**2 * (1.0 - p_gen)


def rate_closed_form(r: float, p_gen: float, p_con: float, L: float, detector=Detector.COUNTING) -> float:
    """Loss-only pair rate in units of ``1/tau`` (continuous in L)."""
    if not 0 <= p_con < 1:
        raise ValueError("p_con must lie in [0, 1)")
    detector = Detector(detector)
    if detector is Detector.COUNTING:
        a, exponent = p_con / (p_con - 1.0), math.log2(3.0)
    else:
        a, exponent = (p_con + 1.0) / (p_con - 1.0), math.log2(1.5)
    R_prime = math.exp((dilog(SQRT2 * L * a) - dilog(SQRT2 * a)) / LN2)
    return _rate_prefactor(r, p_gen) * L ** (-exponent) * R_prime


def rate_loss_only(r: float, p_gen: float, p_con: float, n: int, detector=Detector.COUNTING) -> float:
    """Loss-only pair rate (units of ``1/tau``) from the simplified rate with exact eta products."""
    detector = Detector(detector)
    t = 1.0 - p_con
    if detector is Detector.COUNTING:
        return 2.0 / 3.0 ** (n + 1) * r**2 * (1 - p_gen) * t**n * eta_product(n, p_con, detector)
    return (2.0 / 3.0) ** (n + 1) * r**2 * (1 - p_gen) * t**n * 2.0**-n * eta_product(n, p_con, detector)


def loss_only_q_list(r: float, p_gen: float, p_con: float, n: int, detector=Detector.COUNTING) -> tuple[list[float], float]:
    """Success probabilities ``q_0..q_n`` and ``q_ps`` of a loss-only chain."""
    q = [2.0 * r**2 * (1.0 - p_gen)]
    for i in range(n):
        q.append(connection_success(eta_solution(i, p_con, detector), p_con, detector))
    q_ps = eta_solution(n, p_con, detector) ** 2 / 2.0
    return q, q_ps
