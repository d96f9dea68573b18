"""Repeater pipeline: generation, nested connection, postselected Bell test, rate.

Every optical step is a Gaussian circuit with photon detection, turned into
a transfer tensor by :mod:`dlczsim.genfun`. Light modes are truncated at
``cutoff`` photons (two by default, i.e. second order in the squeezing).
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import genfun
from .bogoliubov import (
    ReducedMemory,
    augment_dark_counts,
    beam_splitter,
    dark_count_noise,
    lossy_channel,
    memory_element,
    two_mode_squeeze,
)
from .fockstate import Detection, FockDensityMatrix, tensor

ZERO_PROBABILITY = 1e-300
# elementary links drawn per Monte Carlo chunk (bounds memory)
MC_LEAF_BUDGET = 4_000_000
# total elementary draws above which the pooled sampler is used
MC_EXACT_BUDGET = 100_000_000
MC_POOL_MIN = 200_000
SQRT8 = 2.0 * math.sqrt(2.0)

# fixed analyser settings (left phase, right phase) and their signs in S
BELL_SETTINGS = (
    (math.pi / 2, math.pi / 4, +1),
    (0.0, math.pi / 4, +1),
    (0.0, -math.pi / 4, +1),
    (math.pi / 2, -math.pi / 4, -1),
)


class ZeroProbabilityError(ArithmeticError):
    """The conditioning event has (numerically) zero probability."""


class DetectorClass(str, enum.Enum):
    COUNTING = "counting"
    NON_COUNTING = "non_counting"

    @property
    def click(self) -> Detection:
        return Detection.COUNTING if self is DetectorClass.COUNTING else Detection.NONCOUNTING


class DarkCountPath(str, enum.Enum):
    """Where connection dark counts are injected.

    ``memory`` folds the noise into the memory map (scaled up by the loss
    that follows); ``detector`` places explicit thermal sources in front of
    the detectors. Both describe the same physics.
    """

    MEMORY = "memory"
    DETECTOR = "detector"


@dataclass(frozen=True)
class RepeaterParams:
    """Physical and numerical parameters of a homogeneous repeater chain.

    Attributes:
        r: down-converter squeezing parameter.
        p_gen: loss probability in the generation detector arms.
        p_con: loss probability in the connection detector arms.
        n_dc_gen: mean dark counts per detector per window in generation.
        n_dc_con: mean dark counts per detector per window in connection.
        detector: counting or non-counting detectors (connection and generation).
        n: nesting level; the chain spans ``2**n`` elementary segments.
        memory: reduced memory map applied in every connection.
        tau: elementary communication time ``L0 / c`` in seconds.
        cutoff: photons kept per light mode.
        ps_detector: detector class for postselection (default: counting,
            which reproduces the closed-form Bell parameter of the chain).
        ps_loss: loss in front of the postselection detectors.
        dark_count_path: injection point of connection dark counts.
    """

    r: float = 0.0
    p_gen: float = 0.0
    p_con: float = 0.0
    n_dc_gen: float = 0.0
    n_dc_con: float = 0.0
    detector: DetectorClass = DetectorClass.NON_COUNTING
    n: int = 0
    memory: ReducedMemory = field(default_factory=lambda: ReducedMemory(1.0, 0.0, 0.0, 0.0, 0.0))
    tau: float = 1.0
    cutoff: int = 2
    ps_detector: DetectorClass | None = None
    ps_loss: float = 0.0
    dark_count_path: DarkCountPath = DarkCountPath.MEMORY

    def __post_init__(self):
        object.__setattr__(self, "detector", DetectorClass(self.detector))
        object.__setattr__(self, "dark_count_path", DarkCountPath(self.dark_count_path))
        if self.ps_detector is not None:
            object.__setattr__(self, "ps_detector", DetectorClass(self.ps_detector))
        if self.r < 0:
            raise ValueError(f"r must be non-negative, got {self.r}")
        for name in ("p_gen", "p_con", "ps_loss"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("n_dc_gen", "n_dc_con"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.n < 0 or int(self.n) != self.n:
            raise ValueError(f"nesting level must be a non-negative integer, got {self.n}")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.cutoff < 1:
            raise ValueError("cutoff must be at least 1")
        if self.r > 0 and self.cutoff < 2:
            raise ValueError("finite squeezing needs cutoff >= 2")

    @property
    def postselection_detector(self) -> DetectorClass:
        return self.ps_detector if self.ps_detector is not None else DetectorClass.COUNTING

    @property
    def L_over_L0(self) -> int:
        return 2**self.n


@dataclass(frozen=True)
class BellResult:
    """Outcome of the postselected CHSH test.

    Attributes:
        S: Bell parameter.
        E: correlation per setting.
        P_same, P_diff: conditional probabilities per setting.
        q_ps: probability of one click at each end, averaged over settings.
        settings: the (left, right) phases used.
    """

    S: float
    E: tuple[float, ...]
    P_same: tuple[float, ...]
    P_diff: tuple[float, ...]
    q_ps: float
    settings: tuple[tuple[float, float], ...]


@dataclass
class ChainResult:
    rho: FockDensityMatrix
    q: list[float]
    states: list[FockDensityMatrix]
    diagnostics: list[dict]


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=64)
def _generation_tensors(r, p_gen, n_dc, detector: DetectorClass, cutoff):
    # modes: memory arms 0, 2; detector arms 1, 3; loss aux 4, 5; noise aux 6..9
    elements = [lossy_channel(p_gen, 1, 4), lossy_channel(p_gen, 3, 5), beam_splitter((1, 3), 0.5)]
    mode_count = 6
    if n_dc > 0:
        elements += [dark_count_noise(n_dc, 1, (6, 7)), dark_count_noise(n_dc, 3, (8, 9))]
        mode_count = 10
    prefix = [two_mode_squeeze((0, 1), r), two_mode_squeeze((2, 3), r)]
    click = detector.click
    pattern = {1: click, 3: Detection.DARK}
    mirrored = {1: Detection.DARK, 3: click}
    kw = dict(squeeze_prefix=prefix, mode_count=mode_count)
    state = genfun.transfer_tensor(elements, pattern, (0, 2), (), 0, cutoff, **kw)
    probs = [genfun.transfer_tensor(elements, p, (), (), 0, 0, **kw) for p in (pattern, mirrored)]
    return state, probs


def generate(params: RepeaterParams) -> tuple[FockDensityMatrix, float]:
    """Heralded elementary entanglement.

    Two down-converters each send one mode to a memory and one through a
    lossy arm onto a balanced beam splitter; a click in one detector and
    none in the other heralds the state of the memory arms.

    Returns:
        The normalized conditional two-mode state and the probability of a
        heralding event (either detector clicking alone).
    """
    state, probs = _generation_tensors(params.r, params.p_gen, params.n_dc_gen, params.detector, params.cutoff)
    q0 = sum(genfun.event_probability(t) for t in probs)
    if q0 < ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"generation never succeeds (q0 = {q0:.3e})")
    rho = genfun.apply_tensor(state)
    if rho.trace() < ZERO_PROBABILITY:
        raise ZeroProbabilityError("heralded state has zero weight inside the cutoff")
    return rho.normalize(), q0


# ---------------------------------------------------------------------------
# Connection
# ---------------------------------------------------------------------------


def _connection_circuit(mem: ReducedMemory, p_con, n_dc, path: DarkCountPath):
    # modes: outer-left 0, inner-left 1, inner-right 2, outer-right 3,
    # memory aux 4-7, loss aux 8-9, detector noise aux 10-13
    if n_dc > 0 and path is DarkCountPath.MEMORY:
        if p_con >= 1:
            raise ZeroProbabilityError("dark counts cannot be folded into the memory when p_con = 1")
        mem = augment_dark_counts(mem, n_dc / (1.0 - p_con))
    elements = [
        memory_element(mem, 1, (4, 5)),
        memory_element(mem, 2, (6, 7)),
        lossy_channel(p_con, 1, 8),
        lossy_channel(p_con, 2, 9),
        beam_splitter((1, 2), 0.5),
    ]
    mode_count = 10
    if n_dc > 0 and path is DarkCountPath.DETECTOR:
        elements += [dark_count_noise(n_dc, 1, (10, 11)), dark_count_noise(n_dc, 2, (12, 13))]
        mode_count = 14
    return elements, mode_count


@functools.lru_cache(maxsize=64)
def _connection_tensors(mem: ReducedMemory, p_con, n_dc, detector: DetectorClass, path: DarkCountPath, cutoff):
    elements, mode_count = _connection_circuit(mem, p_con, n_dc, path)
    click = detector.click
    pattern = {1: click, 2: Detection.DARK}
    mirrored = {1: Detection.DARK, 2: click}
    inputs = (0, 1, 2, 3)
    state = genfun.transfer_tensor(elements, pattern, (0, 3), inputs, cutoff, cutoff, mode_count=mode_count)
    probs = [genfun.transfer_tensor(elements, p, (), inputs, cutoff, 0, mode_count=mode_count) for p in (pattern, mirrored)]
    return state, probs


def _fix_phase(rho: FockDensityMatrix) -> FockDensityMatrix:
    """Rotate the right mode so that <10|rho|01> is real and non-negative."""
    d = rho.cutoff + 1
    coh = rho.element((1, 0), (0, 1))
    if abs(coh) == 0:
        return rho
    theta = -np.angle(coh)
    # rho -> U rho U^dag with U = exp(-i theta n_right); <10|.|01> picks up e^{+i theta}
    n_right = np.tile(np.arange(d), d)
    u = np.exp(-1j * theta * n_right)
    return FockDensityMatrix(u[:, None] * rho.elements * u.conj()[None, :], 2, rho.cutoff, rho.normalized)


def connect(
    rho_left: FockDensityMatrix,
    rho_right: FockDensityMatrix,
    params: RepeaterParams,
    *,
    fix_phase: bool = True,
) -> tuple[FockDensityMatrix, float]:
    """Entanglement swapping of two pairs through their memories.

    The inner mode of each pair is transferred through a memory, sent
    through a lossy channel, and the two are mixed on a balanced beam
    splitter; one click and one dark detector herald success.

    Args:
        rho_left, rho_right: two-mode states (outer, inner) and (inner, outer).
        params: chain parameters (memory, p_con, dark counts, detector class).
        fix_phase: apply the local phase correction that makes the output
            coherence ``<10|rho|01>`` real and non-negative. This does not
            change the Bell parameter.

    Returns:
        Normalized state of the two outer modes and the heralding probability.
    """
    if rho_left.cutoff != rho_right.cutoff or rho_left.mode_count != 2 or rho_right.mode_count != 2:
        raise ValueError("connection needs two-mode states of equal cutoff")
    state, probs = _connection_tensors(
        params.memory, params.p_con, params.n_dc_con, params.detector, params.dark_count_path, rho_left.cutoff
    )
    rho_in = tensor(rho_left, rho_right)
    q = sum(genfun.event_probability(t, rho_in) for t in probs)
    if q < ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"connection never succeeds (q = {q:.3e})")
    out = genfun.apply_tensor(state, rho_in)
    if out.trace() < ZERO_PROBABILITY:
        raise ZeroProbabilityError("connected state has zero weight inside the cutoff")
    out = out.normalize()
    return (_fix_phase(out) if fix_phase else out), q


def run_chain(params: RepeaterParams, rho0: FockDensityMatrix | None = None) -> ChainResult:
    """Generate and connect ``params.n`` times (identical segments).

    Args:
        params: chain parameters.
        rho0: optional elementary state; if omitted it is generated and q0
            is the heralding probability, otherwise q0 is reported as 1.

    Returns:
        ChainResult with the final state, success probabilities q_0..q_n,
        all intermediate states and per-step diagnostics.
    """
    if rho0 is None:
        rho, q0 = generate(params)
    else:
        rho, q0 = rho0, 1.0
    states, qs = [rho], [q0]
    diagnostics = [{"level": 0, "q": q0, "p_vacuum": float(rho.populations()[0, 0])}]
    for level in range(1, params.n + 1):
        rho, q = connect(rho, rho, params)
        states.append(rho)
        qs.append(q)
        diagnostics.append({"level": level, "q": q, "p_vacuum": float(rho.populations()[0, 0])})
    return ChainResult(rho, qs, states, diagnostics)


# ---------------------------------------------------------------------------
# Postselected Bell test
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=16)
def _bell_tensors(detector: DetectorClass, ps_loss: float, cutoff: int):
    # input modes: a1 0, b1 1, a2 2, b2 3 (copy k holds (a_k, b_k)); loss aux 4-7
    elements = [lossy_channel(ps_loss, m, 4 + m) for m in range(4)]
    elements += [beam_splitter((0, 2), 0.5), beam_splitter((1, 3), 0.5)]
    click, dark = detector.click, Detection.DARK
    tensors = {}
    for left_upper in (True, False):
        for right_upper in (True, False):
            pattern = {
                0: click if left_upper else dark,
                2: dark if left_upper else click,
                1: click if right_upper else dark,
                3: dark if right_upper else click,
            }
            t = genfun.transfer_tensor(elements, pattern, (), (0, 1, 2, 3), cutoff, 0, mode_count=8)
            tensors[(left_upper, right_upper)] = t.M[0, 0]
    return tensors


def _phase_vector(cutoff: int, left: float, right: float) -> np.ndarray:
    d = cutoff + 1
    n = np.indices((d,) * 4).reshape(4, -1)
    # phase shifts on a1 and b1
    return np.exp(1j * (left * n[0] + right * n[1]))


def pattern_probabilities(rho: FockDensityMatrix, params: RepeaterParams, left: float, right: float) -> dict:
    """Probabilities of the four one-click-per-end patterns at given analyser phases."""
    tensors = _bell_tensors(params.postselection_detector, params.ps_loss, rho.cutoff)
    pair = _pair_state(rho)
    u = _phase_vector(rho.cutoff, left, right)
    rotated = u[:, None] * pair * u.conj()[None, :]
    return {k: float(np.real(np.einsum("ij,ij->", M, rotated))) for k, M in tensors.items()}


def _pair_state(rho: FockDensityMatrix) -> np.ndarray:
    # rho (x) rho has mode order (a1, b1, a2, b2) already
    return np.kron(rho.elements, rho.elements)


def correlation(rho: FockDensityMatrix, params: RepeaterParams, left: float, right: float) -> tuple[float, float, float, float]:
    """Return (E, P_same, P_diff, probability of one click per end)."""
    probs = pattern_probabilities(rho, params, left, right)
    total = sum(probs.values())
    if total < ZERO_PROBABILITY:
        raise ZeroProbabilityError("postselection never succeeds")
    same = (probs[(True, True)] + probs[(False, False)]) / total
    diff = (probs[(True, False)] + probs[(False, True)]) / total
    return same - diff, same, diff, total


def bell(
    rho: FockDensityMatrix,
    params: RepeaterParams | None = None,
    angles: Sequence[tuple[float, float, int]] | None = None,
) -> BellResult:
    """Conditional Bell parameter of two copies of ``rho`` after dual-rail postselection.

    At each end a phase shift acts on the first copy's mode, the two modes
    are mixed on a balanced beam splitter and detected; only events with one
    click at each end are kept. ``angles`` overrides the four
    (left, right, sign) settings.
    """
    if rho.mode_count != 2:
        raise ValueError("bell() expects a two-mode state")
    params = RepeaterParams(cutoff=rho.cutoff) if params is None else params
    settings = BELL_SETTINGS if angles is None else tuple(angles)
    E, same, diff, totals = [], [], [], []
    S = 0.0
    for left, right, sign in settings:
        e, ps, pd, tot = correlation(rho, params, left, right)
        E.append(e)
        same.append(ps)
        diff.append(pd)
        totals.append(tot)
        S += sign * e
    return BellResult(
        float(S),
        tuple(E),
        tuple(same),
        tuple(diff),
        float(np.mean(totals)),
        tuple((a, b) for a, b, _ in settings),
    )


def chsh_angles(phi1: float, phi2: float, chi1: float, chi2: float) -> tuple:
    """Settings for ``E(phi1,chi1) + E(phi2,chi1) + E(phi2,chi2) - E(phi1,chi2)``."""
    return ((phi1, chi1, +1), (phi2, chi1, +1), (phi2, chi2, +1), (phi1, chi2, -1))


def optimal_bell(rho: FockDensityMatrix, params: RepeaterParams | None = None) -> float:
    """CHSH value maximized over the four analyser phases (local search from the fixed angles)."""
    import scipy.optimize

    params = RepeaterParams(cutoff=rho.cutoff) if params is None else params

    def neg(x):
        return -bell(rho, params, chsh_angles(*x)).S

    x0 = np.array([math.pi / 2, 0.0, math.pi / 4, -math.pi / 4])
    # S is smooth in the phases and the fixed angles are near-optimal, so a quasi-Newton search converges fast
    res = scipy.optimize.minimize(neg, x0, method="BFGS", options={"gtol": 1e-11})
    return max(-res.fun, bell(rho, params).S)


# ---------------------------------------------------------------------------
# Rates
# ---------------------------------------------------------------------------


def tries_for_two(q: float) -> float:
    """Mean number of rounds until two independent attempts of probability q have both succeeded."""
    if not 0 < q <= 1:
        raise ValueError(f"success probability must lie in (0, 1], got {q}")
    return (3 - 2 * q) / ((2 - q) * q)


@dataclass(frozen=True)
class RateResult:
    exact: float
    simplified: float
    nu: tuple[float, ...]


def rate(q_list: Sequence[float], q_ps: float, tau: float = 1.0) -> RateResult:
    """Pair rate (pairs per second) from per-level success probabilities.

    ``exact`` is ``q_ps / (tau prod nu_i)``; ``simplified`` replaces every
    ``nu_i`` by ``3 / (2 q_i)``.
    """
    if not q_list:
        raise ValueError("need at least q0")
    if not 0 < q_ps <= 1:
        raise ValueError(f"q_ps must lie in (0, 1], got {q_ps}")
    nus = tuple(tries_for_two(q) for q in q_list)
    exact = q_ps / (tau * math.prod(nus))
    simplified = (2.0 / 3.0) ** len(q_list) * q_ps * math.prod(q_list) / tau
    return RateResult(exact, simplified, nus)


@dataclass(frozen=True)
class MonteCarloResult:
    mean_time: float
    stderr: float
    trials: int
    method: str = "exact"

    @property
    def rate(self) -> float:
        return 1.0 / self.mean_time


def _max_of_two_geometric(q: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Sample ``max(G1, G2)`` of two geometric variables by inverting ``(1 - (1-q)^t)^2``."""
    if q >= 1:
        return np.ones(size)
    u = rng.random(size)
    return np.maximum(np.ceil(np.log1p(-np.sqrt(u)) / np.log1p(-q)), 1.0)


def _link_times(level: int, count: int, q_list, tau: float, rng: np.random.Generator) -> np.ndarray:
    """Times to obtain ``count`` independent links at ``level``."""
    if count == 0:
        return np.zeros(0)
    if level == 0:
        return tau * rng.geometric(q_list[0], size=count).astype(float)
    attempts = rng.geometric(q_list[level], size=count)
    total = int(attempts.sum())
    if level == 1:
        slowest = tau * _max_of_two_geometric(q_list[0], total, rng)
    else:
        slowest = _link_times(level - 1, 2 * total, q_list, tau, rng).reshape(total, 2).max(axis=1)
    per_attempt = slowest + tau * 2 ** (level - 1)
    starts = np.concatenate([[0], np.cumsum(attempts)[:-1]])
    return np.add.reduceat(per_attempt, starts)


def _final_times(count, q_list, q_ps, tau, rng):
    n = len(q_list) - 1
    attempts = rng.geometric(q_ps, size=count)
    total = int(attempts.sum())
    pairs = _link_times(n, 2 * total, q_list, tau, rng).reshape(total, 2).max(axis=1)
    starts = np.concatenate([[0], np.cumsum(attempts)[:-1]])
    return np.add.reduceat(pairs, starts)


def _expected_leaves(q_list, q_ps) -> float:
    """Mean number of elementary links drawn per sampled pair."""
    leaves = 2.0 / q_ps
    for q in q_list[1:]:
        leaves *= 2.0 / q
    return leaves


def _pool_times(count: int, q_list, q_ps, tau, rng, pool: int) -> np.ndarray:
    """Waiting times built level by level from resampled populations of link times."""
    times = tau * rng.geometric(q_list[0], size=pool).astype(float)
    for level in range(1, len(q_list)):
        attempts = rng.geometric(q_list[level], size=pool)
        total = int(attempts.sum())
        picks = times[rng.integers(0, pool, size=(total, 2))].max(axis=1) + tau * 2 ** (level - 1)
        starts = np.concatenate([[0], np.cumsum(attempts)[:-1]])
        times = np.add.reduceat(picks, starts)
    attempts = rng.geometric(q_ps, size=count)
    total = int(attempts.sum())
    picks = times[rng.integers(0, pool, size=(total, 2))].max(axis=1)
    starts = np.concatenate([[0], np.cumsum(attempts)[:-1]])
    return np.add.reduceat(picks, starts)


def rate_monte_carlo(
    q_list: Sequence[float],
    q_ps: float,
    trials: int,
    tau: float = 1.0,
    seed: int = 0,
    chunk: int | None = None,
    method: str = "auto",
) -> MonteCarloResult:
    """Sample the waiting time for one postselected pair.

    Every link of level k+1 waits for two fresh level-k links, spends
    ``tau 2^k`` on communication and succeeds with ``q_{k+1}``; failures
    start over. The final pair needs two level-n links and succeeds with
    ``q_ps``.

    ``method="exact"`` draws every elementary link; its cost grows like
    ``prod 2/q_k``. ``method="pool"`` builds each level from a population
    of ``max(trials, MC_POOL_MIN)`` resampled lower-level times, costing
    about ``pool * sum 1/q_k``; the reported stderr then ignores the
    (comparable) population noise. ``auto`` picks exact when it fits
    ``MC_EXACT_BUDGET`` elementary draws. Random streams derive from
    ``seed``, so both methods are reproducible.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    q_list = [float(q) for q in q_list]
    if any(not 0 < q <= 1 for q in q_list) or not 0 < q_ps <= 1:
        raise ValueError("success probabilities must lie in (0, 1]")
    if method not in ("auto", "exact", "pool"):
        raise ValueError(f"unknown Monte Carlo method {method!r}")
    leaves = _expected_leaves(q_list, q_ps)
    if method == "auto":
        method = "exact" if leaves * trials <= MC_EXACT_BUDGET else "pool"
    if method == "pool":
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        t = _pool_times(trials, q_list, q_ps, tau, rng, max(trials, MC_POOL_MIN))
    else:
        if chunk is None:
            chunk = int(min(trials, max(1, MC_LEAF_BUDGET // leaves)))
        n_chunks = -(-trials // chunk)
        streams = np.random.SeedSequence(seed).spawn(n_chunks)
        samples = []
        for k, ss in enumerate(streams):
            size = min(chunk, trials - k * chunk)
            samples.append(_final_times(size, q_list, q_ps, tau, np.random.default_rng(ss)))
        t = np.concatenate(samples)
    stderr = float(t.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return MonteCarloResult(float(t.mean()), stderr, trials, method)


def mean_tries_for_two_monte_carlo(q: float, trials: int, seed: int = 0) -> float:
    """Empirical mean of ``max`` of two geometric variables (check of :func:`tries_for_two`)."""
    rng = np.random.default_rng(seed)
    return float(np.maximum(rng.geometric(q, trials), rng.geometric(q, trials)).mean())


# ---------------------------------------------------------------------------
# Convenience
# ---------------------------------------------------------------------------


def loss_only_state(eta: float, cutoff: int = 2) -> FockDensityMatrix:
    """``eta |Psi+><Psi+| + (1 - eta) |00><00|``."""
    d = cutoff + 1
    rho = np.zeros((d * d, d * d), dtype=complex)
    i01, i10 = d * 0 + 1, d * 1 + 0
    rho[0, 0] = 1 - eta
    for a in (i01, i10):
        for b in (i01, i10):
            rho[a, b] = eta / 2
    return FockDensityMatrix(rho, 2, cutoff)


def simulate(params: RepeaterParams) -> dict:
    """Chain, Bell test and rate in one call."""
    chain = run_chain(params)
    b = bell(chain.rho, params)
    r = rate(chain.q, b.q_ps, params.tau)
    return {"chain": chain, "bell": b, "rate": r}


def with_level(params: RepeaterParams, n: int) -> RepeaterParams:
    return replace(params, n=n)
