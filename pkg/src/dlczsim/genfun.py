"""Generating-function engine for Gaussian circuits with photon detection.

For a unitary Bogoliubov circuit ``U`` acting on vacuum-initialised
registers, the conditional output of a detection pattern is linear in the
input density matrix,

    <i|rho_out|j> = sum_kl M[i, j, k, l] <k|rho_in|l>.

``M`` is read off from the Taylor coefficients of

    F(alpha, beta, gamma, delta) = <0| e^{alpha a} U^dag X U e^{beta a^dag} |0>,

where ``X`` holds ``e^{gamma a^dag}|0><0|e^{delta a}`` on every output mode
and the detection operator on every measured mode. Writing vacuum
projectors as Gaussian integrals over displacements turns ``F`` into a
(finite sum of) exponentials of quadratic forms, ``k exp(v^T Q v / 2)``,
whose coefficients follow from a simple recursion.

Variable order of the series is ``[delta_o..., gamma_o..., beta_i...,
alpha_i..., (u_s, w_s) per counting click]`` so that the tensor flattens to
``M[out_row, out_col, in_row, in_col]`` with mode 0 slowest.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .bogoliubov import BogoliubovMap, CircuitElement, circuit_map, compose
from .fockstate import Detection, FockDensityMatrix

CONDITION_LIMIT = 1e12
SERIES_BUDGET = 1 << 24
SYMMETRY_TOL = 1e-12


class GenFunError(ArithmeticError):
    """The Gaussian integral defining the generating function is ill-posed."""


class SeriesBudgetError(MemoryError):
    """The requested power series would exceed the configured size."""


@dataclass(frozen=True)
class ProjectorSpec:
    """Detection assigned to each non-output mode.

    Modes that appear neither here nor among the outputs are traced.
    """

    detections: Mapping[int, Detection] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "detections", {int(k): Detection(v) for k, v in dict(self.detections).items()}
        )

    def modes(self, kind: Detection) -> list[int]:
        return sorted(m for m, d in self.detections.items() if d is kind)


@dataclass(frozen=True, eq=False)
class QuadraticGenFun:
    """``sign * prefactor * exp(v^T quad v / 2 + lin^T v)`` over ``variables``.

    Both ``quad`` and ``prefactor`` are complex in general: the real
    dummy variables only serve as bookkeeping for Taylor coefficients.
    """

    variables: tuple[tuple[str, int], ...]
    quad: np.ndarray
    lin: np.ndarray
    prefactor: complex
    sign: int = 1

    def __call__(self, v: Sequence[float]) -> complex:
        v = np.asarray(v, dtype=float)
        return self.sign * self.prefactor * np.exp(0.5 * v @ self.quad @ v + self.lin @ v)


@dataclass(frozen=True, eq=False)
class GenFunSum:
    """Signed sum of quadratic generating functions over a common variable list."""

    terms: tuple[QuadraticGenFun, ...]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    counting: tuple[int, ...]

    @property
    def variables(self) -> tuple[tuple[str, int], ...]:
        return self.terms[0].variables

    def __call__(self, v: Sequence[float]) -> complex:
        return sum(t(v) for t in self.terms)

    def probability(self) -> float:
        """Event probability for a vacuum input (``F`` at the origin for dark/click-only patterns)."""
        if self.counting or self.outputs:
            raise ValueError("probability() needs a pattern without outputs or counting clicks; use apply_tensor")
        return float(np.real(self(np.zeros(len(self.variables)))))

    def dump_csv(self, path) -> None:
        """Write ``sign, prefactor`` and the ``quad`` rows of every term (debug aid)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["# variables"] + [f"{n}{m}" for n, m in self.variables])
            for t in self.terms:
                w.writerow(["term", t.sign, f"{t.prefactor.real:.16e}", f"{t.prefactor.imag:.16e}"])
                for row in t.quad:
                    w.writerow(["Q"] + [f"{z.real:.16e}{z.imag:+.16e}j" for z in row])
                w.writerow(["L"] + [f"{z.real:.16e}{z.imag:+.16e}j" for z in t.lin])


@dataclass(frozen=True, eq=False)
class TransferTensor:
    """Linear map from input to event-weighted output density matrices."""

    M: np.ndarray
    in_modes: int
    out_modes: int
    in_cutoff: int
    out_cutoff: int

    def __post_init__(self):
        M = np.asarray(self.M, dtype=complex)
        dout = (self.out_cutoff + 1) ** self.out_modes
        din = (self.in_cutoff + 1) ** self.in_modes
        if M.shape != (dout, dout, din, din):
            raise ValueError(f"tensor shape {M.shape} does not match ({dout}, {dout}, {din}, {din})")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)


def as_map(circuit, mode_count: int | None = None) -> BogoliubovMap:
    """Accept a ``BogoliubovMap`` or a sequence of circuit elements."""
    if isinstance(circuit, BogoliubovMap):
        return circuit
    elements = list(circuit)
    if mode_count is None:
        mode_count = 1 + max(max(e.modes) for e in elements)
    return circuit_map(elements, mode_count)


def _site_factors(B: np.ndarray, C: np.ndarray, mode: int, n: int, idx_u, idx_w, idx_x, idx_p):
    """Displacement factors ``D(u) D(z) D(-w)`` of one projector site, conjugated by U."""
    plus = B[mode].conj() - C[mode]
    minus = B[mode].conj() + C[mode]
    factors = []
    if idx_u is not None:
        factors.append({idx_u: plus})
    factors.append({idx_x: plus / math.sqrt(2), idx_p: 1j * minus / math.sqrt(2)})
    if idx_w is not None:
        factors.append({idx_w: -plus})
    return factors


def _gaussian_term(
    m: BogoliubovMap,
    inputs: Sequence[int],
    outputs: Sequence[int],
    counting: Sequence[int],
    dark: Sequence[int],
    variables: list,
) -> tuple[np.ndarray, complex]:
    n = m.mode_count
    B, C = m.B, m.C
    nv = len(variables)
    vidx = {v: k for k, v in enumerate(variables)}
    sites = [(o, ("gamma", o), ("delta", o)) for o in outputs]
    sites += [(c, ("u", c), ("w", c)) for c in counting]
    sites += [(d, None, None) for d in dark]
    ny = 2 * len(sites)
    nt = nv + ny
    diag = np.zeros(nt)

    factors: list[dict[int, np.ndarray]] = []
    for pos, i in enumerate(inputs):
        e = np.zeros(n, dtype=complex)
        e[i] = -1.0
        factors.append({vidx[("alpha", i)]: e})
        diag[vidx[("alpha", i)]] += 1.0
    for s, (mode, u, w) in enumerate(sites):
        ix, ip = nv + 2 * s, nv + 2 * s + 1
        iu = vidx[u] if u is not None else None
        iw = vidx[w] if w is not None else None
        factors += _site_factors(B, C, mode, n, iu, iw, ix, ip)
        diag[ix] -= 0.5
        diag[ip] -= 0.5
        if iu is not None:
            diag[iu] += 1.0
            diag[iw] += 1.0
    for i in inputs:
        e = np.zeros(n, dtype=complex)
        e[i] = 1.0
        factors.append({vidx[("beta", i)]: e})
        diag[vidx[("beta", i)]] += 1.0

    Z = np.zeros((len(factors), n, nt), dtype=complex)
    for a, f in enumerate(factors):
        for col, vec in f.items():
            Z[a, :, col] += vec
    # phases of the displacement products: sum_{a<b} (Z_a^T conj(Z_b) - conj(Z_a)^T Z_b) / 2
    prefix = np.cumsum(Z, axis=0) - Z
    X = np.einsum("ait,aiu->tu", prefix, Z.conj()) - np.einsum("ait,aiu->tu", prefix.conj(), Z)
    total = Z.sum(axis=0)
    W = total.T @ total.conj()
    K = 0.5 * (X + X.T) - 0.5 * (W + W.T) + np.diag(diag)

    if ny == 0:
        return K, 1.0 + 0j
    Kvv, Kvy, Kyy = K[:nv, :nv], K[:nv, nv:], K[nv:, nv:]
    A = -Kyy
    if np.linalg.eigvalsh(A.real).min() <= 0:
        raise GenFunError("Gaussian integral is not convergent (real part not positive definite)")
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise GenFunError(f"Gaussian integral is ill-conditioned (condition number {cond:.3e})")
    Q = Kvv + Kvy @ np.linalg.solve(A, Kvy.T)
    k = complex(np.prod(1.0 / np.sqrt(np.linalg.eigvals(A).astype(complex))))
    return Q, k


def build_genfun(
    circuit,
    projectors: ProjectorSpec | Mapping[int, Detection | str],
    outputs: Sequence[int],
    inputs: Sequence[int] = (),
    squeeze_prefix: Sequence[CircuitElement] = (),
    mode_count: int | None = None,
) -> GenFunSum:
    """Generating function of a circuit with a detection pattern.

    Args:
        circuit: ``BogoliubovMap`` or a sequence of circuit elements.
        projectors: detection per measured mode; unlisted non-output modes are traced.
        outputs: modes whose conditional state is kept, in output order.
        inputs: modes carrying the input density matrix (others start in vacuum).
        squeeze_prefix: elements applied to the input before ``circuit``.
        mode_count: register size when ``circuit`` is an element list.

    Returns:
        A signed sum of quadratic generating functions; non-counting clicks
        expand into one term per subset of them projected onto vacuum.
    """
    if not isinstance(projectors, ProjectorSpec):
        projectors = ProjectorSpec(projectors)
    m = as_map(circuit, mode_count)
    if squeeze_prefix:
        m = compose(circuit_map(squeeze_prefix, m.mode_count), m)
    n = m.mode_count
    outputs, inputs = tuple(outputs), tuple(inputs)
    det = projectors.detections
    for mode in list(det) + list(outputs) + list(inputs):
        if not 0 <= mode < n:
            raise ValueError(f"mode {mode} outside the {n}-mode register")
    if set(det) & set(outputs):
        raise ValueError("a mode cannot be both measured and an output")
    if len(set(outputs)) != len(outputs) or len(set(inputs)) != len(inputs):
        raise ValueError("repeated input or output mode")

    counting = tuple(projectors.modes(Detection.COUNTING))
    dark = projectors.modes(Detection.DARK)
    clicks = projectors.modes(Detection.NONCOUNTING)
    variables = [("delta", o) for o in outputs] + [("gamma", o) for o in outputs]
    variables += [("beta", i) for i in inputs] + [("alpha", i) for i in inputs]
    for c in counting:
        variables += [("u", c), ("w", c)]

    terms = []
    for size in range(len(clicks) + 1):
        for subset in itertools.combinations(clicks, size):
            Q, k = _gaussian_term(m, inputs, outputs, counting, dark + list(subset), variables)
            if np.max(np.abs(Q - Q.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.abs(Q).max(initial=0.0)):
                raise GenFunError("quadratic form lost symmetry")
            Q = 0.5 * (Q + Q.T)
            terms.append(QuadraticGenFun(tuple(variables), Q, np.zeros(len(variables), dtype=complex), k, (-1) ** size))
    return GenFunSum(tuple(terms), inputs, outputs, counting)


def gaussian_taylor(
    quad: np.ndarray,
    prefactor: complex,
    boxes: Sequence[int],
    lin: np.ndarray | None = None,
    budget: int = SERIES_BUDGET,
) -> np.ndarray:
    """Taylor coefficients of ``prefactor * exp(v^T quad v / 2 + lin^T v)``.

    Returns ``g`` with ``g[n] = coefficient of prod v_m^{n_m}`` for every
    ``n`` with ``n_m < boxes[m]``. Uses the recursion obtained from
    ``d f / d v_m = (lin_m + (quad v)_m) f``, filling one variable at a time
    from the last to the first.

    Raises:
        SeriesBudgetError: if the box holds more than ``budget`` coefficients.
    """
    boxes = tuple(int(b) for b in boxes)
    size = math.prod(boxes)
    if size > budget:
        raise SeriesBudgetError(f"series needs {size} coefficients, budget is {budget}")
    V = len(boxes)
    Q = np.asarray(quad, dtype=complex)
    L = np.zeros(V, dtype=complex) if lin is None else np.asarray(lin, dtype=complex)
    g = np.zeros(boxes, dtype=complex)
    g[(0,) * V] = prefactor
    for m in reversed(range(V)):
        sub = g[(0,) * m]
        couplings = [(j, Q[m, j]) for j in range(m + 1, V) if Q[m, j] != 0]
        for n in range(boxes[m] - 1):
            layer = sub[n]
            out = np.zeros_like(layer)
            if L[m] != 0:
                out += L[m] * layer
            if n >= 1 and Q[m, m] != 0:
                out += Q[m, m] * sub[n - 1]
            for j, q in couplings:
                ax = j - m - 1
                dst = [slice(None)] * layer.ndim
                src = [slice(None)] * layer.ndim
                dst[ax] = slice(1, None)
                src[ax] = slice(None, -1)
                out[tuple(dst)] += q * layer[tuple(src)]
            sub[n + 1] = out / (n + 1)
    return g


def _sqrt_factorials(d: int) -> np.ndarray:
    return np.sqrt([math.factorial(k) for k in range(d)])


def extract_tensor(f: GenFunSum, in_cutoff: int, out_cutoff: int, budget: int = SERIES_BUDGET) -> TransferTensor:
    """Transfer tensor ``M[out_row, out_col, in_row, in_col]`` from a generating function."""
    if in_cutoff < 0 or out_cutoff < 0:
        raise ValueError("cutoffs must be non-negative")
    no, ni, nc = len(f.outputs), len(f.inputs), len(f.counting)
    dout, din = out_cutoff + 1, in_cutoff + 1
    boxes = [dout] * (2 * no) + [din] * (2 * ni) + [2] * (2 * nc)
    total = np.zeros(boxes, dtype=complex)
    for t in f.terms:
        total += t.sign * gaussian_taylor(t.quad, t.prefactor, boxes, t.lin, budget)
    coeffs = total[(Ellipsis,) + (1,) * (2 * nc)]
    scale = np.ones([dout] * (2 * no) + [din] * (2 * ni))
    sf_out, sf_in = _sqrt_factorials(dout), _sqrt_factorials(din)
    for ax in range(2 * no + 2 * ni):
        shape = [1] * scale.ndim
        shape[ax] = scale.shape[ax]
        scale = scale * (sf_out if ax < 2 * no else sf_in).reshape(shape)
    M = (coeffs * scale).reshape(dout**no, dout**no, din**ni, din**ni)
    return TransferTensor(M, ni, no, in_cutoff, out_cutoff)


def transfer_tensor(
    circuit,
    projectors,
    outputs: Sequence[int],
    inputs: Sequence[int],
    in_cutoff: int,
    out_cutoff: int | None = None,
    squeeze_prefix: Sequence[CircuitElement] = (),
    mode_count: int | None = None,
) -> TransferTensor:
    """``extract_tensor(build_genfun(...))`` in one call."""
    f = build_genfun(circuit, projectors, outputs, inputs, squeeze_prefix, mode_count)
    return extract_tensor(f, in_cutoff, in_cutoff if out_cutoff is None else out_cutoff)


def apply_tensor(m: TransferTensor, rho: FockDensityMatrix | None = None) -> FockDensityMatrix:
    """Event-weighted output state; its trace is the probability of the detection pattern.

    ``rho`` may be omitted for circuits without input modes (vacuum input).
    """
    if rho is None:
        if m.in_modes != 0:
            raise ValueError("an input state is required")
        elements = m.M[:, :, 0, 0]
    else:
        if rho.mode_count != m.in_modes or rho.cutoff != m.in_cutoff:
            raise ValueError(
                f"tensor expects {m.in_modes} modes at cutoff {m.in_cutoff}, got {rho.mode_count} at {rho.cutoff}"
            )
        elements = np.einsum("abij,ij->ab", m.M, rho.elements)
    if m.out_modes == 0:
        raise ValueError("tensor has no output modes; use event_probability")
    return FockDensityMatrix(elements, m.out_modes, m.out_cutoff, normalized=False)


def event_probability(m: TransferTensor, rho: FockDensityMatrix | None = None) -> float:
    """Probability of the detection pattern (trace of the output)."""
    if m.out_modes == 0:
        block = m.M[0, 0]
        if rho is None:
            return float(np.real(block[0, 0]))
        return float(np.real(np.einsum("ij,ij->", block, rho.elements)))
    return apply_tensor(m, rho).trace()
