"""Truncated Fock-basis density matrices and a brute-force circuit oracle.

Multi-mode matrices are indexed row-major with mode 0 slowest, i.e. the
basis index of ``|k_0, k_1, ...>`` is ``np.ravel_multi_index(k, (d,)*N)``
with ``d = cutoff + 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

HERMITIAN_TOL = 1e-12
HERMITIAN_REPAIR = 1e-9
NEG_DIAG_CLIP = 1e-9
TRACE_TOL = 1e-10
ORACLE_LEAK_TOL = 1e-6
# largest local dimension exponentiated densely; beyond it expm_multiply is used
DENSE_EXPM_LIMIT = 1700


class FockStateError(ValueError):
    """Invalid density matrix (not Hermitian, negative populations, bad trace)."""


class TruncationLeakError(RuntimeError):
    """Too much probability reached the top Fock level of the oracle space."""

    def __init__(self, leak: float, tol: float):
        super().__init__(f"truncation leak {leak:.3e} exceeds {tol:.1e}; raise the oracle cutoff")
        self.leak = leak


class Detection(str, enum.Enum):
    """Measurement applied to a non-output mode."""

    DARK = "dark"
    COUNTING = "click_counting"
    NONCOUNTING = "click_noncounting"
    TRACED = "traced"


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    """Density matrix on ``mode_count`` modes, each truncated at ``cutoff`` photons.

    ``normalized=False`` marks an event-weighted state whose trace is the
    probability of the conditioning detection pattern.
    """

    elements: np.ndarray
    mode_count: int
    cutoff: int
    normalized: bool = True

    def __post_init__(self):
        d = (self.cutoff + 1) ** self.mode_count
        rho = np.array(self.elements, dtype=complex)
        if rho.shape != (d, d):
            raise FockStateError(
                f"expected a {d}x{d} matrix for {self.mode_count} modes at cutoff {self.cutoff}, got {rho.shape}"
            )
        herm = float(np.max(np.abs(rho - rho.conj().T), initial=0.0))
        if herm > HERMITIAN_REPAIR:
            raise FockStateError(f"matrix is not Hermitian (max deviation {herm:.3e})")
        rho = 0.5 * (rho + rho.conj().T)
        diag = np.real(np.diag(rho)).copy()
        if diag.size and diag.min() < -NEG_DIAG_CLIP:
            raise FockStateError(f"negative population {diag.min():.3e}")
        neg = diag < 0
        if neg.any():
            rho[np.diag_indices(d)] = np.where(neg, 0.0, np.diag(rho))
        tr = float(np.real(np.trace(rho)))
        if self.normalized and abs(tr - 1) > TRACE_TOL:
            raise FockStateError(f"normalized state has trace {tr!r}")
        if not self.normalized and not (-TRACE_TOL <= tr <= 1 + TRACE_TOL):
            raise FockStateError(f"event-weighted state has trace {tr!r} outside [0, 1]")
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** self.mode_count

    def trace(self) -> float:
        return float(np.real(np.trace(self.elements)))

    def normalize(self) -> "FockDensityMatrix":
        tr = self.trace()
        if tr <= 0:
            raise FockStateError("cannot normalize a state of zero trace")
        return FockDensityMatrix(self.elements / tr, self.mode_count, self.cutoff, True)

    def as_tensor(self) -> np.ndarray:
        """View as an array of shape ``(d,)*N + (d,)*N``."""
        d = self.cutoff + 1
        return self.elements.reshape((d,) * (2 * self.mode_count))

    def element(self, row: Sequence[int], col: Sequence[int]) -> complex:
        return complex(self.as_tensor()[tuple(row) + tuple(col)])

    def populations(self) -> np.ndarray:
        d = self.cutoff + 1
        return np.real(np.diag(self.elements)).reshape((d,) * self.mode_count)

    def with_cutoff(self, cutoff: int) -> "FockDensityMatrix":
        """Embed into a larger cutoff (zero padding) or truncate to a smaller one."""
        d_old, d_new = self.cutoff + 1, cutoff + 1
        t = self.as_tensor()
        out = np.zeros((d_new,) * (2 * self.mode_count), dtype=complex)
        m = min(d_old, d_new)
        out[(slice(0, m),) * (2 * self.mode_count)] = t[(slice(0, m),) * (2 * self.mode_count)]
        normalized = self.normalized and cutoff >= self.cutoff
        return FockDensityMatrix(out.reshape(d_new**self.mode_count, -1), self.mode_count, cutoff, normalized)

    def to_csv_rows(self) -> list[list[str]]:
        """Rows of ``re(col0), im(col0), re(col1), ...`` in 17 significant digits."""
        rows = []
        for line in self.elements:
            cells = []
            for z in line:
                cells.append(f"{z.real:.16e}")
                cells.append(f"{z.imag:.16e}")
            rows.append(cells)
        return rows


def fock_state(photons: Sequence[int], cutoff: int) -> FockDensityMatrix:
    """Projector onto the product Fock state ``|photons>``."""
    d = cutoff + 1
    if any(k < 0 or k > cutoff for k in photons):
        raise ValueError(f"photon numbers {tuple(photons)} exceed cutoff {cutoff}")
    idx = np.ravel_multi_index(tuple(photons), (d,) * len(photons))
    rho = np.zeros((d ** len(photons),) * 2, dtype=complex)
    rho[idx, idx] = 1.0
    return FockDensityMatrix(rho, len(photons), cutoff)


def pure_state(amplitudes: Mapping[tuple[int, ...], complex], cutoff: int) -> FockDensityMatrix:
    """Normalized projector onto ``sum_k amplitudes[k] |k>``."""
    keys = list(amplitudes)
    n = len(keys[0])
    d = cutoff + 1
    psi = np.zeros(d**n, dtype=complex)
    for k, a in amplitudes.items():
        psi[np.ravel_multi_index(k, (d,) * n)] = a
    psi /= np.linalg.norm(psi)
    return FockDensityMatrix(np.outer(psi, psi.conj()), n, cutoff)


def bell_state(cutoff: int = 2) -> FockDensityMatrix:
    """``(|01> + |10>)/sqrt(2)`` on two modes."""
    return pure_state({(0, 1): 1.0, (1, 0): 1.0}, cutoff)


def vacuum(mode_count: int, cutoff: int = 2) -> FockDensityMatrix:
    return fock_state((0,) * mode_count, cutoff)


def tensor(a: FockDensityMatrix, b: FockDensityMatrix) -> FockDensityMatrix:
    """Tensor product; modes of ``a`` come first."""
    if a.cutoff != b.cutoff:
        raise FockStateError(f"cutoff mismatch: {a.cutoff} vs {b.cutoff}")
    return FockDensityMatrix(
        np.kron(a.elements, b.elements),
        a.mode_count + b.mode_count,
        a.cutoff,
        a.normalized and b.normalized,
    )


def partial_trace(rho: FockDensityMatrix, modes: Iterable[int]) -> FockDensityMatrix:
    """Trace out ``modes``; the remaining modes keep their order.

    Tracing every mode is not a density matrix; use :meth:`FockDensityMatrix.trace`.
    """
    modes = sorted(set(modes))
    n = rho.mode_count
    if any(m < 0 or m >= n for m in modes):
        raise ValueError(f"modes {modes} out of range for {n} modes")
    if len(modes) == n:
        raise ValueError("tracing out every mode leaves a scalar; use rho.trace()")
    if not modes:
        return rho
    keep = [m for m in range(n) if m not in modes]
    t = rho.as_tensor()
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = [letters[i] for i in range(n)]
    cols = [letters[i].upper() for i in range(n)]
    for m in modes:
        cols[m] = rows[m]
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    d = (rho.cutoff + 1) ** len(keep)
    return FockDensityMatrix(red.reshape(d, d), len(keep), rho.cutoff, rho.normalized)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def _ladder(d: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, d)), 1)


def truncated_hamiltonian(A: np.ndarray, G: np.ndarray, d: int) -> scipy.sparse.csr_matrix:
    """``a^dag A a + (a^dag G a^dag + h.c.)/2`` on ``len(A)`` modes of dimension ``d``."""
    m = A.shape[0]
    a1 = scipy.sparse.csr_matrix(_ladder(d))
    eye = scipy.sparse.identity(d, format="csr")
    ops = []
    for j in range(m):
        factors = [eye] * m
        factors[j] = a1
        op = factors[0]
        for f in factors[1:]:
            op = scipy.sparse.kron(op, f, format="csr")
        ops.append(op)
    dim = d**m
    H = scipy.sparse.csr_matrix((dim, dim), dtype=complex)
    for j in range(m):
        for k in range(m):
            if A[j, k] != 0:
                H = H + A[j, k] * (ops[j].conj().T @ ops[k])
            if G[j, k] != 0:
                pair = ops[j].conj().T @ ops[k].conj().T
                H = H + 0.5 * (G[j, k] * pair + np.conj(G[j, k]) * pair.conj().T)
    return H.tocsr()


def _apply_local(kets: np.ndarray, modes: Sequence[int], A, G, d: int, n: int) -> np.ndarray:
    """Apply ``exp(-iH)`` on ``modes`` to a batch of kets of shape (batch, d, ..., d)."""
    m = len(modes)
    H = truncated_hamiltonian(np.asarray(A), np.asarray(G), d)
    # bring target modes to the back: (batch, rest..., targets...)
    axes = [0] + [1 + k for k in range(n) if k not in modes] + [1 + k for k in modes]
    moved = np.transpose(kets, axes)
    shape = moved.shape
    flat = moved.reshape(-1, d**m)
    if d**m <= DENSE_EXPM_LIMIT:
        U = scipy.linalg.expm(-1j * H.toarray())
        flat = flat @ U.T
    else:
        flat = scipy.sparse.linalg.expm_multiply(-1j * H, flat.T).T
    moved = flat.reshape(shape)
    return np.transpose(moved, np.argsort(axes))


def oracle_apply(
    circuit,
    projectors: Mapping[int, Detection | str],
    rho_in: FockDensityMatrix,
    oracle_cutoff: int,
    *,
    mode_count: int | None = None,
    input_modes: Sequence[int] | None = None,
    outputs: Sequence[int] | None = None,
    out_cutoff: int | None = None,
    squeeze_prefix: Sequence = (),
    leak_tol: float = ORACLE_LEAK_TOL,
) -> FockDensityMatrix:
    """Conditional output state computed in a truncated Fock space.

    ``circuit`` is either a sequence of circuit elements (each exponentiated
    from its own quadratic generator) or a single ``BogoliubovMap``, whose
    generator is recovered with a matrix logarithm. Squeezers in
    ``squeeze_prefix`` act on the input before the circuit.

    Returns the event-weighted state of ``outputs`` (default: every mode that
    is neither measured nor traced), truncated at ``out_cutoff``. Raises
    :class:`TruncationLeakError` if the evolved state puts more than
    ``leak_tol`` probability on the top level of any mode.
    """
    from .bogoliubov import BogoliubovMap, general_element

    if isinstance(circuit, BogoliubovMap):
        elements = [general_element(circuit, range(circuit.mode_count))]
        n = circuit.mode_count
    else:
        elements = list(circuit)
        n = mode_count if mode_count is not None else 1 + max(max(e.modes) for e in elements)
    elements = list(squeeze_prefix) + elements
    if mode_count is not None and mode_count != n:
        raise ValueError("mode_count disagrees with the circuit")
    projectors = {int(k): Detection(v) for k, v in projectors.items()}
    input_modes = list(range(rho_in.mode_count)) if input_modes is None else list(input_modes)
    if outputs is None:
        outputs = [k for k in range(n) if k not in projectors]
    outputs = list(outputs)
    if set(outputs) & set(projectors):
        raise ValueError("output modes cannot also be measured")
    out_cutoff = rho_in.cutoff if out_cutoff is None else out_cutoff
    d = oracle_cutoff + 1
    if rho_in.cutoff >= d:
        raise ValueError("oracle cutoff must exceed the input cutoff")

    # input as an ensemble of kets
    w, v = np.linalg.eigh(rho_in.elements)
    keep = w > 1e-15
    w, v = w[keep], v[:, keep]
    din = rho_in.cutoff + 1
    kets = np.zeros((w.size,) + (d,) * n, dtype=complex)
    vin = v.T.reshape((w.size,) + (din,) * rho_in.mode_count)
    index = [slice(None)] + [0] * n
    for pos, mode in enumerate(input_modes):
        index[1 + mode] = slice(0, din)
    # place input modes in the given order; other modes start in vacuum
    order = np.argsort(input_modes)
    kets[tuple(index)] = np.transpose(vin, [0] + [1 + int(k) for k in order])

    for el in elements:
        A, G = el.generator()
        kets = _apply_local(kets, list(el.modes), A, G, d, n)

    probs = np.abs(kets) ** 2
    top = np.zeros(probs.shape, dtype=bool)
    for k in range(n):
        sl = [slice(None)] * (n + 1)
        sl[1 + k] = d - 1
        top[tuple(sl)] = True
    leak = float(np.sum(w * np.sum((probs * top).reshape(w.size, -1), axis=1)))
    if leak > leak_tol:
        raise TruncationLeakError(leak, leak_tol)

    for mode, det in projectors.items():
        sl = [slice(None)] * (n + 1)
        if det is Detection.DARK:
            mask = np.zeros(d, dtype=bool)
            mask[0] = True
        elif det is Detection.COUNTING:
            mask = np.zeros(d, dtype=bool)
            mask[1] = True
        elif det is Detection.NONCOUNTING:
            mask = np.ones(d, dtype=bool)
            mask[0] = False
        else:
            continue
        shape = [1] * (n + 1)
        shape[1 + mode] = d
        kets = kets * mask.reshape(shape)

    # truncate outputs and contract everything else
    sl = [slice(None)] * (n + 1)
    for mode in outputs:
        sl[1 + mode] = slice(0, out_cutoff + 1)
    kets = kets[tuple(sl)]
    rest = [k for k in range(n) if k not in outputs]
    kets = np.transpose(kets, [0] + [1 + k for k in outputs] + [1 + k for k in rest])
    dout = (out_cutoff + 1) ** len(outputs)
    flat = kets.reshape(w.size, dout, -1)
    rho = np.einsum("b,bir,bjr->ij", w, flat, flat.conj())
    return FockDensityMatrix(rho, len(outputs), out_cutoff, normalized=False)


def photon_number_distribution(rho: FockDensityMatrix) -> np.ndarray:
    """Probability of each total photon number."""
    pops = rho.populations()
    grids = np.indices(pops.shape).sum(axis=0)
    return np.bincount(grids.ravel(), weights=pops.ravel(), minlength=rho.mode_count * rho.cutoff + 1)


def random_density_matrix(mode_count: int, cutoff: int, rng: np.random.Generator, rank: int | None = None) -> FockDensityMatrix:
    """A random normalized density matrix (test helper)."""
    d = (cutoff + 1) ** mode_count
    rank = d if rank is None else rank
    X = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = X @ X.conj().T
    return FockDensityMatrix(rho / np.trace(rho).real, mode_count, cutoff)


def two_mode_squeezed_populations(r: float, cutoff: int) -> np.ndarray:
    """``tanh(r)^(2k) / cosh(r)^2`` for k = 0..cutoff."""
    k = np.arange(cutoff + 1)
    return np.tanh(r) ** (2 * k) / math.cosh(r) ** 2
