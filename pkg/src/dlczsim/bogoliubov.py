"""Bogoliubov transformations of bosonic mode operators.

A map is stored in the Heisenberg picture,

    U^dag a_j U = sum_i B[j, i] a_i + C[j, i] a_i^dag,

which is the form consumed by the generating-function engine. Circuits are
lists of :class:`CircuitElement` acting on a fixed number of modes; every
element knows both its Heisenberg map and the quadratic Hamiltonian that
generates it (the latter is only used by the brute-force Fock oracle).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

UNITARITY_TOL = 1e-10
COMPOSE_TOL = 1e-8
MEMORY_TOL = 1e-8


class BogoliubovError(ValueError):
    """Raised when a map violates the bosonic commutation relations."""


def _unitarity_residuals(B: np.ndarray, C: np.ndarray) -> tuple[float, float]:
    n = B.shape[0]
    norm = B @ B.conj().T - C @ C.conj().T - np.eye(n)
    sym = B @ C.T
    return float(np.max(np.abs(norm), initial=0.0)), float(np.max(np.abs(sym - sym.T), initial=0.0))


@dataclass(frozen=True)
class BogoliubovMap:
    """Linear map ``a -> B a + C a^dag`` on ``mode_count`` modes."""

    B: np.ndarray
    C: np.ndarray
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        B = np.array(self.B, dtype=complex)
        C = np.array(self.C, dtype=complex)
        if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape != C.shape:
            raise BogoliubovError(f"B and C must be equal square matrices, got {B.shape} and {C.shape}")
        B.setflags(write=False)
        C.setflags(write=False)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        if self.check:
            norm, sym = _unitarity_residuals(B, C)
            if norm > UNITARITY_TOL or sym > UNITARITY_TOL:
                raise BogoliubovError(
                    f"map is not unitary: |BB^+ - CC^+ - 1| = {norm:.3e}, |BC^T - CB^T| = {sym:.3e}"
                )

    @property
    def mode_count(self) -> int:
        return self.B.shape[0]

    @classmethod
    def identity(cls, mode_count: int) -> "BogoliubovMap":
        return cls(np.eye(mode_count), np.zeros((mode_count, mode_count)))

    def residuals(self) -> tuple[float, float]:
        """Return the two unitarity residuals (normalization, symmetry)."""
        return _unitarity_residuals(self.B, self.C)

    def symplectic(self) -> np.ndarray:
        """The 2N x 2N matrix acting on the operator vector (a, a^dag)."""
        return np.block([[self.B, self.C], [self.C.conj(), self.B.conj()]])

    def is_passive(self, tol: float = 1e-14) -> bool:
        return bool(np.max(np.abs(self.C), initial=0.0) <= tol)

    def inverse(self) -> "BogoliubovMap":
        # S^-1 = K S^dag K with K = diag(1, -1)
        return BogoliubovMap(self.B.conj().T, -self.C.T)

    def embed(self, modes: Sequence[int], mode_count: int) -> "BogoliubovMap":
        """Place this map on ``modes`` of a larger register, identity elsewhere."""
        modes = list(modes)
        if len(modes) != self.mode_count:
            raise ValueError(f"need {self.mode_count} target modes, got {len(modes)}")
        B = np.eye(mode_count, dtype=complex)
        C = np.zeros((mode_count, mode_count), dtype=complex)
        idx = np.ix_(modes, modes)
        B[idx] = self.B
        C[idx] = self.C
        return BogoliubovMap(B, C, check=False)


def compose(first: BogoliubovMap, second: BogoliubovMap) -> BogoliubovMap:
    """Map of the process that applies ``first`` and then ``second``."""
    if first.mode_count != second.mode_count:
        raise ValueError(f"mode count mismatch: {first.mode_count} vs {second.mode_count}")
    B = second.B @ first.B + second.C @ first.C.conj()
    C = second.B @ first.C + second.C @ first.B.conj()
    out = BogoliubovMap(B, C, check=False)
    norm, sym = out.residuals()
    if norm > COMPOSE_TOL or sym > COMPOSE_TOL:
        raise BogoliubovError(f"composition lost unitarity (residuals {norm:.3e}, {sym:.3e})")
    return out


def hamiltonian_of(m: BogoliubovMap) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic generator ``(A, G)`` with ``U = exp(-iH)`` reproducing ``m``.

    ``H = a^dag A a + (a^dag G a^dag + h.c.) / 2``. Uses the principal matrix
    logarithm, so maps with eigenvalues on the negative real axis (exact
    swaps, pi phase shifts) are not supported; build those from elements.
    """
    n = m.mode_count
    M = scipy.linalg.logm(m.symplectic())
    A = 1j * M[:n, :n]
    G = 1j * M[:n, n:]
    A = 0.5 * (A + A.conj().T)
    G = 0.5 * (G + G.T)
    return A, G


# ---------------------------------------------------------------------------
# Reduced (three-mode) memory description
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedMemory:
    """Five-coefficient state-transfer map on (input, aux2, aux3).

    ``a1' = b1 a1 + c1 a1^dag + b2 a2 + c2 a2^dag + c3 a3^dag`` with b1, b2,
    c1, c3 real, c2 complex. ``input_phase`` rotates the stored mode before
    the transfer (b1 -> b1 e^{i theta}, c1 -> c1 e^{-i theta}); it is zero in
    every model shipped here.
    """

    b1: float
    b2: float
    c1: float
    c2: complex
    c3: float
    input_phase: float = 0.0
    noise_augmented: bool = False

    def __post_init__(self):
        for name in ("b1", "b2", "c1", "c3", "input_phase"):
            value = getattr(self, name)
            if isinstance(value, complex):
                if abs(value.imag) > 1e-14:
                    raise BogoliubovError(f"{name} must be real, got {value}")
                value = value.real
            object.__setattr__(self, name, float(value))
        object.__setattr__(self, "c2", complex(self.c2))
        if self.b2 < 0 or self.c3 < 0:
            raise BogoliubovError("b2 and c3 must be non-negative (phases absorbed into aux modes)")
        resid = abs(self.norm() - 1.0)
        if resid > MEMORY_TOL:
            raise BogoliubovError(f"memory violates b1^2+b2^2-c1^2-|c2|^2-c3^2 = 1 by {resid:.3e}")

    def norm(self) -> float:
        return self.b1**2 + self.b2**2 - self.c1**2 - abs(self.c2) ** 2 - self.c3**2

    @property
    def coefficients(self) -> tuple[float, float, float, complex, float]:
        return (self.b1, self.b2, self.c1, self.c2, self.c3)

    def is_ideal(self, tol: float = 1e-15) -> bool:
        return abs(self.b1 - 1) <= tol and max(self.b2, abs(self.c1), abs(self.c2), self.c3) <= tol

    def row(self) -> tuple[np.ndarray, np.ndarray]:
        """Heisenberg row (b, c) of the retrieved mode over the three modes."""
        ph = cmath.exp(1j * self.input_phase)
        b = np.array([self.b1 * ph, self.b2, 0.0], dtype=complex)
        c = np.array([self.c1 / ph, self.c2, self.c3], dtype=complex)
        return b, c

    def to_map(self) -> BogoliubovMap:
        """A unitary three-mode map whose first row is this memory."""
        b, c = self.row()
        return complete_row(b, c)

    @classmethod
    def from_config(cls, values: dict) -> "ReducedMemory":
        """Parse ``b1, b2, c1, c2, c3`` (``c2`` may be written as a Python complex)."""
        try:
            return cls(
                float(values["b1"]),
                float(values.get("b2", 0.0)),
                float(values.get("c1", 0.0)),
                complex(str(values.get("c2", 0.0)).replace(" ", "")),
                float(values.get("c3", 0.0)),
            )
        except KeyError as exc:
            raise BogoliubovError(f"memory config is missing {exc.args[0]}") from None


def complete_row(b: np.ndarray, c: np.ndarray) -> BogoliubovMap:
    """Extend a single normalized row to a full unitary map on the same modes.

    Symplectic Gram-Schmidt with respect to the form diag(1, -1): candidate
    rows are the unit annihilation rows, orthogonalized against every
    accepted row and its conjugate partner (the a^dag row). The completed
    rows describe auxiliary outputs only, so they are then reordered and
    rephased to put large positive entries on the diagonal; this keeps the
    map near the identity, where its matrix logarithm is well defined.
    """
    b = np.asarray(b, dtype=complex)
    c = np.asarray(c, dtype=complex)
    n = b.size
    K = np.concatenate([np.ones(n), -np.ones(n)])

    def form(x, y):
        return np.sum(x * K * y.conj())

    first = np.concatenate([b, c])
    nrm = form(first, first).real
    if abs(nrm - 1) > MEMORY_TOL:
        raise BogoliubovError(f"row is not normalized (|b|^2 - |c|^2 = {nrm})")
    rows = [first]
    remaining = list(range(n))
    while len(rows) < n:
        best, best_norm = None, 0.0
        for k in remaining:
            v = np.zeros(2 * n, dtype=complex)
            v[k] = 1.0
            for r in rows:
                partner = np.concatenate([r[n:].conj(), r[:n].conj()])
                v = v - form(v, r) * r + form(v, partner) * partner
            vn = form(v, v).real
            if vn > best_norm:
                best, best_norm, best_k = v, vn, k
        if best is None or best_norm < 1e-12:
            raise BogoliubovError("could not complete the row to a unitary map")
        rows.append(best / math.sqrt(best_norm))
        remaining.remove(best_k)
    R = np.array(rows)
    if n > 1:
        aux = R[1:]
        _, cols = scipy.optimize.linear_sum_assignment(-np.abs(aux[:, 1:n]))
        order = np.argsort(cols)
        aux = aux[order]
        diag = aux[np.arange(n - 1), 1 + np.arange(n - 1)]
        aux = aux * np.where(np.abs(diag) > 0, np.abs(diag) / np.where(diag == 0, 1, diag), 1.0)[:, None]
        R = np.vstack([R[:1], aux])
    return BogoliubovMap(R[:, :n], R[:, n:])


def reduce_memory(
    b1: complex,
    c1: complex,
    b_aux: Sequence[complex],
    c_aux: Sequence[complex],
) -> ReducedMemory:
    """Compress a many-mode transfer map to the five-coefficient form.

    The retrieved mode is ``b1 a1 + c1 a1^dag + sum_i b_aux[i] a_i +
    c_aux[i] a_i^dag`` over orthonormal auxiliary modes. ``a2`` is the unit
    mode along ``b_aux``; ``a3`` carries the part of ``c_aux`` orthogonal to
    it. b1 and c1 are made real by an output phase (irrelevant downstream)
    and an input phase, which is recorded in ``input_phase``.
    """
    b_aux = np.asarray(b_aux, dtype=complex).ravel()
    c_aux = np.asarray(c_aux, dtype=complex).ravel()
    if b_aux.size != c_aux.size:
        raise ValueError("auxiliary coefficient vectors must have the same length")
    b1 = complex(b1)
    c1 = complex(c1)
    # output phase chi and input phase theta: b1 e^{i(chi+theta)} and c1 e^{i(chi-theta)} real
    arg_b = cmath.phase(b1) if b1 != 0 else None
    arg_c = cmath.phase(c1) if c1 != 0 else None
    if b1.imag == 0 and c1.imag == 0:
        # already real (possibly negative): keep the signs, no rotation needed
        chi = theta = 0.0
    elif arg_c is None:
        chi, theta = -arg_b, 0.0
    elif arg_b is None:
        chi, theta = -arg_c, 0.0
    else:
        chi, theta = -(arg_b + arg_c) / 2, (arg_c - arg_b) / 2
    out = cmath.exp(1j * chi)
    b1r = (b1 * out * cmath.exp(1j * theta)).real
    c1r = (c1 * out * cmath.exp(-1j * theta)).real
    b_aux, c_aux = b_aux * out, c_aux * out
    b2 = float(np.linalg.norm(b_aux))
    c_norm = float(np.linalg.norm(c_aux))
    if b2 > 0:
        # a2^dag = sum conj(b_aux_i)/b2 a_i^dag; component of c_aux along it
        c2 = complex(np.sum(b_aux * c_aux) / b2)
        c3_sq = max(c_norm**2 - abs(c2) ** 2, 0.0)
    else:
        c2 = 0j
        c3_sq = c_norm**2
    # the stored row is b1 e^{i phase} a1 + c1 e^{-i phase} a1^dag
    return ReducedMemory(b1r, b2, c1r, c2, math.sqrt(c3_sq), input_phase=-theta)


def augment_dark_counts(mem: ReducedMemory, n_dc: float) -> ReducedMemory:
    """Fold thermal detector noise of mean ``n_dc`` into a memory map.

    This is the vanishing-reflectivity limit of mixing the retrieved mode
    with one arm of a virtual down-converter. The noise enlarges b2 and c3
    by the same amount, so the normalization identity survives.
    """
    if n_dc < 0:
        raise ValueError(f"n_dc must be non-negative, got {n_dc}")
    if n_dc == 0:
        return mem
    b2p = math.sqrt(mem.b2**2 + n_dc)
    c2p = mem.b2 * mem.c2 / b2p
    c3p = math.sqrt(max(abs(mem.c2) ** 2 - abs(c2p) ** 2 + mem.c3**2 + n_dc, 0.0))
    return ReducedMemory(mem.b1, b2p, mem.c1, c2p, c3p, input_phase=mem.input_phase, noise_augmented=True)


def virtual_pdc_noise(p: float, n_dc: float) -> tuple[np.ndarray, np.ndarray]:
    """Row of a finite virtual down-converter plus beam splitter.

    Returns the Heisenberg row of the signal mode over (signal, s1, s2) for
    reflectivity ``p`` and squeezing chosen so that ``p sinh(s)^2 = n_dc``.
    The signal is also attenuated by ``1 - p``.
    """
    if not 0 < p < 1:
        raise ValueError("virtual beam-splitter reflectivity must lie in (0, 1)")
    s = math.asinh(math.sqrt(n_dc / p))
    b = np.array([math.sqrt(1 - p), math.sqrt(p) * math.cosh(s), 0.0], dtype=complex)
    c = np.array([0.0, 0.0, -math.sqrt(p) * math.sinh(s)], dtype=complex)
    return b, c


# ---------------------------------------------------------------------------
# Circuit elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircuitElement:
    """One optical element acting on ``modes`` of a register.

    ``kind`` is one of ``beam_splitter``, ``phase_shift``, ``one_mode_squeeze``,
    ``two_mode_squeeze``, ``memory`` or ``general``. ``params`` holds the
    kind-specific values (see the constructors below).
    """

    kind: str
    modes: tuple[int, ...]
    params: tuple = ()

    def local_map(self) -> BogoliubovMap:
        k = self.kind
        if k == "beam_splitter":
            T, phi = self.params
            t, r = math.sqrt(T), math.sqrt(1 - T)
            e = cmath.exp(1j * phi)
            B = np.array([[t, r * e], [-r / e, t]])
            return BogoliubovMap(B, np.zeros((2, 2)))
        if k == "phase_shift":
            (phi,) = self.params
            return BogoliubovMap([[cmath.exp(1j * phi)]], [[0.0]])
        if k == "one_mode_squeeze":
            (r,) = self.params
            return BogoliubovMap([[math.cosh(r)]], [[math.sinh(r)]])
        if k == "two_mode_squeeze":
            (r,) = self.params
            ch, sh = math.cosh(r), math.sinh(r)
            return BogoliubovMap([[ch, 0], [0, ch]], [[0, sh], [sh, 0]])
        if k == "memory":
            (mem,) = self.params
            return mem.to_map()
        if k == "general":
            (m,) = self.params
            return m
        raise ValueError(f"unknown element kind {k!r}")

    def generator(self) -> tuple[np.ndarray, np.ndarray]:
        """Quadratic Hamiltonian (A, G) on the element's own modes."""
        k = self.kind
        if k == "beam_splitter":
            T, phi = self.params
            theta = math.acos(math.sqrt(T))
            e = cmath.exp(1j * phi)
            A = np.array([[0, 1j * theta * e], [-1j * theta / e, 0]])
            return A, np.zeros((2, 2), dtype=complex)
        if k == "phase_shift":
            (phi,) = self.params
            return np.array([[-phi]], dtype=complex), np.zeros((1, 1), dtype=complex)
        if k == "one_mode_squeeze":
            (r,) = self.params
            return np.zeros((1, 1), dtype=complex), np.array([[1j * r]])
        if k == "two_mode_squeeze":
            (r,) = self.params
            return np.zeros((2, 2), dtype=complex), 1j * r * np.array([[0, 1], [1, 0]])
        return hamiltonian_of(self.local_map())


def beam_splitter(modes: Sequence[int], transmittivity: float = 0.5, phase: float = 0.0) -> CircuitElement:
    """``a1' = t a1 + r e^{i phase} a2``, ``a2' = -r e^{-i phase} a1 + t a2``."""
    if not 0 <= transmittivity <= 1:
        raise ValueError(f"transmittivity must lie in [0, 1], got {transmittivity}")
    return CircuitElement("beam_splitter", tuple(modes), (float(transmittivity), float(phase)))


def phase_shift(mode: int, angle: float) -> CircuitElement:
    return CircuitElement("phase_shift", (mode,), (float(angle),))


def one_mode_squeeze(mode: int, r: float) -> CircuitElement:
    return CircuitElement("one_mode_squeeze", (mode,), (float(r),))


def two_mode_squeeze(modes: Sequence[int], r: float) -> CircuitElement:
    """Down-converter producing ``sum_k tanh(r)^k |k,k> / cosh r`` from vacuum."""
    return CircuitElement("two_mode_squeeze", tuple(modes), (float(r),))


def memory_element(mem: ReducedMemory, mode: int, aux: Sequence[int]) -> CircuitElement:
    aux = tuple(aux)
    if len(aux) != 2:
        raise ValueError("a reduced memory needs exactly two auxiliary modes")
    return CircuitElement("memory", (mode,) + aux, (mem,))


def general_element(m: BogoliubovMap, modes: Sequence[int]) -> CircuitElement:
    return CircuitElement("general", tuple(modes), (m,))


def lossy_channel(p: float, mode: int, aux: int) -> CircuitElement:
    """Loss of probability ``p`` on ``mode`` into the (traced) mode ``aux``."""
    if not 0 <= p <= 1:
        raise ValueError(f"loss probability must lie in [0, 1], got {p}")
    return beam_splitter((mode, aux), 1.0 - p)


def dark_count_noise(n_dc: float, mode: int, aux: Sequence[int]) -> CircuitElement:
    """Additive thermal noise of mean ``n_dc`` photons on ``mode``.

    Same map as :func:`augment_dark_counts` applied to an ideal memory.
    """
    return memory_element(augment_dark_counts(ReducedMemory(1, 0, 0, 0, 0), n_dc), mode, aux)


def circuit_map(elements: Sequence[CircuitElement], mode_count: int) -> BogoliubovMap:
    """Compose elements in time order into one map on ``mode_count`` modes."""
    total = BogoliubovMap.identity(mode_count)
    for el in elements:
        if max(el.modes) >= mode_count or min(el.modes) < 0:
            raise ValueError(f"element {el.kind} touches modes {el.modes} outside 0..{mode_count - 1}")
        if len(set(el.modes)) != len(el.modes):
            raise ValueError(f"element {el.kind} repeats a mode: {el.modes}")
        total = compose(total, el.local_map().embed(el.modes, mode_count))
    return total
