"""Dense statevector simulation of a labeled qubit register.

Amplitudes are stored with the first (smallest) label as the most significant
bit, so a register over labels ``(3, 4)`` orders its basis as
``|q3 q4> = |00>, |01>, |10>, |11>``.  Every operation returns a new value;
arrays held by :class:`StateVector` and :class:`DensityMatrix` are read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InputError, NumericalFailure, ZeroProbabilityBranch

NORM_TOL = 1e-12
UNITARY_TOL = 1e-12
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8
ZERO_BRANCH_TOL = 1e-14


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _check_labels(labels: Sequence[int]) -> tuple[int, ...]:
    labels = tuple(int(q) for q in labels)
    if not labels:
        raise InputError("register needs at least one qubit label")
    if any(q < 1 for q in labels):
        raise InputError(f"qubit labels must be positive integers, got {labels}")
    if len(set(labels)) != len(labels):
        raise InputError(f"duplicate qubit labels in {labels}")
    return labels


@dataclass(frozen=True)
class StateVector:
    labels: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        labels = _check_labels(self.labels)
        if list(labels) != sorted(labels):
            raise InputError(f"labels must be strictly ascending, got {labels}")
        amps = _frozen(self.amplitudes).reshape(-1)
        if amps.size != 2 ** len(labels):
            raise InputError(
                f"expected {2 ** len(labels)} amplitudes for {len(labels)} qubits, got {amps.size}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InputError(f"state is not normalized (norm={norm!r})")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def axis(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"qubit {label} not in register {self.labels}") from None

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis of length 2 per qubit."""
        return self.amplitudes.reshape((2,) * self.num_qubits)

    @classmethod
    def from_tensor(cls, labels: Sequence[int], t: np.ndarray) -> "StateVector":
        return cls(tuple(labels), np.asarray(t).reshape(-1))

    def overlap(self, other: "StateVector") -> complex:
        if self.labels != other.labels:
            raise InputError("overlap needs identical registers")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    labels: tuple[int, ...]
    entries: np.ndarray

    def __post_init__(self):
        labels = _check_labels(self.labels)
        m = _frozen(self.entries)
        dim = 2 ** len(labels)
        if m.shape != (dim, dim):
            raise InputError(f"expected a {dim}x{dim} matrix, got shape {m.shape}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise InputError(f"density matrix not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InputError(f"density matrix trace is {tr!r}, expected 1")
        lam_min = np.linalg.eigvalsh(m).min()
        if lam_min < -PSD_TOL:
            raise InputError(f"density matrix not PSD (min eigenvalue {lam_min:.3e})")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "entries", m)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    @classmethod
    def from_pure(cls, state: StateVector) -> "DensityMatrix":
        psi = state.amplitudes
        return cls(state.labels, np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class MeasurementSpec:
    """Projective measurement of ``qubit`` onto (|0> + (-1)^outcome e^{i angle}|1>)/sqrt2."""

    qubit: int
    angle: float
    outcome: int = 0

    def __post_init__(self):
        if not np.isfinite(self.angle):
            raise InputError(f"measurement angle must be finite, got {self.angle!r}")
        if self.outcome not in (0, 1):
            raise InputError(f"measurement outcome must be 0 or 1, got {self.outcome!r}")


def xy_basis_bra(angle: float, outcome: int) -> np.ndarray:
    """Row vector <B(angle, outcome)| for the X-Y plane measurement."""
    sign = -1.0 if outcome else 1.0
    return np.array([1.0, sign * np.exp(-1j * angle)]) / np.sqrt(2.0)


def init_plus(labels: Sequence[int]) -> StateVector:
    labels = tuple(sorted(_check_labels(labels)))
    n = len(labels)
    return StateVector(labels, np.full(2**n, 2.0 ** (-n / 2), dtype=complex))


def apply_cz(state: StateVector, j: int, k: int) -> StateVector:
    if j == k:
        raise InputError("CZ needs two distinct qubits")
    a, b = state.axis(j), state.axis(k)
    t = state.tensor().copy()
    idx = [slice(None)] * state.num_qubits
    idx[a] = 1
    idx[b] = 1
    t[tuple(idx)] *= -1
    return StateVector.from_tensor(state.labels, t)


def apply_1q(state: StateVector, j: int, u: np.ndarray) -> StateVector:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise InputError(f"single-qubit gate must be 2x2, got {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > UNITARY_TOL:
        raise InputError("single-qubit gate is not unitary")
    a = state.axis(j)
    t = np.moveaxis(np.tensordot(u, state.tensor(), axes=([1], [a])), 0, a)
    return StateVector.from_tensor(state.labels, t)


def measure_xy(state: StateVector, spec: MeasurementSpec) -> tuple[float, StateVector]:
    """Project ``spec.qubit`` onto its X-Y plane eigenvector and drop it from the register.

    Returns the outcome probability and the renormalized post-measurement state.
    Raises :class:`ZeroProbabilityBranch` when the probability is below 1e-14.
    """
    a = state.axis(spec.qubit)
    if state.num_qubits == 1:
        raise InputError("cannot measure the only qubit of a register")
    bra = xy_basis_bra(spec.angle, spec.outcome)
    t = np.tensordot(bra, state.tensor(), axes=([0], [a]))
    prob = float(np.vdot(t, t).real)
    if prob < ZERO_BRANCH_TOL:
        raise ZeroProbabilityBranch(prob)
    labels = tuple(q for q in state.labels if q != spec.qubit)
    return prob, StateVector.from_tensor(labels, t / np.sqrt(prob))


def reduced_matrix(tensor: np.ndarray, keep_axes: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure tensor (one axis per qubit) over ``keep_axes``."""
    n = tensor.ndim
    rest = [ax for ax in range(n) if ax not in keep_axes]
    m = np.transpose(tensor, list(keep_axes) + rest).reshape(2 ** len(keep_axes), -1)
    return m @ m.conj().T


def partial_trace(state: StateVector | DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    keep = sorted(int(q) for q in keep)
    if not keep:
        raise InputError("partial trace needs a nonempty set of qubits to keep")
    if len(set(keep)) != len(keep):
        raise InputError(f"duplicate labels in keep={keep}")
    missing = set(keep) - set(state.labels)
    if missing:
        raise InputError(f"qubits {sorted(missing)} not in register {state.labels}")
    axes = [state.labels.index(q) for q in keep]

    if isinstance(state, StateVector):
        rho = reduced_matrix(state.tensor(), axes)
    else:
        n = state.num_qubits
        t = state.entries.reshape((2,) * (2 * n))
        traced = [ax for ax in range(n) if ax not in axes]
        # einsum subscripts: ket axes 0..n-1, bra axes n..2n-1, traced pairs share a letter
        letters = [chr(ord("a") + i) for i in range(2 * n)]
        for ax in traced:
            letters[n + ax] = letters[ax]
        out = [letters[ax] for ax in axes] + [letters[n + ax] for ax in axes]
        rho = np.einsum("".join(letters) + "->" + "".join(out), t)
        d = 2 ** len(axes)
        rho = rho.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(tuple(keep), rho)


def product_state(labels: Sequence[int], vectors: Sequence[np.ndarray]) -> StateVector:
    """Tensor product of single-qubit vectors, one per label."""
    if len(labels) != len(vectors):
        raise InputError("need one vector per label")
    psi = np.array([1.0 + 0j])
    for v in vectors:
        v = np.asarray(v, dtype=complex)
        psi = np.kron(psi, v / np.linalg.norm(v))
    return StateVector(tuple(labels), psi)


def check_real(value: complex, tol: float = 1e-9) -> float:
    if abs(value.imag) > tol:
        raise NumericalFailure(f"expected a real value, imaginary part {value.imag:.3e}")
    return float(value.real)
