"""Pauli strings, weighted Pauli sums and their action on statevectors."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CapabilityError, InputError, NumericalFailure
from .qstate import StateVector

LETTERS = "IXYZ"
PHASES = (1, 1j, -1, -1j)
CENSUS_TOL = 1e-8
CENSUS_MAX_QUBITS = 8

# (a, b) -> (phase, letter) for the single-qubit product a·b
_PRODUCT = {}
for _a in LETTERS:
    _PRODUCT[("I", _a)] = (1, _a)
    _PRODUCT[(_a, "I")] = (1, _a)
    _PRODUCT[(_a, _a)] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PRODUCT[(_a, _b)] = (1j, _c)
    _PRODUCT[(_b, _a)] = (-1j, _c)


def _canonical_phase(phase: complex) -> complex:
    for p in PHASES:
        if abs(phase - p) < 1e-12:
            return p
    raise InputError(f"Pauli string phase must be one of 1, -1, i, -i, got {phase!r}")


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis with a phase in {1, -1, i, -i}.

    ``letters`` is stored canonically as ascending ``(label, letter)`` pairs
    with identities dropped; build instances with :meth:`from_letters` or
    :meth:`parse`.
    """

    letters: tuple[tuple[int, str], ...] = ()
    phase: complex = 1

    def __post_init__(self):
        canon = []
        seen = set()
        for q, p in self.letters:
            q = int(q)
            if q < 1:
                raise InputError(f"invalid qubit label {q}")
            if p not in LETTERS:
                raise InputError(f"invalid Pauli letter {p!r}")
            if q in seen:
                raise InputError(f"qubit {q} appears twice in Pauli string")
            seen.add(q)
            if p != "I":
                canon.append((q, p))
        object.__setattr__(self, "letters", tuple(sorted(canon)))
        object.__setattr__(self, "phase", _canonical_phase(complex(self.phase)))

    @classmethod
    def from_letters(cls, letters: Mapping[int, str], phase: complex = 1) -> "PauliString":
        return cls(tuple(letters.items()), phase)

    @classmethod
    def parse(cls, text: str, phase: complex = 1) -> "PauliString":
        """Parse compact forms such as ``"Z2Z3X4"`` or ``"X1 I2 Z3"``."""
        text = text.replace(" ", "").replace("_", "")
        letters = {}
        i = 0
        while i < len(text):
            p = text[i].upper()
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            if p not in LETTERS or j == i + 1:
                raise InputError(f"cannot parse Pauli string {text!r}")
            q = int(text[i + 1 : j])
            if q in letters:
                raise InputError(f"qubit {q} appears twice in {text!r}")
            letters[q] = p
            i = j
        return cls.from_letters(letters, phase)

    def as_dict(self) -> dict[int, str]:
        return dict(self.letters)

    def letter(self, q: int) -> str:
        return self.as_dict().get(q, "I")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.letters)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    def render(self, labels: Sequence[int] | None = None) -> str:
        labels = sorted(labels) if labels is not None else list(self.support)
        if not labels:
            return "I"
        return "".join(f"{self.letter(q)}{q}" for q in labels)


def pauli_multiply(p: PauliString, q: PauliString) -> PauliString:
    a, b = p.as_dict(), q.as_dict()
    phase = p.phase * q.phase
    out = {}
    for label in sorted(set(a) | set(b)):
        ph, c = _PRODUCT[(a.get(label, "I"), b.get(label, "I"))]
        phase *= ph
        out[label] = c
    return PauliString.from_letters(out, phase)


def commutes(p: PauliString, q: PauliString) -> bool:
    a, b = p.as_dict(), q.as_dict()
    clashes = sum(1 for k in set(a) & set(b) if a[k] != b[k])
    return clashes % 2 == 0


@dataclass(frozen=True, eq=False)
class PauliSum:
    """Weighted sum of Pauli strings.

    Terms are canonicalized on construction: the phase of each string is
    folded into its coefficient (strings are stored with phase +1) and terms
    with identical letters are merged, keeping first-appearance order.
    Exact-zero coefficients are dropped.  Equality ignores term order.
    """

    terms: tuple[tuple[complex, PauliString], ...] = ()

    def __post_init__(self):
        merged: dict[tuple, complex] = {}
        for coeff, s in self.terms:
            c = complex(coeff) * s.phase
            if not np.isfinite(c):
                raise InputError(f"non-finite coefficient {coeff!r}")
            merged[s.letters] = merged.get(s.letters, 0) + c
        terms = tuple((c, PauliString(key)) for key, c in merged.items() if c != 0)
        object.__setattr__(self, "terms", terms)

    def as_dict(self) -> dict[tuple, complex]:
        return {s.letters: c for c, s in self.terms}

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(frozenset(self.as_dict().items()))

    @classmethod
    def from_string(cls, s: PauliString, coeff: complex = 1) -> "PauliSum":
        return cls(((coeff, s),))

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, str | PauliString]]) -> "PauliSum":
        return cls(tuple((c, PauliString.parse(s) if isinstance(s, str) else s) for c, s in terms))

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum(self.terms + other.terms)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            return PauliSum(
                tuple((a * b, pauli_multiply(p, q)) for a, p in self.terms for b, q in other.terms)
            )
        return PauliSum(tuple((c * other, s) for c, s in self.terms))

    __rmul__ = __mul__

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted({q for _, s in self.terms for q in s.support}))

    def l1_norm(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))

    def significant_terms(self, tol: float = 1e-12) -> tuple[tuple[complex, PauliString], ...]:
        return tuple((c, s) for c, s in self.terms if abs(c) > tol)

    def is_single_string(self, tol: float = 1e-12) -> bool:
        """True when exactly one term survives a magnitude cut at ``tol``."""
        return len(self.significant_terms(tol)) == 1

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c, _ in self.terms)

    def render(self, labels: Sequence[int] | None = None) -> str:
        labels = labels if labels is not None else self.support
        if not self.terms:
            return "0"
        return " + ".join(f"{_fmt_coeff(c)} * {s.render(labels)}" for c, s in self.terms)


def _fmt_coeff(c: complex) -> str:
    if abs(c.imag) <= 1e-15:
        return f"{c.real:.6g}"
    if abs(c.real) <= 1e-15:
        return f"{c.imag:.6g}j"
    return f"({c.real:.6g}{c.imag:+.6g}j)"


def apply_string(state: StateVector, s: PauliString) -> np.ndarray:
    """Tensor of P|psi> computed axis by axis, without building the operator matrix."""
    t = state.tensor()
    n = state.num_qubits
    for q, p in s.letters:
        ax = state.axis(q)
        shape = [1] * n
        shape[ax] = 2
        if p == "X":
            t = np.flip(t, axis=ax)
        elif p == "Z":
            t = t * np.array([1, -1]).reshape(shape)
        else:  # Y|0> = i|1>, Y|1> = -i|0>
            t = np.flip(t, axis=ax) * np.array([-1j, 1j]).reshape(shape)
    return s.phase * t


def pauli_expectation(state: StateVector, op: PauliSum | PauliString) -> float:
    if isinstance(op, PauliString):
        op = PauliSum.from_string(op)
    missing = set(op.support) - set(state.labels)
    if missing:
        raise InputError(f"operator acts on qubits {sorted(missing)} absent from {state.labels}")
    bra = state.tensor().conj()
    total = 0j
    for c, s in op.terms:
        total += c * np.sum(bra * apply_string(state, s))
    if abs(total.imag) > 1e-9:
        raise NumericalFailure(f"expectation has imaginary part {total.imag:.3e}; operator not Hermitian")
    return float(total.real)


def _walsh_hadamard(f: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis (length 2^n)."""
    f = f.copy()
    n = f.shape[-1]
    h = 1
    while h < n:
        f = f.reshape(f.shape[:-1] + (n // (2 * h), 2, h))
        a, b = f[..., 0, :], f[..., 1, :]
        f = np.stack((a + b, a - b), axis=-2).reshape(f.shape[:-3] + (n,))
        h *= 2
    return f


def string_expectations(state: StateVector) -> np.ndarray:
    """|<P>| for every phase-(+1) Pauli string, indexed as ``[x_mask, z_mask]``.

    Bit ``n-1-k`` of a mask refers to the k-th label (first label is the MSB),
    matching the amplitude ordering.  Letter at a qubit is I/X/Z/Y for
    (x, z) bits 00/10/01/11; the overall phase i^{#Y} is dropped because only
    magnitudes are returned.
    """
    psi = state.amplitudes
    dim = psi.size
    idx = np.arange(dim)
    # row x: f_x(i) = conj(psi[i ^ x]) psi[i]; WHT over i gives sum_i f_x(i) (-1)^{popcount(i & z)}
    f = psi.conj()[idx[None, :] ^ idx[:, None]] * psi[None, :]
    return np.abs(_walsh_hadamard(f))


def stabilizer_census(state: StateVector, tol: float = CENSUS_TOL) -> tuple[int, bool]:
    n = state.num_qubits
    if n > CENSUS_MAX_QUBITS:
        raise CapabilityError(f"census enumerates 4^n strings; n={n} exceeds {CENSUS_MAX_QUBITS}")
    count = int(np.count_nonzero(string_expectations(state) >= 1.0 - tol))
    return count, count == 2**n


def census_strings(state: StateVector, tol: float = CENSUS_TOL) -> list[PauliString]:
    """The strings counted by :func:`stabilizer_census`, for display."""
    n = state.num_qubits
    mags = string_expectations(state)
    out = []
    for x, z in zip(*np.nonzero(mags >= 1.0 - tol)):
        letters = {}
        for k, q in enumerate(state.labels):
            bit = n - 1 - k
            letters[q] = "IZXY"[((x >> bit) & 1) * 2 + ((z >> bit) & 1)]
        out.append(PauliString.from_letters(letters))
    return sorted(out, key=lambda s: s.render(state.labels))


def all_strings(labels: Sequence[int]) -> Iterable[PauliString]:
    for combo in itertools.product(LETTERS, repeat=len(labels)):
        yield PauliString.from_letters(dict(zip(labels, combo)))


def paper_generators(
    n: int, angles: Sequence[float], outcomes: Sequence[int], verbatim: bool = False
) -> list[PauliSum]:
    """Transformed stabilizer generators of the output qubits after the measurement cascade.

    n=4 (one measured qubit) returns g(2), g(3), g(4) on qubits 2-4; n=6 (three
    measured qubits) returns g(4), g(5), g(6) on qubits 4-6.  The n=6 sums carry
    outcome signs (-1)^(s2+s3) on g(4) and (-1)^(s1+s3) on the sin(phi1) terms
    of g(5); ``verbatim=True`` drops them, which is only correct for the
    all-zero outcome branch.
    """
    c, s = np.cos, np.sin
    if n == 4:
        if len(angles) != 1 or len(outcomes) != 1:
            raise InputError("n=4 takes exactly one angle and one outcome")
        (p1,), (s1,) = angles, outcomes
        sign = (-1) ** int(s1)
        return [
            PauliSum.from_terms([(1, "X2X3")]),
            PauliSum.from_terms([(sign * c(p1), "Z2Z3"), (sign * s(p1), "Z2Y3Z4")]),
            PauliSum.from_terms([(1, "Z2Z3X4")]),
        ]
    if n == 6:
        if len(angles) != 3 or len(outcomes) != 3:
            raise InputError("n=6 takes exactly three angles and three outcomes")
        p1, p2, p3 = angles
        s1, s2, s3 = (int(b) for b in outcomes)
        sign4 = 1 if verbatim else (-1) ** (s2 + s3)
        sign5 = 1 if verbatim else (-1) ** (s1 + s3)
        g4 = PauliSum.from_terms(
            [
                (sign4 * c(p3) * c(p2), "Z5"),
                (sign4 * c(p3) * s(p2), "X4Y5"),
                (sign4 * s(p3) * c(p2), "Y5Z6"),
                (-sign4 * s(p3) * s(p2), "X4Z5Z6"),
            ]
        )
        g5 = PauliSum.from_terms(
            [
                (-sign5 * s(p1) * s(p3), "Y4Y5"),
                ((-1) ** s1 * c(p1), "X4Z6"),
                (-sign5 * s(p1) * c(p3), "Y4Z5Z6"),
            ]
        )
        return [g4, g5, PauliSum.from_terms([(1, "Z4Z5X6")])]
    raise InputError(f"transformed generators are tabulated for n=4 and n=6 only, got n={n}")


def last_generator(n: int) -> PauliSum:
    """Z_{n-2} Z_{n-1} X_n, untouched by measurements on qubits 1..n-3."""
    return PauliSum.from_terms([(1, f"Z{n - 2}Z{n - 1}X{n}")])
