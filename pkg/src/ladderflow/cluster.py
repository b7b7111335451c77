"""Ladder graphs, their cluster states, and measurement cascades.

Qubits on the top rail carry odd labels and qubits on the bottom rail even
labels; rung k joins qubits 2k-1 and 2k::

    1 - 3 - 5 - ... - n-1
    |   |   |          |
    2 - 4 - 6 - ... - n
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InputError
from .pauli import PauliString, PauliSum
from .qstate import MeasurementSpec, StateVector, apply_cz, init_plus, measure_xy


@dataclass(frozen=True)
class LadderGraph:
    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        _check_n(self.n)
        expected = _ladder_edge_set(self.n)
        if frozenset(self.edges) != expected:
            raise InputError("edge set does not describe a ladder graph")
        object.__setattr__(self, "edges", expected)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(range(1, self.n + 1))

    def neighbors(self, q: int) -> tuple[int, ...]:
        out = [b for a, b in self.edges if a == q] + [a for a, b in self.edges if b == q]
        return tuple(sorted(out))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def _check_n(n: int) -> None:
    if isinstance(n, bool) or int(n) != n or n < 4 or n % 2:
        raise InputError("n must be even and ≥ 4")


def _ladder_edge_set(n: int) -> frozenset[tuple[int, int]]:
    half = n // 2
    edges = {(2 * k - 1, 2 * k) for k in range(1, half + 1)}
    edges |= {(2 * k - 1, 2 * k + 1) for k in range(1, half)}
    edges |= {(2 * k, 2 * k + 2) for k in range(1, half)}
    return frozenset(edges)


def ladder_edges(n: int) -> LadderGraph:
    _check_n(n)
    return LadderGraph(int(n), _ladder_edge_set(int(n)))


def prepare_cluster(
    graph: LadderGraph, edge_order: Iterable[tuple[int, int]] | None = None
) -> StateVector:
    """|+>^n followed by CZ on every edge (``edge_order`` only changes the application order)."""
    order = list(edge_order) if edge_order is not None else graph.sorted_edges()
    if sorted(tuple(sorted(e)) for e in order) != graph.sorted_edges():
        raise InputError("edge_order must be a permutation of the graph's edges")
    state = init_plus(graph.labels)
    for j, k in order:
        state = apply_cz(state, j, k)
    return state


def initial_generators(graph: LadderGraph) -> list[PauliSum]:
    """X on qubit k and Z on each neighbour of k, for k = 1..n."""
    gens = []
    for k in graph.labels:
        letters = {k: "X"}
        letters.update({q: "Z" for q in graph.neighbors(k)})
        gens.append(PauliSum.from_string(PauliString.from_letters(letters)))
    return gens


def measurement_cascade(
    state: StateVector, specs: Sequence[MeasurementSpec]
) -> tuple[float, StateVector]:
    """Apply ``specs`` in order; return the product of branch probabilities and the final state."""
    qubits = [s.qubit for s in specs]
    if len(set(qubits)) != len(qubits):
        raise InputError(f"measured qubits must be distinct, got {qubits}")
    prob = 1.0
    for spec in specs:
        p, state = measure_xy(state, spec)
        prob *= p
    return prob, state


def cascade_specs(angles: Sequence[float], outcomes: Sequence[int]) -> list[MeasurementSpec]:
    """Specs measuring qubits 1..m in ascending order."""
    if len(angles) != len(outcomes):
        raise InputError("need one outcome per angle")
    return [MeasurementSpec(q, float(a), int(s)) for q, (a, s) in enumerate(zip(angles, outcomes), 1)]
