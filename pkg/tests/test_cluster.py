import itertools

import numpy as np
import pytest

from ladderflow.cluster import (
    cascade_specs,
    initial_generators,
    ladder_edges,
    measurement_cascade,
    prepare_cluster,
)
from ladderflow.errors import InputError
from ladderflow.pauli import PauliSum, pauli_expectation, stabilizer_census
from ladderflow.qstate import partial_trace

from oracles import brute_cluster_state, eq3_matrix


def test_four_qubit_edges():
    assert ladder_edges(4).edges == {(1, 2), (3, 4), (1, 3), (2, 4)}


def test_six_and_eight_contain_named_edges():
    assert {(3, 5), (4, 6), (5, 6)} <= ladder_edges(6).edges
    assert (5, 7) in ladder_edges(8).edges


@pytest.mark.parametrize("n", [4, 6, 8, 10, 12])
def test_edge_count(n):
    assert len(ladder_edges(n).edges) == n // 2 + 2 * (n // 2 - 1)


@pytest.mark.parametrize("n", [3, 5, 2, 0, -4, 7])
def test_bad_sizes(n):
    with pytest.raises(InputError, match="even"):
        ladder_edges(n)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_prepared_state_matches_brute_force(n):
    np.testing.assert_allclose(prepare_cluster(ladder_edges(n)).amplitudes, brute_cluster_state(n), atol=1e-15)


def test_four_qubit_amplitudes_are_signed_quarters():
    amps = prepare_cluster(ladder_edges(4)).amplitudes
    np.testing.assert_allclose(np.abs(amps), 0.25)
    assert np.all(np.abs(amps.imag) == 0)


def test_edge_order_irrelevant():
    g = ladder_edges(6)
    ref = prepare_cluster(g).amplitudes
    rng = np.random.default_rng(0)
    for _ in range(5):
        order = list(g.sorted_edges())
        rng.shuffle(order)
        order = [(b, a) if rng.random() < 0.5 else (a, b) for a, b in order]
        assert np.array_equal(prepare_cluster(g, order).amplitudes, ref)


def test_initial_generators_n4():
    gens = initial_generators(ladder_edges(4))
    assert len(gens) == 4
    assert gens[0] == PauliSum.from_terms([(1, "X1Z2Z3")])
    assert gens[3] == PauliSum.from_terms([(1, "Z2Z3X4")])


def test_initial_generator_n6_last():
    assert initial_generators(ladder_edges(6))[5] == PauliSum.from_terms([(1, "Z4Z5X6")])


@pytest.mark.parametrize("n", [4, 6, 8])
def test_generators_stabilize_cluster(n):
    g = ladder_edges(n)
    psi = prepare_cluster(g)
    for gen in initial_generators(g):
        assert abs(pauli_expectation(psi, gen) - 1) < 1e-12


def test_four_qubit_cascade_matches_closed_form():
    psi = prepare_cluster(ladder_edges(4))
    for phi in np.linspace(0, 2 * np.pi, 7):
        for s in (0, 1):
            _, post = measurement_cascade(psi, cascade_specs([phi], [s]))
            np.testing.assert_allclose(partial_trace(post, [3, 4]).entries, eq3_matrix(phi, s), atol=1e-12)


def test_first_two_measurements_output_pair():
    # Each branch leaves only a Y5Y6 correlation of strength (-1)^(s1+s2) sin(phi1) sin(phi2),
    # inherited from the stabilizer element Y1Y2Y5Y6; the outcome average is exactly I/4.
    psi = prepare_cluster(ladder_edges(6))
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    rng = np.random.default_rng(1)
    for _ in range(10):
        angles = rng.uniform(0, 2 * np.pi, 2)
        avg = np.zeros((4, 4), dtype=complex)
        for bits in itertools.product((0, 1), repeat=2):
            p, post = measurement_cascade(psi, cascade_specs(angles, bits))
            rho = partial_trace(post, [5, 6]).entries
            c = (-1) ** sum(bits) * np.sin(angles[0]) * np.sin(angles[1])
            np.testing.assert_allclose(rho, (np.eye(4) + c * yy) / 4, atol=1e-12)
            avg += p * rho
        np.testing.assert_allclose(avg, np.eye(4) / 4, atol=1e-10)


def test_clifford_cascade_gives_stabilizer_state():
    psi = prepare_cluster(ladder_edges(6))
    angles = [0.0, np.pi / 2, 3 * np.pi / 2]
    for bits in itertools.product((0, 1), repeat=3):
        _, post = measurement_cascade(psi, cascade_specs(angles, bits))
        assert stabilizer_census(post) == (8, True)


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_branch_probabilities_uniform(n):
    psi = prepare_cluster(ladder_edges(n))
    m = n - 3
    angles = np.random.default_rng(n).uniform(0, 2 * np.pi, m)
    outcomes = list(itertools.product((0, 1), repeat=m))
    if n == 10:
        outcomes = outcomes[::9]
    total = 0.0
    for bits in outcomes:
        p, _ = measurement_cascade(psi, cascade_specs(angles, bits))
        assert abs(p - 2.0**-m) < 1e-10
        total += p
    if n < 10:
        assert abs(total - 1) < 1e-10


@pytest.mark.parametrize("n", [4, 6, 8])
def test_last_generator_survives_cascade(n):
    psi = prepare_cluster(ladder_edges(n))
    gen = PauliSum.from_terms([(1, f"Z{n - 2}Z{n - 1}X{n}")])
    rng = np.random.default_rng(2)
    for _ in range(5):
        m = n - 3
        _, post = measurement_cascade(psi, cascade_specs(rng.uniform(0, 2 * np.pi, m), rng.integers(0, 2, m)))
        assert abs(pauli_expectation(post, gen) - 1) < 1e-10


def test_cascade_rejects_repeated_qubits():
    from ladderflow.qstate import MeasurementSpec

    psi = prepare_cluster(ladder_edges(4))
    with pytest.raises(InputError):
        measurement_cascade(psi, [MeasurementSpec(1, 0.1), MeasurementSpec(1, 0.2)])
