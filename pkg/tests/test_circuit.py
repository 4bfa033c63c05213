import math

import numpy as np
import pytest

from dynjw.circuit import (ALL_TO_ALL, Circuit, ConnectivityError, Gate,
                           LATTICE_SURGERY, NN_LATTICE, UnsupportedGateError,
                           cnot_count, decompose_to_cnot_basis, depth,
                           gate_matrix, resource_report, two_qubit_depth,
                           validate_connectivity)
from dynjw.lattice import LatticeShape
from dynjw.oracles import dense_unitary, global_phase_distance


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
    with pytest.raises(ValueError):
        Gate("RZ", (0,))
    with pytest.raises(UnsupportedGateError):
        Gate("TOFFOLI", (0, 1))


def test_fswap_matrix():
    m = gate_matrix(Gate("FSWAP", (0, 1)))
    expected = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]],
                        dtype=complex)
    assert np.allclose(m, expected)


def test_hop_matrix_is_hopping_exponential():
    theta = 0.37
    xx = np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]])
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]]).real
    h = (np.asarray(xx) + np.asarray(yy)) / 2
    vals, vecs = np.linalg.eigh(h)
    expected = (vecs * np.exp(1j * theta * vals)) @ vecs.conj().T
    assert np.allclose(gate_matrix(Gate("HOP", (0, 1), theta)), expected)


@pytest.mark.parametrize("gate", [
    Gate("FSWAP", (0, 1)),
    Gate("SWAP", (0, 1)),
    Gate("CZ", (0, 1)),
    Gate("HOP", (0, 1), 0.7),
    Gate("HOP", (1, 0), -1.3),
    Gate("FSWAPHOP", (0, 1), 0.7),
    Gate("FSWAPHOP", (0, 1), -0.2),
    Gate("CPHASE", (0, 1), 1.1),
    Gate("PAULIROT", (0, 1), 0.5, "XX"),
    Gate("PAULIROT", (0, 1), 0.5, "YZ"),
    Gate("PAULIROT", (1, 0), -0.8, "ZY"),
])
def test_decomposition_preserves_unitary(gate):
    c = Circuit(2, [gate])
    dec = decompose_to_cnot_basis(c)
    assert global_phase_distance(dense_unitary(c), dense_unitary(dec)) < 1e-12
    for g in dec.real_gates():
        assert g.kind in ("CNOT", "H", "S", "SDG", "RZ", "X", "Y", "Z", "RY", "CZ")


def test_single_qubit_circuit_unchanged():
    c = Circuit(2, [Gate("H", (0,)), Gate("RZ", (1,), 0.3)])
    assert decompose_to_cnot_basis(c).gates == c.gates


@pytest.mark.parametrize("kind,count", [
    ("FSWAP", 2), ("HOP", 2), ("FSWAPHOP", 2), ("SWAP", 3), ("CPHASE", 2),
])
def test_cnot_costs(kind, count):
    angle = 0.3 if kind in ("HOP", "FSWAPHOP", "CPHASE") else None
    c = Circuit(2, [Gate(kind, (0, 1), angle)])
    assert cnot_count(c) == count


def test_cz_counting_modes():
    c = Circuit(2, [Gate("CZ", (0, 1))])
    assert cnot_count(c) == 1
    native = decompose_to_cnot_basis(c, cz_native=True)
    assert native.count("CZ") == 1 and native.count("CNOT") == 0


def test_gate_inverses():
    for g in [Gate("S", (0,)), Gate("SDG", (0,)), Gate("RZ", (0,), 0.4),
              Gate("FSWAPHOP", (0, 1), 0.9), Gate("CNOT", (0, 1))]:
        c = Circuit(2, [g, g.inverse()])
        assert global_phase_distance(dense_unitary(c), np.eye(4)) < 1e-12


def test_circuit_inverse_dense():
    rng = np.random.default_rng(0)
    gates = [Gate("CNOT", (0, 1)), Gate("FSWAPHOP", (1, 2), 0.3),
             Gate("H", (2,)), Gate("CPHASE", (0, 2), 0.8), Gate("S", (1,))]
    c = Circuit(3, gates)
    full = c.concat(c.inverse())
    assert global_phase_distance(dense_unitary(full), np.eye(8)) < 1e-12


def test_validate_connectivity():
    shape = LatticeShape((1, 3))
    empty = Circuit(3, [], shape)
    assert validate_connectivity(empty) == []
    c = Circuit(3, [Gate("CNOT", (0, 2))], shape)
    assert len(validate_connectivity(c)) == 1
    ok = Circuit(3, [Gate("CNOT", (0, 1)), Gate("CNOT", (1, 2))], shape)
    assert validate_connectivity(ok) == []


def test_depth_sequential_ladder():
    L = 5
    c = Circuit(L)
    c.ladder([Gate("CNOT", (q + 1, q)) for q in range(L - 2, -1, -1)])
    assert depth(c, NN_LATTICE) == L - 1
    assert depth(c, ALL_TO_ALL) == math.ceil(math.log2(L))
    assert depth(c, LATTICE_SURGERY) == 7


def test_depth_parallel_gates():
    c = Circuit(4, [Gate("CNOT", (0, 1)), Gate("CNOT", (2, 3))])
    assert depth(c) == 1
    c.append(Gate("CNOT", (1, 2)))
    assert depth(c) == 2


def test_depth_monotone_under_append():
    rng = np.random.default_rng(1)
    c = Circuit(5)
    prev = 0
    for _ in range(30):
        a, b = rng.choice(5, size=2, replace=False)
        c.append(Gate("CNOT", (int(a), int(b))))
        d = depth(c)
        assert d >= prev
        prev = d


def test_two_qubit_depth_ignores_singles():
    c = Circuit(2, [Gate("H", (0,)), Gate("CZ", (0, 1)), Gate("H", (0,))])
    assert two_qubit_depth(c) == 1
    assert depth(c) == 3


def test_depth_nn_requires_legality():
    shape = LatticeShape((1, 3))
    c = Circuit(3, [Gate("CNOT", (0, 2))], shape)
    with pytest.raises(ConnectivityError):
        depth(c, NN_LATTICE)
    assert depth(c, ALL_TO_ALL) == 1


def test_resource_report():
    c = Circuit(4, [Gate("FSWAP", (0, 1)), Gate("FSWAP", (1, 2)),
                    Gate("FSWAP", (2, 3))])
    rep = resource_report(c)
    assert rep.cnot_count == 6
    assert rep.gate_counts == {"FSWAP": 3}
    assert rep.two_qubit_depth == 3
    empty = resource_report(Circuit(2))
    assert empty.cnot_count == 0 and empty.two_qubit_depth == 0


def test_text_roundtrip():
    shape = LatticeShape((2, 2))
    c = Circuit(4, [], shape)
    c.ladder([Gate("CNOT", (2, 0)), Gate("CNOT", (3, 1))])
    c.append(Gate("FSWAPHOP", (0, 1), 0.125))
    c.append(Gate("PAULIROT", (1, 2), -0.5, "XY"))
    c.append(Gate("Z", (3,)))
    c2 = Circuit.from_text(c.to_text())
    assert c2.n_qubits == 4 and c2.shape == shape
    assert c2.gates == c.gates
