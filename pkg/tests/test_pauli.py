import numpy as np
import pytest

from dynjw.circuit import Circuit, Gate, UnsupportedGateError
from dynjw.lattice import LatticeShape, s_pattern, z_pattern
from dynjw.oracles import dense_unitary, pauli_matrix
from dynjw.pauli import (NotDiagonalError, PauliString, PhasePolynomial,
                         conjugate, conjugated_cz_expansion, hopping_string,
                         majorana_pair, phase_polynomial, track_cnots)


def identity_ordering(n):
    from dynjw.lattice import CanonicalOrdering
    return CanonicalOrdering(LatticeShape((1, n)), np.arange(n))


def test_label_roundtrip():
    for label in ["+XZI", "-YYX", "+iZZZ", "-iIXY", "+IIII"]:
        assert PauliString.from_label(label).to_label() == label


def test_multiplication_phases():
    x = PauliString.from_label("+X")
    z = PauliString.from_label("+Z")
    y = PauliString.from_label("+Y")
    assert (x * z).to_label() == "-iY"
    assert (z * x).to_label() == "+iY"
    assert (x * y).to_label() == "+iZ"
    assert (y * y).to_label() == "+I"


def test_multiplication_matches_dense():
    rng = np.random.default_rng(3)
    letters = "IXYZ"
    for _ in range(40):
        a = "".join(rng.choice(list(letters)) for _ in range(3))
        b = "".join(rng.choice(list(letters)) for _ in range(3))
        pa, pb = PauliString.from_label("+" + a), PauliString.from_label("+" + b)
        assert np.allclose(pauli_matrix(pa * pb), pauli_matrix(pa) @ pauli_matrix(pb))


def test_group_law_under_conjugation_matches_dense():
    rng = np.random.default_rng(7)
    n = 4
    kinds = ["CNOT", "CZ", "H", "S", "SDG", "X", "Y", "Z", "SWAP", "FSWAP"]
    for trial in range(20):
        c = Circuit(n)
        for _ in range(25):
            kind = rng.choice(kinds)
            if kind in ("CNOT", "CZ", "SWAP", "FSWAP"):
                a, b = rng.choice(n, size=2, replace=False)
                c.append(Gate(kind, (int(a), int(b))))
            else:
                c.append(Gate(kind, (int(rng.integers(n)),)))
        label = "+" + "".join(rng.choice(list("IXYZ")) for _ in range(n))
        p = PauliString.from_label(label)
        u = dense_unitary(c)
        expected = u.conj().T @ pauli_matrix(p) @ u
        assert np.allclose(pauli_matrix(conjugate(p, c)), expected, atol=1e-10)


def test_conjugate_multiplicativity():
    rng = np.random.default_rng(11)
    n = 6
    c = Circuit(n)
    for _ in range(60):
        a, b = rng.choice(n, size=2, replace=False)
        c.append(Gate(rng.choice(["CNOT", "CZ", "FSWAP"]), (int(a), int(b))))
    for _ in range(20):
        pa = PauliString.from_label("+" + "".join(rng.choice(list("IXYZ")) for _ in range(n)))
        pb = PauliString.from_label("+" + "".join(rng.choice(list("IXYZ")) for _ in range(n)))
        lhs = conjugate(pa * pb, c)
        rhs = conjugate(pa, c) * conjugate(pb, c)
        assert lhs.equals(rhs)


def test_conjugate_cnot_basics():
    c = Circuit(2, [Gate("CNOT", (0, 1))])
    assert conjugate(PauliString.from_label("+ZI"), c).to_label() == "+ZI"
    assert conjugate(PauliString.from_label("+XI"), c).to_label() == "+XX"
    assert conjugate(PauliString.from_label("+IZ"), c).to_label() == "+ZZ"
    empty = Circuit(2)
    p = PauliString.from_label("-YX")
    assert conjugate(p, empty).equals(p)


def test_conjugate_rejects_non_clifford():
    c = Circuit(1, [Gate("RZ", (0,), 0.2)])
    with pytest.raises(UnsupportedGateError):
        conjugate(PauliString.from_label("+X"), c)


def test_track_cnots_identity_and_single():
    assert track_cnots(Circuit(3)).is_identity()
    flow = track_cnots(Circuit(2, [Gate("CNOT", (0, 1))]))
    assert flow.z_labels[1].tolist() == [True, True]
    assert flow.z_labels[0].tolist() == [True, False]


def test_track_cnots_column_ladder():
    # Upward ladder on a 3-qubit column: label of row r is {r' >= r}.
    c = Circuit(3, [Gate("CNOT", (2, 1)), Gate("CNOT", (1, 0))])
    flow = track_cnots(c)
    assert flow.z_labels[0].tolist() == [True, True, True]
    assert flow.z_labels[1].tolist() == [False, True, True]
    assert flow.z_labels[2].tolist() == [False, False, True]


def test_flow_matches_conjugation_support():
    rng = np.random.default_rng(5)
    n = 6
    c = Circuit(n)
    for _ in range(40):
        a, b = rng.choice(n, size=2, replace=False)
        c.append(Gate("CNOT", (int(a), int(b))))
    flow = track_cnots(c)
    for i in range(n):
        img = conjugate(PauliString.single(n, i, "Z"), c)
        assert img.z.tolist() == flow.z_labels[i].tolist()
        assert not img.x.any() and img.phase_pow == 0
    # x and z label matrices stay inverse-transpose related
    zm = flow.z_labels.astype(np.uint8)
    xm = flow.x_labels.astype(np.uint8)
    assert np.array_equal((zm @ xm.T) % 2, np.eye(n, dtype=np.uint8))


def test_cz_expansion_examples():
    from dynjw.pauli import ParityFlowState
    flow = ParityFlowState(2)
    poly = conjugated_cz_expansion(flow, 0, 1)
    assert poly.pairs() == [(0, 1)] and not poly.linear.any()

    flow = track_cnots(Circuit(2, [Gate("CNOT", (0, 1))]))
    poly = conjugated_cz_expansion(flow, 0, 1)
    assert poly.pairs() == [(0, 1)]
    assert poly.linear.tolist() == [True, False]

    flow = ParityFlowState(2)
    flow.z_labels[0] = [True, True]
    flow.z_labels[1] = [True, True]
    poly = conjugated_cz_expansion(flow, 0, 1)
    assert poly.pairs() == []
    assert poly.linear.tolist() == [True, True]

    with pytest.raises(ValueError):
        conjugated_cz_expansion(flow, 1, 1)


def test_phase_polynomial_sandwich():
    c = Circuit(2, [Gate("CNOT", (0, 1)), Gate("CZ", (0, 1)), Gate("CNOT", (0, 1))])
    poly = phase_polynomial(c)
    assert poly.pairs() == [(0, 1)]
    assert poly.linear.tolist() == [True, False]

    single = phase_polynomial(Circuit(3, [Gate("Z", (2,))]))
    assert single.pairs() == [] and single.linear.tolist() == [False, False, True]


def test_phase_polynomial_rejects_open_frames_and_rotations():
    with pytest.raises(NotDiagonalError):
        phase_polynomial(Circuit(2, [Gate("CNOT", (0, 1))]))
    with pytest.raises(UnsupportedGateError):
        phase_polynomial(Circuit(2, [Gate("RZ", (0,), 0.1)]))


def test_phase_polynomial_matches_dense_diagonal():
    rng = np.random.default_rng(13)
    n = 5
    for _ in range(10):
        body = Circuit(n)
        frame = []
        for _ in range(8):
            a, b = rng.choice(n, size=2, replace=False)
            frame.append(Gate("CNOT", (int(a), int(b))))
        for g in frame:
            body.append(g)
        for _ in range(6):
            a, b = rng.choice(n, size=2, replace=False)
            body.append(Gate("CZ", (int(a), int(b))))
            if rng.random() < 0.5:
                body.append(Gate("Z", (int(rng.integers(n)),)))
        for g in reversed(frame):
            body.append(g)
        poly = phase_polynomial(body)
        u = dense_unitary(body)
        diag = np.diag(u)
        assert np.allclose(u, np.diag(diag), atol=1e-12)
        for idx in range(2 ** n):
            bits = np.array([(idx >> (n - 1 - q)) & 1 for q in range(n)], dtype=bool)
            assert np.isclose(diag[idx], (-1.0) ** poly.evaluate(bits))


def test_phase_polynomial_json():
    poly = PhasePolynomial.from_pairs(3, [(0, 2)], linear=[1])
    assert poly.to_json() == '{"linear": [1], "quadratic": [[0, 2]]}'


def test_majorana_rank0_and_line():
    m = identity_ordering(3)
    pair = majorana_pair((0, 0), m)
    assert pair.even_string.to_label() == "+XII"
    assert pair.odd_string.to_label() == "+YII"
    pair2 = majorana_pair((0, 2), m)
    assert pair2.even_string.to_label() == "+ZZX"
    assert pair2.odd_string.to_label() == "+ZZY"


def test_majorana_s_pattern():
    shape = LatticeShape((2, 2))
    m = s_pattern(shape)
    pair = majorana_pair((1, 0), m)  # rank 3
    assert pair.even_string.x.tolist() == [False, False, True, False]
    assert pair.even_string.z.tolist() == [True, True, False, True]


def test_majorana_anticommutation():
    for lengths in [(2, 2), (3, 3)]:
        shape = LatticeShape(lengths)
        for ordering in (z_pattern(shape), s_pattern(shape)):
            chis = []
            for site in shape.sites():
                p = majorana_pair(site, ordering)
                chis.extend([p.even_string, p.odd_string])
            for a in range(len(chis)):
                for b in range(a, len(chis)):
                    if a == b:
                        sq = chis[a] * chis[a]
                        assert sq.to_label() == "+" + "I" * shape.n_sites
                    else:
                        assert not chis[a].commutes_with(chis[b])


def test_hopping_string_examples():
    m = identity_ordering(3)
    xx, yy = hopping_string((0, 0), (0, 1), m)
    assert xx.to_label() == "+XXI"
    assert yy.to_label() == "+YYI"
    xx2, yy2 = hopping_string((0, 0), (0, 2), m)
    assert xx2.to_label() == "+XZX"
    assert yy2.to_label() == "+YZY"
    with pytest.raises(ValueError):
        hopping_string((0, 1), (0, 1), m)


def test_hopping_locality():
    shape = LatticeShape((3, 3))
    m = s_pattern(shape)
    for a in shape.sites():
        for b in shape.sites():
            if a >= b:
                continue
            xx, _ = hopping_string(a, b, m)
            k = abs(m.rank(a) - m.rank(b)) + 1
            assert xx.weight == k
