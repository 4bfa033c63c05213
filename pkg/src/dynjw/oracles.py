"""Brute-force ground truth: dense unitaries and exact fermionic operators.

Basis convention: qubit 0 is the most significant bit of the computational
basis index.  Concatenating circuits multiplies matrices right-to-left:
``dense_unitary(c1.concat(c2)) == dense_unitary(c2) @ dense_unitary(c1)``.
All oracles are capped at 12 qubits.
"""
from __future__ import annotations

import numpy as np

from .circuit import Circuit, Gate, gate_matrix
from .lattice import CanonicalOrdering
from .pauli import PauliString, majorana_pair

MAX_DENSE_QUBITS = 12


class OracleSizeError(ValueError):
    """Dense oracle requested beyond the 12-qubit cap."""


def _check_size(n: int):
    if n > MAX_DENSE_QUBITS:
        raise OracleSizeError(f"{n} qubits exceed the dense cap of {MAX_DENSE_QUBITS}")


def apply_gate_dense(state: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply a gate to a (2^n, m) matrix of column vectors."""
    if gate.is_marker:
        return state
    cols = state.shape[1] if state.ndim == 2 else 1
    tensor = state.reshape((2,) * n + (cols,))
    axes = list(gate.qubits)
    k = len(axes)
    moved = np.moveaxis(tensor, axes, range(k))
    mat = gate_matrix(gate)
    flat = moved.reshape(2 ** k, -1)
    flat = mat @ flat
    moved = flat.reshape((2,) * k + moved.shape[k:])
    tensor = np.moveaxis(moved, range(k), axes)
    return tensor.reshape(state.shape)


def dense_unitary(circuit: Circuit) -> np.ndarray:
    """Exact 2^n x 2^n matrix of a circuit."""
    n = circuit.n_qubits
    _check_size(n)
    u = np.eye(2 ** n, dtype=np.complex128)
    for g in circuit.gates:
        u = apply_gate_dense(u, g, n)
    return u


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Dense matrix of a PauliString (qubit 0 most significant)."""
    _check_size(p.n)
    X = np.array([[0, 1], [1, 0]], complex)
    Z = np.array([[1, 0], [0, -1]], complex)
    m = np.eye(1, dtype=complex)
    for xq, zq in zip(p.x, p.z):
        f = np.eye(2, dtype=complex)
        if xq:
            f = f @ X
        if zq:
            f = f @ Z
        m = np.kron(m, f)
    return (1j ** p.phase_pow) * m


def global_phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Operator-norm distance minimized over a global phase."""
    tr = np.trace(v.conj().T @ u)
    phase = tr / abs(tr) if abs(tr) > 1e-14 else 1.0
    return float(np.linalg.norm(u - phase * v, 2))


def expm_hermitian(h: np.ndarray, scale: complex = 1.0) -> np.ndarray:
    """exp(scale * h) for Hermitian h via eigendecomposition."""
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(scale * vals)) @ vecs.conj().T


def number_operator(mode_site, ordering: CanonicalOrdering) -> np.ndarray:
    """Dense n_j = (I - Z_j)/2 for the mode at a site (rank independent)."""
    shape = ordering.shape
    _check_size(shape.n_sites)
    flat = shape.flat(tuple(mode_site)) if not isinstance(mode_site, (int, np.integer)) \
        else int(mode_site)
    z = PauliString.single(shape.n_sites, flat, "Z")
    dim = 2 ** shape.n_sites
    return (np.eye(dim) - pauli_matrix(z)) / 2


def exact_fermionic_term(term: tuple, ordering: CanonicalOrdering) -> np.ndarray:
    """Dense Hermitian matrix of a Hamiltonian term.

    Terms: ``("hopping", i, j)`` -> c_i^dag c_j + h.c.;
    ``("number", i)`` -> n_i; ``("nn", i, j)`` -> n_i n_j.
    """
    kind = term[0]
    _check_size(ordering.shape.n_sites)
    if kind == "hopping":
        _, i, j = term
        mi = majorana_pair(i, ordering)
        mj = majorana_pair(j, ordering)
        # c_i^dag c_j + c_j^dag c_i = (i/2)(chi_2i+1 chi_2j - ... ) reduces to
        # the product form below; build it from Majoranas to stay convention
        # independent.
        a_i = (pauli_matrix(mi.even_string) + 1j * pauli_matrix(mi.odd_string)) / 2
        a_j = (pauli_matrix(mj.even_string) + 1j * pauli_matrix(mj.odd_string)) / 2
        h = a_i.conj().T @ a_j
        return h + h.conj().T
    if kind == "number":
        return number_operator(term[1], ordering)
    if kind == "nn":
        _, i, j = term
        return number_operator(i, ordering) @ number_operator(j, ordering)
    raise ValueError(f"unknown term kind {kind!r}")


def exact_term_exponentials(terms: list[tuple[tuple, float]],
                            ordering: CanonicalOrdering) -> np.ndarray:
    """Product of exp(-i * angle * H_term) in the given order (first applied first)."""
    _check_size(ordering.shape.n_sites)
    dim = 2 ** ordering.shape.n_sites
    u = np.eye(dim, dtype=complex)
    for term, angle in terms:
        h = exact_fermionic_term(term, ordering)
        u = expm_hermitian(h, -1j * angle) @ u
    return u


def track_modes(stages) -> np.ndarray:
    """Net mode permutation of annotated stages.

    Each stage is ``("fswap", pos_a, pos_b)`` exchanging the modes at two
    positions, or ``("relabel", perm)`` moving the mode at position p to
    ``perm[p]`` (physical qubit swaps).  Returns ``dest[mode] = position``.
    """
    positions = None
    for stage in stages:
        if positions is None:
            n = stage[1] if stage[0] == "init" else None
            if n is None:
                raise ValueError("stages must start with ('init', n)")
            positions = np.arange(n)
            continue
        kind = stage[0]
        if kind == "fswap":
            _, a, b = stage
            ia = int(np.where(positions == a)[0][0])
            ib = int(np.where(positions == b)[0][0])
            positions[ia], positions[ib] = positions[ib], positions[ia]
        elif kind == "relabel":
            perm = np.asarray(stage[1])
            positions = perm[positions]
        else:
            raise ValueError(f"unknown stage {kind!r}")
    return positions
