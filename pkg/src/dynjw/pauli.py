"""Pauli-string algebra, Clifford conjugation and parity-flow tracking.

A Pauli operator on ``n`` qubits is stored as ``i^k * X^x * Z^z`` where
``x`` and ``z`` are bit vectors and the per-qubit factor is ``X^x_q Z^z_q``
(so a Y contributes one power of ``i`` to ``k``).  Clifford conjugation
``C^dag P C`` is computed gate by gate from tables derived once from the
dense gate matrices.

Parity-flow labels follow the recursive update rule: appending
``CNOT(c, t)`` XORs the Z-label of ``c`` into the Z-label of ``t`` (and the
X-label of ``t`` into the X-label of ``c``), so row ``i`` of the Z-label
matrix is always the support of ``C^dag Z_i C``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .circuit import (CLIFFORD_KINDS, Circuit, Gate, UnsupportedGateError,
                      gate_matrix)
from .lattice import CanonicalOrdering


class NotDiagonalError(ValueError):
    """Circuit is not of the CNOT-conjugated diagonal form."""


@dataclass(eq=False)
class PauliString:
    n: int
    x: np.ndarray
    z: np.ndarray
    phase_pow: int = 0  # operator = i^phase_pow * X^x * Z^z

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=bool).copy()
        self.z = np.asarray(self.z, dtype=bool).copy()
        self.phase_pow %= 4
        if self.x.shape != (self.n,) or self.z.shape != (self.n,):
            raise ValueError("bit vectors must have length n")

    @staticmethod
    def identity(n: int) -> "PauliString":
        return PauliString(n, np.zeros(n, bool), np.zeros(n, bool))

    @staticmethod
    def single(n: int, qubit: int, letter: str) -> "PauliString":
        x = np.zeros(n, bool)
        z = np.zeros(n, bool)
        k = 0
        letter = letter.upper()
        if letter in ("X", "Y"):
            x[qubit] = True
        if letter in ("Z", "Y"):
            z[qubit] = True
        if letter == "Y":
            k = 1
        elif letter not in ("X", "Z", "I"):
            raise ValueError(f"bad Pauli letter {letter!r}")
        return PauliString(n, x, z, k)

    @staticmethod
    def from_label(label: str) -> "PauliString":
        label = label.strip()
        k = 0
        if label.startswith(("+i", "-i")):
            k = 1 if label[0] == "+" else 3
            label = label[2:]
        elif label.startswith("+"):
            label = label[1:]
        elif label.startswith("-"):
            k = 2
            label = label[1:]
        n = len(label)
        p = PauliString.identity(n)
        for q, letter in enumerate(label):
            if letter == "I":
                continue
            p = p * PauliString.single(n, q, letter)
        p.phase_pow = (p.phase_pow + k) % 4
        return p

    def to_label(self) -> str:
        y = self.x & self.z
        disp = (self.phase_pow - int(y.sum())) % 4
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[disp]
        letters = []
        for xq, zq in zip(self.x, self.z):
            letters.append("IXZY"[xq + 2 * zq] if not (xq and zq) else "Y")
        return prefix + "".join(letters)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        # Reorder Z^z1 past X^x2: one sign per overlapping qubit.
        sign = int(np.count_nonzero(self.z & other.x)) % 2
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z,
                           (self.phase_pow + other.phase_pow + 2 * sign) % 4)

    def equals(self, other: "PauliString") -> bool:
        return (self.n == other.n and self.phase_pow == other.phase_pow
                and bool(np.array_equal(self.x, other.x))
                and bool(np.array_equal(self.z, other.z)))

    def same_letters(self, other: "PauliString") -> bool:
        return (self.n == other.n and bool(np.array_equal(self.x, other.x))
                and bool(np.array_equal(self.z, other.z)))

    def commutes_with(self, other: "PauliString") -> bool:
        sym = int(np.count_nonzero(self.x & other.z)) \
            + int(np.count_nonzero(self.z & other.x))
        return sym % 2 == 0

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def is_hermitian(self) -> bool:
        y = int(np.count_nonzero(self.x & self.z))
        return (self.phase_pow - y) % 2 == 0

    def copy(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.phase_pow)

    def __repr__(self):
        return f"PauliString({self.to_label()!r})"


def _bits_of_index(idx: int, width: int) -> tuple[int, ...]:
    return tuple((idx >> (width - 1 - i)) & 1 for i in range(width))


def _local_pauli_matrix(xs, zs) -> np.ndarray:
    X = np.array([[0, 1], [1, 0]], complex)
    Z = np.array([[1, 0], [0, -1]], complex)
    m = np.eye(1, dtype=complex)
    for xq, zq in zip(xs, zs):
        f = np.eye(2, dtype=complex)
        if xq:
            f = f @ X
        if zq:
            f = f @ Z
        m = np.kron(m, f)
    return m


def _build_conj_table(kind: str) -> dict:
    """(x..., z...) -> (x'..., z'..., dphase) for C^dag P C of a Clifford gate."""
    arity = 1 if kind in ("H", "S", "SDG", "X", "Y", "Z") else 2
    U = gate_matrix(Gate(kind, tuple(range(arity)) if arity > 1 else (0,)))
    table = {}
    dim = 2 ** arity
    for code in range(4 ** arity):
        xs = _bits_of_index(code >> arity, arity)
        zs = _bits_of_index(code & (2 ** arity - 1), arity)
        op = _local_pauli_matrix(xs, zs)
        img = U.conj().T @ op @ U
        found = False
        for code2 in range(4 ** arity):
            xs2 = _bits_of_index(code2 >> arity, arity)
            zs2 = _bits_of_index(code2 & (2 ** arity - 1), arity)
            cand = _local_pauli_matrix(xs2, zs2)
            for k in range(4):
                if np.allclose(img, (1j ** k) * cand, atol=1e-12):
                    table[(xs, zs)] = (xs2, zs2, k)
                    found = True
                    break
            if found:
                break
        if not found:  # pragma: no cover - gate would not be Clifford
            raise UnsupportedGateError(f"{kind} is not Clifford")
    return table


_CONJ_TABLES: dict[str, dict] = {}


def _conj_table(kind: str) -> dict:
    if kind not in _CONJ_TABLES:
        _CONJ_TABLES[kind] = _build_conj_table(kind)
    return _CONJ_TABLES[kind]


def conjugate_by_gate(p: PauliString, gate: Gate) -> PauliString:
    """``g^dag P g`` for a single Clifford gate."""
    if gate.is_marker:
        return p
    if gate.kind not in CLIFFORD_KINDS:
        raise UnsupportedGateError(f"{gate.kind} is not Clifford")
    qs = gate.qubits
    xs = tuple(bool(p.x[q]) for q in qs)
    zs = tuple(bool(p.z[q]) for q in qs)
    xs2, zs2, dk = _conj_table(gate.kind)[(xs, zs)]
    out = p.copy()
    for q, xv, zv in zip(qs, xs2, zs2):
        out.x[q] = xv
        out.z[q] = zv
    out.phase_pow = (out.phase_pow + dk) % 4
    return out


def conjugate(p: PauliString, circuit: Circuit) -> PauliString:
    """``C^dag P C`` with exact phase; Clifford circuits only."""
    if p.n != circuit.n_qubits:
        raise ValueError("qubit counts differ")
    out = p.copy()
    for gate in reversed(circuit.gates):
        out = conjugate_by_gate(out, gate)
    return out


@dataclass
class ParityFlowState:
    """F2 labels of Z- and X-type generators under a CNOT circuit."""

    n: int
    z_labels: np.ndarray = field(default=None)
    x_labels: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.z_labels is None:
            self.z_labels = np.eye(self.n, dtype=bool)
        if self.x_labels is None:
            self.x_labels = np.eye(self.n, dtype=bool)

    def apply_cnot(self, control: int, target: int):
        self.z_labels[target] ^= self.z_labels[control]
        self.x_labels[control] ^= self.x_labels[target]

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.z_labels, np.eye(self.n, dtype=bool)))

    def label(self, qubit: int) -> np.ndarray:
        return self.z_labels[qubit]


def track_cnots(circuit: Circuit) -> ParityFlowState:
    """Parity-flow labels of a CNOT-only circuit."""
    state = ParityFlowState(circuit.n_qubits)
    for g in circuit.gates:
        if g.is_marker:
            continue
        if g.kind != "CNOT":
            raise UnsupportedGateError(f"parity flow tracks CNOTs only, got {g.kind}")
        state.apply_cnot(*g.qubits)
    return state


@dataclass(eq=False)
class PhasePolynomial:
    """F2 quadratic + linear phase function of a diagonal circuit.

    The circuit acts as ``|x> -> (-1)^(Q(x)) |x>`` with
    ``Q(x) = sum quad[i,j] x_i x_j + sum linear[i] x_i`` over F2.
    """

    n: int
    quad: np.ndarray = field(default=None)   # strictly upper triangular
    linear: np.ndarray = field(default=None)
    is_pi_over_2_graded: bool = True

    def __post_init__(self):
        if self.quad is None:
            self.quad = np.zeros((self.n, self.n), dtype=bool)
        if self.linear is None:
            self.linear = np.zeros(self.n, dtype=bool)
        self.quad = np.asarray(self.quad, dtype=bool)
        self.linear = np.asarray(self.linear, dtype=bool)
        if np.any(np.tril(self.quad)):
            raise ValueError("quadratic part must be strictly upper triangular")

    def add_pair(self, i: int, j: int):
        if i == j:
            self.linear[i] ^= True
        else:
            i, j = min(i, j), max(i, j)
            self.quad[i, j] ^= True

    def add_expansion(self, a: np.ndarray, b: np.ndarray):
        """XOR in the F2 expansion of CZ between parity labels a and b."""
        outer = np.outer(a, b)
        self.quad ^= np.triu(outer ^ outer.T, k=1)
        self.linear ^= a & b

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.quad))]

    def is_zero(self) -> bool:
        return not (self.quad.any() or self.linear.any())

    def equals(self, other: "PhasePolynomial") -> bool:
        return (self.n == other.n and bool(np.array_equal(self.quad, other.quad))
                and bool(np.array_equal(self.linear, other.linear)))

    def xor(self, other: "PhasePolynomial") -> "PhasePolynomial":
        return PhasePolynomial(self.n, self.quad ^ other.quad,
                               self.linear ^ other.linear)

    def evaluate(self, bits: np.ndarray) -> int:
        b = np.asarray(bits, dtype=np.int64)
        q = int(b @ self.quad.astype(np.int64) @ b) & 1
        return q ^ (int(np.count_nonzero(self.linear & np.asarray(bits, bool))) & 1)

    def to_json(self) -> str:
        return json.dumps({"linear": np.nonzero(self.linear)[0].tolist(),
                           "quadratic": [[i, j] for i, j in self.pairs()]})

    @staticmethod
    def from_pairs(n: int, pairs, linear=()) -> "PhasePolynomial":
        poly = PhasePolynomial(n)
        for i, j in pairs:
            poly.add_pair(int(i), int(j))
        for i in linear:
            poly.linear[int(i)] ^= True
        return poly


def conjugated_cz_expansion(flow: ParityFlowState, i: int, j: int) -> PhasePolynomial:
    """Phase contribution of a CZ applied in the frame described by ``flow``."""
    if i == j:
        raise ValueError("CZ needs two distinct qubits")
    poly = PhasePolynomial(flow.n)
    poly.add_expansion(flow.z_labels[i], flow.z_labels[j])
    return poly


def phase_polynomial(circuit: Circuit) -> PhasePolynomial:
    """Exact phase function of a CNOT/CZ/Z circuit with identity net CNOT map.

    Two such circuits are equal as unitaries iff their polynomials are equal
    (no global-phase ambiguity: entries are exactly +-1).
    """
    if circuit.n_qubits > 128:
        return _phase_polynomial_packed(circuit)
    flow = ParityFlowState(circuit.n_qubits)
    poly = PhasePolynomial(circuit.n_qubits)
    for g in circuit.gates:
        if g.is_marker:
            continue
        if g.kind == "CNOT":
            flow.apply_cnot(*g.qubits)
        elif g.kind == "CZ":
            poly.add_expansion(flow.z_labels[g.qubits[0]], flow.z_labels[g.qubits[1]])
        elif g.kind == "Z":
            poly.linear ^= flow.z_labels[g.qubits[0]]
        else:
            raise UnsupportedGateError(
                f"phase polynomial supports CNOT/CZ/Z, got {g.kind}")
    if not flow.is_identity():
        raise NotDiagonalError("net CNOT linear map is not the identity")
    return poly


def _phase_polynomial_packed(circuit: Circuit) -> PhasePolynomial:
    # Bit-packed variant for large registers: labels stay boolean for row
    # masking while the accumulated pair matrix is packed 8 bits per byte.
    n = circuit.n_qubits
    n_bytes = (n + 7) // 8
    labels = np.eye(n, dtype=bool)
    quad = np.zeros((n, n_bytes), dtype=np.uint8)  # symmetric, zero diagonal
    linear = np.zeros(n, dtype=bool)
    for g in circuit.gates:
        if g.is_marker:
            continue
        if g.kind == "CNOT":
            c, t = g.qubits
            labels[t] ^= labels[c]
        elif g.kind == "CZ":
            a = labels[g.qubits[0]]
            b = labels[g.qubits[1]]
            quad[a] ^= np.packbits(b, bitorder="little")
            quad[b] ^= np.packbits(a, bitorder="little")
            linear ^= a & b
        elif g.kind == "Z":
            linear ^= labels[g.qubits[0]]
        else:
            raise UnsupportedGateError(
                f"phase polynomial supports CNOT/CZ/Z, got {g.kind}")
    if not np.array_equal(labels, np.eye(n, dtype=bool)):
        raise NotDiagonalError("net CNOT linear map is not the identity")
    sym = np.unpackbits(quad, axis=1, count=n, bitorder="little").astype(bool)
    np.fill_diagonal(sym, False)  # XOR-doubled diagonal entries cancel
    return PhasePolynomial(n, np.triu(sym, k=1), linear)


@dataclass
class MajoranaPair:
    mode: int  # flat site index
    even_string: PauliString
    odd_string: PauliString


def majorana_pair(mode_site, ordering: CanonicalOrdering) -> MajoranaPair:
    """JW Majorana pair of the mode at a lattice site under an ordering.

    The even operator is X on the site's qubit times Z on every qubit of
    lower rank; the odd operator has Y in place of X.
    """
    shape = ordering.shape
    flat = shape.flat(tuple(mode_site)) if not isinstance(mode_site, (int, np.integer)) \
        else int(mode_site)
    n = shape.n_sites
    rank = ordering.rank_of[flat]
    tail = np.asarray(ordering.rank_of) < rank
    even = PauliString(n, np.zeros(n, bool), tail.copy())
    even.x[flat] = True
    odd = PauliString(n, np.zeros(n, bool), tail.copy())
    odd.x[flat] = True
    odd.z[flat] ^= True
    odd.phase_pow = 1
    return MajoranaPair(flat, even, odd)


def hopping_string(i, j, ordering: CanonicalOrdering) -> tuple[PauliString, PauliString]:
    """XX- and YY-type JW strings of the hopping between two modes.

    Locality is ``|rank(i) - rank(j)| + 1``: X (or Y) on both endpoint
    qubits and Z on every qubit of strictly intermediate rank.
    """
    shape = ordering.shape
    fi = shape.flat(tuple(i)) if not isinstance(i, (int, np.integer)) else int(i)
    fj = shape.flat(tuple(j)) if not isinstance(j, (int, np.integer)) else int(j)
    if fi == fj:
        raise ValueError("hopping needs two distinct modes")
    n = shape.n_sites
    ri, rj = int(ordering.rank_of[fi]), int(ordering.rank_of[fj])
    lo, hi = min(ri, rj), max(ri, rj)
    ranks = np.asarray(ordering.rank_of)
    mid = (ranks > lo) & (ranks < hi)
    xx = PauliString(n, np.zeros(n, bool), mid.copy())
    xx.x[fi] = xx.x[fj] = True
    yy = PauliString(n, np.zeros(n, bool), mid.copy())
    yy.x[fi] = yy.x[fj] = True
    yy.z[fi] ^= True
    yy.z[fj] ^= True
    yy.phase_pow = 2
    return xx, yy
