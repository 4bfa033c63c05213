"""Gate-level circuit representation, depth models and CNOT-basis counting.

Gates address qubits by flat row-major site index (see :mod:`dynjw.lattice`).
CNOT ladders emitted by the synthesis passes are wrapped in LADDER_BEGIN /
LADDER_END markers so the all-to-all and lattice-surgery depth models can
recost them as single macro operations.

Angle conventions: ``RZ(t) = exp(-i t Z / 2)``, ``RY(t) = exp(-i t Y / 2)``,
``PAULIROT(P1 P2, t) = exp(-i t P1xP2 / 2)``, ``HOP(t) = exp(i t (XX+YY)/2)``
(the two-mode hopping block), ``FSWAPHOP(t) = FSWAP * HOP(t)`` and
``CPHASE(t) = diag(1, 1, 1, exp(-i t))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .lattice import LatticeShape

ONE_QUBIT_KINDS = {"H", "S", "SDG", "X", "Y", "Z", "RZ", "RY"}
TWO_QUBIT_KINDS = {"CNOT", "CZ", "SWAP", "FSWAP", "FSWAPHOP", "CPHASE",
                   "PAULIROT", "HOP", "FSWAPPHASE"}
MARKER_KINDS = {"LADDER_BEGIN", "LADDER_END"}
CLIFFORD_KINDS = {"H", "S", "SDG", "X", "Y", "Z", "CNOT", "CZ", "SWAP", "FSWAP"}
PARAM_KINDS = {"RZ", "RY", "PAULIROT", "FSWAPHOP", "CPHASE", "HOP",
               "FSWAPPHASE"}


class UnsupportedGateError(ValueError):
    """Gate kind not handled by the requested operation."""


class ConnectivityError(ValueError):
    """A two-qubit gate acts on non-adjacent lattice sites."""


class MissingShapeError(ValueError):
    """Operation requires a circuit bound to a lattice shape."""


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...] = ()
    angle: float | None = None
    axes: str | None = None  # two Pauli letters, PAULIROT only

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if kind in MARKER_KINDS:
            if self.qubits:
                raise ValueError("markers take no operands")
        elif kind in ONE_QUBIT_KINDS:
            if len(self.qubits) != 1:
                raise ValueError(f"{kind} takes one operand")
        elif kind in TWO_QUBIT_KINDS:
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"{kind} takes two distinct operands")
        else:
            raise UnsupportedGateError(f"unknown gate kind {self.kind!r}")
        if kind in PARAM_KINDS and self.angle is None:
            raise ValueError(f"{kind} requires an angle")
        if kind == "PAULIROT":
            if self.axes is None or len(self.axes) != 2 or \
                    any(a not in "XYZ" for a in self.axes.upper()):
                raise ValueError("PAULIROT needs a two-letter Pauli axis pair")
            object.__setattr__(self, "axes", self.axes.upper())

    @property
    def is_marker(self) -> bool:
        return self.kind in MARKER_KINDS

    @property
    def is_clifford(self) -> bool:
        return self.kind in CLIFFORD_KINDS

    def inverse(self) -> "Gate":
        if self.kind in MARKER_KINDS:
            other = "LADDER_END" if self.kind == "LADDER_BEGIN" else "LADDER_BEGIN"
            return Gate(other)
        if self.kind == "S":
            return Gate("SDG", self.qubits)
        if self.kind == "SDG":
            return Gate("S", self.qubits)
        if self.angle is not None:
            return replace(self, angle=-self.angle)
        return self


def _u(m):
    return np.asarray(m, dtype=np.complex128)


_PAULI_1Q = {
    "I": _u([[1, 0], [0, 1]]),
    "X": _u([[0, 1], [1, 0]]),
    "Y": _u([[0, -1j], [1j, 0]]),
    "Z": _u([[1, 0], [0, -1]]),
}


def gate_matrix(gate: Gate) -> np.ndarray:
    """Unitary of a gate on its own operands (qubit order as listed).

    Basis order is big-endian in the listed operands: index ``2*a + b`` for
    operand values ``(a, b)``.
    """
    k, t = gate.kind, gate.angle
    if k == "H":
        return _u([[1, 1], [1, -1]]) / math.sqrt(2)
    if k == "S":
        return _u([[1, 0], [0, 1j]])
    if k == "SDG":
        return _u([[1, 0], [0, -1j]])
    if k in ("X", "Y", "Z"):
        return _PAULI_1Q[k]
    if k == "RZ":
        return _u([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]])
    if k == "RY":
        c, s = math.cos(t / 2), math.sin(t / 2)
        return _u([[c, -s], [s, c]])
    if k == "CNOT":
        return _u([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    if k == "CZ":
        return _u(np.diag([1, 1, 1, -1]))
    if k == "SWAP":
        return _u([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    if k == "FSWAP":
        return _u([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, -1]])
    if k == "CPHASE":
        return _u(np.diag([1, 1, 1, np.exp(-1j * t)]))
    if k == "HOP":
        c, s = math.cos(t), math.sin(t)
        return _u([[1, 0, 0, 0],
                   [0, c, 1j * s, 0],
                   [0, 1j * s, c, 0],
                   [0, 0, 0, 1]])
    if k == "FSWAPHOP":
        return gate_matrix(Gate("FSWAP", gate.qubits)) @ \
            gate_matrix(Gate("HOP", gate.qubits, t))
    if k == "FSWAPPHASE":
        return gate_matrix(Gate("FSWAP", gate.qubits)) @ \
            gate_matrix(Gate("CPHASE", gate.qubits, t))
    if k == "PAULIROT":
        p = np.kron(_PAULI_1Q[gate.axes[0]], _PAULI_1Q[gate.axes[1]])
        return math.cos(t / 2) * np.eye(4) - 1j * math.sin(t / 2) * p
    raise UnsupportedGateError(f"no matrix for {k}")


@dataclass
class Circuit:
    """Ordered gate list over ``n_qubits`` wires, optionally shape-bound."""

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    shape: LatticeShape | None = None

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, gate: Gate):
        if any(not 0 <= q < self.n_qubits for q in gate.qubits):
            raise ValueError(f"{gate} out of range for {self.n_qubits} qubits")

    def append(self, gate: Gate):
        self._check(gate)
        self.gates.append(gate)

    def extend(self, gates):
        for g in gates:
            self.append(g)

    def __iter__(self):
        return iter(self.gates)

    def __len__(self):
        return len(self.gates)

    def real_gates(self) -> list[Gate]:
        return [g for g in self.gates if not g.is_marker]

    def concat(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit counts differ")
        return Circuit(self.n_qubits, self.gates + other.gates,
                       self.shape or other.shape)

    def inverse(self) -> "Circuit":
        return Circuit(self.n_qubits, [g.inverse() for g in reversed(self.gates)],
                       self.shape)

    def count(self, kind: str) -> int:
        kind = kind.upper()
        return sum(1 for g in self.gates if g.kind == kind)

    def ladder(self, gates: list[Gate]) -> None:
        """Append a tagged CNOT-ladder segment."""
        self.append(Gate("LADDER_BEGIN"))
        self.extend(gates)
        self.append(Gate("LADDER_END"))

    # -- text format ------------------------------------------------------

    def to_text(self) -> str:
        lines = ["# dynjw circuit", f"# qubits {self.n_qubits}"]
        if self.shape is not None:
            lines.append(f"# shape {self.shape} (row-major qubit indexing)")
        for g in self.gates:
            parts = [g.kind]
            if g.kind == "PAULIROT":
                parts.append(g.axes)
            parts.extend(str(q) for q in g.qubits)
            if g.angle is not None:
                parts.append(repr(float(g.angle)))
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "Circuit":
        n_qubits = 0
        shape = None
        gates = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                tokens = line[1:].split()
                if tokens[:1] == ["qubits"]:
                    n_qubits = int(tokens[1])
                elif tokens[:1] == ["shape"]:
                    shape = LatticeShape(tuple(int(x) for x in tokens[1].split("x")))
                continue
            tokens = line.split()
            kind = tokens[0].upper()
            axes = None
            rest = tokens[1:]
            if kind == "PAULIROT":
                axes, rest = rest[0], rest[1:]
            angle = None
            if kind in PARAM_KINDS:
                angle = float(rest[-1])
                rest = rest[:-1]
            gates.append(Gate(kind, tuple(int(q) for q in rest), angle, axes))
        if n_qubits == 0:
            n_qubits = 1 + max((max(g.qubits) for g in gates if g.qubits), default=-1)
        return Circuit(n_qubits, gates, shape)


def validate_connectivity(circuit: Circuit) -> list[tuple[int, Gate]]:
    """Two-qubit gates whose operands are not lattice nearest neighbors."""
    if circuit.shape is None:
        raise MissingShapeError("circuit has no bound lattice shape")
    shape = circuit.shape
    bad = []
    for idx, g in enumerate(circuit.gates):
        if len(g.qubits) != 2:
            continue
        a, b = shape.site(g.qubits[0]), shape.site(g.qubits[1])
        if sum(abs(x - y) for x, y in zip(a, b)) != 1:
            bad.append((idx, g))
    return bad


def _rx_via_hzh(q: int, angle: float) -> list[Gate]:
    # RX(t) = H RZ(t) H
    return [Gate("H", (q,)), Gate("RZ", (q,), angle), Gate("H", (q,))]


def _xy_family(a: int, b: int, theta: float) -> list[Gate]:
    """Gates (time order) for exp(i theta (X_a X_b + Y_a Y_b) / 2), 2 CNOTs."""
    out = []
    out += _rx_via_hzh(a, math.pi / 2)
    out += _rx_via_hzh(b, math.pi / 2)
    out.append(Gate("CNOT", (a, b)))
    out += _rx_via_hzh(a, -theta)
    out.append(Gate("RZ", (b,), -theta))
    out.append(Gate("CNOT", (a, b)))
    out += _rx_via_hzh(a, -math.pi / 2)
    out += _rx_via_hzh(b, -math.pi / 2)
    return out


def decompose_to_cnot_basis(circuit: Circuit, cz_native: bool = False) -> Circuit:
    """Rewrite to CNOT plus single-qubit gates.

    FSWAP, HOP and FSWAPHOP each cost 2 CNOTs; SWAP costs 3; CPHASE costs
    2 CNOTs and 3 RZ; a lone PAULIROT costs 2 CNOTs.  With ``cz_native`` CZ
    gates are kept as-is instead of H-conjugated CNOTs.
    """
    out = Circuit(circuit.n_qubits, [], circuit.shape)
    for g in circuit.gates:
        k = g.kind
        if k in MARKER_KINDS or k in ONE_QUBIT_KINDS or k == "CNOT":
            out.append(g)
        elif k == "CZ":
            if cz_native:
                out.append(g)
            else:
                a, b = g.qubits
                out.extend([Gate("H", (b,)), Gate("CNOT", (a, b)), Gate("H", (b,))])
        elif k == "SWAP":
            a, b = g.qubits
            out.extend([Gate("CNOT", (a, b)), Gate("CNOT", (b, a)),
                        Gate("CNOT", (a, b))])
        elif k == "HOP":
            a, b = g.qubits
            out.extend(_xy_family(a, b, g.angle))
        elif k == "FSWAP":
            a, b = g.qubits
            out.extend([Gate("SDG", (a,)), Gate("SDG", (b,))])
            out.extend(_xy_family(a, b, math.pi / 2))
        elif k == "FSWAPHOP":
            a, b = g.qubits
            out.extend([Gate("SDG", (a,)), Gate("SDG", (b,))])
            out.extend(_xy_family(a, b, g.angle + math.pi / 2))
        elif k == "CPHASE":
            a, b = g.qubits
            t = g.angle
            out.extend([Gate("RZ", (a,), -t / 2), Gate("RZ", (b,), -t / 2),
                        Gate("CNOT", (a, b)), Gate("RZ", (b,), t / 2),
                        Gate("CNOT", (a, b))])
        elif k == "FSWAPPHASE":
            # FSWAP * CPHASE(t) = SWAP * CP(pi - t); the interior CNOT pair of
            # SWAP * exp(i psi/4 ZZ) cancels, leaving three CNOTs.
            a, b = g.qubits
            psi = math.pi - g.angle
            out.extend([Gate("CNOT", (a, b)), Gate("RZ", (b,), -psi / 2),
                        Gate("CNOT", (b, a)), Gate("CNOT", (a, b)),
                        Gate("RZ", (a,), psi / 2), Gate("RZ", (b,), psi / 2)])
        elif k == "PAULIROT":
            a, b = g.qubits
            pre, post = [], []
            for q, ax in zip((a, b), g.axes):
                if ax == "X":
                    pre.append(Gate("H", (q,)))
                    post.append(Gate("H", (q,)))
                elif ax == "Y":
                    # Z = S H Y H SDG direction: HY -> use SDG H to map Y to Z
                    pre.extend([Gate("SDG", (q,)), Gate("H", (q,))])
                    post.extend([Gate("H", (q,)), Gate("S", (q,))])
            out.extend(pre)
            out.extend([Gate("CNOT", (a, b)), Gate("RZ", (b,), g.angle),
                        Gate("CNOT", (a, b))])
            out.extend(post)
        else:
            raise UnsupportedGateError(k)
    return out


@dataclass(frozen=True)
class DepthModel:
    """nn_lattice, all_to_all, or lattice_surgery layer accounting."""

    kind: str

    def __post_init__(self):
        if self.kind not in ("nn_lattice", "all_to_all", "lattice_surgery"):
            raise ValueError(f"unknown depth model {self.kind!r}")


NN_LATTICE = DepthModel("nn_lattice")
ALL_TO_ALL = DepthModel("all_to_all")
LATTICE_SURGERY = DepthModel("lattice_surgery")


def _ops_for_depth(circuit: Circuit, model: DepthModel,
                   count_single_qubit: bool) -> list[tuple[tuple[int, ...], int]]:
    """(qubit set, layer weight) stream with ladders folded per the model."""
    ops = []
    i = 0
    gates = circuit.gates
    while i < len(gates):
        g = gates[i]
        if g.kind == "LADDER_BEGIN":
            j = i + 1
            seg = []
            while j < len(gates) and gates[j].kind != "LADDER_END":
                seg.append(gates[j])
                j += 1
            if model.kind == "nn_lattice":
                for s in seg:
                    ops.append((s.qubits, 1))
            else:
                qubits = tuple(sorted({q for s in seg for q in s.qubits}))
                if seg:
                    weight = (7 if model.kind == "lattice_surgery"
                              else math.ceil(math.log2(len(seg) + 1)))
                    ops.append((qubits, weight))
            i = j + 1
            continue
        if not g.is_marker:
            if len(g.qubits) >= 2 or count_single_qubit:
                ops.append((g.qubits, 1))
        i += 1
    return ops


def depth(circuit: Circuit, model: DepthModel = NN_LATTICE,
          count_single_qubit: bool = True) -> int:
    """Greedy as-soon-as-possible layer count under a depth model."""
    if model.kind == "nn_lattice" and circuit.shape is not None:
        bad = validate_connectivity(circuit)
        if bad:
            raise ConnectivityError(f"{len(bad)} non-NN gates, first: {bad[0]}")
    avail = np.zeros(circuit.n_qubits, dtype=np.int64)
    total = 0
    for qubits, weight in _ops_for_depth(circuit, model, count_single_qubit):
        start = max((avail[q] for q in qubits), default=0)
        finish = start + weight
        for q in qubits:
            avail[q] = finish
        total = max(total, finish)
    return int(total)


def two_qubit_depth(circuit: Circuit, model: DepthModel = NN_LATTICE) -> int:
    """Depth counting only multi-qubit gates (CZ counts as one gate)."""
    return depth(circuit, model, count_single_qubit=False)


@dataclass
class ResourceReport:
    n_qubits: int
    gate_counts: dict[str, int]
    cnot_count: int
    single_qubit_count: int
    two_qubit_count: int
    depths: dict[str, int]
    two_qubit_depth: int

    def to_json_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "gate_counts": dict(sorted(self.gate_counts.items())),
            "cnot_count": self.cnot_count,
            "single_qubit_count": self.single_qubit_count,
            "two_qubit_count": self.two_qubit_count,
            "depths": self.depths,
            "two_qubit_depth": self.two_qubit_depth,
        }


def cnot_count(circuit: Circuit) -> int:
    dec = decompose_to_cnot_basis(circuit)
    return dec.count("CNOT")


def resource_report(circuit: Circuit) -> ResourceReport:
    """Counts on the CNOT-basis decomposition, depth under every model."""
    counts: dict[str, int] = {}
    for g in circuit.real_gates():
        counts[g.kind] = counts.get(g.kind, 0) + 1
    dec = decompose_to_cnot_basis(circuit)
    n_cnot = dec.count("CNOT")
    n_single = sum(1 for g in dec.real_gates() if len(g.qubits) == 1)
    n_two = sum(1 for g in circuit.real_gates() if len(g.qubits) == 2)
    depths = {}
    for model in (NN_LATTICE, ALL_TO_ALL, LATTICE_SURGERY):
        if model.kind == "nn_lattice" and circuit.shape is None:
            continue
        try:
            depths[model.kind] = depth(circuit, model)
        except ConnectivityError:
            depths[model.kind] = -1
    return ResourceReport(circuit.n_qubits, counts, n_cnot, n_single, n_two,
                          depths, two_qubit_depth(circuit))
