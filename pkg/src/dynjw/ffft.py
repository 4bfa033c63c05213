"""Fermionic fast Fourier transform circuits from Givens-rotation networks.

A two-mode Givens gate on rank-adjacent modes is a phased HOP gate (two
CNOTs); a network of n(n-1)/2 of them in a pipelined triangle realizes any
single-particle basis change on rank-contiguous modes in depth at most 2n.
The 2D transform runs one-dimensional transforms along rows under the S
pattern, switches to the Z pattern for the column transforms, and switches
back, so the whole circuit equals the exact JW-encoded 2D transform.

Convention: ``OrbitalRotation.unitary`` is the single-particle state map,
``circuit |e_p> = sum_q U[q, p] |e_q>`` over the listed modes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Gate
from .lattice import CanonicalOrdering, LatticeShape, s_pattern, z_pattern
from .switching import SwitchPlan, build_c2d


class OrderingError(ValueError):
    """Target modes are not rank-contiguous under the active ordering."""


@dataclass
class OrbitalRotation:
    """A single-particle basis change on an ordered list of modes."""

    unitary: np.ndarray
    modes: list[int]  # flat site indices, list position = matrix index

    def __post_init__(self):
        u = np.asarray(self.unitary, dtype=complex)
        n = len(self.modes)
        if u.shape != (n, n):
            raise ValueError("unitary size does not match the mode list")
        if np.linalg.norm(u @ u.conj().T - np.eye(n)) > 1e-12:
            raise ValueError("matrix is not unitary within 1e-12")
        self.unitary = u


def dft_matrix(n: int) -> np.ndarray:
    """Discrete Fourier transform, F[q, p] = exp(-2 pi i q p / n) / sqrt(n)."""
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def givens_decompose(u: np.ndarray):
    """Adjacent-pair Givens factorization ``u = G_1^d ... G_T^d D``.

    Eliminates each column bottom-up with rotations on adjacent row pairs,
    leaving a diagonal of unit phases.  Returns (rotations, phases) where
    each rotation is ``(k, c, s)`` acting on rows (k, k+1) as
    ``[[c, s.conj()], [-s, c]]`` with real c.
    """
    m = np.asarray(u, dtype=complex).copy()
    n = m.shape[0]
    rotations = []
    for col in range(n - 1):
        for row in range(n - 1, col, -1):
            a, b = m[row - 1, col], m[row, col]
            if abs(b) < 1e-14:
                continue
            r = np.hypot(abs(a), abs(b))
            c = abs(a) / r
            s = (b * np.exp(-1j * np.angle(a)) / r) if abs(a) > 1e-14 \
                else complex(1.0)
            g = np.array([[c, np.conj(s)], [-s, c]])
            m[row - 1:row + 1, :] = g @ m[row - 1:row + 1, :]
            rotations.append((row - 1, c, s))
    phases = np.angle(np.diag(m))
    if np.linalg.norm(m - np.diag(np.exp(1j * phases))) > 1e-9:
        raise ValueError("Givens elimination did not reach diagonal form")
    return rotations, phases


def _mode_phase_gates(qubit: int, gamma: float) -> list[Gate]:
    # diag(1, e^{i gamma}) on the mode's qubit, up to global phase
    return [Gate("RZ", (qubit,), float(gamma))]


def _givens_gate(q_lo: int, q_hi: int, c: float, s: complex) -> list[Gate]:
    """Gates for the two-mode block [[c, s*], [-s, c]] on rank-adjacent modes.

    The HOP block [[c, i sin], [i sin, c]] is dressed with mode phases on
    the first mode so the single-particle block matches; |00> and |11>
    amplitudes are untouched (determinant one).
    """
    theta = float(np.arctan2(abs(s), c))
    out = []
    if abs(s) > 1e-15:
        gamma = float(np.angle(s) + np.pi / 2)
        out += _mode_phase_gates(q_lo, gamma)
        out.append(Gate("HOP", (q_lo, q_hi), theta))
        out += _mode_phase_gates(q_lo, -gamma)
    return out


def givens_network(rot: OrbitalRotation, ordering: CanonicalOrdering,
                   circuit: Circuit | None = None) -> Circuit:
    """Circuit realizing an orbital rotation on rank-contiguous modes.

    Exactly n(n-1)/2 two-mode gates at most (identity rotations are elided)
    and final single-mode phases; two-qubit depth bounded by 2n.
    """
    ranks = [int(ordering.rank_of[m]) for m in rot.modes]
    lo = min(ranks)
    if sorted(ranks) != list(range(lo, lo + len(ranks))):
        raise OrderingError("target modes are not rank-contiguous")
    # reindex the unitary by rank position
    order = np.argsort(ranks)
    perm = np.zeros((len(ranks), len(ranks)))
    for pos, idx in enumerate(order):
        perm[pos, idx] = 1.0
    u_rank = perm @ rot.unitary @ perm.T
    qubit_of_pos = [rot.modes[i] for i in order]

    standalone = circuit is None
    if standalone:
        circuit = Circuit(ordering.shape.n_sites, [], ordering.shape)
    rotations, phases = givens_decompose(u_rank)
    # u = G_1^d ... G_T^d D: apply the phase layer first, then the
    # conjugated rotations in reverse elimination order.
    for pos, gamma in enumerate(phases):
        if abs(gamma) > 1e-14:
            circuit.extend(_mode_phase_gates(qubit_of_pos[pos], gamma))
    for k, c, s in reversed(rotations):
        # G^dag block = [[c, -s*], [s, c]] i.e. the rotation with s -> -s
        circuit.extend(_givens_gate(qubit_of_pos[k], qubit_of_pos[k + 1], c, -s))
    return circuit


@dataclass
class FfftCircuit:
    """A built transform: full circuit plus its target single-particle map."""

    circuit: Circuit
    target: np.ndarray            # site-indexed single-particle map
    ordering: CanonicalOrdering   # encoding at entry and exit
    n_two_mode_gates: int = 0
    switch_cnots: int = 0


def single_particle_matrix(circuit: Circuit, n_modes: int,
                           diagonal_ok: bool = True) -> np.ndarray:
    """Propagate the single-excitation subspace through a number-conserving
    circuit; switch-plan gates (CNOT/CZ/Z closing to a pure-CZ diagonal) act
    as the identity here and are skipped.

    Returns M with circuit|e_p> = vac_phase * sum_q M[q, p] |e_q>, with the
    vacuum phase divided out (entries are tracked relative to the vacuum).
    """
    m = np.eye(n_modes, dtype=complex)
    for g in circuit.gates:
        k = g.kind
        if g.is_marker or k in ("CNOT", "CZ", "Z"):
            continue  # switch-plan content: identity on the subspace
        if k == "RZ":
            q = g.qubits[0]
            m[q, :] *= np.exp(1j * g.angle)
        elif k in ("S", "SDG"):
            q = g.qubits[0]
            m[q, :] *= 1j if k == "S" else -1j
        elif k == "HOP":
            a, b = g.qubits
            c, s = np.cos(g.angle), np.sin(g.angle)
            ra, rb = m[a, :].copy(), m[b, :].copy()
            m[a, :] = c * ra + 1j * s * rb
            m[b, :] = 1j * s * ra + c * rb
        elif k in ("FSWAP", "SWAP", "FSWAPPHASE"):
            a, b = g.qubits
            m[[a, b], :] = m[[b, a], :]
        elif k == "FSWAPHOP":
            a, b = g.qubits
            c, s = np.cos(g.angle), np.sin(g.angle)
            ra, rb = m[a, :].copy(), m[b, :].copy()
            m[b, :] = c * ra + 1j * s * rb
            m[a, :] = 1j * s * ra + c * rb
        elif k == "CPHASE":
            continue  # diagonal, trivial on single excitations
        else:
            raise ValueError(f"gate {k} is not number conserving")
    return m


def _row_modes(shape, r):
    return [shape.flat((r, c)) for c in range(shape.lengths[1])]


def _col_modes(shape, c):
    return [shape.flat((r, c)) for r in range(shape.lengths[0])]


def ffft_2d(shape: LatticeShape, spinful: bool = False,
            switch: SwitchPlan | None = None) -> FfftCircuit:
    """2D fermionic DFT: row transforms under S, column transforms under Z.

    For spinful registers the two species interleave along the columns; the
    row stage applies one species-block-diagonal network per row and the
    column stage is species-diagonal automatically.  The closing switch
    returns to the S pattern, so the circuit equals the JW-encoded 2D
    transform in the entry encoding (up to global phase).
    """
    if shape.dims != 2:
        raise ValueError("ffft_2d expects a 2D shape")
    n_rows, n_cols = shape.lengths
    if spinful and n_cols % 2:
        raise ValueError("spinful transforms need an even number of columns")
    s_ord = s_pattern(shape)
    z_ord = z_pattern(shape)
    plan = switch or build_c2d(shape)
    circuit = Circuit(shape.n_sites, [], shape)

    f_cols = dft_matrix(n_cols if not spinful else n_cols // 2)
    f_rows = dft_matrix(n_rows)

    if spinful:
        nf = n_cols // 2
        u_row = np.zeros((n_cols, n_cols), dtype=complex)
        for s in (0, 1):
            idx = [2 * fc + s for fc in range(nf)]
            u_row[np.ix_(idx, idx)] = f_cols
    else:
        u_row = f_cols

    for r in range(n_rows):
        givens_network(OrbitalRotation(u_row, _row_modes(shape, r)), s_ord,
                       circuit)
    n_switch_gates = len(circuit.gates)
    circuit.extend(plan.full_circuit().gates)
    for c in range(n_cols):
        givens_network(OrbitalRotation(f_rows, _col_modes(shape, c)), z_ord,
                       circuit)
    circuit.extend(plan.full_circuit().gates)

    target = _site_target(shape, u_row, f_rows)
    from .circuit import cnot_count
    sw_cnots = cnot_count(plan.full_circuit()) * 2
    return FfftCircuit(circuit, target, s_ord, circuit.count("HOP"), sw_cnots)


def _site_target(shape, u_row, f_rows):
    n_rows, n_cols = shape.lengths
    n = shape.n_sites
    target = np.zeros((n, n), dtype=complex)
    for r in range(n_rows):
        for c in range(n_cols):
            p = shape.flat((r, c))
            for r2 in range(n_rows):
                for c2 in range(n_cols):
                    q = shape.flat((r2, c2))
                    target[q, p] = f_rows[r2, r] * u_row[c2, c]
    return target


def givens_full_baseline(shape: LatticeShape, spinful: bool = False) -> FfftCircuit:
    """One Givens network over the whole register (the static comparison)."""
    if shape.dims != 2:
        raise ValueError("baseline expects a 2D shape")
    n_rows, n_cols = shape.lengths
    if spinful and n_cols % 2:
        raise ValueError("spinful transforms need an even number of columns")
    s_ord = s_pattern(shape)
    f_rows = dft_matrix(n_rows)
    if spinful:
        nf = n_cols // 2
        f_cols = dft_matrix(nf)
        u_row = np.zeros((n_cols, n_cols), dtype=complex)
        for s in (0, 1):
            idx = [2 * fc + s for fc in range(nf)]
            u_row[np.ix_(idx, idx)] = f_cols
    else:
        u_row = dft_matrix(n_cols)
    target = _site_target(shape, u_row, f_rows)
    modes = list(range(shape.n_sites))
    circuit = givens_network(OrbitalRotation(target, modes), s_ord)
    return FfftCircuit(circuit, target, s_ord, circuit.count("HOP"), 0)


def baseline_gate_formula(n_modes: int) -> int:
    """Two-mode gate count of the full-register network, n(n-1)/2."""
    return n_modes * (n_modes - 1) // 2


def subspace_fidelity_error(built: FfftCircuit) -> float:
    """Max entrywise deviation of the propagated single-particle map."""
    m = single_particle_matrix(built.circuit, built.circuit.n_qubits)
    return float(np.max(np.abs(m - built.target)))


def exact_jw_transform(target: np.ndarray,
                       ordering: CanonicalOrdering) -> np.ndarray:
    """Dense second-quantized unitary of a single-particle map (<= 12 qubits).

    Built column by column: the image of a Fock state is the ordered product
    of rotated creation operators applied to the vacuum.
    """
    from .oracles import _check_size, pauli_matrix
    from .pauli import majorana_pair
    n = ordering.shape.n_sites
    _check_size(n)
    dim = 2 ** n
    creation = []
    for flat in range(n):
        pair = majorana_pair(ordering.shape.site(flat), ordering)
        creation.append((pauli_matrix(pair.even_string)
                         - 1j * pauli_matrix(pair.odd_string)) / 2)
    rotated = [sum(target[q, p] * creation[q] for q in range(n))
               for p in range(n)]
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1.0
    # apply creation operators highest rank first so each Z tail crosses
    # nothing occupied and every basis state carries a plus sign
    by_rank_desc = sorted(range(n), key=lambda p: -int(ordering.rank_of[p]))
    u = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        vec = vac.copy()
        for p in by_rank_desc:
            if (idx >> (n - 1 - p)) & 1:
                vec = rotated[p] @ vec
        u[:, idx] = vec
    return u
