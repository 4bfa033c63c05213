"""Lattice geometry and canonical Jordan-Wigner orderings.

Qubits live on an axis-aligned product grid.  A site is a coordinate tuple
``(x_0, ..., x_{d-1})``; its flat index is row-major
(``x_0`` slowest, ``x_{d-1}`` fastest).  In 2D we call axis 0 the row axis
and axis 1 the column axis.

A canonical ordering assigns every site a distinct rank in ``[0, N)``.  All
ranks here are zero-based: serpentine formulas use the reflection
``rho_t(x) = x`` for even ``t`` and ``L - 1 - x`` for odd ``t``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np


class DimensionError(ValueError):
    """Shape has the wrong dimensionality for the requested ordering."""


class ShapeMismatchError(ValueError):
    """Two objects refer to different lattice shapes."""


class PartitionError(ValueError):
    """An interval partition does not cover its axis."""


@dataclass(frozen=True)
class LatticeShape:
    """A d-dimensional grid of qubits with per-axis lengths."""

    lengths: tuple[int, ...]

    def __post_init__(self):
        if not self.lengths or any(L < 1 for L in self.lengths):
            raise ValueError(f"axis lengths must be positive, got {self.lengths}")
        object.__setattr__(self, "lengths", tuple(int(L) for L in self.lengths))

    @property
    def dims(self) -> int:
        return len(self.lengths)

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.lengths))

    def flat(self, site: tuple[int, ...]) -> int:
        """Row-major flat index of a coordinate tuple."""
        if len(site) != self.dims:
            raise DimensionError(f"site {site} has wrong arity for {self}")
        idx = 0
        for x, L in zip(site, self.lengths):
            if not 0 <= x < L:
                raise ValueError(f"site {site} out of bounds for {self}")
            idx = idx * L + x
        return idx

    def site(self, flat: int) -> tuple[int, ...]:
        """Inverse of :meth:`flat`."""
        if not 0 <= flat < self.n_sites:
            raise ValueError(f"flat index {flat} out of range")
        coords = []
        for L in reversed(self.lengths):
            coords.append(flat % L)
            flat //= L
        return tuple(reversed(coords))

    def sites(self):
        """All sites in row-major order."""
        return itertools.product(*(range(L) for L in self.lengths))

    def __str__(self):
        return "x".join(str(L) for L in self.lengths)


def _rho(t: int, x: int, L: int) -> int:
    # Reflected coordinate: identity for even t, reversal for odd t.
    return x if t % 2 == 0 else L - 1 - x


@dataclass(frozen=True)
class CanonicalOrdering:
    """Bijection between lattice sites and JW ranks.

    ``rank_of[flat_site] = rank`` and ``site_of[rank] = flat_site``.
    """

    shape: LatticeShape
    rank_of: np.ndarray
    site_of: np.ndarray = field(init=False, compare=False)

    def __post_init__(self):
        rank_of = np.asarray(self.rank_of, dtype=np.int64)
        n = self.shape.n_sites
        if rank_of.shape != (n,):
            raise ValueError("rank_of must assign one rank per site")
        site_of = np.empty(n, dtype=np.int64)
        site_of[rank_of] = np.arange(n)
        if sorted(rank_of.tolist()) != list(range(n)):
            raise ValueError("rank_of is not a bijection onto [0, N)")
        object.__setattr__(self, "rank_of", rank_of)
        object.__setattr__(self, "site_of", site_of)

    def rank(self, site: tuple[int, ...]) -> int:
        return int(self.rank_of[self.shape.flat(site)])

    def site_at_rank(self, rank: int) -> tuple[int, ...]:
        return self.shape.site(int(self.site_of[rank]))

    def is_hamiltonian_path(self) -> bool:
        """True if consecutive ranks sit at lattice l1-distance 1."""
        for r in range(self.shape.n_sites - 1):
            a = self.site_at_rank(r)
            b = self.site_at_rank(r + 1)
            if sum(abs(x - y) for x, y in zip(a, b)) != 1:
                return False
        return True

    def to_json(self) -> str:
        return json.dumps({"shape": list(self.shape.lengths),
                           "ranks": self.rank_of.tolist()})

    @staticmethod
    def from_json(text: str) -> "CanonicalOrdering":
        data = json.loads(text)
        return CanonicalOrdering(LatticeShape(tuple(data["shape"])),
                                 np.asarray(data["ranks"]))


@dataclass(frozen=True)
class DimHierarchy:
    """Axis nesting order of a d-dimensional serpentine, lowest level first."""

    order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(a) for a in self.order))
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError(f"{self.order} is not a permutation of axes")

    @staticmethod
    def default(dims: int) -> "DimHierarchy":
        """Last axis lowest.  In 2D this is the row-first serpentine."""
        return DimHierarchy(tuple(range(dims - 1, -1, -1)))


@dataclass(frozen=True)
class BoustrophedonSpec:
    """Interval partitions defining a boustrophedon ordering.

    ``partitions[k]`` is the partition of hierarchy level ``k`` (level 0 =
    lowest axis = the 2D column axis), given as (start, width) intervals in
    ascending order.  Levels beyond ``len(partitions)`` are unpartitioned.
    In 2D only the column partition exists; in 3D a row partition may follow.
    """

    partitions: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self):
        norm = tuple(tuple((int(a), int(w)) for a, w in part)
                     for part in self.partitions)
        object.__setattr__(self, "partitions", norm)
        for part in norm:
            pos = 0
            for start, width in part:
                if start != pos or width < 1:
                    raise PartitionError(f"intervals {part} do not tile the axis")
                pos = start + width

    @staticmethod
    def single_block(length: int) -> "BoustrophedonSpec":
        return BoustrophedonSpec((((0, length),),))

    @staticmethod
    def from_widths(widths: list[int]) -> "BoustrophedonSpec":
        part, pos = [], 0
        for w in widths:
            part.append((pos, w))
            pos += w
        return BoustrophedonSpec((tuple(part),))

    def axis_length(self, level: int) -> int:
        start, width = self.partitions[level][-1]
        return start + width

    def validate_for(self, shape: LatticeShape, hierarchy: DimHierarchy | None = None):
        hierarchy = hierarchy or DimHierarchy.default(shape.dims)
        if len(self.partitions) > shape.dims - 1:
            raise PartitionError("at most d-1 partitioned levels are allowed")
        for level, part in enumerate(self.partitions):
            axis = hierarchy.order[level]
            if self.axis_length(level) != shape.lengths[axis]:
                raise PartitionError(
                    f"partition {part} does not cover axis {axis} of {shape}")


@dataclass(frozen=True)
class SubgridPartition:
    """One shifted partition of the lattice into side-<=2*delta subgrids."""

    shape: LatticeShape
    delta: int
    shift: tuple[int, ...]
    blocks: tuple[tuple[tuple[int, int], ...], ...]  # per block, per axis (lo, hi)

    def block_of(self, site: tuple[int, ...]) -> int:
        for k, block in enumerate(self.blocks):
            if all(lo <= x <= hi for x, (lo, hi) in zip(site, block)):
                return k
        raise ValueError(f"site {site} not covered")

    def covers_pair(self, a: tuple[int, ...], b: tuple[int, ...]) -> bool:
        return self.block_of(a) == self.block_of(b)


def z_pattern(shape: LatticeShape) -> CanonicalOrdering:
    """Column-first 2D ordering; ranks descend with the row index.

    ``rank(r, c) = L_r * c + (L_r - 1 - r)``.
    """
    if shape.dims != 2:
        raise DimensionError("z_pattern requires a 2D shape")
    n_rows, n_cols = shape.lengths
    ranks = np.empty(shape.n_sites, dtype=np.int64)
    for r in range(n_rows):
        for c in range(n_cols):
            ranks[shape.flat((r, c))] = n_rows * c + (n_rows - 1 - r)
    return CanonicalOrdering(shape, ranks)


def s_pattern(shape: LatticeShape) -> CanonicalOrdering:
    """Row-first 2D serpentine: even rows left-to-right, odd rows reversed."""
    if shape.dims != 2:
        raise DimensionError("s_pattern requires a 2D shape")
    return d_dim_s_pattern(shape, DimHierarchy.default(2))


def d_dim_s_pattern(shape: LatticeShape,
                    hierarchy: DimHierarchy | None = None) -> CanonicalOrdering:
    """Serpentine ordering of a d-dimensional grid under a dimension hierarchy.

    Level ``i`` of the hierarchy contributes ``stride_i * rho_t(x_i)`` where
    ``t`` is the coordinate sum over all higher levels, so consecutive ranks
    always step to a lattice neighbor (a Hamiltonian path).
    """
    hierarchy = hierarchy or DimHierarchy.default(shape.dims)
    if len(hierarchy.order) != shape.dims:
        raise DimensionError(
            f"hierarchy {hierarchy.order} does not match {shape.dims}D shape")
    ranks = np.empty(shape.n_sites, dtype=np.int64)
    for site in shape.sites():
        rank = 0
        stride = 1
        for i, axis in enumerate(hierarchy.order):
            t = sum(site[a] for a in hierarchy.order[i + 1:])
            rank += stride * _rho(t, site[axis], shape.lengths[axis])
            stride *= shape.lengths[axis]
        ranks[shape.flat(site)] = rank
    return CanonicalOrdering(shape, ranks)


def transposed_s_pattern(shape: LatticeShape) -> CanonicalOrdering:
    """2D serpentine with swapped hierarchy: down even columns, up odd ones."""
    if shape.dims != 2:
        raise DimensionError("transposed_s_pattern requires a 2D shape")
    return d_dim_s_pattern(shape, DimHierarchy((0, 1)))


def boustrophedon_ordering(spec: BoustrophedonSpec,
                           shape: LatticeShape) -> CanonicalOrdering:
    """Concatenated serpentines over an interval partition of the lattice.

    Each block (a product of partition intervals at the d-1 lowest hierarchy
    levels times the full highest axis) is ordered by the d-dimensional
    serpentine starting at its own origin.  Blocks are concatenated in
    ascending order, outermost partitioned level first, so the ordering is a
    Hamiltonian path within every block.
    """
    hierarchy = DimHierarchy.default(shape.dims)
    spec.validate_for(shape, hierarchy)
    parts = list(spec.partitions)
    # Unpartitioned levels (all above the given ones, except the highest axis
    # which is never partitioned) count as a single full-width interval.
    while len(parts) < shape.dims - 1:
        axis = hierarchy.order[len(parts)]
        parts.append(((0, shape.lengths[axis]),))

    ranks = np.empty(shape.n_sites, dtype=np.int64)
    top_axis = hierarchy.order[-1]
    offset = 0
    # Block order: the level-0 (column) partition varies slowest, so blocks
    # of the lowest partitioned axis occupy contiguous rank ranges.
    for intervals in itertools.product(*parts):
        block_lengths = [w for _, w in intervals] + [shape.lengths[top_axis]]
        block_shape = LatticeShape(tuple(block_lengths))
        sub = d_dim_s_pattern(block_shape, DimHierarchy(tuple(range(shape.dims))))
        for local in block_shape.sites():
            site = [0] * shape.dims
            for level in range(shape.dims - 1):
                site[hierarchy.order[level]] = intervals[level][0] + local[level]
            site[top_axis] = local[shape.dims - 1]
            ranks[shape.flat(tuple(site))] = offset + sub.rank(local)
        offset += block_shape.n_sites
    return CanonicalOrdering(shape, ranks)


def subgrid_partitions(shape: LatticeShape, delta: int) -> list[SubgridPartition]:
    """The 2^d shifted partitions into subgrids of side at most 2*delta.

    For every pair of sites at l-infinity distance <= delta, at least one
    returned partition has a block containing both.
    """
    if delta < 1:
        raise ValueError("delta must be >= 1")
    if any(delta > L for L in shape.lengths):
        raise ValueError(f"delta={delta} exceeds an axis of {shape}")
    partitions = []
    for shift in itertools.product((0, 1), repeat=shape.dims):
        per_axis = []
        for b, L in zip(shift, shape.lengths):
            intervals = []
            start = -delta * b
            while start < L:
                lo, hi = max(0, start), min(L - 1, start + 2 * delta - 1)
                if lo <= hi:
                    intervals.append((lo, hi))
                start += 2 * delta
            per_axis.append(intervals)
        blocks = tuple(tuple(combo) for combo in itertools.product(*per_axis))
        partitions.append(SubgridPartition(shape, delta, shift, blocks))
    return partitions


def inversion_pairs(m: CanonicalOrdering,
                    m_prime: CanonicalOrdering) -> set[frozenset[int]]:
    """Unordered flat-site pairs whose relative rank order differs in m, m'."""
    if m.shape != m_prime.shape:
        raise ShapeMismatchError("orderings live on different shapes")
    n = m.shape.n_sites
    pairs = set()
    for i in range(n):
        for j in range(i + 1, n):
            if (m.rank_of[i] < m.rank_of[j]) != (m_prime.rank_of[i] < m_prime.rank_of[j]):
                pairs.add(frozenset((i, j)))
    return pairs


def inversion_matrix(m: CanonicalOrdering, m_prime: CanonicalOrdering) -> np.ndarray:
    """Boolean strictly-upper-triangular matrix form of :func:`inversion_pairs`."""
    if m.shape != m_prime.shape:
        raise ShapeMismatchError("orderings live on different shapes")
    a = np.asarray(m.rank_of)[:, None] < np.asarray(m.rank_of)[None, :]
    b = np.asarray(m_prime.rank_of)[:, None] < np.asarray(m_prime.rank_of)[None, :]
    diff = a != b
    return np.triu(diff, k=1)


def count_inversions_mergesort(seq: list[int]) -> int:
    """Inversion count of a sequence by merge sort (Kendall-tau cross-check)."""

    def rec(a: list[int]) -> tuple[list[int], int]:
        if len(a) <= 1:
            return a, 0
        mid = len(a) // 2
        left, nl = rec(a[:mid])
        right, nr = rec(a[mid:])
        merged, i, j, cnt = [], 0, 0, nl + nr
        while i < len(left) and j < len(right):
            if left[i] <= right[j]:
                merged.append(left[i])
                i += 1
            else:
                merged.append(right[j])
                j += 1
                cnt += len(left) - i
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged, cnt

    return rec(list(seq))[1]
