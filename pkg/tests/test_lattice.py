import numpy as np
import pytest

from dynjw.lattice import (BoustrophedonSpec, DimensionError, DimHierarchy,
                           LatticeShape, boustrophedon_ordering,
                           count_inversions_mergesort, d_dim_s_pattern,
                           inversion_matrix, inversion_pairs, s_pattern,
                           subgrid_partitions, transposed_s_pattern, z_pattern)


def test_z_pattern_2x2():
    shape = LatticeShape((2, 2))
    m = z_pattern(shape)
    assert m.rank((0, 0)) == 1
    assert m.rank((1, 0)) == 0
    assert m.rank((0, 1)) == 3
    assert m.rank((1, 1)) == 2


def test_z_pattern_single_site():
    m = z_pattern(LatticeShape((1, 1)))
    assert m.rank((0, 0)) == 0


def test_z_pattern_columns_contiguous():
    L = 3
    m = z_pattern(LatticeShape((L, L)))
    for c in range(L):
        ranks = sorted(m.rank((r, c)) for r in range(L))
        assert ranks == [3 * c, 3 * c + 1, 3 * c + 2]
    # consecutive ranks are NN-adjacent within a column
    for c in range(L):
        for r in range(L - 1):
            assert abs(m.rank((r, c)) - m.rank((r + 1, c))) == 1


def test_z_pattern_rejects_3d():
    with pytest.raises(DimensionError):
        z_pattern(LatticeShape((2, 2, 2)))


def test_s_pattern_2x2():
    m = s_pattern(LatticeShape((2, 2)))
    assert [m.rank(s) for s in [(0, 0), (0, 1), (1, 1), (1, 0)]] == [0, 1, 2, 3]


def test_s_pattern_origin_and_odd_row():
    for L in (1, 2, 3, 5):
        assert s_pattern(LatticeShape((L, L))).rank((0, 0)) == 0
    assert s_pattern(LatticeShape((3, 3))).rank((1, 2)) == 3


@pytest.mark.parametrize("lengths", [(2, 2), (3, 3), (4, 5), (1, 7), (6, 1)])
def test_s_pattern_hamiltonian(lengths):
    assert s_pattern(LatticeShape(lengths)).is_hamiltonian_path()


def test_d_dim_s_pattern_1d_identity():
    m = d_dim_s_pattern(LatticeShape((4,)))
    assert m.rank_of.tolist() == [0, 1, 2, 3]


def test_d_dim_s_pattern_matches_s_pattern():
    shape = LatticeShape((2, 2))
    assert d_dim_s_pattern(shape, DimHierarchy((1, 0))).rank_of.tolist() == \
        s_pattern(shape).rank_of.tolist()


def test_d_dim_s_pattern_3d_planes():
    # Hierarchy (col, row, plane) on axes (2, 1, 0): plane 0 is a 2D S
    # pattern, plane 1 the reversed pattern.
    L = 2
    shape = LatticeShape((L, L, L))
    m = d_dim_s_pattern(shape, DimHierarchy((2, 1, 0)))
    flat2d = s_pattern(LatticeShape((L, L)))
    for r in range(L):
        for c in range(L):
            assert m.rank((0, r, c)) == flat2d.rank((r, c))
            assert m.rank((1, r, c)) == 2 * L * L - 1 - flat2d.rank((r, c))


@pytest.mark.parametrize("lengths", [(2, 2, 2), (3, 2, 4), (2, 3, 3, 2)])
def test_d_dim_s_pattern_hamiltonian(lengths):
    assert d_dim_s_pattern(LatticeShape(lengths)).is_hamiltonian_path()


def test_boustrophedon_single_block_is_s_pattern():
    shape = LatticeShape((4, 4))
    spec = BoustrophedonSpec.single_block(4)
    assert boustrophedon_ordering(spec, shape).rank_of.tolist() == \
        s_pattern(shape).rank_of.tolist()


def test_boustrophedon_blocks_fill_in_order():
    L = 4
    shape = LatticeShape((L, L))
    spec = BoustrophedonSpec.from_widths([2, 2])
    m = boustrophedon_ordering(spec, shape)
    first_block = {m.rank((r, c)) for r in range(L) for c in (0, 1)}
    assert first_block == set(range(2 * L))
    # inside each block the ordering is a width-2 S pattern from the top left
    assert m.rank((0, 0)) == 0 and m.rank((0, 1)) == 1
    assert m.rank((1, 1)) == 2 and m.rank((1, 0)) == 3


def test_boustrophedon_within_block_hamiltonian():
    shape = LatticeShape((4, 6))
    spec = BoustrophedonSpec.from_widths([2, 3, 1])
    m = boustrophedon_ordering(spec, shape)
    offset = 0
    for _, w in spec.partitions[0]:
        size = 4 * w
        for r in range(offset, offset + size - 1):
            a, b = m.site_at_rank(r), m.site_at_rank(r + 1)
            assert sum(abs(x - y) for x, y in zip(a, b)) == 1
        offset += size


def test_boustrophedon_3d():
    shape = LatticeShape((2, 2, 4))
    spec = BoustrophedonSpec((((0, 2), (2, 2)), ((0, 2),)))
    m = boustrophedon_ordering(spec, shape)
    block0 = {m.rank((p, r, c)) for p in range(2) for r in range(2) for c in (0, 1)}
    assert block0 == set(range(8))


def test_subgrid_partitions_1d():
    parts = subgrid_partitions(LatticeShape((4,)), 1)
    blocks = {tuple(p.blocks) for p in parts}
    assert (((0, 1),), ((2, 3),)) in blocks
    assert (((0, 0),), ((1, 2),), ((3, 3),)) in blocks


@pytest.mark.parametrize("lengths,delta", [((6, 6), 1), ((5, 7), 2), ((4, 4, 4), 1)])
def test_subgrid_covering_property(lengths, delta):
    shape = LatticeShape(lengths)
    parts = subgrid_partitions(shape, delta)
    assert len(parts) == 2 ** shape.dims
    sites = list(shape.sites())
    for a in sites:
        for b in sites:
            if a < b and max(abs(x - y) for x, y in zip(a, b)) <= delta:
                assert any(p.covers_pair(a, b) for p in parts), (a, b)


def test_inversion_pairs_identity_and_reversal():
    shape = LatticeShape((2, 3))
    m = s_pattern(shape)
    assert inversion_pairs(m, m) == set()
    n = shape.n_sites
    rev = type(m)(shape, n - 1 - np.asarray(m.rank_of))
    assert len(inversion_pairs(m, rev)) == n * (n - 1) // 2


def test_inversion_pairs_z_vs_s_2x2():
    shape = LatticeShape((2, 2))
    pairs = inversion_pairs(z_pattern(shape), s_pattern(shape))
    f = shape.flat
    expected = {frozenset((f((1, 0)), f((0, 0)))),
                frozenset((f((1, 0)), f((0, 1)))),
                frozenset((f((1, 0)), f((1, 1)))),
                frozenset((f((1, 1)), f((0, 1))))}
    assert pairs == expected


@pytest.mark.parametrize("lengths", [(3, 3), (4, 2)])
def test_inversions_match_kendall_tau(lengths):
    shape = LatticeShape(lengths)
    m, mp = z_pattern(shape), s_pattern(shape)
    pairs = inversion_pairs(m, mp)
    assert pairs == inversion_pairs(mp, m)
    # Kendall tau via merge sort on the rank sequence
    seq = [int(mp.rank_of[m.site_of[r]]) for r in range(shape.n_sites)]
    assert len(pairs) == count_inversions_mergesort(seq)
    mat = inversion_matrix(m, mp)
    assert int(mat.sum()) == len(pairs)


def test_transposed_s_pattern_columns():
    m = transposed_s_pattern(LatticeShape((3, 2)))
    # even column downward, odd column upward
    assert [m.rank((r, 0)) for r in range(3)] == [0, 1, 2]
    assert [m.rank((r, 1)) for r in range(3)] == [5, 4, 3]


def test_ordering_json_roundtrip():
    from dynjw.lattice import CanonicalOrdering
    m = s_pattern(LatticeShape((3, 4)))
    m2 = CanonicalOrdering.from_json(m.to_json())
    assert m2.shape == m.shape
    assert m2.rank_of.tolist() == m.rank_of.tolist()
