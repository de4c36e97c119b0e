import math
from fractions import Fraction

import numpy as np
import pytest

from dicomo.degmodel import stats, validate_sequence
from dicomo.errors import DomainError, IndexOutOfRange, InstanceTooLarge
from dicomo.graphalg import (
    bfs_distances,
    count_simple_paths,
    diameter_exact,
    expected_path_bound,
    neighborhood_profile,
    thin_depth_scan,
    typical_distance_sample,
)
from dicomo.graphgen import (
    Digraph,
    binomial_digraph,
    d_out_model,
    digraph_from_pairing,
    pair_uniform,
    replay_explore,
)
from helpers import all_pairings, exact_path_expectation, floyd_warshall

DEMO_SEQ = validate_sequence([(1, 2), (3, 2), (1, 1)])


def _graph(n, edges):
    src = np.array([u for u, _ in edges], dtype=np.int64)
    tgt = np.array([v for _, v in edges], dtype=np.int64)
    return Digraph(n=n, src=src, tgt=tgt)


def _cycle(n):
    return _graph(n, [(i, (i + 1) % n) for i in range(n)])


def _random_small(rng):
    kind = rng.integers(3)
    n = int(rng.integers(2, 31))
    if kind == 0:
        m = int(rng.integers(1, 3 * n))
        return _graph(n, list(zip(rng.integers(0, n, m), rng.integers(0, n, m))))
    if kind == 1:
        return binomial_digraph(n, float(rng.uniform(0, 0.3)), "independent", rng)
    return d_out_model(n, int(rng.integers(1, 4)), rng)


def test_bfs_path():
    g = _graph(3, [(0, 1), (1, 2)])
    assert bfs_distances(g, 0).tolist() == [0, 1, 2]
    assert bfs_distances(g, 2).tolist() == [-1, -1, 0]


def test_bfs_edgeless():
    g = _graph(3, [])
    assert bfs_distances(g, 0).tolist() == [0, -1, -1]


def test_bfs_in_direction():
    g = _graph(3, [(0, 1), (1, 2)])
    assert bfs_distances(g, 2, "in").tolist() == [2, 1, 0]


def test_bfs_source_range():
    with pytest.raises(IndexOutOfRange):
        bfs_distances(_graph(2, []), 2)


def test_bfs_vs_floyd_warshall_corpus():
    rng = np.random.default_rng(100)
    for _ in range(100):
        g = _random_small(rng)
        fw = floyd_warshall(g.n, g.src.tolist(), g.tgt.tolist())
        s = int(rng.integers(g.n))
        got = bfs_distances(g, s)
        want = [(-1 if math.isinf(d) else int(d)) for d in fw[s]]
        assert got.tolist() == want


def test_diameter_cycle():
    rep = diameter_exact(_cycle(7))
    assert rep.diameter == 6
    assert rep.finite_pair_count == 7 * 6


def test_diameter_path():
    rep = diameter_exact(_graph(3, [(0, 1), (1, 2)]))
    assert rep.diameter == 2
    assert rep.argmax == (0, 2)


def test_diameter_edgeless():
    rep = diameter_exact(_graph(4, []))
    assert rep.diameter == 0
    assert rep.argmax is None
    assert rep.finite_pair_count == 0


def test_diameter_vs_oracle_corpus():
    rng = np.random.default_rng(200)
    for _ in range(100):
        g = _random_small(rng)
        fw = floyd_warshall(g.n, g.src.tolist(), g.tgt.tolist())
        np.fill_diagonal(fw, np.inf)
        finite = fw[np.isfinite(fw)]
        want = int(finite.max()) if len(finite) else 0
        assert diameter_exact(g).diameter == want


def test_diameter_thread_count_invariant():
    g = d_out_model(500, 2, np.random.default_rng(7))
    assert diameter_exact(g, threads=1) == diameter_exact(g, threads=2)


def test_diameter_argmax_smallest_witness():
    # two witnesses of the max distance; the reported pair is the smallest
    g = _graph(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
    rep = diameter_exact(g)
    assert rep.diameter == 2
    assert rep.argmax == (0, 2)


def test_typical_distance_single_edge():
    # over all 4 ordered pairs of a single edge: finite {0, 0, 1}
    g = _graph(2, [(0, 1)])
    dists = sorted(
        int(bfs_distances(g, u)[v])
        for u in range(2)
        for v in range(2)
        if bfs_distances(g, u)[v] >= 0
    )
    assert dists == [0, 0, 1]
    finite, frac = typical_distance_sample(g, 4000, np.random.default_rng(0))
    assert abs(frac - 0.75) < 0.05
    assert set(finite.tolist()) <= {0, 1}


def test_typical_distance_cycle_conditional_mean():
    n = 12
    fw = floyd_warshall(n, *zip(*[(i, (i + 1) % n) for i in range(n)]))
    off = fw[~np.eye(n, dtype=bool)]
    assert off.mean() == pytest.approx(n / 2)
    finite, frac = typical_distance_sample(_cycle(n), 5000, np.random.default_rng(1))
    assert frac == 1.0
    assert abs(finite.mean() - off.mean() * (1 - 1 / n)) < 0.3


def test_neighborhood_profile_sequence_examples():
    seq = validate_sequence([(0, 1), (1, 0)])
    prof = neighborhood_profile(
        seq, 0, omega=5, max_t=4, rng=np.random.default_rng(0)
    )
    assert prof.sizes == (1, 0)
    assert prof.died_at == 1
    assert prof.expansion_time is None

    chain = validate_sequence([(1, 1)] * 20)
    prof = neighborhood_profile(
        chain, 0, omega=2, max_t=8, rng=np.random.default_rng(1)
    )
    assert all(s <= 1 for s in prof.sizes)
    assert prof.expansion_time is None


def test_neighborhood_profile_point22_expands():
    seq = validate_sequence([(2, 2)] * 1000)
    hits = 0
    for seed in range(10):
        prof = neighborhood_profile(
            seq, 0, omega=50, max_t=12, rng=np.random.default_rng(seed)
        )
        if prof.expansion_time is not None and prof.expansion_time <= 7:
            hits += 1
    assert hits >= 8


def test_neighborhood_profile_graph_matches_replay():
    g = pair_uniform(DEMO_SEQ, np.random.default_rng(12))
    prof = neighborhood_profile(g, 0, omega=50, max_t=5)
    st = replay_explore(g, 0, "out", max_depth=5, omega=50)
    assert prof.sizes == tuple(st.level_sizes)


def test_thin_depth_scan_point22():
    seq = validate_sequence([(2, 2)] * 2000)
    scan = thin_depth_scan(
        seq, omega=50, rng=np.random.default_rng(2), budget=50_000
    )
    assert scan.probes >= 100
    assert scan.max_thin_depth <= math.ceil(math.log2(50)) + 3
    assert sum(scan.expansion_hist.values()) + sum(scan.death_hist.values()) <= scan.probes


def test_expected_path_bound_k1():
    st = stats(DEMO_SEQ)
    assert expected_path_bound(st, 1, 1, 0, 1, 3) == pytest.approx(1 / 5)


def test_expected_path_bound_demo_k2():
    st = stats(DEMO_SEQ)
    assert expected_path_bound(st, 1, 1, 0, 2, 3) == pytest.approx(0.45)


def test_expected_path_bound_preconditions():
    st = stats(DEMO_SEQ)
    with pytest.raises(DomainError):
        expected_path_bound(st, 1, 1, 0, 5, 3)
    with pytest.raises(DomainError):
        expected_path_bound(st, 1, 1, 4, 2, 3)


def test_count_single_edge():
    g = _graph(2, [(0, 1)])
    assert count_simple_paths(g, [0], [0], [], 1) == {1: 1}


def test_count_parallel_edges_pairing_resolved():
    # two parallel edges: each tail is matched to exactly one head, so there
    # are two realized length-1 paths
    g = _graph(2, [(0, 1), (0, 1)])
    assert count_simple_paths(g, [0, 1], [0, 1], [], 1) == {1: 2}


def test_count_triangle_lengths():
    g = _cycle(3)
    # tails: slot i is vertex i's out-edge; heads: slot i is vertex i's in-edge
    counts = count_simple_paths(g, [0], [2], [1], 2)
    assert counts == {1: 0, 2: 1}


def test_count_guard():
    g = d_out_model(70, 2, np.random.default_rng(0))
    with pytest.raises(InstanceTooLarge):
        count_simple_paths(g, [0], [0], range(70), 5)


def test_count_mean_equals_exact_formula_small():
    # full pairing enumeration on the (1,1),(1,1),(2,2) sequence
    seq = validate_sequence([(1, 1), (1, 1), (2, 2)])
    m = seq.m
    e_plus, e_minus = 0, m - 1
    allowed = [v for v in range(seq.n) if v not in (0, seq.n - 1)]
    for k in (1, 2):
        total = Fraction(0)
        npairs = 0
        for perm in all_pairings(m):
            g = digraph_from_pairing(seq, np.array(perm))
            total += count_simple_paths(g, [e_plus], [e_minus], allowed, k)[k]
            npairs += 1
        mean = total / npairs
        assert mean == exact_path_expectation(seq, allowed, k)


def test_bound_dominates_expectation():
    seq = validate_sequence([(1, 1), (1, 1), (2, 2)])
    st = stats(seq)
    allowed = [1]
    r = sum(1 for v in allowed if seq.pairs[v][0] * seq.pairs[v][1] >= 1)
    for k in (1, 2):
        exact = float(exact_path_expectation(seq, allowed, k))
        assert expected_path_bound(st, 1, 1, 0, k, max(r, k - 1)) >= exact - 1e-12


def test_edge_insertion_never_increases_distance():
    rng = np.random.default_rng(50)
    for _ in range(20):
        g = _random_small(rng)
        u, v = int(rng.integers(g.n)), int(rng.integers(g.n))
        g2 = _graph(g.n, list(zip(g.src.tolist(), g.tgt.tolist())) + [(u, v)])
        before = floyd_warshall(g.n, g.src.tolist(), g.tgt.tolist())
        after = floyd_warshall(g2.n, g2.src.tolist(), g2.tgt.tolist())
        assert np.all(after <= before + 1e-9)
