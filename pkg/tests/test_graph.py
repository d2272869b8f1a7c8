"""Shortest-path closure against brute-force and Dijkstra oracles."""

import numpy as np
import pytest

from geotex.distributions import GammaParams
from geotex.features import Signature
from geotex.geometry import Family
from geotex.graph import (
    DistanceMatrix,
    EdgeWeight,
    NegativeCycle,
    build_distance_matrix,
    floyd_warshall,
    insert_query,
    load_matrix_binary,
    load_matrix_csv,
    reconstruct_path,
    save_matrix_binary,
    save_matrix_csv,
    validate_metricity,
)


def dyadic_symmetric(rng, n):
    # integer weights over 256 make every path sum exactly
    # representable, so oracle comparisons can demand equality
    ints = rng.integers(1, 256, size=(n, n)).astype(np.float64) / 256.0
    W = np.triu(ints, 1)
    return W + W.T


def exhaustive_shortest(W):
    """Minimum weight over all simple paths, by depth-first enumeration."""
    n = W.shape[0]
    best = np.full((n, n), np.inf)
    np.fill_diagonal(best, 0.0)

    def extend(start, cur, visited, acc):
        row = W[cur]
        for nxt in range(n):
            if visited & (1 << nxt) or not np.isfinite(row[nxt]):
                continue
            t = acc + row[nxt]
            if t < best[start, nxt]:
                best[start, nxt] = t
            extend(start, nxt, visited | (1 << nxt), t)

    for s in range(n):
        extend(s, s, 1 << s, 0.0)
    return best


def test_hand_computed_triangle():
    W = np.array([[0.0, 5.0, 2.0],
                  [5.0, 0.0, 2.0],
                  [2.0, 2.0, 0.0]])
    S = floyd_warshall(DistanceMatrix(d=W, labels=None))
    expected = np.array([[0.0, 4.0, 2.0],
                         [4.0, 0.0, 2.0],
                         [2.0, 2.0, 0.0]])
    assert np.array_equal(S.dist, expected)


def test_matches_exhaustive_enumeration():
    rng = np.random.default_rng(70)
    for _ in range(5):
        W = dyadic_symmetric(rng, 8)
        S = floyd_warshall(DistanceMatrix(d=W, labels=None))
        assert np.array_equal(S.dist, exhaustive_shortest(W))


def test_matches_scipy_dijkstra_exactly():
    from scipy.sparse.csgraph import dijkstra

    rng = np.random.default_rng(71)
    for _ in range(3):
        W = dyadic_symmetric(rng, 64)
        S = floyd_warshall(DistanceMatrix(d=W, labels=None))
        assert np.array_equal(S.dist, dijkstra(W))


def test_closure_idempotent():
    rng = np.random.default_rng(72)
    W = dyadic_symmetric(rng, 20)
    once = floyd_warshall(DistanceMatrix(d=W, labels=None))
    twice = floyd_warshall(DistanceMatrix(d=once.dist, labels=once.labels))
    assert np.array_equal(once.dist, twice.dist)


def test_monotone_in_edge_weights():
    rng = np.random.default_rng(73)
    W = dyadic_symmetric(rng, 12)
    base = floyd_warshall(DistanceMatrix(d=W, labels=None)).dist
    W2 = W.copy()
    W2[3, 7] = W2[7, 3] = W2[3, 7] + 1.0
    raised = floyd_warshall(DistanceMatrix(d=W2, labels=None)).dist
    assert np.all(raised >= base)


def test_insert_query_matches_full_rerun():
    rng = np.random.default_rng(74)
    n = 12
    W = dyadic_symmetric(rng, n)
    q = rng.integers(1, 256, size=n).astype(np.float64) / 256.0
    D = DistanceMatrix(d=W, labels=None)
    S = floyd_warshall(D)
    fast = insert_query(S, D, q)

    full = np.zeros((n + 1, n + 1))
    full[:n, :n] = W
    full[n, :n] = q
    full[:n, n] = q
    ref = floyd_warshall(DistanceMatrix(d=full, labels=None)).dist
    assert np.array_equal(fast, ref[n, :n])


def test_insert_query_rejects_bad_edges():
    rng = np.random.default_rng(75)
    W = dyadic_symmetric(rng, 5)
    D = DistanceMatrix(d=W, labels=None)
    S = floyd_warshall(D)
    with pytest.raises(ValueError):
        insert_query(S, D, np.ones(4))
    with pytest.raises(ValueError):
        insert_query(S, D, -np.ones(5))


def test_negative_cycle_detected():
    W = np.array([[0.0, 1.0], [1.0, 0.0]])
    D = DistanceMatrix(d=W, labels=None)
    # the constructor rejects negatives, so corrupt the array afterwards
    # to exercise the defensive check
    D.d[0, 1] = -2.0
    D.d[1, 0] = -2.0
    with pytest.raises(NegativeCycle):
        floyd_warshall(D)


def test_reconstruct_path():
    rng = np.random.default_rng(76)
    W = dyadic_symmetric(rng, 8)
    D = DistanceMatrix(d=W, labels=None)
    S = floyd_warshall(D, compute_paths=True)
    for i in range(8):
        for j in range(8):
            path = reconstruct_path(S, i, j)
            assert path[0] == i and path[-1] == j
            assert len(set(path)) == len(path)
            total = sum(W[a, b] for a, b in zip(path, path[1:]))
            assert total == S.dist[i, j]
    plain = floyd_warshall(D)
    with pytest.raises(ValueError):
        reconstruct_path(plain, 0, 1)


def test_reconstruct_path_disconnected():
    W = np.array([[0.0, 1.0, np.inf],
                  [1.0, 0.0, np.inf],
                  [np.inf, np.inf, 0.0]])
    S = floyd_warshall(DistanceMatrix(d=W, labels=None), compute_paths=True)
    assert np.isinf(S.dist[0, 2])
    with pytest.raises(ValueError):
        reconstruct_path(S, 0, 2)


def test_matrix_validation():
    with pytest.raises(ValueError):
        DistanceMatrix(d=np.zeros((2, 3)), labels=None)
    with pytest.raises(ValueError):
        DistanceMatrix(d=np.array([[0.0, -1.0], [1.0, 0.0]]), labels=None)
    with pytest.raises(ValueError):
        DistanceMatrix(d=np.array([[0.0, np.nan], [1.0, 0.0]]), labels=None)
    with pytest.raises(ValueError):
        DistanceMatrix(d=np.array([[0.5, 1.0], [1.0, 0.0]]), labels=None)
    with pytest.raises(ValueError):
        DistanceMatrix(d=np.zeros((2, 2)), labels=["only-one"])
    D = DistanceMatrix(d=np.zeros((3, 3)), labels=None)
    assert D.labels == ["0", "1", "2"]


def _line_signatures(alphas):
    # six identical subband entries keep the structure valid while
    # making per-pair distances easy to reason about
    return [Signature(family=Family.GAMMA, levels=1,
                      params=tuple(GammaParams(alpha=a, beta=2.0)
                                   for _ in range(6)))
            for a in alphas]


def test_build_distance_matrix_measures():
    from geotex.divergences import kld, skld
    from geotex.geometry import gd_skld

    sigs = _line_signatures([1.0, 1.4, 2.1])
    pairs = [(i, j) for i in range(3) for j in range(3) if i != j]

    D = build_distance_matrix(sigs, EdgeWeight.SQRT_TWO_SKLD)
    for i, j in pairs:
        expected = sum(gd_skld(p, q) for p, q in
                       zip(sigs[i].params, sigs[j].params))
        assert D.d[i, j] == pytest.approx(expected, rel=1e-14)
    assert np.array_equal(D.d, D.d.T)

    D = build_distance_matrix(sigs, EdgeWeight.SKLD)
    for i, j in pairs:
        expected = sum(skld(p, q) for p, q in
                       zip(sigs[i].params, sigs[j].params))
        assert D.d[i, j] == pytest.approx(expected, rel=1e-14)

    D = build_distance_matrix(sigs, EdgeWeight.KLD_DIRECTED)
    for i, j in pairs:
        expected = sum(kld(p, q) for p, q in
                       zip(sigs[i].params, sigs[j].params))
        assert D.d[i, j] == pytest.approx(expected, rel=1e-14)
    assert not np.array_equal(D.d, D.d.T)


def test_build_distance_matrix_knn():
    sigs = _line_signatures([1.0, 1.2, 1.5, 1.9, 2.4, 3.0])
    dense = build_distance_matrix(sigs)
    sparse = build_distance_matrix(sigs, knn=2)
    finite = np.isfinite(sparse.d)
    assert np.array_equal(finite, finite.T)
    assert np.any(~finite)
    # kept edges keep their dense weights
    assert np.array_equal(sparse.d[finite], dense.d[finite])
    closed_sparse = floyd_warshall(sparse).dist
    closed_dense = floyd_warshall(dense).dist
    assert np.all(np.isfinite(closed_sparse))
    assert np.all(closed_sparse >= closed_dense - 1e-15)
    with pytest.raises(ValueError):
        build_distance_matrix(sigs, knn=0)
    with pytest.raises(ValueError):
        build_distance_matrix(sigs, knn=6)
    with pytest.raises(ValueError):
        build_distance_matrix(sigs[:1])


def test_validate_metricity_reports():
    closed = floyd_warshall(DistanceMatrix(
        d=dyadic_symmetric(np.random.default_rng(77), 10), labels=None))
    rep = validate_metricity(closed)
    assert rep.is_metric()
    assert rep.max_triangle_violation <= 0.0
    assert rep.symmetry_defect == 0.0
    assert rep.zero_offdiagonal_pairs == 0

    viol = validate_metricity(np.array([[0.0, 10.0, 1.0],
                                        [10.0, 0.0, 1.0],
                                        [1.0, 1.0, 0.0]]))
    assert viol.max_triangle_violation == pytest.approx(8.0)
    assert not viol.is_metric()

    asym = validate_metricity(np.array([[0.0, 1.0], [1.5, 0.0]]))
    assert asym.symmetry_defect == pytest.approx(0.5)

    dup = validate_metricity(np.array([[0.0, 0.0], [0.0, 0.0]]))
    assert dup.zero_offdiagonal_pairs == 1


def test_csv_round_trip_exact(tmp_path):
    rng = np.random.default_rng(78)
    W = rng.uniform(0.1, 3.0, size=(5, 5))
    W = (W + W.T) / 2.0
    np.fill_diagonal(W, 0.0)
    W[0, 4] = W[4, 0] = np.inf
    D = DistanceMatrix(d=W, labels=["a", "b", "c", "d", "e"])
    p1 = tmp_path / "m.csv"
    save_matrix_csv(p1, D)
    back = load_matrix_csv(p1)
    assert np.array_equal(back.d, W)
    assert back.labels == D.labels
    p2 = tmp_path / "m2.csv"
    save_matrix_csv(p2, back)
    assert p1.read_bytes() == p2.read_bytes()


def test_csv_rejects_malformed(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n0.0,1.0\n")
    with pytest.raises(ValueError):
        load_matrix_csv(p)
    p.write_text("")
    with pytest.raises(ValueError):
        load_matrix_csv(p)


def test_binary_round_trip_and_errors(tmp_path):
    rng = np.random.default_rng(79)
    W = dyadic_symmetric(rng, 7)
    D = DistanceMatrix(d=W, labels=None)
    p = tmp_path / "m.dmat"
    save_matrix_binary(p, D)
    back = load_matrix_binary(p)
    assert np.array_equal(back.d, W)

    blob = p.read_bytes()
    bad = tmp_path / "bad.dmat"
    bad.write_bytes(b"XXXX" + blob[4:])
    with pytest.raises(ValueError):
        load_matrix_binary(bad)
    bad.write_bytes(blob[:4] + bytes([99]) + blob[5:])
    with pytest.raises(ValueError):
        load_matrix_binary(bad)
    bad.write_bytes(blob[:-8])
    with pytest.raises(ValueError):
        load_matrix_binary(bad)


def test_disconnected_components_stay_apart():
    W = np.full((4, 4), np.inf)
    np.fill_diagonal(W, 0.0)
    W[0, 1] = W[1, 0] = 1.0
    W[2, 3] = W[3, 2] = 2.0
    S = floyd_warshall(DistanceMatrix(d=W, labels=None))
    assert S.dist[0, 1] == 1.0
    assert np.isinf(S.dist[0, 2])
    assert np.isinf(S.dist[1, 3])
