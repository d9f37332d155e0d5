import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frametop.errors import BadComposition, InfeasibleDescriptor, TooLarge
from frametop.flow import energy, is_critical
from frametop.hermitian import random_projection
from frametop.polytope import sample_hypothesis, sample_polytope
from frametop.rng import derive_rng
from frametop.strata import (
    StratumDescriptor,
    critical_manifold_point,
    enumerate_strata,
    hessian_index_oracle,
    min_positive_codim,
    stable_manifold_membership,
    stratum_codim,
)

D1100 = np.array([1.0, 1.0, 0.0, 0.0])


def oracle_shifts(d, k):
    """All critical shift vectors a, by brute force over label assignments and capacities."""
    n = len(d)
    seen = set()
    found = {}
    for labels in itertools.product(range(n), repeat=n):
        blocks = {}
        for j, lab in enumerate(labels):
            blocks.setdefault(lab, []).append(j)
        key = tuple(sorted(tuple(b) for b in blocks.values()))
        if key in seen:
            continue
        seen.add(key)
        for caps in itertools.product(*[range(len(b) + 1) for b in key]):
            if sum(caps) != k:
                continue
            levels = [(c - sum(d[j] for j in b)) / len(b) for b, c in zip(key, caps)]
            if any(abs(x - y) <= 1e-9 for x, y in itertools.combinations(levels, 2)):
                continue
            if any(not -1e-12 <= d[j] + lev <= 1 + 1e-12 for b, lev in zip(key, levels) for j in b):
                continue
            a = np.zeros(n)
            for b, lev in zip(key, levels):
                a[list(b)] = lev
            order = np.argsort(levels)[::-1]
            m = [len(key[i]) for i in order]
            c = [caps[i] for i in order]
            codim = sum(c[i] * (m[j] - c[j]) for i in range(len(m)) for j in range(i + 1, len(m)))
            found[tuple(np.round(a, 9))] = codim
    return found


def as_map(strata):
    return {s.key(): s.codim_complex for s in strata}


def find(strata, a, caps):
    return [s for s in strata if np.allclose(s.a, a, atol=1e-12) and s.capacities == caps]


def test_vertex_descriptors():
    strata = enumerate_strata(D1100, 2)
    (s,) = find(strata, [-0.5, -0.5, 0.5, 0.5], (1, 1))
    assert s.blocks == ((2, 3), (0, 1)) and np.allclose(s.levels, [0.5, -0.5])
    assert s.codim_complex == 1 and s.energy_level == 1
    (s,) = find(strata, [-1, -1, 1, 1], (2, 0))
    assert s.blocks == ((2, 3), (0, 1)) and s.codim_complex == 4 and s.energy_level == 4
    assert min_positive_codim(D1100, 2) == 1


def test_uniform_has_no_codim_one():
    strata = enumerate_strata([0.5] * 4, 2)
    assert all(s.codim_complex != 1 for s in strata)
    assert min_positive_codim([0.5] * 4, 2) == 2


def test_torus_example_has_codim_one():
    assert min_positive_codim([1 / 3, 1 / 3, 1 / 3, 1], 2) == 1


def test_stratum_codim_examples():
    assert stratum_codim([4], [2]) == 0
    assert stratum_codim([2, 2], [1, 1]) == 1
    assert stratum_codim([2, 2], [2, 0]) == 4
    with pytest.raises(BadComposition):
        stratum_codim([2, 2], [3, 0])
    with pytest.raises(BadComposition):
        stratum_codim([2, 2], [1])


def test_two_block_formula():
    for n in range(2, 9):
        for k in range(n + 1):
            for m in range(1, n):
                for c in range(max(0, k - (n - m)), min(m, k) + 1):
                    assert stratum_codim([m, n - m], [c, k - c]) == c * (n - k - m + c)
                    assert stratum_codim([n - m, m], [k - c, c]) == (k - c) * (m - c)


def test_enumeration_guard():
    with pytest.raises(TooLarge):
        enumerate_strata(np.full(10, 0.5), 5)


@pytest.mark.parametrize("d,k", [(D1100, 2), ([0.5] * 4, 2), ([1 / 3, 1 / 3, 1 / 3, 1], 2),
                                 ([0.2, 0.3, 0.5], 1), ([0.4] * 5, 2)])
def test_matches_bruteforce_oracle(d, k):
    assert as_map(enumerate_strata(d, k)) == oracle_shifts(np.asarray(d, dtype=float), k)


@settings(max_examples=25)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))), st.integers(0, 2**32))
def test_random_vectors_match_oracle(nk, seed):
    n, k = nk
    d = sample_polytope(n, k, seed)
    assert as_map(enumerate_strata(d, k)) == oracle_shifts(d, k)


@settings(max_examples=25)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))), st.integers(0, 2**32))
def test_structural_invariants(nk, seed):
    n, k = nk
    d = sample_polytope(n, k, seed)
    strata = enumerate_strata(d, k)
    assert sum(s.is_minimum for s in strata) == 1
    assert all(s.codim_complex == 0 for s in strata if s.is_minimum)
    assert all(abs(s.a.sum()) <= 1e-9 for s in strata)
    for s in strata:
        assert all(x > y for x, y in zip(s.levels, s.levels[1:]))


@settings(max_examples=20)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1), st.permutations(range(n)))),
       st.integers(0, 2**32))
def test_permutation_equivariance(nks, seed):
    n, k, sigma = nks
    sigma = np.array(sigma)
    d = sample_polytope(n, k, seed)
    base = {tuple(np.round(s.a[sigma], 9)) for s in enumerate_strata(d, k)}
    permuted = {s.key() for s in enumerate_strata(d[sigma], k)}
    assert base == permuted


def test_critical_points_for_vertex():
    (s,) = find(enumerate_strata(D1100, 2), [-0.5, -0.5, 0.5, 0.5], (1, 1))
    P = critical_manifold_point(s, D1100, 1)
    assert np.allclose(np.diag(P), 0.5, atol=1e-12)
    assert np.max(np.abs(P[np.ix_([0, 1], [2, 3])])) == 0
    assert energy(P, D1100) == pytest.approx(1, abs=1e-12)
    (s,) = find(enumerate_strata(D1100, 2), [-1, -1, 1, 1], (2, 0))
    P = critical_manifold_point(s, D1100, 1)
    assert np.allclose(P, np.diag([0, 0, 1, 1]), atol=1e-15)
    assert energy(P, D1100) == 4


@pytest.mark.parametrize("d,k", [(D1100, 2), ([0.5] * 4, 2), ([1 / 3, 1 / 3, 1 / 3, 1], 2),
                                 ([0.1, 0.7, 0.2, 0.6, 0.4], 2)])
def test_critical_points_are_critical(d, k):
    d = np.asarray(d, dtype=float)
    for s in enumerate_strata(d, k):
        P = critical_manifold_point(s, d, 5)
        ok, a = is_critical(P, d, 1e-9)
        assert ok and np.allclose(a, s.a, atol=1e-10)
        assert abs(energy(P, d) - s.energy_level) <= 1e-10
        assert stable_manifold_membership(P, s)


def test_infeasible_descriptor():
    bad = StratumDescriptor(((0, 1),), (1,), (0.0,), np.zeros(2), 0)
    with pytest.raises(InfeasibleDescriptor):
        critical_manifold_point(bad, np.array([1.0, 1.0]))


def test_stable_manifold_examples():
    (s,) = find(enumerate_strata(D1100, 2), [-0.5, -0.5, 0.5, 0.5], (1, 1))
    assert not stable_manifold_membership(np.diag([1.0, 1, 0, 0]), s)
    P = random_projection(4, 2, 3)
    for t in enumerate_strata(D1100, 2):
        assert stable_manifold_membership(P, t) == t.is_minimum


def test_hessian_index_examples():
    strata = enumerate_strata(D1100, 2)
    (s,) = find(strata, [-0.5, -0.5, 0.5, 0.5], (1, 1))
    assert hessian_index_oracle(s, D1100, 0) == 1
    (s,) = find(strata, [-1, -1, 1, 1], (2, 0))
    assert hessian_index_oracle(s, D1100, 0) == 4
    (s,) = [t for t in strata if t.is_minimum]
    assert hessian_index_oracle(s, D1100, 0) == 0
    with pytest.raises(TooLarge):
        hessian_index_oracle(s, np.full(7, 3 / 7), 0)


def test_hessian_index_matches_codim_three_seeds():
    for d, k in [(D1100, 2), ([1 / 3, 1 / 3, 1 / 3, 1], 2), (sample_polytope(5, 2, 3), 2)]:
        d = np.asarray(d, dtype=float)
        for s in enumerate_strata(d, k):
            for seed in range(3):
                assert hessian_index_oracle(s, d, seed) == s.codim_complex


def test_hypothesis_gives_codim_at_least_two():
    for n, k in [(4, 2), (5, 2), (6, 3)]:
        for i in range(20):
            assert min_positive_codim(sample_hypothesis(n, k, derive_rng(i, "prop")), k) >= 2


def test_descriptor_dict():
    (s,) = find(enumerate_strata(D1100, 2), [-0.5, -0.5, 0.5, 0.5], (1, 1))
    out = s.to_dict()
    assert out["blocks"] == [[3, 4], [1, 2]] and out["capacities"] == [1, 1] and out["codim_complex"] == 1
