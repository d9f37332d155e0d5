"""The compiled kernels and the numpy fallback must agree."""
import numpy as np
import pytest

from frametop import _kernels
from frametop.hermitian import random_projection
from frametop.polytope import sample_polytope
from frametop.rng import derive_rng

FLOW_ARGS = dict(step0=0.5, step_max=1e300, step_growth=2.0, armijo_c=1e-4, backtrack_factor=0.5,
                 max_backtracks=60, max_iter=5000, f_tol=1e-12, grad_tol=1e-9, f_crit=1e-10, tie_tol=1e-12)


def run_flow(mod, P0, d, k, **over):
    args = {**FLOW_ARGS, **over}
    return mod.retract_flow(P0, d, k, *args.values())


def test_backend_selected():
    assert _kernels.BACKEND in _kernels.backends()


def test_flow_contract(kernels):
    rng = derive_rng(1, "kernel-flow")
    d = sample_polytope(5, 2, rng)
    P, f, g, steps, status = run_flow(kernels, random_projection(5, 2, rng), d, 2)
    assert status == _kernels.CONVERGED
    assert len(f) == len(g) == len(steps)
    assert np.all(np.diff(f) <= 0) and f[-1] <= 1e-12
    assert steps[0] == 0.0


def test_flow_tie_status(kernels):
    P, f, g, steps, status = run_flow(kernels, np.eye(4) * 0.5, np.full(4, 0.5), 2)
    assert status == _kernels.TIE


@pytest.mark.skipif(len(_kernels.backends()) < 2, reason="compiled kernels not built")
def test_backends_agree_on_flow():
    py, cy = _kernels.backends()["python"], _kernels.backends()["cython"]
    for seed in range(30):
        rng = derive_rng(seed, "agree")
        n = int(rng.integers(2, 8))
        k = int(rng.integers(1, n))
        d = sample_polytope(n, k, rng)
        P0 = random_projection(n, k, rng)
        a, b = run_flow(py, P0, d, k), run_flow(cy, P0, d, k)
        # different LAPACK eigensolvers: identical to rounding early on, and a
        # long slow run may take a different backtracking branch near the end
        head = min(len(a[1]), len(b[1]), 10)
        assert np.max(np.abs(a[1][:head] - b[1][:head])) <= 1e-12
        assert a[4] == b[4] == _kernels.CONVERGED
        assert a[1][-1] <= 1e-12 and b[1][-1] <= 1e-12
        assert np.max(np.abs(a[0] - b[0])) <= 1e-5


@pytest.mark.skipif(len(_kernels.backends()) < 2, reason="compiled kernels not built")
def test_backends_agree_on_partitions_and_chains():
    py, cy = _kernels.backends()["python"], _kernels.backends()["cython"]
    for seed in range(20):
        rng = derive_rng(seed, "agree-combinatorics")
        n = int(rng.integers(1, 7))
        k = int(rng.integers(0, n + 1))
        d = np.sort(sample_polytope(n, k, rng))[::-1].copy()
        pa = py.level_partitions(d, k, 1e-9, 1e-12)
        pb = cy.level_partitions(d, k, 1e-9, 1e-12)
        assert [(list(x[0]), list(x[1])) for x in pa] == [(list(x[0]), list(x[1])) for x in pb]
        for x, y in zip(pa, pb):
            assert np.allclose(x[2], y[2], atol=1e-15)
        ca, cb = py.schur_horn_chain(d, k, 1e-15), cy.schur_horn_chain(d, k, 1e-15)
        assert ca[1] == cb[1] and np.max(np.abs(ca[0] - cb[0]), initial=0) <= 1e-14
        r = n - k
        assert py.all_subset_sums_at_least(d, r, 1 - 1e-9) == cy.all_subset_sums_at_least(d, r, 1 - 1e-9)
