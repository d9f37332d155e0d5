"""Every acceptance criterion at its stated tolerance, one test each.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""
import pytest

from frametop import acceptance as acc
from frametop.config import RunConfig

from conftest import ACCEPTANCE_LINES

CFG = RunConfig(seed=20240601)


def evaluate(fn):
    result = fn(CFG)
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    return result


def test_01_frame_synthesis():
    r = evaluate(acc.criterion_synthesis)
    m = r.metrics
    assert m["trials"] == 1000
    assert m["max_tight_residual"] <= 1e-9 and m["max_norm_residual"] <= 1e-9
    assert r.seconds <= 30
    assert r.passed


def test_02_hypothesis_equivalence():
    r = evaluate(acc.criterion_hypothesis)
    m = r.metrics
    assert m["vectors"] == 10_000 and m["disagreements"] == 0
    assert 0 < m["satisfying"] < 10_000
    assert m["uniform_grid_failures"] == []
    assert r.passed


def test_03_strata_negative_case():
    r = evaluate(acc.criterion_strata_negative)
    assert r.metrics["descriptor_found"] and r.metrics["min_positive_codim"] == 1
    assert r.passed


def test_04_strata_positive_case():
    r = evaluate(acc.criterion_strata_positive)
    assert all(v >= 2 for v in r.metrics.values())
    assert r.seconds <= 300
    assert r.passed


@pytest.mark.slow
def test_05_codimension_cross_validation():
    r = evaluate(acc.criterion_codim)
    m = r.metrics
    assert m["descriptors"] > 0 and m["mismatches"] == 0
    assert m["wolf_tuples"] > 0 and m["wolf_mismatches"] == 0
    assert r.passed


def test_06_retraction():
    r = evaluate(acc.criterion_retraction)
    m = r.metrics
    assert m["converged"] >= 99 and m["max_iterations"] <= 5000
    assert m["monotone"]
    assert m["max_gradient_fd_error"] <= 1e-4
    assert r.passed


def test_07_point_fiber():
    r = evaluate(acc.criterion_point_fiber)
    m = r.metrics
    assert m["converged"] > 0 and m["max_landing_distance"] <= 1e-6
    assert m["frames_checked"] == 50 and m["max_right_block"] <= 1e-9
    assert r.passed


def test_08_simply_connected_evidence():
    r = evaluate(acc.criterion_simply_connected)
    assert all(v >= 19 for v in r.metrics.values()) and len(r.metrics) == 4
    assert r.passed


def test_09_non_simply_connected_certificates():
    r = evaluate(acc.criterion_certificates)
    m = r.metrics
    assert m["cp1"] == [1, 0, 2]
    assert m["torus"] == [[1, 0], [1, 1], [0, 0]]
    assert m["generator_contracted"] is False
    assert r.passed


def test_10_covariance_identities():
    r = evaluate(acc.criterion_covariance)
    assert r.metrics["max_error"] <= 1e-12
    assert r.passed
