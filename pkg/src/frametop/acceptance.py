"""Batch drivers for the acceptance suite.

Each criterion is a function of a RunConfig that returns a CriterionResult.
Trials draw their randomness from ``derive_rng(seed, label)`` with a per-trial
label, so results do not depend on the number of worker processes.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .flow import (
    FlowConfig,
    Outcome,
    conjugate_by_permutation,
    energy,
    height,
    inverse_permutation,
    moment_map,
    reindex,
    retract_to_level,
    riemannian_grad_energy,
)
from .hermitian import gram_projection, nearest_projection, random_projection, random_tangent
from .homotopy import (
    circle_loop_frames,
    connect_frames,
    contract_loop,
    random_level_loop,
    torus_windings,
    torus_loop_projections,
    verify_point_fiber,
    winding_cp1,
)
from .polytope import (
    brute_force_hypothesis,
    sample_hypothesis,
    sample_polytope,
    satisfies_hypothesis,
    uniform_d,
)
from .rng import derive_rng
from .schur_horn import construct_frame, verify_membership
from .strata import enumerate_strata, hessian_index_oracle, min_positive_codim, stratum_codim


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float = 0.0
    metrics: dict = field(default_factory=dict)
    detail: str = ""

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f} s)"

    def to_dict(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "seconds": self.seconds, "metrics": self.metrics, "detail": self.detail}


def pmap(fn, tasks, jobs: int = 1) -> list:
    """Ordered map, fanned out to a process pool when ``jobs > 1``."""
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


# -- 1: frame synthesis -------------------------------------------------------

def _synthesis_trial(task):
    seed, i = task
    rng = derive_rng(seed, f"synthesis/{i}")
    n = int(rng.integers(4, 13))
    k = int(rng.integers(1, n))
    d = sample_polytope(n, k, rng)
    rep = verify_membership(construct_frame(d, rng), d, 1e-9)
    return rep.tight_residual, rep.norm_residual


def criterion_synthesis(cfg: RunConfig) -> CriterionResult:
    t0 = time.perf_counter()
    res = np.array(pmap(_synthesis_trial, [(cfg.seed, i) for i in range(1000)], cfg.jobs))
    secs = time.perf_counter() - t0
    tight, norm = float(res[:, 0].max()), float(res[:, 1].max())
    ok = tight <= 1e-9 and norm <= 1e-9 and secs <= 30
    return CriterionResult(1, "synthesis", ok, secs, {"trials": 1000, "max_tight_residual": tight,
                                                      "max_norm_residual": norm},
                           f"1000 frames, max residuals {tight:.1e} / {norm:.1e}, limit 30 s")


# -- 2: hypothesis check ------------------------------------------------------

def _hypothesis_vector(rng):
    n = int(rng.integers(2, 13))
    kind = int(rng.integers(0, 3))
    if kind == 2 and n >= 4:
        return sample_hypothesis(n, int(rng.integers(2, n - 1)), rng)
    k = int(rng.integers(0, n + 1))
    d = sample_polytope(n, k, rng)
    if kind == 1 and 0 < k < n:
        # quarter-grid values put many subset sums exactly on the boundary 1
        d = np.round(d * 4) / 4
        d += (k - d.sum()) / n
        if np.any(d < 0) or np.any(d > 1):
            d = sample_polytope(n, k, rng)
    return d


def _hypothesis_trial(task):
    seed, lo, hi = task
    out = []
    for i in range(lo, hi):
        d = _hypothesis_vector(derive_rng(seed, f"hypothesis/{i}"))
        out.append((satisfies_hypothesis(d), brute_force_hypothesis(d)))
    return out


def criterion_hypothesis(cfg: RunConfig) -> CriterionResult:
    t0 = time.perf_counter()
    chunks = [(cfg.seed, lo, min(lo + 500, 10_000)) for lo in range(0, 10_000, 500)]
    pairs = [p for chunk in pmap(_hypothesis_trial, chunks, cfg.jobs) for p in chunk]
    disagree = sum(a != b for a, b in pairs)
    positives = sum(a for a, _ in pairs)
    grid_bad = [(n, k) for n in range(1, 11) for k in range(n + 1)
                if satisfies_hypothesis(uniform_d(n, k), k) != (2 <= k <= n - 2)]
    ok = disagree == 0 and not grid_bad
    return CriterionResult(2, "hypothesis", ok, time.perf_counter() - t0,
                           {"vectors": len(pairs), "disagreements": disagree, "satisfying": positives,
                            "uniform_grid_failures": grid_bad},
                           f"{disagree} disagreements on {len(pairs)} vectors ({positives} satisfying); "
                           f"uniform grid failures {grid_bad}")


# -- 3: strata, negative case -------------------------------------------------

def criterion_strata_negative(cfg: RunConfig) -> CriterionResult:
    t0 = time.perf_counter()
    d = np.array([1.0, 1.0, 0.0, 0.0])
    target = np.array([-0.5, -0.5, 0.5, 0.5])
    hits = [s for s in enumerate_strata(d, 2)
            if np.allclose(s.a, target, atol=1e-12) and s.capacities == (1, 1)]
    found = any(s.codim_complex == 1 and abs(s.energy_level - 1) <= 1e-12 for s in hits)
    mpc = min_positive_codim(d, 2)
    return CriterionResult(3, "strata-negative", found and mpc == 1, time.perf_counter() - t0,
                           {"descriptor_found": found, "min_positive_codim": mpc},
                           f"descriptor a=(-1/2,-1/2,1/2,1/2), c=(1,1), codim 1 found={found}; "
                           f"min positive codim {mpc}")


# -- 4: strata, positive case -------------------------------------------------

def _positive_trial(task):
    seed, n, k, i = task
    d = sample_hypothesis(n, k, derive_rng(seed, f"strata-positive/{n}/{k}/{i}"))
    return min_positive_codim(d, k)


def criterion_strata_positive(cfg: RunConfig) -> CriterionResult:
    t0 = time.perf_counter()
    metrics, parts, ok = {}, [], True
    for n, k in ((4, 2), (5, 2), (6, 3)):
        codims = pmap(_positive_trial, [(cfg.seed, n, k, i) for i in range(100)], cfg.jobs)
        worst = min(c for c in codims if c is not None)
        metrics[f"min_codim_{n}_{k}"] = worst
        parts.append(f"({n},{k}) {worst}")
        ok &= worst >= 2
    secs = time.perf_counter() - t0
    ok &= secs <= 300
    return CriterionResult(4, "strata-positive", ok, secs, metrics,
                           "smallest positive codim " + ", ".join(parts) + " over 100 vectors each, limit 300 s")


# -- 5: codimension cross-validation -----------------------------------------

def _codim_trial(task):
    seed, n, k, i = task
    d = sample_polytope(n, k, derive_rng(seed, f"codim/{n}/{k}/{i}"))
    bad, count = [], 0
    for j, desc in enumerate(enumerate_strata(d, k)):
        count += 1
        idx = hessian_index_oracle(desc, d, derive_rng(seed, f"codim/{n}/{k}/{i}/{j}"))
        if idx != desc.codim_complex:
            bad.append((d.tolist(), desc.to_dict(), idx))
    return count, bad


def wolf_formula_check(max_n: int = 8) -> tuple[int, list]:
    """Two-block codimension against ``c (n - k - m + c)``, symbolically and on every
    admissible integer tuple with n <= max_n."""
    import sympy

    c, m, n, k = sympy.symbols("c m n k", integer=True)
    general = c * ((n - m) - (k - c))
    if sympy.simplify(general - c * (n - k - m + c)) != 0:
        return 0, ["symbolic mismatch"]
    wolf = sympy.lambdify((c, m, n, k), c * (n - k - m + c))
    checked, bad = 0, []
    for nn in range(2, max_n + 1):
        for kk in range(nn + 1):
            for mm in range(1, nn):
                for cc in range(max(0, kk - (nn - mm)), min(mm, kk) + 1):
                    checked += 1
                    got = stratum_codim([mm, nn - mm], [cc, kk - cc])
                    if got != wolf(cc, mm, nn, kk):
                        bad.append((cc, mm, nn, kk, got))
    return checked, bad


def criterion_codim(cfg: RunConfig) -> CriterionResult:
    t0 = time.perf_counter()
    tasks = [(cfg.seed, n, k, i) for n in range(2, 6) for k in range(1, n) for i in range(20)]
    results = pmap(_codim_trial, tasks, cfg.jobs)
    descriptors = sum(r[0] for r in results)
    bad = [b for r in results for b in r[1]]
    tuples, wolf_bad = wolf_formula_check(8)
    ok = not bad and not wolf_bad
    return CriterionResult(5, "codim", ok, time.perf_counter() - t0,
                           {"descriptors": descriptors, "mismatches": len(bad),
                            "wolf_tuples": tuples, "wolf_mismatches": len(wolf_bad)},
                           f"Hessian index = codim on {descriptors - len(bad)}/{descriptors} descriptors; "
                           f"two-block formula on {tuples - len(wolf_bad)}/{tuples} tuples")


# -- 6: retraction ------------------------------------------------------------

def _retraction_trial(task):
    seed, i, f_tol, grad_tol = task
    d = uniform_d(5, 2)
    P0 = random_projection(5, 2, derive_rng(seed, f"retraction/{i}"))
    _, trace = retract_to_level(P0, d, FlowConfig(f_tol=f_tol, grad_tol=grad_tol, max_iter=5000))
    monotone = bool(np.all(np.diff(trace.f) <= 1e-15))
    return trace.outcome is Outcome.CONVERGED and trace.final_f <= 1e-12, monotone, trace.iterations


def gradient_fd_error(seed, i, h: float = 1e-6) -> float:
    """|central difference of f along the retraction curve - <grad f, X>|, relative to max(1, |.|)."""
    rng = derive_rng(seed, f"gradient/{i}")
    n = int(rng.integers(3, 7))
    k = int(rng.integers(1, n))
    d = sample_polytope(n, k, rng)
    P = random_projection(n, k, rng)
    X = random_tangent(P, rng)
    fd = (energy(nearest_projection(P + h * X, k), d) - energy(nearest_projection(P - h * X, k), d)) / (2 * h)
    exact = float(np.real(np.sum(np.conj(riemannian_grad_energy(P, d)) * X)))
    return abs(fd - exact) / max(1.0, abs(exact))


def criterion_retraction(cfg: RunConfig) -> CriterionResult:
    t0 = time.perf_counter()
    res = pmap(_retraction_trial, [(cfg.seed, i, 1e-12, cfg.grad_tol) for i in range(100)], cfg.jobs)
    converged = sum(r[0] for r in res)
    monotone = all(r[1] for r in res)
    max_iter = max(r[2] for r in res)
    fd_err = max(gradient_fd_error(cfg.seed, i) for i in range(100))
    ok = converged >= 99 and monotone and fd_err <= 1e-4
    return CriterionResult(6, "retraction", ok, time.perf_counter() - t0,
                           {"converged": converged, "monotone": monotone, "max_iterations": max_iter,
                            "max_gradient_fd_error": fd_err},
                           f"{converged}/100 converged (max {max_iter} iterations), monotone={monotone}, "
                           f"gradient FD error {fd_err:.1e}")


# -- 7: point fiber -----------------------------------------------------------

def criterion_point_fiber(cfg: RunConfig) -> CriterionResult:
    t0 = time.perf_counter()
    rep = verify_point_fiber(derive_rng(cfg.seed, "point-fiber"))
    return CriterionResult(7, "point-fiber", rep.passed and rep.converged > 0, time.perf_counter() - t0,
                           rep.to_dict(),
                           f"{rep.converged}/50 converged, max landing distance {rep.max_landing_distance:.1e}, "
                           f"max right block {rep.max_right_block:.1e}")


# -- 8: simply-connectedness evidence ----------------------------------------

def _contract_trial(task):
    cfg, n, k, i = task
    d = uniform_d(n, k)
    hcfg = cfg.homotopy()
    loop = random_level_loop(d, derive_rng(cfg.seed, f"loop/{n}/{k}/{i}"), T=cfg.T, flow=hcfg.flow)
    return contract_loop(loop, d, hcfg).success


def _connect_trial(task):
    cfg, n, k, i = task
    d = uniform_d(n, k)
    F0 = construct_frame(d, derive_rng(cfg.seed, f"connect/{n}/{k}/{i}/0"))
    F1 = construct_frame(d, derive_rng(cfg.seed, f"connect/{n}/{k}/{i}/1"))
    conn = connect_frames(F0, F1, d, cfg.homotopy(), derive_rng(cfg.seed, f"connect/{n}/{k}/{i}/retry"))
    exact_ends = np.array_equal(conn.frames[0], F0) and np.array_equal(conn.frames[-1], F1)
    return conn.success and exact_ends


def criterion_simply_connected(cfg: RunConfig) -> CriterionResult:
    t0 = time.perf_counter()
    metrics, ok = {}, True
    for n, k in ((4, 2), (5, 2)):
        tasks = [(cfg, n, k, i) for i in range(20)]
        loops = sum(pmap(_contract_trial, tasks, cfg.jobs))
        paths = sum(pmap(_connect_trial, tasks, cfg.jobs))
        metrics[f"contract_{n}_{k}"] = loops
        metrics[f"connect_{n}_{k}"] = paths
        ok &= loops >= 19 and paths >= 19
    detail = ", ".join(f"{key} {val}/20" for key, val in metrics.items())
    return CriterionResult(8, "simply-connected", ok, time.perf_counter() - t0, metrics, detail)


# -- 9: non-simply-connected certificates ------------------------------------

def criterion_certificates(cfg: RunConfig) -> CriterionResult:
    t0 = time.perf_counter()
    cp1 = [winding_cp1(circle_loop_frames(w, 64))[0] for w in (1, 0, 2)]
    torus = [torus_windings(torus_loop_projections(a, b, 64)) for a, b in ((1, 0), (1, 1), (0, 0))]
    generator = [gram_projection(F) for F in circle_loop_frames(1, cfg.T)]
    report = contract_loop(generator, np.array([0.5, 0.5]), cfg.homotopy())
    ok = cp1 == [1, 0, 2] and torus == [(1, 0), (1, 1), (0, 0)] and not report.success
    return CriterionResult(9, "certificates", ok, time.perf_counter() - t0,
                           {"cp1": cp1, "torus": [list(t) for t in torus],
                            "generator_contracted": report.success, "generator_reasons": report.reasons},
                           f"cp1 windings {cp1}, torus windings {torus}, "
                           f"circle generator contracted={report.success}")


# -- 10: covariance identities -----------------------------------------------

def criterion_covariance(cfg: RunConfig) -> CriterionResult:
    t0 = time.perf_counter()
    rng = derive_rng(cfg.seed, "covariance")
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        k = int(rng.integers(0, n + 1))
        P = random_projection(n, k, rng)
        sigma = rng.permutation(n)
        a = rng.standard_normal(n)
        gP = conjugate_by_permutation(P, sigma)
        worst = max(worst,
                    float(np.max(np.abs(moment_map(gP) - reindex(moment_map(P), inverse_permutation(sigma))))),
                    abs(height(P, reindex(a, sigma)) - height(gP, a)))
    return CriterionResult(10, "covariance", worst <= 1e-12, time.perf_counter() - t0, {"max_error": worst},
                           f"max identity error {worst:.1e} on 1000 samples")


CRITERIA = [
    criterion_synthesis,
    criterion_hypothesis,
    criterion_strata_negative,
    criterion_strata_positive,
    criterion_codim,
    criterion_retraction,
    criterion_point_fiber,
    criterion_simply_connected,
    criterion_certificates,
    criterion_covariance,
]
NAMES = ["synthesis", "hypothesis", "strata-negative", "strata-positive", "codim", "retraction",
         "point-fiber", "simply-connected", "certificates", "covariance"]


def select(only=None) -> list[int]:
    """Criterion numbers matching the filter tokens (numbers, names or name prefixes)."""
    if not only:
        return list(range(1, len(CRITERIA) + 1))
    tokens = [t.strip() for item in only for t in str(item).split(",") if t.strip()]
    chosen = set()
    for tok in tokens:
        matched = [i + 1 for i, name in enumerate(NAMES)
                   if tok == str(i + 1) or name == tok or name.startswith(tok)]
        if not matched:
            raise ValueError(f"no acceptance criterion matches {tok!r}; choose from {NAMES}")
        chosen.update(matched)
    return sorted(chosen)


def run(cfg: RunConfig, only=None, echo=None) -> list[CriterionResult]:
    results = []
    for number in select(only):
        result = CRITERIA[number - 1](cfg)
        if echo is not None:
            echo(result.line())
        results.append(result)
    return results
