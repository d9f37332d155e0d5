"""Homotopy experiments on level sets of the moment map.

Paths between frames, contractions of loops in the level set, and winding
invariants for the low-dimensional fibers (circles and the 2-torus) where the
fundamental group is visible directly. None of this proves anything; it is
numerical evidence with explicit tolerances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, logm

from .errors import (
    CutLocus,
    FrameInvariantViolated,
    NotInFiber,
    RetractionHitCriticalStratum,
    UndersampledLoop,
    ZeroEntry,
)
from .flow import FlowConfig, Outcome, energy, retract_to_level
from .hermitian import (
    dagger,
    factor_projection,
    gram_projection,
    nearest_projection,
    polar_unitary,
    random_hermitian,
    random_projection,
    random_tangent,
)
from .polytope import infer_rank
from .rng import as_rng
from .schur_horn import construct_frame, verify_membership

CUT_MARGIN = 1e-6
CLOSE_TOL = 1e-9


@dataclass(frozen=True)
class HomotopyConfig:
    S: int = 32
    T: int = 32
    step_cap: float = 0.5
    path_tol: float = 1e-6
    retries: int = 3
    max_refine: int = 6
    flow: FlowConfig = field(default_factory=FlowConfig)


def frobenius(A, B) -> float:
    return float(np.linalg.norm(np.asarray(A) - np.asarray(B)))


def _max_step(samples) -> float:
    return max((frobenius(a, b) for a, b in zip(samples, samples[1:])), default=0.0)


@dataclass
class ProjectionPath:
    samples: list[np.ndarray]
    d: np.ndarray | None = None

    @property
    def max_step(self) -> float:
        return _max_step(self.samples)

    @property
    def max_level_residual(self) -> float:
        if self.d is None:
            return float("nan")
        return max(math.sqrt(energy(P, self.d)) for P in self.samples)

    def reversed(self) -> "ProjectionPath":
        return ProjectionPath(self.samples[::-1], self.d)

    def __len__(self):
        return len(self.samples)


def _geodesic(P0, P1):
    """Return a function t -> P(t) along the Grassmann geodesic from P0 to P1."""
    if np.array_equal(P0, P1):
        return lambda t: P0.copy()
    A = dagger(factor_projection(P0))
    B = dagger(factor_projection(P1))
    if A.shape[1] == 0:
        return lambda t: np.zeros_like(P0)
    M = dagger(A) @ B
    cosines = np.linalg.svd(M, compute_uv=False)
    if cosines.min() <= math.sin(CUT_MARGIN):
        raise CutLocus("a principal angle is within 1e-6 of pi/2")
    H = (B - A @ M) @ np.linalg.inv(M)
    U, s, Vh = np.linalg.svd(H, full_matrices=False)
    theta = np.arctan(s)
    AV = A @ dagger(Vh)

    def point(t):
        Y = (AV * np.cos(t * theta)) @ Vh + (U * np.sin(t * theta)) @ Vh
        return Y @ dagger(Y)

    return point


def principal_angles(P0, P1) -> np.ndarray:
    A = dagger(factor_projection(P0))
    B = dagger(factor_projection(P1))
    s = np.linalg.svd(dagger(A) @ B, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))


def geodesic_path(P0, P1, T: int) -> ProjectionPath:
    """T+1 samples of the Grassmann geodesic from range(P0) to range(P1).

    Principal vectors rotate through linearly interpolated principal angles; the
    endpoints are returned exactly as given.
    """
    if T < 1:
        raise ValueError("geodesic_path needs T >= 1")
    point = _geodesic(np.asarray(P0, dtype=complex), np.asarray(P1, dtype=complex))
    samples = [np.asarray(P0, dtype=complex)]
    samples += [point(t / T) for t in range(1, T)]
    samples.append(np.asarray(P1, dtype=complex))
    return ProjectionPath(samples)


def _retract_all(samples, d, flow_cfg, keep_ends=True):
    out = []
    for i, P in enumerate(samples):
        if keep_ends and i in (0, len(samples) - 1):
            out.append(P)
            continue
        Q, trace = retract_to_level(P, d, flow_cfg)
        if trace.outcome is not Outcome.CONVERGED:
            raise RetractionHitCriticalStratum(f"retraction of sample {i} ended with {trace.outcome.value}")
        out.append(Q)
    return out


def _level_segment(A, B, d, cfg: HomotopyConfig) -> list[np.ndarray]:
    """Retracted geodesic from A to B, refined until consecutive samples are within the step cap."""
    T = max(cfg.T, math.ceil(2 * frobenius(A, B) / cfg.step_cap))
    for _ in range(cfg.max_refine + 1):
        samples = _retract_all(geodesic_path(A, B, T).samples, d, cfg.flow)
        if _max_step(samples) <= cfg.step_cap:
            return samples
        T *= 2
    return samples


def _waypoint(A, B, d, cfg: HomotopyConfig, rng) -> np.ndarray:
    k = infer_rank(np.real(np.trace(A)))
    H = random_hermitian(A.shape[0], rng)
    W = nearest_projection(A + B + 0.5 * H, k)
    W, trace = retract_to_level(W, d, cfg.flow)
    if trace.outcome is not Outcome.CONVERGED:
        raise RetractionHitCriticalStratum("waypoint retraction did not converge")
    return W


def lift_to_frames(F_start, projections) -> list[np.ndarray]:
    """Horizontal-ish lift: each new frame is the factor of the next projection rotated
    by the polar factor that brings it closest to the previous frame."""
    frames = [np.asarray(F_start, dtype=complex)]
    for P in projections[1:]:
        G = factor_projection(P)
        U = polar_unitary(frames[-1] @ dagger(G))
        frames.append(U @ G)
    return frames


def fiber_path(F_from, F_to, step_cap: float) -> list[np.ndarray]:
    """Frames ``exp(s L) F_from`` with ``exp(L) = F_to F_from^*``; ends exactly at F_to."""
    W = polar_unitary(np.asarray(F_to) @ dagger(np.asarray(F_from)))
    L = logm(W) if W.size else W
    steps = max(1, math.ceil(np.linalg.norm(L, 2) * max(np.linalg.norm(F_from), 1.0) / (0.5 * step_cap)))
    frames = [np.asarray(F_from, dtype=complex)]
    frames += [expm(L * (s / steps)) @ F_from for s in range(1, steps)]
    frames.append(np.asarray(F_to, dtype=complex))
    return frames


@dataclass
class Connection:
    frames: list[np.ndarray]
    projections: ProjectionPath
    success: bool
    attempts: int
    max_frame_step: float
    max_membership_residual: float
    reason: str = ""

    def summary(self) -> dict:
        return {
            "success": self.success,
            "attempts": self.attempts,
            "frame_samples": len(self.frames),
            "projection_samples": len(self.projections),
            "max_frame_step": self.max_frame_step,
            "max_membership_residual": self.max_membership_residual,
            "max_level_residual": self.projections.max_level_residual,
            "reason": self.reason,
        }


def connect_frames(F0, F1, d, cfg: HomotopyConfig | None = None, seed=None) -> Connection:
    """Path from F0 to F1 inside the frame space with column norms d.

    Geodesic between the Gram projections, every sample retracted to the level
    set, lifted to frames with fiber alignment, then closed up inside the U(k)
    fiber of the end point. Cut-locus or critical-stratum hits are retried
    through a random intermediate waypoint.
    """
    cfg = cfg or HomotopyConfig()
    rng = as_rng(seed)
    d = np.asarray(d, dtype=float)
    for name, F in (("F0", F0), ("F1", F1)):
        if not verify_membership(F, d, 1e-6).passed:
            raise FrameInvariantViolated(f"{name} is not in the frame space for d")
    F0 = np.asarray(F0, dtype=complex)
    F1 = np.asarray(F1, dtype=complex)
    P0, P1 = gram_projection(F0), gram_projection(F1)
    waypoints = [P0, P1]
    attempts = 0
    projections = None
    last_error = ""
    while attempts <= cfg.retries:
        attempts += 1
        try:
            projections = [P0]
            for A, B in zip(waypoints, waypoints[1:]):
                projections += _level_segment(A, B, d, cfg)[1:]
            break
        except (CutLocus, RetractionHitCriticalStratum) as exc:
            last_error = str(exc)
            projections = None
            try:
                waypoints = [P0, _waypoint(P0, P1, d, cfg, rng), P1]
            except (RetractionHitCriticalStratum, CutLocus) as exc2:
                last_error = str(exc2)
                waypoints = [P0, P1]
    if projections is None:
        return Connection([F0], ProjectionPath([P0], d), False, attempts, 0.0, float("inf"), last_error)
    frames = lift_to_frames(F0, projections)
    frames = frames[:-1] + fiber_path(frames[-1], F1, cfg.step_cap)
    residual = max(max(r.tight_residual, r.norm_residual) for r in (verify_membership(F, d) for F in frames))
    max_frame_step = _max_step(frames)
    ok = residual <= cfg.path_tol and max_frame_step <= cfg.step_cap
    reason = "" if ok else f"residual {residual:.2e}, max step {max_frame_step:.3f}"
    return Connection(frames, ProjectionPath(projections, d), ok, attempts, max_frame_step, residual, reason)


@dataclass
class HomotopyReport:
    grid: list[list[np.ndarray]]
    success: bool
    max_level_residual: float
    critical_hits: int
    cut_locus_hits: int = 0
    unconverged: int = 0
    max_row_step: float = 0.0
    max_col_step: float = 0.0
    reasons: list[str] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "success": self.success,
            "rows": len(self.grid),
            "cols": len(self.grid[0]) if self.grid else 0,
            "max_level_residual": self.max_level_residual,
            "critical_hits": self.critical_hits,
            "cut_locus_hits": self.cut_locus_hits,
            "unconverged": self.unconverged,
            "max_row_step": self.max_row_step,
            "max_col_step": self.max_col_step,
            "reasons": self.reasons,
        }


def contract_loop(loop, d, cfg: HomotopyConfig | None = None) -> HomotopyReport:
    """Contract a closed loop in the level set onto its first sample.

    Grid row s holds, for every loop sample, the point at parameter s/S of the
    geodesic from that sample to the basepoint, retracted to the level set.
    Failures are reported, never raised.
    """
    cfg = cfg or HomotopyConfig()
    samples = [np.asarray(P, dtype=complex) for P in (loop.samples if isinstance(loop, ProjectionPath) else loop)]
    d = np.asarray(d, dtype=float)
    S, T = cfg.S, len(samples) - 1
    base = samples[0]
    reasons = []
    if T < 1 or frobenius(samples[0], samples[-1]) > CLOSE_TOL:
        reasons.append("input loop is not closed")
    grid = [[None] * (T + 1) for _ in range(S + 1)]
    crit = cuts = unconv = 0
    for t, P in enumerate(samples):
        grid[0][t] = P
        try:
            point = _geodesic(P, base)
        except CutLocus:
            cuts += 1
            for s in range(1, S + 1):
                grid[s][t] = base if s == S else P
            continue
        for s in range(1, S + 1):
            start = base if s == S else point(s / S)
            Q, trace = retract_to_level(start, d, cfg.flow)
            if trace.outcome is Outcome.CRITICAL:
                crit += 1
            elif trace.outcome is not Outcome.CONVERGED:
                unconv += 1
            grid[s][t] = Q
    level = max(math.sqrt(energy(P, d)) for row in grid for P in row)
    row_step = max(_max_step(row) for row in grid)
    col_step = max(_max_step([grid[s][t] for s in range(S + 1)]) for t in range(T + 1))
    if cuts:
        reasons.append(f"{cuts} loop samples are on the cut locus of the basepoint")
    if crit or unconv:
        reasons.append(f"{crit} critical and {unconv} unconverged retractions")
    if any(frobenius(P, base) > 1e-6 for P in grid[S]):
        reasons.append("last row does not collapse to the basepoint")
    if any(frobenius(row[0], row[-1]) > 1e-6 for row in grid):
        reasons.append("some grid row is not closed")
    if row_step > cfg.step_cap or col_step > cfg.step_cap:
        reasons.append(f"grid step {max(row_step, col_step):.3f} exceeds cap {cfg.step_cap}")
    if level > cfg.path_tol:
        reasons.append(f"level residual {level:.2e} exceeds {cfg.path_tol}")
    return HomotopyReport(grid, not reasons, level, crit, cuts, unconv, row_step, col_step, reasons)


def random_level_loop(d, seed=None, T: int = 32, radius: float = 0.2,
                      flow: FlowConfig | None = None) -> ProjectionPath:
    """Closed loop in the level set: a circle of radius `radius` in a random tangent
    2-plane at a random level point, each sample retracted back to the level set.

    The center is a retracted Haar-random projection, so it is generic; the
    Schur-Horn point can sit on a singular stratum of the level set (for the
    uniform vector it is block diagonal) where the flow converges slowly.
    """
    rng = as_rng(seed)
    d = np.asarray(d, dtype=float)
    k = infer_rank(d)
    for _ in range(10):
        center, trace = retract_to_level(random_projection(len(d), k, rng), d, flow)
        if trace.outcome is Outcome.CONVERGED:
            break
    else:
        raise RetractionHitCriticalStratum("could not find a level point to center the loop on")
    X1 = random_tangent(center, rng)
    X2 = random_tangent(center, rng)
    X2 = X2 - np.real(np.trace(X1 @ X2)) * X1
    X2 /= np.linalg.norm(X2)
    samples = []
    for t in range(T):
        theta = 2 * np.pi * t / T
        start = nearest_projection(center + radius * (np.cos(theta) * X1 + np.sin(theta) * X2), k)
        P, trace = retract_to_level(start, d, flow)
        if trace.outcome is not Outcome.CONVERGED:
            raise RetractionHitCriticalStratum("loop sample did not reach the level set")
        samples.append(P)
    samples.append(samples[0].copy())
    return ProjectionPath(samples, d)


def circle_loop_frames(winding: int = 1, T: int = 64) -> list[np.ndarray]:
    """Frames ``(1/sqrt 2)(1, e^{i w theta})`` for theta on [0, 2 pi], closed."""
    thetas = 2 * np.pi * np.arange(T + 1) / T
    frames = [np.array([[1.0, np.exp(1j * winding * th)]]) / np.sqrt(2) for th in thetas]
    frames[-1] = frames[0].copy()
    return frames


def torus_loop_projections(w2: int, w3: int, T: int = 64) -> list[np.ndarray]:
    """Loop in the level set of (1/3, 1/3, 1/3, 1): ``e_4`` plus the line through
    ``(1/sqrt 3)(1, e^{i w2 theta}, e^{i w3 theta})``."""
    out = []
    for t in range(T + 1):
        th = 2 * np.pi * (t % T) / T
        v = np.array([1.0, np.exp(1j * w2 * th), np.exp(1j * w3 * th), 0.0]) / np.sqrt(3)
        P = np.outer(v, np.conj(v))
        P[3, 3] = 1.0
        out.append(P)
    return out


def _winding(phases_of_ratio) -> int:
    ph = np.asarray(phases_of_ratio, dtype=float)
    steps = np.angle(np.exp(1j * np.diff(ph)))
    if steps.size and np.max(np.abs(steps)) >= np.pi - 1e-12:
        raise UndersampledLoop("a phase step reaches pi; sample the loop more densely")
    total = float(np.sum(steps))
    w = round(total / (2 * np.pi))
    if abs(total - 2 * np.pi * w) > 0.01:
        raise UndersampledLoop(f"unwrapped phase {total:.4f} does not close to a multiple of 2 pi")
    return int(w)


def winding_cp1(frames) -> tuple[int]:
    """Winding number of ``arg(f_2 / f_1)`` along a closed loop of 1 x 2 frames."""
    arr = np.array([np.asarray(F, dtype=complex).reshape(-1) for F in frames])
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("winding_cp1 expects 1 x 2 frames")
    if np.min(np.abs(arr)) < 1e-9:
        raise ZeroEntry("a frame entry vanishes; relative phase undefined")
    return (_winding(np.angle(arr[:, 1] / arr[:, 0])),)


def torus_line(P, tol: float = 1e-8) -> np.ndarray:
    """Unit vector v in C^3 spanning the part of range(P) orthogonal to e_4, v_1 > 0."""
    P = np.asarray(P, dtype=complex)
    e4 = np.zeros(4)
    e4[3] = 1.0
    if P.shape != (4, 4) or np.max(np.abs(P @ e4 - e4)) > tol:
        raise NotInFiber("sample does not contain e_4 in its range")
    w, V = np.linalg.eigh(P[:3, :3])
    v = V[:, -1]
    if abs(v[0]) < 1e-9:
        raise ZeroEntry("first coordinate of the line vanishes")
    return v * (np.conj(v[0]) / abs(v[0]))


def torus_windings(projections, tol: float = 1e-6) -> tuple[int, int]:
    """Windings of ``arg(v_2/v_1)`` and ``arg(v_3/v_1)`` along a loop in the level set
    of (1/3, 1/3, 1/3, 1), which is a 2-torus."""
    vs = np.array([torus_line(P) for P in projections])
    if np.max(np.abs(np.abs(vs) - 1 / np.sqrt(3))) > tol:
        raise NotInFiber("a sample has |v_i| != 1/sqrt(3)")
    return _winding(np.angle(vs[:, 1] / vs[:, 0])), _winding(np.angle(vs[:, 2] / vs[:, 0]))


@dataclass
class FiberReport:
    converged: int
    max_landing_distance: float
    frames_checked: int
    max_right_block: float
    max_unitarity_defect: float
    max_recovery_error: float

    @property
    def passed(self) -> bool:
        return (self.max_landing_distance <= 1e-6 and self.max_right_block <= 1e-9
                and self.max_unitarity_defect <= 1e-9 and self.max_recovery_error <= 1e-10)

    def to_dict(self) -> dict:
        return {**self.__dict__, "passed": self.passed}


def verify_point_fiber(seed=None, trials: int = 50, radius: float = 0.3,
                                flow: FlowConfig | None = None) -> FiberReport:
    """Point fiber over d = (1,1,0,0): retractions land on Diag(1,1,0,0) and every
    frame is ``U [I_2 | 0]`` with U unitary."""
    rng = as_rng(seed)
    flow = flow or FlowConfig(f_tol=1e-30)
    d = np.array([1.0, 1.0, 0.0, 0.0])
    D = np.diag(d).astype(complex)
    converged, dist = 0, 0.0
    for _ in range(trials):
        start = nearest_projection(D + radius * random_hermitian(4, rng), 2)
        P, trace = retract_to_level(start, d, flow)
        if trace.outcome is Outcome.CONVERGED:
            converged += 1
            dist = max(dist, frobenius(P, D))
    right = unit = rec = 0.0
    for _ in range(trials):
        F = construct_frame(d, rng)
        U = F[:, :2]
        right = max(right, float(np.max(np.abs(F[:, 2:]))))
        unit = max(unit, float(np.max(np.abs(U @ dagger(U) - np.eye(2)))))
        U0 = polar_unitary(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        G = U0 @ np.hstack([np.eye(2), np.zeros((2, 2))])
        rec = max(rec, float(np.max(np.abs(G[:, :2] - U0))))
    return FiberReport(converged, dist, trials, right, unit, rec)


# names under which these two checks appear in the command-line interface contract
torus_invariant_ex53 = torus_windings
verify_fiber_structure_ex52 = verify_point_fiber
