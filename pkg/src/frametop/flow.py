"""Moment map, height functions and the gradient flow of ``f = |mu(P) - d|^2``.

The flow lives on the projection model of the Grassmannian with the trace
metric. Each step moves against the Riemannian gradient and re-retracts onto
the manifold through the top-k eigenspace; Armijo backtracking keeps f
monotone and the trial step grows after every accepted step, which is what
makes the flow reach polytope vertices (where f is quartic) at a useful rate.
"""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .errors import BadPermutation, DimensionMismatch, EigenvalueTie, NotHermitian
from .hermitian import TIE_TOL, TOL_ALG, dagger, nearest_projection, random_hermitian
from .polytope import infer_rank
from .rng import derive_rng


def moment_map(P, tol: float = TOL_ALG) -> np.ndarray:
    """Diagonal of P as a real vector."""
    diag = np.diagonal(np.asarray(P))
    if np.iscomplexobj(diag) and diag.size and np.max(np.abs(diag.imag)) > tol:
        raise NotHermitian("projection has a non-real diagonal")
    return np.real(diag).astype(float)


def _check_len(P, v, what):
    if np.asarray(P).shape[0] != len(v):
        raise DimensionMismatch(f"{what} of length {len(v)} does not match n={np.asarray(P).shape[0]}")


def height(P, a) -> float:
    """``tr(P Diag(a))``."""
    a = np.asarray(a, dtype=float)
    _check_len(P, a, "weight vector")
    return float(a @ moment_map(P))


def energy(P, d) -> float:
    d = np.asarray(d, dtype=float)
    _check_len(P, d, "norm vector")
    r = moment_map(P) - d
    return float(r @ r)


def riemannian_grad_energy(P, d) -> np.ndarray:
    """Tangent projection ``P G (I-P) + (I-P) G P`` of ``G = 2 Diag(mu(P) - d)``."""
    P = np.asarray(P, dtype=complex)
    g = 2.0 * (moment_map(P) - np.asarray(d, dtype=float))
    Q = np.eye(P.shape[0]) - P
    X = (P * g[np.newaxis, :]) @ Q
    return X + dagger(X)


def commutator_with_diag(P, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.asarray(P) * (a[np.newaxis, :] - a[:, np.newaxis])


def is_critical(P, d, tol: float = 1e-6) -> tuple[bool, np.ndarray]:
    """Criticality of f: P commutes with ``Diag(mu(P) - d)``. Returns the shift too."""
    a = moment_map(P) - np.asarray(d, dtype=float)
    comm = commutator_with_diag(P, a)
    return bool(np.max(np.abs(comm)) <= tol if comm.size else True), a


def permutation_matrix(sigma) -> np.ndarray:
    """g with ``g e_j = e_{sigma(j)}`` (0-based images)."""
    sigma = np.asarray(sigma)
    n = len(sigma)
    if sigma.ndim != 1 or sorted(sigma.tolist()) != list(range(n)):
        raise BadPermutation(f"{sigma.tolist()} is not a permutation of 0..{n - 1}")
    g = np.zeros((n, n))
    g[sigma, np.arange(n)] = 1.0
    return g


def reindex(v, sigma) -> np.ndarray:
    """``v^sigma`` with ``(v^sigma)_j = v_{sigma(j)}``."""
    permutation_matrix(sigma)
    return np.asarray(v)[np.asarray(sigma)]


def inverse_permutation(sigma) -> np.ndarray:
    permutation_matrix(sigma)
    return np.argsort(np.asarray(sigma))


def conjugate_by_permutation(P, sigma) -> np.ndarray:
    P = np.asarray(P)
    if len(sigma) != P.shape[0]:
        raise BadPermutation(f"permutation of length {len(sigma)} for n={P.shape[0]}")
    g = permutation_matrix(sigma)
    return g @ P @ g.T


class Outcome(str, enum.Enum):
    CONVERGED = "Converged"
    CRITICAL = "CriticalPointReached"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class FlowConfig:
    step0: float = 0.5
    max_iter: int = 5000
    f_tol: float = 1e-12
    grad_tol: float = 1e-9
    backtrack_factor: float = 0.5
    max_backtracks: int = 60
    armijo_c: float = 1e-4
    step_growth: float = 2.0
    step_max: float = 1e300
    f_crit: float = 1e-10  # below this a vanishing gradient is not called critical
    jitter: float = 1e-10
    jitter_attempts: int = 3

    def __post_init__(self):
        for name in ("step0", "f_tol", "grad_tol", "armijo_c", "step_max", "f_crit", "jitter"):
            if not getattr(self, name) > 0:
                raise ValueError(f"FlowConfig.{name} must be positive")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("FlowConfig.backtrack_factor must lie in (0, 1)")
        if self.max_iter < 1 or self.max_backtracks < 1 or self.step_growth < 1:
            raise ValueError("FlowConfig counts must be positive and step_growth >= 1")

    def replace(self, **changes) -> "FlowConfig":
        return FlowConfig(**{**asdict(self), **changes})


@dataclass
class FlowTrace:
    f: np.ndarray
    grad_norm: np.ndarray
    step: np.ndarray
    outcome: Outcome
    shift: np.ndarray | None = None
    stalled: bool = False
    jitter_retries: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return max(len(self.f) - 1, 0)

    @property
    def final_f(self) -> float:
        return float(self.f[-1])

    def rows(self):
        for i, (fv, g, s) in enumerate(zip(self.f, self.grad_norm, self.step)):
            yield i, float(fv), float(g), float(s)


_STATUS = {
    _kernels.CONVERGED: Outcome.CONVERGED,
    _kernels.CRITICAL: Outcome.CRITICAL,
    _kernels.ITERATION_LIMIT: Outcome.ITERATION_LIMIT,
    _kernels.STALLED: Outcome.ITERATION_LIMIT,
}


def retract_to_level(P0, d, cfg: FlowConfig | None = None) -> tuple[np.ndarray, FlowTrace]:
    """Flow P0 down f until it reaches the level set ``mu^{-1}(d)`` or a critical point.

    Eigenvalue ties in the retraction are retried from a jittered start (a
    random Hermitian perturbation of size ``cfg.jitter``) before surfacing.
    Line-search stalls are reported as ``IterationLimit`` with ``stalled`` set.
    """
    cfg = cfg or FlowConfig()
    P0 = np.asarray(P0, dtype=complex)
    d = np.asarray(d, dtype=float)
    _check_len(P0, d, "norm vector")
    k = infer_rank(np.real(np.trace(P0)))
    start = P0
    for attempt in range(cfg.jitter_attempts + 1):
        P, fs, gs, steps, status = _kernels.retract_flow(
            start, d, k, cfg.step0, cfg.step_max, cfg.step_growth, cfg.armijo_c,
            cfg.backtrack_factor, cfg.max_backtracks, cfg.max_iter, cfg.f_tol,
            cfg.grad_tol, cfg.f_crit, TIE_TOL,
        )
        if status != _kernels.TIE:
            break
        H = random_hermitian(len(d), derive_rng(attempt, "flow-jitter"))
        start = nearest_projection(start + cfg.jitter * H, k)
    else:
        raise EigenvalueTie(f"retraction tied after {cfg.jitter_attempts} jittered retries")
    outcome = _STATUS[status]
    trace = FlowTrace(fs, gs, steps, outcome, stalled=status == _kernels.STALLED, jitter_retries=attempt)
    if outcome is Outcome.CRITICAL:
        trace.shift = moment_map(P) - d
    return P, trace
