"""Run-level configuration shared by the CLI and the batch drivers."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass

from .flow import FlowConfig
from .homotopy import HomotopyConfig

SEED_ENV = "FRAMETOP_SEED"
MAX_SEED = 2**64 - 1


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    return parse_seed(raw)


def parse_seed(raw) -> int:
    seed = int(str(raw).strip(), 0)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {raw}")
    return seed


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tol_alg: float = 1e-9
    tol_poly: float = 1e-9
    f_tol: float = 1e-12
    grad_tol: float = 1e-9
    path_tol: float = 1e-6
    S: int = 32
    T: int = 32
    step_cap: float = 0.5
    out_dir: str = "."
    jobs: int = 1

    def __post_init__(self):
        for name in ("tol_alg", "tol_poly", "f_tol", "grad_tol", "path_tol", "step_cap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.S < 1 or self.T < 1 or self.jobs < 1:
            raise ValueError("grid sizes and jobs must be positive")
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def flow(self, **overrides) -> FlowConfig:
        return FlowConfig(f_tol=self.f_tol, grad_tol=self.grad_tol).replace(**overrides)

    def homotopy(self) -> HomotopyConfig:
        return HomotopyConfig(S=self.S, T=self.T, step_cap=self.step_cap, path_tol=self.path_tol,
                              flow=self.flow())

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("out_dir")
        out.pop("jobs")
        return out
