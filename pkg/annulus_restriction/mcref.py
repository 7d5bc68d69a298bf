"""
Monte Carlo reference for b = 1: Brownian paths started just inside the unit circle at e^{ix},
kept when they leave the disk close to 1, counted when they never come within q of the origin.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from annulus_restriction.errors import DomainError, InsufficientAcceptance, StepBudgetExceeded
from annulus_restriction.util import worker_count

logger = logging.getLogger(__name__)

MAX_OFFSET = 0.1
MAX_STEPS = 10**8
MIN_ACCEPTED = 100
CHUNK_SIZE = 4096


@dataclass(frozen=True)
class McConfig:
    q: float
    x: float
    n_samples: int
    seed: int
    launch_offset: float = 0.1
    target_arc: float = 0.1
    step: Optional[float] = None
    chunk_size: int = CHUNK_SIZE
    max_steps: int = MAX_STEPS
    min_accepted: int = MIN_ACCEPTED

    def __post_init__(self):
        if not 0.0 <= self.q < 1.0:
            raise DomainError(f"inner radius must lie in [0, 1), got q={self.q}")
        if not 0.0 < self.x < 2.0 * np.pi:
            raise DomainError(f"start angle must lie in (0, 2pi), got x={self.x}")
        if self.n_samples < 1:
            raise DomainError(f"n_samples must be positive, got {self.n_samples}")
        for name in ("launch_offset", "target_arc"):
            value = getattr(self, name)
            if not 0.0 < value <= MAX_OFFSET:
                raise DomainError(f"{name} must lie in (0, {MAX_OFFSET}], got {value}")
        if self.step is not None and not 0.0 < self.step <= self.launch_offset**2 / 10.0 * (1 + 1e-12):
            raise DomainError(f"step must lie in (0, launch_offset^2/10], got {self.step}")
        if self.chunk_size < 1:
            raise DomainError(f"chunk_size must be positive, got {self.chunk_size}")

    @property
    def dt(self) -> float:
        return self.step if self.step is not None else self.launch_offset**2 / 10.0

    @property
    def start(self) -> complex:
        return (1.0 - self.launch_offset) * complex(np.exp(1j * self.x))


@dataclass(frozen=True)
class Excursion:
    accepted: bool
    avoided: bool


@dataclass(frozen=True)
class McEstimate:
    n_samples: int
    n_accepted: int
    n_avoid: int
    seed: int

    @property
    def p_hat(self) -> float:
        return self.n_avoid / self.n_accepted if self.n_accepted else float("nan")

    @property
    def ci_halfwidth(self) -> float:
        """3 sigma, normal approximation"""
        p = self.p_hat
        return 3.0 * math.sqrt(p * (1.0 - p) / self.n_accepted)


def segment_origin_distance(z0, z1):
    """Distance from 0 to the segment [z0, z1]; works elementwise on arrays."""
    d = z1 - z0
    length_sq = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(length_sq > 0, -np.real(np.conj(d) * z0) / length_sq, 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(z0 + t * d)


def boundary_crossing(z0, z1):
    """Point where the step z0 -> z1 leaves the unit disk (|z0| < 1 <= |z1|)."""
    d = z1 - z0
    a = np.abs(d) ** 2
    half_b = np.real(np.conj(z0) * d)
    c = np.abs(z0) ** 2 - 1.0
    t = (-half_b + np.sqrt(half_b * half_b - a * c)) / a
    return z0 + t * d


def sample_excursion(cfg: McConfig, rng: np.random.Generator) -> Excursion:
    """One path, stepped one increment at a time."""
    scale = math.sqrt(cfg.dt)
    z = cfg.start
    avoided = True
    for _ in range(cfg.max_steps):
        dx, dy = rng.normal(scale=scale, size=2)
        nxt = z + complex(dx, dy)
        if avoided and cfg.q > 0 and segment_origin_distance(z, nxt) <= cfg.q:
            avoided = False
        if abs(nxt) >= 1.0:
            exit_point = boundary_crossing(z, nxt)
            return Excursion(accepted=abs(np.angle(exit_point)) <= cfg.target_arc, avoided=avoided)
        z = nxt
    raise StepBudgetExceeded(f"path did not leave the disk within {cfg.max_steps} steps (dt={cfg.dt})")


def sample_excursions(cfg: McConfig, rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """n paths advanced together; returns (accepted, avoided) boolean arrays."""
    scale = math.sqrt(cfg.dt)
    position = np.full(n, cfg.start, dtype=complex)
    exit_point = np.zeros(n, dtype=complex)
    hit = np.zeros(n, dtype=bool)
    active = np.arange(n)

    steps = 0
    while active.size:
        steps += 1
        if steps > cfg.max_steps:
            raise StepBudgetExceeded(f"{active.size} paths still inside after {cfg.max_steps} steps (dt={cfg.dt})")
        increments = rng.normal(scale=scale, size=(2, active.size))
        z0 = position[active]
        z1 = z0 + (increments[0] + 1j * increments[1])
        if cfg.q > 0:
            hit[active] |= segment_origin_distance(z0, z1) <= cfg.q
        out = np.abs(z1) >= 1.0
        exit_point[active[out]] = boundary_crossing(z0[out], z1[out])
        position[active] = z1
        active = active[~out]

    accepted = np.abs(np.angle(exit_point)) <= cfg.target_arc
    return accepted, ~hit


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based substream for one chunk; independent of how chunks are spread over workers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _run_chunk(cfg: McConfig, chunk: int, size: int) -> Tuple[int, int]:
    accepted, avoided = sample_excursions(cfg, chunk_rng(cfg.seed, chunk), size)
    return int(accepted.sum()), int((accepted & avoided).sum())


def estimate_avoidance(cfg: McConfig, threads: Optional[int] = None) -> McEstimate:
    n_chunks = -(-cfg.n_samples // cfg.chunk_size)
    sizes = [min(cfg.chunk_size, cfg.n_samples - i * cfg.chunk_size) for i in range(n_chunks)]
    threads = threads or worker_count()
    logger.info(f"Sampling {cfg.n_samples} paths in {n_chunks} chunks on {threads} threads (seed={cfg.seed})")

    with ThreadPoolExecutor(max_workers=min(threads, n_chunks)) as executor:
        counts = list(executor.map(lambda item: _run_chunk(cfg, *item), enumerate(sizes)))

    n_accepted = sum(c[0] for c in counts)
    n_avoid = sum(c[1] for c in counts)
    if n_accepted < cfg.min_accepted:
        raise InsufficientAcceptance(
            f"only {n_accepted} of {cfg.n_samples} paths exited within {cfg.target_arc} of 1; "
            f"need {cfg.min_accepted}"
        )
    estimate = McEstimate(n_samples=cfg.n_samples, n_accepted=n_accepted, n_avoid=n_avoid, seed=cfg.seed)
    logger.info(f"Accepted {n_accepted}, avoided {n_avoid}, p_hat={estimate.p_hat:.6g}")
    return estimate
