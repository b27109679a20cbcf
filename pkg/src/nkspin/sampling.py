"""Seeded point generation on the 3-sphere and Monte Carlo reduction.

Points are a pure function of (seed, index): each index owns a disjoint
counter range of a Philox stream, so parallel generation is race-free and
the result never depends on thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import DomainError
from .quat import UnitQuat

DEFAULT_FD_STEP = 1e-4
CONSTANT_INTEGRAND_TOL = 1e-10


def thread_count() -> int:
    env = os.environ.get("NKSPIN_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            raise DomainError(f"NKSPIN_THREADS must be an integer, got {env!r}")
        if n >= 1:
            return n
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Order-preserving map; output is independent of NKSPIN_THREADS."""
    n = thread_count()
    if n <= 1 or len(items) < 256:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * n))))


def point_at(seed: int, index: int) -> UnitQuat:
    """The index-th point of the stream: 4 normals, normalized."""
    for retry in range(16):
        counter = (int(index) << 64) + (retry << 32)
        gen = np.random.Generator(np.random.Philox(key=int(seed), counter=counter))
        v = gen.standard_normal(4)
        n = float(np.linalg.norm(v))
        if n > 1e-6:
            return UnitQuat(v[0], v[1], v[2], v[3])
    raise DomainError("could not draw a usable Gaussian 4-vector")  # pragma: no cover


@dataclass(frozen=True)
class SampleSet:
    """Deterministic batch of sphere points plus the FD step to use on them."""

    seed: int
    n: int
    points: tuple[UnitQuat, ...]
    h: float = DEFAULT_FD_STEP

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[UnitQuat]:
        return iter(self.points)

    def __getitem__(self, i: int) -> UnitQuat:
        return self.points[i]


def uniform_s3(seed: int, n: int, h: float = DEFAULT_FD_STEP) -> SampleSet:
    if n < 1:
        raise DomainError("sample count must be at least 1")
    pts = tuple(parallel_map(lambda i: point_at(seed, i), range(n)))
    return SampleSet(seed=seed, n=n, points=pts, h=h)


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    standard_error: float
    n: int


def estimate_values(values: np.ndarray,
                    const_tol: float | None = CONSTANT_INTEGRAND_TOL) -> MCEstimate:
    """Mean and standard error of precomputed values (pairwise reduction).

    Values constant across samples (within const_tol) short-circuit to the
    exact common value with zero standard error.
    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    if const_tol is not None and n >= 1:
        if float(values.max() - values.min()) <= const_tol:
            return MCEstimate(mean=float(values[0]), standard_error=0.0, n=n)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return MCEstimate(mean=mean, standard_error=se, n=n)


def mc_integrate(f: Callable[[UnitQuat], float], samples: SampleSet,
                 const_tol: float | None = CONSTANT_INTEGRAND_TOL) -> MCEstimate:
    """Mean of f over the samples, with its standard error.

    The points are uniform on the unit sphere, so the mean is already the
    ratio to the total volume; no 2 pi^2 factor appears anywhere.
    """
    values = np.array(parallel_map(f, samples.points), dtype=float)
    if not np.all(np.isfinite(values)):
        i = int(np.flatnonzero(~np.isfinite(values))[0])
        raise DomainError(f"integrand is not finite at sample {i}: {samples[i]}")
    return estimate_values(values, const_tol)
