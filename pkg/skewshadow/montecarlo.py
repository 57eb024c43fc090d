"""Monte Carlo estimators for s(N, L) and p(d, N, eps), and phase sweeps.

Sample i always draws from ``derive_stream(seed, i)``, and chunks of samples
reduce to integer success counts, so results do not depend on the number of
worker threads.
"""

import hashlib
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, List, Sequence, Tuple, TypeVar, Union

from scipy.stats import norm

from skewshadow.logging import get_logger
from skewshadow.metrics import get_metrics
from skewshadow.model import ModelParams, NormalizedParams, normalize
from skewshadow.shadow import DEFAULT_STATISTIC_TOL, k_fast, k_naive, upper_bound_d
from skewshadow.utils.exceptions import ParameterError
from skewshadow.walk import derive_stream, sample_noise, sample_walk

logger = get_logger("skewshadow.montecarlo")

SAMPLE_CHUNK = 64
DEFAULT_GUARD = 1e-9

T = TypeVar("T")


@dataclass(frozen=True)
class Estimate:
    """Binomial proportion with its 95% Wilson interval."""

    successes: int
    samples: int
    p_hat: float
    ci_low: float
    ci_high: float
    master_seed: int

    @classmethod
    def from_counts(
        cls, successes: int, samples: int, master_seed: int, confidence: float = 0.95
    ) -> "Estimate":
        low, high = wilson_interval(successes, samples, confidence)
        return cls(
            successes=int(successes),
            samples=int(samples),
            p_hat=successes / samples,
            ci_low=low,
            ci_high=high,
            master_seed=int(master_seed),
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SweepCell:
    """One (n, c) cell: threshold L = n^c, noise d = eps / n^c."""

    n: int
    c: float
    l: float  # noqa: E741
    d: float
    estimate: Estimate

    def to_dict(self) -> Dict[str, Any]:
        data = {"n": self.n, "c": self.c, "L": self.l, "d": self.d}
        data.update(self.estimate.to_dict())
        return data


def wilson_interval(
    successes: int, samples: int, confidence: float = 0.95
) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if samples <= 0:
        return (0.0, 0.0)
    if not 0 < confidence < 1:
        raise ParameterError(
            f"confidence must lie in (0, 1), got {confidence}",
            constraint="0 < confidence < 1",
        )

    z = float(norm.ppf(0.5 + confidence / 2))
    p_hat = successes / samples
    denominator = 1 + z**2 / samples
    center = (p_hat + z**2 / (2 * samples)) / denominator
    spread = (
        z
        * math.sqrt((p_hat * (1 - p_hat) + z**2 / (4 * samples)) / samples)
        / denominator
    )
    low = min(max(0.0, center - spread), p_hat)
    high = max(min(1.0, center + spread), p_hat)
    return (low, high)


def resolve_threads(threads: int) -> int:
    """0 means all available cores."""
    if threads < 0:
        raise ParameterError(
            f"threads must be >= 0, got {threads}", constraint="threads >= 0"
        )
    return threads or (os.cpu_count() or 1)


def chunk_ranges(total: int, size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def run_chunks(
    work: Callable[[Tuple[int, int]], T],
    chunks: Sequence[Tuple[int, int]],
    threads: int,
) -> List[T]:
    """Map ``work`` over chunks, in order, on up to ``threads`` threads."""
    workers = min(resolve_threads(threads), len(chunks))
    if workers <= 1:
        return [work(chunk) for chunk in chunks]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(work, chunks))


def estimate_s(
    params: Union[ModelParams, NormalizedParams],
    n: int,
    l: float,  # noqa: E741
    samples: int,
    seed: int,
    threads: int = 1,
    tol: float = DEFAULT_STATISTIC_TOL,
    guard: float = DEFAULT_GUARD,
) -> Estimate:
    """Estimate s(N, L) = P(K < L) from independent (walk, noise) samples.

    K comes from ``k_fast``; a sample whose K lies within the guard band of L
    is recomputed exactly with ``k_naive`` before the strict comparison. A
    walk whose bound D already lies below L - band counts without either.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}", constraint="n >= 1")
    if samples < 1:
        raise ParameterError(
            f"samples must be >= 1, got {samples}", constraint="samples >= 1"
        )
    if not l >= 0:
        raise ParameterError(f"threshold must be >= 0, got {l}", constraint="L >= 0")

    model = normalize(params)
    band = max(tol, guard) * l if math.isfinite(l) else 0.0
    metrics = get_metrics(enabled=False)

    def count(chunk: Tuple[int, int]) -> Tuple[int, int]:
        successes = 0
        recomputed = 0
        with metrics.track_chunk("s", chunk[1] - chunk[0]):
            for index in range(*chunk):
                stream = derive_stream(seed, index)
                walk = sample_walk(model, n, stream)
                if upper_bound_d(walk) < l - band:
                    successes += 1
                    continue
                pseudo = sample_noise(walk, 1.0, stream)
                k_stat = k_fast(walk, pseudo, tol).k_statistic
                if abs(k_stat - l) <= band:
                    k_stat = k_naive(walk, pseudo).k_statistic
                    recomputed += 1
                successes += k_stat < l
        return successes, recomputed

    results = run_chunks(count, chunk_ranges(samples, SAMPLE_CHUNK), threads)
    successes = sum(s for s, _ in results)
    recomputed = sum(g for _, g in results)
    metrics.record_guard(recomputed)

    estimate = Estimate.from_counts(successes, samples, seed)
    logger.debug(
        "estimate_s done",
        extra={
            "n": n,
            "L": l,
            "samples": samples,
            "successes": successes,
            "guard_recomputations": recomputed,
        },
    )
    return estimate


def estimate_p(
    params: Union[ModelParams, NormalizedParams],
    d: float,
    n: int,
    eps: float,
    samples: int,
    seed: int,
    threads: int = 1,
    tol: float = DEFAULT_STATISTIC_TOL,
    guard: float = DEFAULT_GUARD,
) -> Estimate:
    """p(d, N, eps) = s(N, eps/d); exact orbits (d = 0) are always shadowed."""
    if not (math.isfinite(d) and d >= 0):
        raise ParameterError(f"noise scale must be >= 0, got {d}", constraint="d >= 0")
    if not eps > 0:
        raise ParameterError(f"precision must be > 0, got {eps}", constraint="eps > 0")
    if d == 0:
        return Estimate.from_counts(samples, samples, seed)
    return estimate_s(params, n, eps / d, samples, seed, threads, tol, guard)


def cell_seed(master_seed: int, n: int, c: float, cell_index: int) -> int:
    """64-bit seed of a sweep cell from (seed, n, bits of c, index)."""
    payload = struct.pack(
        "<QqdQ", int(master_seed) & ((1 << 64) - 1), int(n), float(c), int(cell_index)
    )
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def regime(c: float, c0: float) -> str:
    """Limit of p(eps/N^c, N, eps) predicted for exponent c."""
    if c < c0:
        return "vanishing"
    if c > c0:
        return "full"
    return "critical"


def phase_sweep(
    params: Union[ModelParams, NormalizedParams],
    eps: float,
    c_list: Sequence[float],
    n_list: Sequence[int],
    samples: int,
    seed: int,
    threads: int = 1,
    tol: float = DEFAULT_STATISTIC_TOL,
    guard: float = DEFAULT_GUARD,
) -> List[SweepCell]:
    """Grid of estimates in (n-major, c-minor) order, one derived seed per cell."""
    if not c_list or not n_list:
        raise ParameterError(
            "sweep needs at least one c and one n", constraint="non-empty grid"
        )
    if any(not c > 0 for c in c_list):
        raise ParameterError("exponents must be positive", constraint="c > 0")
    if any(n < 1 for n in n_list):
        raise ParameterError("lengths must be >= 1", constraint="n >= 1")
    if not eps > 0:
        raise ParameterError(f"precision must be > 0, got {eps}", constraint="eps > 0")

    cells: List[SweepCell] = []
    index = 0
    for n in n_list:
        for c in c_list:
            threshold = math.exp(c * math.log(n))
            estimate = estimate_s(
                params,
                n,
                threshold,
                samples,
                cell_seed(seed, n, c, index),
                threads,
                tol,
                guard,
            )
            cells.append(
                SweepCell(n=n, c=c, l=threshold, d=eps / threshold, estimate=estimate)
            )
            logger.info(
                "sweep cell done",
                extra={"n": n, "c": c, "L": threshold, "p_hat": estimate.p_hat},
            )
            index += 1
    return cells
