"""Critical exponent, large-deviation rate and ruin probabilities of the walk.

The walk has i.i.d. steps a0 or a1 with probability 1/2 each and drift
v = (a0 + a1)/2 > 0. Its exponential moment equation

    Phi(beta) = (exp(-beta a0) + exp(-beta a1)) / 2 - 1 = 0

has the single positive root b, which is the decay rate of the probability of
ever falling below -C, and c0 = 1/b separates the never-shadowable and the
always-shadowable noise exponents.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import root_scalar
from scipy.special import expit
from scipy.stats import binom

from skewshadow.logging import get_logger
from skewshadow.metrics import get_metrics
from skewshadow.model import ModelParams, NormalizedParams, normalize
from skewshadow.montecarlo import Estimate, chunk_ranges, run_chunks
from skewshadow.utils.exceptions import ParameterError, SolverError
from skewshadow.walk import derive_stream

logger = get_logger("skewshadow.asymptotics")

DEFAULT_RUIN_TOL = 1e-12
DEFAULT_RATE_TOL = 1e-12

MAX_DOUBLINGS = 60
RATE_T_SPAN = 60.0
RUIN_CHUNK = 4096
RUIN_BLOCK = 256

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class RuinSolution:
    """Positive root b of Phi with c0 = 1/b and |Phi(b)|."""

    b: float
    c0: float
    residual: float


def _require_drift(params: Union[ModelParams, NormalizedParams]) -> NormalizedParams:
    if isinstance(params, NormalizedParams):
        return params
    if not params.v > 0:
        raise ParameterError(
            f"drift v = {params.v} must be positive; normalize the parameters first",
            constraint="v > 0",
        )
    return NormalizedParams(params=params)


def ruin_function(params: Union[ModelParams, NormalizedParams], beta: float) -> float:
    """Phi(beta), evaluated as expm1 of a log-sum-exp."""
    return math.expm1(float(np.logaddexp(-beta * params.a0, -beta * params.a1)) - _LN2)


def solve_ruin_exponent(
    params: Union[ModelParams, NormalizedParams], tol: float = DEFAULT_RUIN_TOL
) -> RuinSolution:
    """Unique positive root of Phi.

    The upper end of the bracket doubles from beta = 1 until Phi > 0, the
    lower end halves until Phi < 0; bisection then runs to an argument
    tolerance that bounds |Phi(b)| by ``tol``.

    Raises:
        ParameterError: if v <= 0 or tol <= 0.
        SolverError: if no bracket is found or the sign certificate fails.
    """
    model = _require_drift(params)
    if not tol > 0:
        raise ParameterError(
            f"tolerance must be positive, got {tol}", constraint="tol > 0"
        )

    def phi(beta: float) -> float:
        return ruin_function(model, beta)

    hi = 1.0
    doublings = 0
    while phi(hi) <= 0:
        if doublings >= MAX_DOUBLINGS:
            raise SolverError(
                "no sign change of the ruin function below 2**60",
                solver="ruin-bracket",
                iterations=doublings,
            )
        hi *= 2.0
        doublings += 1

    lo = 0.5 * hi
    halvings = 0
    while phi(lo) >= 0:
        if halvings >= MAX_DOUBLINGS:
            raise SolverError(
                "ruin function does not become negative near zero",
                solver="ruin-bracket",
                iterations=halvings,
            )
        lo *= 0.5
        halvings += 1

    # |Phi'| <= max(|a0|, a1) on the bracket's right part
    slope = max(1.0, abs(model.a0), abs(model.a1))
    result = root_scalar(
        phi, bracket=(lo, hi), method="bisect", xtol=tol / slope, maxiter=500
    )
    if not result.converged:
        raise SolverError(
            f"bisection did not converge: {result.flag}",
            solver="ruin-bisect",
            iterations=result.iterations,
        )

    b = float(result.root)
    offset = max(1e-6 * b, 4 * tol)
    if not (phi(b - offset) < 0 < phi(b + offset)):
        raise SolverError(
            f"no sign change of the ruin function around b = {b!r}",
            solver="ruin-certificate",
            iterations=result.iterations,
        )

    solution = RuinSolution(b=b, c0=1.0 / b, residual=abs(phi(b)))
    logger.debug(
        "ruin exponent solved",
        extra={
            "b": solution.b,
            "residual": solution.residual,
            "doublings": doublings,
            "iterations": result.iterations,
        },
    )
    return solution


def critical_exponent(
    params: Union[ModelParams, NormalizedParams], tol: float = DEFAULT_RUIN_TOL
) -> float:
    """c0 = 1/b for the normalized parameters."""
    return solve_ruin_exponent(normalize(params), tol).c0


def hgy_violated(
    params: Union[ModelParams, NormalizedParams], tol: float = DEFAULT_RUIN_TOL
) -> bool:
    """True when c0 > 1, i.e. noise of order 1/N is not enough to shadow."""
    return critical_exponent(params, tol) > 1.0


def cumulant(params: Union[ModelParams, NormalizedParams], t: float) -> float:
    """Lambda(t) = log E exp(t gamma)."""
    return float(np.logaddexp(t * params.a0, t * params.a1)) - _LN2


def cumulant_derivative(
    params: Union[ModelParams, NormalizedParams], t: float
) -> float:
    width = params.a1 - params.a0
    return params.a0 + width * float(expit(t * width))


def _legendre(params: NormalizedParams, x: float, tol: float) -> Tuple[float, float]:
    """(t*, I(x)) for x in [a0, a1]; t* is clamped to +-60/(a1 - a0)."""
    a0 = params.a0
    width = params.a1 - a0
    t_lo, t_hi = -RATE_T_SPAN / width, RATE_T_SPAN / width

    def slope(t: float) -> float:
        return cumulant_derivative(params, t) - x

    if slope(t_lo) >= 0:
        t_star = t_lo
    elif slope(t_hi) <= 0:
        t_star = t_hi
    else:
        result = root_scalar(
            slope, bracket=(t_lo, t_hi), method="bisect", xtol=tol, maxiter=500
        )
        if not result.converged:
            raise SolverError(
                f"rate bisection did not converge: {result.flag}",
                solver="rate-bisect",
                iterations=result.iterations,
            )
        t_star = float(result.root)

    # t x - Lambda(t) with Lambda(t) = t a0 + log(1 + exp(t width)) - log 2
    value = t_star * (x - a0) - float(np.logaddexp(0.0, t_star * width)) + _LN2
    return t_star, max(value, 0.0)


@dataclass(frozen=True)
class RateFunction:
    """h(eps) = I(v - eps) for the left tail of the empirical mean."""

    params: NormalizedParams
    tol: float = DEFAULT_RATE_TOL

    @property
    def max_eps(self) -> float:
        return self.params.v - self.params.a0

    def __call__(self, eps: float) -> float:
        return rate_function(self.params, eps, self.tol)

    def cramer(self, x: float) -> float:
        """I(x); infinite outside [a0, a1]."""
        if not self.params.a0 <= x <= self.params.a1:
            return math.inf
        return _legendre(self.params, x, self.tol)[1]

    def maximizer(self, eps: float) -> float:
        """t* with Lambda'(t*) = v - eps."""
        _check_eps(self.params, eps)
        return _legendre(self.params, self.params.v - eps, self.tol)[0]


def _check_eps(params: NormalizedParams, eps: float) -> None:
    upper = params.v - params.a0
    if not 0 < eps <= upper:
        raise ParameterError(
            f"eps = {eps} outside the admissible interval (0, {upper}]",
            constraint="0 < eps <= v - a0",
        )


def rate_function(
    params: Union[ModelParams, NormalizedParams],
    eps: float,
    tol: float = DEFAULT_RATE_TOL,
) -> float:
    """h(eps) = sup_t [t (v - eps) - Lambda(t)]; ln 2 at eps = v - a0.

    Raises:
        ParameterError: if eps is outside (0, v - a0].
    """
    model = _require_drift(params)
    _check_eps(model, eps)
    return _legendre(model, model.v - eps, tol)[1]


def chernoff_tail(
    params: Union[ModelParams, NormalizedParams], n: int, eps: float
) -> float:
    """Exact P(S_n / n - v < -eps).

    S_n = k a1 + (n - k) a0 with k ~ Binomial(n, 1/2), so the event is
    k < n (v - eps - a0) / (a1 - a0). Bounded above by exp(-n h(eps)).
    """
    model = _require_drift(params)
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}", constraint="n >= 1")
    if not eps > 0:
        raise ParameterError(f"eps must be > 0, got {eps}", constraint="eps > 0")
    threshold = n * (model.v - eps - model.a0) / (model.a1 - model.a0)
    k_max = math.ceil(threshold) - 1
    if k_max < 0:
        return 0.0
    return float(binom.cdf(k_max, n, 0.5))


def tail_probability_mc(
    params: Union[ModelParams, NormalizedParams],
    n: int,
    eps: float,
    samples: int,
    seed: int,
    threads: int = 1,
) -> Estimate:
    """Monte Carlo estimate of P(S_n / n - v < -eps)."""
    model = _require_drift(params)
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}", constraint="n >= 1")
    if samples < 1:
        raise ParameterError(
            f"samples must be >= 1, got {samples}", constraint="samples >= 1"
        )
    level = n * (model.v - eps)
    metrics = get_metrics(enabled=False)
    chunks = chunk_ranges(samples, RUIN_CHUNK)

    def count(chunk: Tuple[int, int]) -> int:
        size = chunk[1] - chunk[0]
        with metrics.track_chunk("tail", size):
            stream = derive_stream(seed, chunk[0] // RUIN_CHUNK)
            ones = stream.bits(size * n).reshape(size, n).sum(axis=1, dtype=np.int64)
            totals = ones * model.a1 + (n - ones) * model.a0
            return int(np.count_nonzero(totals < level))

    successes = sum(run_chunks(count, chunks, threads))
    return Estimate.from_counts(successes, samples, seed)


def default_horizon(params: Union[ModelParams, NormalizedParams], level: float) -> int:
    """ceil(10 C / v + 50 / v) steps."""
    model = _require_drift(params)
    return int(math.ceil(10.0 * level / model.v + 50.0 / model.v))


def ruin_bounds(
    params: Union[ModelParams, NormalizedParams],
    level: float,
    tol: float = DEFAULT_RUIN_TOL,
) -> Tuple[float, float]:
    """exp(-b (C - a0)) <= P(some S_i <= -C) <= exp(-b C).

    exp(-b S_i) is a martingale and the walk undershoots -C by less than |a0|.
    """
    model = _require_drift(params)
    if not level > 0:
        raise ParameterError(f"ruin level must be > 0, got {level}", constraint="C > 0")
    b = solve_ruin_exponent(model, tol).b
    return math.exp(-b * (level - model.a0)), math.exp(-b * level)


def empirical_exponent(p_hat: float, level: float) -> float:
    """-ln(p_hat) / C; NaN when no sample was ruined."""
    if p_hat <= 0:
        return math.nan
    return -math.log(p_hat) / level


def ruin_probability_mc(
    params: Union[ModelParams, NormalizedParams],
    level: float,
    samples: int,
    seed: int,
    horizon: Optional[int] = None,
    threads: int = 1,
) -> Estimate:
    """Monte Carlo estimate of P(S_i <= -C for some i <= horizon).

    Samples are drawn in chunks of ``RUIN_CHUNK``; chunk j uses
    ``derive_stream(seed, j)`` and walks its paths in blocks of
    ``RUIN_BLOCK`` steps, stopping early once every path is ruined.
    """
    model = _require_drift(params)
    if not level > 0:
        raise ParameterError(f"ruin level must be > 0, got {level}", constraint="C > 0")
    if samples < 1:
        raise ParameterError(
            f"samples must be >= 1, got {samples}", constraint="samples >= 1"
        )
    if horizon is None:
        horizon = default_horizon(model, level)
    if horizon < 1:
        raise ParameterError(
            f"horizon must be >= 1, got {horizon}", constraint="horizon >= 1"
        )

    metrics = get_metrics(enabled=False)
    steps = np.array([model.a0, model.a1])

    def count(chunk: Tuple[int, int]) -> int:
        size = chunk[1] - chunk[0]
        with metrics.track_chunk("ruin", size):
            stream = derive_stream(seed, chunk[0] // RUIN_CHUNK)
            position = np.zeros(size)
            ruined = np.zeros(size, dtype=bool)
            for start in range(0, horizon, RUIN_BLOCK):
                width = min(RUIN_BLOCK, horizon - start)
                bits = stream.bits(size * width).reshape(size, width)
                paths = position[:, None] + np.cumsum(steps[bits], axis=1)
                ruined |= paths.min(axis=1) <= -level
                position = paths[:, -1]
                if ruined.all():
                    break
            return int(np.count_nonzero(ruined))

    successes = sum(run_chunks(count, chunk_ranges(samples, RUIN_CHUNK), threads))
    estimate = Estimate.from_counts(successes, samples, seed)
    logger.debug(
        "ruin estimate done",
        extra={
            "C": level,
            "horizon": horizon,
            "samples": samples,
            "p_hat": estimate.p_hat,
        },
    )
    return estimate
