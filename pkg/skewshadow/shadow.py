"""Optimal shadowing radius of a finite fiber pseudo-orbit.

A true orbit is y_k = exp(S_k) y_0, the pseudo-orbit is x_k = d exp(S_k) z_k,
so the best achievable precision is

    d * K,   K = min_c max_k exp(S_k) |c - z_k| = max_{k<n} B(k, n).

``k_naive`` and ``k_fast`` compute K from the z-sequence. ``oracle_radius``
minimizes the shadowing error directly through the fiber recursion and must
stay independent of both.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.special import expit

from skewshadow.logging import get_logger
from skewshadow.utils.exceptions import ConsistencyError, ParameterError
from skewshadow.walk import PseudoOrbit, ScaledSequence, WalkPath

logger = get_logger("skewshadow.shadow")

DEFAULT_STATISTIC_TOL = 1e-10
DEFAULT_ORACLE_TOL = 1e-9

# enough halvings to walk a double from its largest value to zero
_MAX_BISECTION = 2200
_MAX_ORACLE_STEPS = 400


@dataclass(frozen=True)
class ShadowReport:
    """Statistic K with its witness pair, the radius d*K and the bound D."""

    k_statistic: float
    witness: Tuple[int, int]
    radius: float
    optimal_y0: float
    d_bound: float
    scale: float
    oracle_radius: Optional[float] = None
    oracle_y0: Optional[float] = None

    @property
    def agreement(self) -> Optional[bool]:
        if self.oracle_radius is None:
            return None
        return oracle_agrees(self.radius, self.oracle_radius)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["witness"] = list(self.witness)
        return data


def oracle_agrees(
    radius: float, oracle: float, tol: float = DEFAULT_ORACLE_TOL
) -> bool:
    """|oracle - radius| <= tol * max(1, radius)."""
    return abs(oracle - radius) <= tol * max(1.0, abs(radius))


def pairwise_b(walk: WalkPath, z: ScaledSequence, k: int, n: int) -> float:
    """B(k, n) = exp(S_k + S_n) / (exp(S_k) + exp(S_n)) * |z_n - z_k|."""
    if not 0 <= k < n <= walk.length:
        raise ParameterError(
            f"pair ({k}, {n}) outside 0 <= k < n <= {walk.length}",
            constraint="0 <= k < n <= N",
        )
    sign, log_diff = z.difference(k, n)
    if sign == 0:
        return 0.0
    s_k, s_n = float(walk.prefix[k]), float(walk.prefix[n])
    log_prefactor = s_k + s_n - np.logaddexp(s_k, s_n)
    with np.errstate(over="ignore"):
        return float(np.exp(log_prefactor + log_diff))


def upper_bound_d(walk: WalkPath) -> float:
    """D = max_k sum_{i>=k} exp(-(S_i - S_k)), via T_k = exp(-S_k) + T_{k+1}."""
    prefix = walk.prefix
    log_tail = np.logaddexp.accumulate(-prefix[::-1])[::-1]
    with np.errstate(over="ignore"):
        return float(np.exp(np.max(prefix + log_tail)))


def _pair_center(walk: WalkPath, z: ScaledSequence, k: int, n: int) -> float:
    # c with exp(S_k)(c - z_k) = -exp(S_n)(c - z_n)
    sign, log_diff = z.difference(k, n)
    if sign == 0:
        return z.value(k)
    weight = expit(float(walk.prefix[n] - walk.prefix[k]))
    with np.errstate(over="ignore"):
        return z.value(k) + sign * float(np.exp(log_diff)) * float(weight)


def _report(
    walk: WalkPath, pseudo: PseudoOrbit, k_stat: float, witness: Tuple[int, int]
) -> ShadowReport:
    k, n = witness
    center = _pair_center(walk, pseudo.z, k, n) if n > k else 0.0
    return ShadowReport(
        k_statistic=k_stat,
        witness=(k, n),
        radius=pseudo.scale * k_stat,
        optimal_y0=pseudo.scale * center,
        d_bound=upper_bound_d(walk),
        scale=pseudo.scale,
    )


def k_naive(walk: WalkPath, pseudo: PseudoOrbit) -> ShadowReport:
    """Exact max of B(k, n) over all pairs, one vectorized row per k."""
    size = walk.length
    if size == 0:
        return _report(walk, pseudo, 0.0, (0, 0))

    prefix = walk.prefix
    best = -1.0
    witness = (0, 1)
    for k in range(size):
        signs, log_diffs = pseudo.z.row_differences(k)
        s_k = prefix[k]
        s_n = prefix[k + 1 :]
        log_prefactor = s_k + s_n - np.logaddexp(s_k, s_n)
        with np.errstate(over="ignore", invalid="ignore"):
            row = np.where(signs == 0, 0.0, np.exp(log_prefactor + log_diffs))
        j = int(np.argmax(row))
        if row[j] > best:
            best = float(row[j])
            witness = (k, k + 1 + j)

    return _report(walk, pseudo, best, witness)


def _error_frame(walk: WalkPath, z: ScaledSequence) -> Tuple[np.ndarray, np.ndarray]:
    """Log-slopes and intercepts of the errors exp(S_k)(c - z_k) in e.

    With e = exp(S_m)(c - z_m) at the pivot m, the error at k is
    alpha_k e + beta_k with alpha_k = exp(S_k - S_m) <= 1 and
    beta_k = -exp(S_k)(z_k - z_m). The pivot row alone forces |e| <= K, so
    every |beta_k| is at most 2K and stays finite with K.
    """
    signs, log_deltas = z.pivot_deltas()
    log_alpha = walk.prefix - walk.prefix[z.pivot]
    with np.errstate(over="ignore", under="ignore"):
        beta = -signs * np.exp(log_deltas + walk.prefix)
    return log_alpha, beta


def _intervals(
    alpha: np.ndarray, beta: np.ndarray, t: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Per index, the range of e with |alpha_k e + beta_k| <= t."""
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        lower = (-t - beta) / alpha
        upper = (t - beta) / alpha
    flat = alpha == 0.0
    if np.any(flat):
        inside = np.abs(beta[flat]) <= t
        lower[flat] = np.where(inside, -np.inf, np.inf)
        upper[flat] = np.where(inside, np.inf, -np.inf)
    return lower, upper


def _feasible(alpha: np.ndarray, beta: np.ndarray, t: float) -> bool:
    lower, upper = _intervals(alpha, beta, t)
    return float(np.max(lower)) <= float(np.min(upper))


def _pairs_through(log_alpha: np.ndarray, beta: np.ndarray, a: int) -> np.ndarray:
    """B(a, j) = |beta_a alpha_j - beta_j alpha_a| / (alpha_a + alpha_j)."""
    top = np.maximum(log_alpha, log_alpha[a])
    with np.errstate(under="ignore"):
        own = np.exp(log_alpha[a] - top)
        other = np.exp(log_alpha - top)
    values = np.abs(beta[a] * other - beta * own) / (own + other)
    values[a] = 0.0
    return values


def k_fast(
    walk: WalkPath, pseudo: PseudoOrbit, tol: float = DEFAULT_STATISTIC_TOL
) -> ShadowReport:
    """K by bisection on t: the intervals |alpha_k e + beta_k| <= t intersect.

    This is max(z - t e^{-S}) <= min(z + t e^{-S}) written in the pivot's
    error frame, where no term leaves double range while K does not. Each
    step is O(N). At the end the lower-envelope index a and the
    upper-envelope index b are read off at the feasible end of the bracket
    and K is taken as the largest pair value through a or b.
    """
    if not tol > 0:
        raise ParameterError(
            f"tolerance must be positive, got {tol}", constraint="tol > 0"
        )
    size = walk.length
    if size == 0:
        return _report(walk, pseudo, 0.0, (0, 0))

    log_alpha, beta = _error_frame(walk, pseudo.z)
    with np.errstate(under="ignore"):
        alpha = np.exp(log_alpha)

    # F at e = 0 is an upper bound
    hi = float(np.max(np.abs(beta)))
    if hi == 0.0:
        return _report(walk, pseudo, 0.0, (0, 1))
    if not math.isfinite(hi):
        logger.debug("k_fast out of double range", extra={"n": size})
        return k_naive(walk, pseudo)

    lo = 0.0
    steps = 0
    while hi - lo > tol * hi and steps < _MAX_BISECTION:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _feasible(alpha, beta, mid):
            hi = mid
        else:
            lo = mid
        steps += 1

    lower, upper = _intervals(alpha, beta, hi)
    a = int(np.argmax(lower))
    b = int(np.argmin(upper))
    row_a = _pairs_through(log_alpha, beta, a)
    row_b = _pairs_through(log_alpha, beta, b)
    ja, jb = int(np.argmax(row_a)), int(np.argmax(row_b))
    pair_a = (min(a, ja), max(a, ja))
    pair_b = (min(b, jb), max(b, jb))
    if row_a[ja] > row_b[jb] or (row_a[ja] == row_b[jb] and pair_a <= pair_b):
        best, witness = float(row_a[ja]), pair_a
    else:
        best, witness = float(row_b[jb]), pair_b

    if best < lo or witness[0] == witness[1]:
        best = hi
        if witness[0] == witness[1]:
            witness = (min(a, b), max(a, b)) if a != b else (0, 1)

    logger.debug(
        "k_fast converged",
        extra={
            "n": size,
            "steps": steps,
            "k_statistic": best,
            "witness": list(witness),
        },
    )
    return _report(walk, pseudo, best, witness)


def oracle_radius(
    walk: WalkPath, pseudo: PseudoOrbit, tol: float = DEFAULT_ORACLE_TOL
) -> Tuple[float, float]:
    """Directly minimize F(y_0) = max_k |y_k - x_k| over true fiber orbits.

    The orbit is parametrized by its error e = (y_m - x_m)/d at the index m of
    the largest prefix sum, so every error e_k = alpha_k e + beta_k has slope
    alpha_k = exp(S_k - S_m) <= 1 and F is minimized by derivative-sign
    bisection on [-F(0), F(0)]. Returns (radius, y_0).
    """
    size = walk.length
    d = pseudo.scale
    if size == 0:
        return 0.0, 0.0

    prefix = walk.prefix
    gamma = walk.gamma
    noise = pseudo.noise
    anchor = int(np.argmax(prefix))
    with np.errstate(under="ignore"):
        slopes = np.exp(prefix - prefix[anchor])

    # errors of the orbit through x_anchor, in units of d
    intercepts = np.zeros(size + 1)
    for k in range(anchor, size):
        intercepts[k + 1] = math.exp(gamma[k]) * intercepts[k] - noise[k]
    for k in range(anchor - 1, -1, -1):
        intercepts[k] = math.exp(-gamma[k]) * (intercepts[k + 1] + noise[k])

    def worst(e: float) -> Tuple[float, int]:
        errors = np.abs(slopes * e + intercepts)
        j = int(np.argmax(errors))
        return float(errors[j]), j

    half_width, _ = worst(0.0)
    if half_width == 0.0:
        return 0.0, d * float(intercepts[0])

    lo, hi = -half_width, half_width
    best_e, best_f = 0.0, half_width
    for _ in range(_MAX_ORACLE_STEPS):
        mid = 0.5 * (lo + hi)
        value, j = worst(mid)
        if value < best_f:
            best_e, best_f = mid, value
        if hi - lo <= 0.25 * tol * max(value, np.finfo(float).tiny):
            break
        if slopes[j] * mid + intercepts[j] > 0:
            hi = mid
        else:
            lo = mid

    return d * best_f, d * float(slopes[0] * best_e + intercepts[0])


def shadow_report(
    walk: WalkPath,
    pseudo: PseudoOrbit,
    statistic_tol: float = DEFAULT_STATISTIC_TOL,
    oracle_tol: float = DEFAULT_ORACLE_TOL,
    check: bool = True,
) -> ShadowReport:
    """k_fast with the oracle radius attached.

    Raises:
        ConsistencyError: if ``check`` and oracle and d*K disagree.
    """
    report = k_fast(walk, pseudo, statistic_tol)
    radius, y0 = oracle_radius(walk, pseudo, oracle_tol)
    report = ShadowReport(
        k_statistic=report.k_statistic,
        witness=report.witness,
        radius=report.radius,
        optimal_y0=report.optimal_y0,
        d_bound=report.d_bound,
        scale=report.scale,
        oracle_radius=radius,
        oracle_y0=y0,
    )
    if check and not oracle_agrees(report.radius, radius, oracle_tol):
        raise ConsistencyError(
            f"oracle radius {radius!r} disagrees with d*K = {report.radius!r}",
            statistic=report.radius,
            oracle=radius,
        )
    return report
