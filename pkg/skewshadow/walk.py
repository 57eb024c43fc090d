"""Driving random walk, pseudotrajectory noise and the z-sequence.

Indexing: S_0 = 0 and S_k = gamma_0 + ... + gamma_{k-1}, so a true fiber
orbit satisfies y_k = exp(S_k) * y_0 exactly. The noise r_k (k = 1..N) is
stored zero-based, ``noise[k - 1] == r_k``.
"""

import math
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from skewshadow.model import ModelParams, NormalizedParams
from skewshadow.utils.exceptions import ParameterError

# Block offsets move once a partial sum or term drifts this far in log-scale
REBASE_THRESHOLD = 300.0
_CANCEL_FLOOR = math.exp(-REBASE_THRESHOLD)
_EXP_LIMIT = 700.0
_MAX_BLOCK = 4096

_SEED_MASK = (1 << 64) - 1


class RandomStream(Protocol):
    """Source of fair bits and Uniform[-1, 1] draws."""

    def bits(self, n: int) -> np.ndarray:
        ...

    def uniform(self, n: int) -> np.ndarray:
        ...


class PhiloxStream:
    """Counter-based stream: Philox keyed by (master seed, sample index)."""

    def __init__(self, master_seed: int, sample_index: int):
        self.master_seed = int(master_seed) & _SEED_MASK
        self.sample_index = int(sample_index)
        seq = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.sample_index,)
        )
        self._generator = np.random.Generator(np.random.Philox(seq))

    def bits(self, n: int) -> np.ndarray:
        return self._generator.integers(0, 2, size=n, dtype=np.int8)

    def uniform(self, n: int) -> np.ndarray:
        return self._generator.uniform(-1.0, 1.0, size=n)


class ScriptedStream:
    """Replays fixed bits and uniforms; raises once a script runs out."""

    def __init__(
        self,
        bits: Optional[Sequence[int]] = None,
        uniforms: Optional[Sequence[float]] = None,
    ):
        self._bits = np.asarray(bits if bits is not None else [], dtype=np.int8)
        self._uniforms = np.asarray(
            uniforms if uniforms is not None else [], dtype=float
        )
        self._bit_pos = 0
        self._uniform_pos = 0

    def bits(self, n: int) -> np.ndarray:
        if self._bit_pos + n > len(self._bits):
            raise ValueError("scripted stream has no more bits")
        out = self._bits[self._bit_pos : self._bit_pos + n]
        self._bit_pos += n
        return out.copy()

    def uniform(self, n: int) -> np.ndarray:
        if self._uniform_pos + n > len(self._uniforms):
            raise ValueError("scripted stream has no more uniforms")
        out = self._uniforms[self._uniform_pos : self._uniform_pos + n]
        self._uniform_pos += n
        return out.copy()


def derive_stream(master_seed: int, sample_index: int) -> PhiloxStream:
    """Stream for one sample; identical for the same pair on any thread count."""
    if sample_index < 0:
        raise ParameterError(
            f"sample_index must be non-negative, got {sample_index}",
            constraint="sample_index >= 0",
        )
    return PhiloxStream(master_seed, sample_index)


@dataclass(frozen=True, eq=False)
class WalkPath:
    """Symbols, increments gamma_0..gamma_{N-1} and prefix sums S_0..S_N."""

    symbols: np.ndarray
    gamma: np.ndarray
    prefix: np.ndarray

    @property
    def length(self) -> int:
        return len(self.gamma)


@dataclass(frozen=True, eq=False)
class ScaledSequence:
    """z_0..z_N stored as z_k = z_pivot + m_k * exp(o_k).

    ``pivot`` is the index of the largest prefix sum. Offsets are shared by
    runs of indices and follow the size of the running partial sum, so
    non-zero mantissas stay well inside [exp(-700), exp(700)]. ``term_signs``
    and ``term_logs`` hold the increments r_k exp(-S_k) as sign and
    log-magnitude.
    """

    mantissas: np.ndarray
    offsets: np.ndarray
    pivot: int
    term_signs: np.ndarray
    term_logs: np.ndarray

    def __len__(self) -> int:
        return len(self.mantissas)

    def value(self, k: int) -> float:
        """z_k summed forward from z_0 = 0; inf once it leaves double range."""
        if k == 0:
            return 0.0
        m, o = _scaled_partial_sums(self.term_signs[:k], self.term_logs[:k])
        return float(_expand(m[-1:], o[-1:])[0])

    def values(self) -> np.ndarray:
        """Plain floats z_0..z_N, each accurate to its own partial-sum scale."""
        m, o = _scaled_partial_sums(self.term_signs, self.term_logs)
        return np.concatenate(([0.0], _expand(m, o)))

    def pivot_deltas(self) -> Tuple[np.ndarray, np.ndarray]:
        """Signs and log-magnitudes of z_k - z_pivot, -inf at the pivot."""
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(self.mantissas)) + self.offsets
        return np.sign(self.mantissas), logs

    def difference(self, k: int, n: int) -> Tuple[float, float]:
        """Sign and log-magnitude of z_n - z_k."""
        signs, logs = self._differences(k, np.array([n]))
        return float(signs[0]), float(logs[0])

    def row_differences(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """Signs and log-magnitudes of z_n - z_k for n = k+1..N."""
        return self._differences(k, np.arange(k + 1, len(self)))

    def _differences(self, k: int, idx: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        mk, ok = float(self.mantissas[k]), float(self.offsets[k])
        mn, on = self.mantissas[idx], self.offsets[idx]
        common = np.maximum(on, ok)
        with np.errstate(under="ignore", divide="ignore"):
            scaled = mn * np.exp(on - common) - mk * np.exp(ok - common)
            logs = np.log(np.abs(scaled)) + common
        return np.sign(scaled), logs


@dataclass(frozen=True, eq=False)
class PseudoOrbit:
    """Noise r_1..r_N in [-1, 1], amplitude d and the derived z-sequence."""

    noise: np.ndarray
    scale: float
    z: ScaledSequence

    @property
    def length(self) -> int:
        return len(self.noise)


def _model(params: Union[ModelParams, NormalizedParams]) -> ModelParams:
    return params.params if isinstance(params, NormalizedParams) else params


def walk_from_symbols(
    params: Union[ModelParams, NormalizedParams], symbols: Sequence[int]
) -> WalkPath:
    """Build the walk for a given bit sequence."""
    model = _model(params)
    bits = np.asarray(symbols, dtype=np.int8)
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ParameterError("symbols must be bits", constraint="symbol in {0, 1}")
    gamma = np.where(bits == 1, model.a1, model.a0).astype(float)
    prefix = np.concatenate(([0.0], np.cumsum(gamma)))
    return WalkPath(symbols=bits, gamma=gamma, prefix=prefix)


def sample_walk(
    params: Union[ModelParams, NormalizedParams], n: int, stream: RandomStream
) -> WalkPath:
    """Draw n fair symbols from the stream and build the walk."""
    if n < 1:
        raise ParameterError(f"walk length must be >= 1, got {n}", constraint="n >= 1")
    return walk_from_symbols(params, stream.bits(n))


def _expand(mantissas: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """mantissa * exp(offset) as plain floats, saturating to +-inf or 0."""
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        direct = mantissas * np.exp(np.clip(offsets, -_EXP_LIMIT, _EXP_LIMIT))
        logged = np.sign(mantissas) * np.exp(np.log(np.abs(mantissas)) + offsets)
    return np.where(np.abs(offsets) <= _EXP_LIMIT, direct, logged)


def _scaled_partial_sums(
    signs: np.ndarray, logs: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Partial sums of signs[i] * exp(logs[i]) as mantissa/offset pairs.

    A block shares one offset: the log-size of its carry or of its first
    term, whichever is larger. It ends before a term that outgrows the offset
    by more than REBASE_THRESHOLD, or right after a partial sum that cancels
    below exp(-REBASE_THRESHOLD); the next block starts from that sum's size.
    """
    n = len(signs)
    mantissas = np.zeros(n)
    offsets = np.zeros(n)
    live = np.flatnonzero(signs != 0)
    carry, carry_offset = 0.0, 0.0
    start = 0
    while start < n:
        head = float(logs[start]) if signs[start] != 0 else -math.inf
        carry_log = -math.inf
        if carry != 0.0:
            carry_log = math.log(abs(carry)) + carry_offset
        offset = max(head, carry_log)
        if offset == -math.inf:
            # nothing accumulated yet: zeros up to the next non-zero term
            nxt = int(np.searchsorted(live, start))
            stop = int(live[nxt]) if nxt < live.size else n
            offsets[start:stop] = carry_offset
            start = stop
            continue

        end = min(n, start + _MAX_BLOCK)
        over = np.flatnonzero(logs[start + 1 : end] > offset + REBASE_THRESHOLD)
        stop = start + 1 + int(over[0]) if over.size else end
        seed = carry * math.exp(carry_offset - offset) if carry != 0.0 else 0.0
        with np.errstate(under="ignore"):
            terms = signs[start:stop] * np.exp(logs[start:stop] - offset)
        block = np.cumsum(np.concatenate(([seed], terms)))[1:]
        low = np.flatnonzero(np.abs(block[:-1]) < _CANCEL_FLOOR)
        if low.size:
            stop = start + int(low[0]) + 1
            block = block[: int(low[0]) + 1]

        mantissas[start:stop] = block
        offsets[start:stop] = offset
        carry, carry_offset = float(block[-1]), offset
        start = stop
    return mantissas, offsets


def compute_z(walk: WalkPath, noise: Sequence[float]) -> ScaledSequence:
    """z_0 = 0, z_k = z_{k-1} + r_k * exp(-S_k), in pivot-relative scaled form."""
    r = np.asarray(noise, dtype=float)
    if len(r) != walk.length:
        raise ParameterError(
            f"noise length {len(r)} does not match walk length {walk.length}",
            constraint="len(noise) == len(gamma)",
        )

    prefix = walk.prefix
    size = walk.length + 1
    pivot = int(np.argmax(prefix))
    term_signs = np.sign(r)
    with np.errstate(divide="ignore"):
        term_logs = np.log(np.abs(r)) - prefix[1:]

    mantissas = np.zeros(size)
    offsets = np.zeros(size)

    # outward from the pivot: forward in time ...
    if pivot < walk.length:
        m, o = _scaled_partial_sums(term_signs[pivot:], term_logs[pivot:])
        mantissas[pivot + 1 :] = m
        offsets[pivot + 1 :] = o
    # ... and backward, z_{i-1} = z_i - r_i * exp(-S_i)
    if pivot > 0:
        m, o = _scaled_partial_sums(
            -term_signs[pivot - 1 :: -1], term_logs[pivot - 1 :: -1]
        )
        mantissas[:pivot] = m[::-1]
        offsets[:pivot] = o[::-1]

    return ScaledSequence(
        mantissas=mantissas,
        offsets=offsets,
        pivot=pivot,
        term_signs=term_signs,
        term_logs=term_logs,
    )


def make_pseudo_orbit(
    walk: WalkPath, noise: Sequence[float], scale: float
) -> PseudoOrbit:
    """Wrap a given noise sequence, checking |r_k| <= 1 and d >= 0."""
    r = np.asarray(noise, dtype=float)
    if not (math.isfinite(scale) and scale >= 0):
        raise ParameterError(
            f"noise scale must be finite and >= 0, got {scale}", constraint="d >= 0"
        )
    if r.size and not (np.all(np.isfinite(r)) and np.max(np.abs(r)) <= 1.0):
        raise ParameterError("noise values must lie in [-1, 1]", constraint="|r| <= 1")
    return PseudoOrbit(noise=r, scale=float(scale), z=compute_z(walk, r))


def sample_noise(walk: WalkPath, d: float, stream: RandomStream) -> PseudoOrbit:
    """Draw r_1..r_N i.i.d. Uniform[-1, 1] and compute z."""
    return make_pseudo_orbit(walk, stream.uniform(walk.length), d)


def fiber_orbit(walk: WalkPath, pseudo: PseudoOrbit, x0: float = 0.0) -> np.ndarray:
    """Fiber pseudo-orbit x_{k+1} = exp(gamma_k) x_k + d r_{k+1}."""
    xs = np.empty(walk.length + 1)
    xs[0] = x0
    multipliers = np.exp(walk.gamma)
    for k in range(walk.length):
        xs[k + 1] = multipliers[k] * xs[k] + pseudo.scale * pseudo.noise[k]
    return xs


def noise_from_fiber(walk: WalkPath, xs: Sequence[float], d: float) -> np.ndarray:
    """Recover r_k = (x_k - exp(gamma_{k-1}) x_{k-1}) / d from a fiber orbit."""
    if not d > 0:
        raise ParameterError(
            f"noise scale must be positive, got {d}", constraint="d > 0"
        )
    x = np.asarray(xs, dtype=float)
    return (x[1:] - np.exp(walk.gamma) * x[:-1]) / d
