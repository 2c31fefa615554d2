"""Counter-based, splittable random streams.

Every logical stream (one random variable of one trial of one experiment) is
addressed by a :class:`StreamId`.  Its 64-bit state is a splitmix64 avalanche
of the master seed and the packed id, and draw ``i`` of the stream is
``mix64(state + (i + 1) * GOLDEN)``.  Because a draw depends only on
``(state, i)``, whole blocks of draws can be produced with numpy and the
result never depends on how work is scheduled across workers.

Normal deviates use the inverse CDF (Wichura's AS241 rational
approximation, ~1e-16 relative accuracy), one uniform per deviate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TWO_NEG_53 = 2.0**-53

DEFAULT_MASTER_SEED = 20240601

# experiment tags
EXP1 = 1
EXP2 = 2
EXP3 = 3

# variable tags
VAR_U = 0
VAR_K = 1
VAR_EPS = 2
VAR_EVENT = 2


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class StreamId:
    experiment_tag: int
    trial_index: int
    variable_tag: int

    def __post_init__(self) -> None:
        if not 0 <= self.experiment_tag < 1 << 8:
            raise ValueError(f"experiment_tag out of range: {self.experiment_tag}")
        if not 0 <= self.variable_tag < 1 << 8:
            raise ValueError(f"variable_tag out of range: {self.variable_tag}")
        if not 0 <= self.trial_index < 1 << 48:
            raise ValueError(f"trial_index out of range: {self.trial_index}")

    def packed(self) -> int:
        return (self.experiment_tag << 56) | (self.variable_tag << 48) | self.trial_index


def _substream_state(master_seed: int, packed: int) -> int:
    # both steps are bijections, so distinct ids (or seeds) never collide
    return mix64(mix64(master_seed + GOLDEN) ^ packed)


def substream_states(master_seed: int, experiment_tag: int, trial_indices, variable_tag: int) -> np.ndarray:
    """Vectorized :func:`derive_substream` states for many trial indices."""
    idx = np.asarray(trial_indices, dtype=np.uint64)
    StreamId(experiment_tag, 0, variable_tag)  # range check on the tags
    if idx.size and int(idx.max()) >= 1 << 48:
        raise ValueError("trial_index out of range")
    head = (experiment_tag << 56) | (variable_tag << 48)
    seed_mix = mix64(master_seed + GOLDEN)
    return mix64_array((idx | np.uint64(head)) ^ np.uint64(seed_mix))


def raw_block(states, n: int, start: int = 0) -> np.ndarray:
    """Raw 64-bit draws ``start .. start+n-1`` for each state.

    ``states`` of shape ``(m,)`` gives an ``(m, n)`` array; a scalar state
    gives shape ``(n,)``.
    """
    states = np.asarray(states, dtype=np.uint64)
    counters = np.arange(start + 1, start + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        steps = counters * np.uint64(GOLDEN)
        z = states[..., None] + steps
    return mix64_array(z)


def raw_to_unit(raw: np.ndarray) -> np.ndarray:
    """Top 53 bits as a double in [0, 1)."""
    return (raw >> np.uint64(11)).astype(np.float64) * _TWO_NEG_53


def raw_to_open_unit(raw: np.ndarray) -> np.ndarray:
    """Top 53 bits as a double in (0, 1), suitable for an inverse CDF."""
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_NEG_53


def uniform_from_raw(raw, lo: float, hi: float) -> np.ndarray:
    if not lo < hi:
        raise ValueError(f"invalid range: lo={lo} must be < hi={hi}")
    out = lo + (hi - lo) * raw_to_unit(raw)
    # rounding of lo + w*u can land on hi
    return np.minimum(out, np.nextafter(hi, lo))


def normal_from_raw(raw, mean: float, sd: float) -> np.ndarray:
    if not sd >= 0:
        raise ValueError(f"sd must be >= 0, got {sd}")
    return mean + sd * norm_ppf(raw_to_open_unit(raw))


# AS241 (PPND16) coefficients
_A = (3.387132872796366608, 133.14166789178437745, 1971.5909503065514427,
      13731.693765509461125, 45921.953931549871457, 67265.770927008700853,
      33430.575583588128105, 2509.0809287301226727)
_B = (1.0, 42.313330701600911252, 687.1870074920579083, 5394.1960214247511077,
      21213.794301586595867, 39307.89580009271061, 28729.085735721942674,
      5226.495278852545925)
_C = (1.42343711074968357734, 4.6303378461565452959, 5.7694972214606914055,
      3.64784832476320460504, 1.27045825245236838258, 0.24178072517745061177,
      0.0227238449892691845833, 7.7454501427834140764e-4)
_D = (1.0, 2.05319162663775882187, 1.6763848301838038494, 0.68976733498510000455,
      0.14810397642748007459, 0.0151986665636164571966, 5.475938084995344946e-4,
      1.05075007164441684324e-9)
_E = (6.6579046435011037772, 5.4637849111641143699, 1.7848265399172913358,
      0.29656057182850489123, 0.026532189526576123093, 0.0012426609473880784386,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 0.59983220655588793769, 0.13692988092273580531, 0.0148753612908506148525,
      7.868691311456132591e-4, 1.8463183175100546818e-5, 1.4215117583164458887e-7,
      2.04426310338993978564e-15)


def _poly(coefs, x):
    acc = np.zeros_like(x) + coefs[-1]
    for c in coefs[-2::-1]:
        acc = acc * x + c
    return acc


def norm_ppf(p) -> np.ndarray:
    """Standard normal quantile for p in (0, 1)."""
    p = np.asarray(p, dtype=np.float64)
    q = p - 0.5
    out = np.empty_like(p)

    central = np.abs(q) <= 0.425
    if central.any():
        qc = q[central]
        r = 0.180625 - qc * qc
        out[central] = qc * _poly(_A, r) / _poly(_B, r)

    tail = ~central
    if tail.any():
        qt = q[tail]
        r = np.where(qt < 0, p[tail], 1.0 - p[tail])
        r = np.sqrt(-np.log(r))
        near = r <= 5.0
        val = np.empty_like(r)
        rn = r[near] - 1.6
        val[near] = _poly(_C, rn) / _poly(_D, rn)
        rf = r[~near] - 5.0
        val[~near] = _poly(_E, rf) / _poly(_F, rf)
        out[tail] = np.where(qt < 0, -val, val)
    return out


class RandomSource:
    """One substream.  Single consumer: do not share across workers."""

    __slots__ = ("state", "counter")

    def __init__(self, state: int, counter: int = 0) -> None:
        self.state = state & MASK64
        self.counter = counter

    def __repr__(self) -> str:
        return f"RandomSource(state={self.state:#018x}, counter={self.counter})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, RandomSource):
            return NotImplemented
        return (self.state, self.counter) == (other.state, other.counter)

    def next_raw(self) -> int:
        self.counter += 1
        return mix64(self.state + self.counter * GOLDEN)

    def take_raw(self, n: int) -> np.ndarray:
        out = raw_block(np.uint64(self.state), n, start=self.counter)
        self.counter += n
        return out

    def next_uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        if not lo < hi:
            raise ValueError(f"invalid range: lo={lo} must be < hi={hi}")
        return float(uniform_from_raw(np.uint64(self.next_raw()), lo, hi))

    def next_normal(self, mean: float = 0.0, sd: float = 1.0) -> float:
        if not sd >= 0:
            raise ValueError(f"sd must be >= 0, got {sd}")
        return float(normal_from_raw(np.uint64(self.next_raw()), mean, sd))

    def uniforms(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """``n`` draws, identical to ``n`` successive :meth:`next_uniform` calls."""
        if not lo < hi:
            raise ValueError(f"invalid range: lo={lo} must be < hi={hi}")
        return uniform_from_raw(self.take_raw(n), lo, hi)

    def normals(self, n: int, mean: float = 0.0, sd: float = 1.0) -> np.ndarray:
        if not sd >= 0:
            raise ValueError(f"sd must be >= 0, got {sd}")
        return normal_from_raw(self.take_raw(n), mean, sd)


def derive_substream(master_seed: int, stream: StreamId) -> RandomSource:
    return RandomSource(_substream_state(master_seed, stream.packed()))


def next_uniform(source: RandomSource, lo: float, hi: float) -> float:
    return source.next_uniform(lo, hi)


def next_normal(source: RandomSource, mean: float, sd: float) -> float:
    return source.next_normal(mean, sd)
