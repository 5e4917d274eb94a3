"""Counter-based random streams.

Each (seed, stream) pair hashes to a 64-bit key; draw ``i`` of that stream
is the SplitMix64 output for state ``key + i * gamma``. Streams cost
nothing to create, which lets the harness give every trial its own stream
and still run whole batches inside one compiled kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_SEED_SALT = 0x243F6A8885A308D3
_STREAM_SALT = 0x13198A2E03707344

_U_GAMMA = np.uint64(GAMMA)
_U_M1 = np.uint64(0xBF58476D1CE4E5B9)
_U_M2 = np.uint64(0x94D049BB133111EB)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)
_U1 = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int) -> int:
    return mix64(mix64(seed ^ _SEED_SALT) + mix64(stream ^ _STREAM_SALT) * GAMMA)


def derive_seed(seed: int, *ids: int) -> int:
    """Child seed for nested experiment loops (instance j, grid point a, ...)."""
    s = seed & MASK64
    for i in ids:
        s = mix64(s + (i + 1) * GAMMA)
    return s


def trial_keys(seed: int, start: int, stop: int) -> np.ndarray:
    """Keys for trials start..stop-1; trial t uses stream seed XOR t."""
    return np.array([stream_key(seed, (seed ^ t) & MASK64) for t in range(start, stop)], dtype=np.uint64)


@numba.njit(cache=True, nogil=True)
def _mix(z):
    z = (z ^ (z >> _U30)) * _U_M1
    z = (z ^ (z >> _U27)) * _U_M2
    return z ^ (z >> _U31)


@numba.njit(cache=True, nogil=True)
def next_uniform(st):
    """Uniform double in [0, 1); st = [key, counter] (uint64), advanced in place."""
    st[1] += _U1
    z = _mix(st[0] + st[1] * _U_GAMMA)
    return (z >> _U11) * _INV53


@numba.njit(cache=True, nogil=True)
def randbelow(st, m):
    return int(next_uniform(st) * m)


@numba.njit(cache=True, nogil=True)
def _fill_uniforms(st, out):
    for i in range(out.size):
        out[i] = next_uniform(st)


@dataclass
class Rng:
    """Deterministic stream; same (seed, stream) gives the same draws."""

    seed: int
    stream: int = 0
    counter: int = 0

    def __post_init__(self):
        for name in ("seed", "stream", "counter"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise TypeError(f"Rng {name} must be an integer, got {v!r}")
            setattr(self, name, int(v) & MASK64)

    @property
    def key(self) -> int:
        return stream_key(self.seed, self.stream)

    def split(self, stream: int) -> "Rng":
        return Rng(self.seed, stream)

    def state(self) -> np.ndarray:
        return np.array([self.key, self.counter], dtype=np.uint64)

    def uniforms(self, k: int) -> np.ndarray:
        st = self.state()
        out = np.empty(k, dtype=np.float64)
        _fill_uniforms(st, out)
        self.counter = int(st[1])
        return out
