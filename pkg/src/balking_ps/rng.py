"""Counter-based random streams, one per replication.

A uniform variate is a pure function of ``(seed, replication, draw index)``.
Any subset of replications can therefore be simulated in any order, or on
any thread, and still reproduce exactly the same numbers.  The mixing
function is the SplitMix64 finaliser applied to a Weyl sequence.  The
stream key for each replication is itself a mixed hash of the seed and the
replication index.
"""

from __future__ import annotations

import numpy as np

__all__ = ["CounterStreams"]

_MASK = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_WEYL = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_SCALE = 2.0**-53


def _mix(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


class CounterStreams:
    """Deterministic uniforms ``U(seed, rep, draw)`` in the open interval (0, 1)."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK
        self._key = _mix(np.array([self.seed], dtype=np.uint64) + _GOLDEN)[0]

    def stream_keys(self, reps) -> np.ndarray:
        reps = np.asarray(reps, dtype=np.uint64)
        with np.errstate(over="ignore"):
            return _mix(self._key ^ _mix(reps * _GOLDEN + _WEYL))

    def uniform(self, keys: np.ndarray, draw) -> np.ndarray:
        """Uniforms for the given per-replication ``keys`` at draw index ``draw``."""
        draw = np.asarray(draw, dtype=np.uint64)
        with np.errstate(over="ignore"):
            v = _mix(keys + (draw + np.uint64(1)) * _WEYL)
        return ((v >> _S11).astype(np.float64) + 0.5) * _SCALE
