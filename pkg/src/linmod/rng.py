"""Seeded, counter-based random streams.

Uniforms come from numpy's Philox4x64-10 bit generator keyed by a
``SeedSequence``; substreams are derived through the sequence's spawn key, so
``RngStream(seed, stream=i)`` is reproducible without touching the parent.
Normals use the Box-Muller transform and gammas use Marsaglia-Tsang.
"""
import math

import numpy as np

from .errors import ValidationError

ALGORITHM = "philox4x64-10/box-muller/marsaglia-tsang"


class RngStream:
    """Reproducible random stream: identical ``(seed, stream)`` give identical draws."""

    algorithm = ALGORITHM

    def __init__(self, seed: int, stream: int = 0, _parent_key=()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValidationError(f"seed must fit in 64 unsigned bits, got {seed}")
        self.seed = seed
        self.stream = int(stream)
        self._key = tuple(_parent_key) + (self.stream,)
        ss = np.random.SeedSequence(seed, spawn_key=self._key)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, key={self._key})"

    def spawn(self, stream: int) -> "RngStream":
        """Child stream keyed by ``stream``; it does not advance this stream."""
        return RngStream(self.seed, stream, _parent_key=self._key)

    def uniform(self, size=None):
        """Draws on the open interval (0, 1)."""
        return 1.0 - self._gen.random(size)

    def integers(self, low, high=None, size=None):
        """Integers in ``[low, high)``; a single argument means ``[0, low)``."""
        if high is None:
            low, high = 0, low
        return self._gen.integers(low, high, size=size)

    def permutation(self, n):
        return self._gen.permutation(n)

    def normal(self, size=None):
        """Standard normals by Box-Muller, consuming uniforms in pairs."""
        count = 1 if size is None else int(np.prod(size))
        pairs = (count + 1) // 2
        u = self.uniform(2 * pairs)
        rad = np.sqrt(-2.0 * np.log(u[:pairs]))
        ang = 2.0 * math.pi * u[pairs:]
        z = np.concatenate([rad * np.cos(ang), rad * np.sin(ang)])[:count]
        return float(z[0]) if size is None else z.reshape(size)

    def gamma(self, shape, rate=1.0, size=None):
        """Gamma(shape, rate) draws with mean ``shape / rate``."""
        if not (shape > 0 and rate > 0):
            raise ValidationError(f"gamma needs shape > 0 and rate > 0, got ({shape}, {rate})")
        count = 1 if size is None else int(np.prod(size))
        boost = shape < 1.0
        a = shape + 1.0 if boost else shape
        d = a - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        out = np.empty(count)
        filled = 0
        while filled < count:
            need = count - filled
            m = max(8, int(need * 1.1) + 4)
            x = self.normal(m)
            u = self.uniform(m)
            v = (1.0 + c * x) ** 3
            ok = v > 0
            with np.errstate(invalid="ignore", divide="ignore"):
                accept = ok & (np.log(u) < 0.5 * x * x + d - d * v + d * np.log(np.where(ok, v, 1.0)))
            got = (d * v)[accept][:need]
            out[filled:filled + got.size] = got
            filled += got.size
        if boost:
            out *= self.uniform(count) ** (1.0 / shape)
        out /= rate
        return float(out[0]) if size is None else out.reshape(size)
