"""Counter-based random streams used for sampling and restart initialisation.

The generator is SplitMix64 evaluated on a counter: draw ``i`` of a stream
with seed ``s`` is ``mix(s + (i + 1) * 0x9E3779B97F4A7C15 mod 2**64)`` with
the standard SplitMix64 finaliser (shifts 30/27/31, multipliers
0xBF58476D1CE4E5B9 and 0x94D049BB133111EB).  Doubles take the top 53 bits
and are offset by half an ulp so they lie strictly inside (0, 1).

Normals come from Box-Muller (cosine branch first, then sine branch, per
pair of uniforms) and gamma variates from Marsaglia-Tsang rejection with the
``U**(1/shape)`` boost for shape < 1.  Everything is a plain function of
(seed, counter), so streams can be regenerated in any language.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def splitmix64(counters, seed):
    z = (np.uint64(seed & _MASK64) + (counters + np.uint64(1)) * _GOLDEN).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


class CounterRng:
    """Deterministic stream of uniforms, normals and gamma variates."""

    def __init__(self, seed):
        self.seed = int(seed) & _MASK64
        self.counter = 0

    def uniform(self, size):
        idx = np.arange(self.counter, self.counter + size, dtype=np.uint64)
        self.counter += size
        bits = splitmix64(idx, self.seed) >> np.uint64(11)
        return (bits.astype(np.float64) + 0.5) * 2.0**-53

    def normal(self, size):
        pairs = (size + 1) // 2
        u = self.uniform(2 * pairs)
        r = np.sqrt(-2.0 * np.log(u[0::2]))
        theta = 2.0 * np.pi * u[1::2]
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:size]

    def gamma(self, shape, size):
        """Gamma(shape, scale=1) variates."""
        if shape <= 0:
            raise ValueError("shape must be positive")
        boost = shape < 1.0
        a = shape + 1.0 if boost else shape
        d = a - 1.0 / 3.0
        cc = 1.0 / np.sqrt(9.0 * d)
        out = np.empty(size)
        filled = 0
        while filled < size:
            need = size - filled
            batch = int(need * 1.1) + 16
            x = self.normal(batch)
            u = self.uniform(batch)
            v = (1.0 + cc * x) ** 3
            ok = v > 0
            with np.errstate(invalid="ignore", divide="ignore"):
                accept = ok & (np.log(u) < 0.5 * x * x + d - d * v + d * np.log(np.where(ok, v, 1.0)))
            g = (d * v)[accept][:need]
            out[filled:filled + g.size] = g
            filled += g.size
        if boost:
            out *= self.uniform(size) ** (1.0 / shape)
        return out
