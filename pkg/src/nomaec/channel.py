"""Rayleigh block-fading channel realisations.

Each block's gains are a pure function of ``(seed, block_index, n_users,
mean_gains)``: draws come from a counter-based generator keyed on the seed and
indexed by the block, so any partition of the block range across workers
reproduces a single-worker run bit for bit.
"""
from dataclasses import dataclass, field

import numpy as np

from . import _accel

#: Blocks are always generated in chunks with these fixed boundaries.
CHUNK_BLOCKS = 1 << 16

#: Philox stream ids; stream 0 is reserved for channel gains.
GAIN_STREAM = 0
PAIRING_STREAM = 1

_U64_MAX = (1 << 64) - 1


@dataclass(frozen=True)
class ChannelModel:
    n_users: int
    mean_gains: tuple = None
    seed: int = 0

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError("channel model needs at least one user")
        means = (1.0,) * self.n_users if self.mean_gains is None else tuple(
            float(m) for m in self.mean_gains)
        if len(means) != self.n_users:
            raise ValueError(
                f"mean_gains has {len(means)} entries for {self.n_users} users")
        if not all(np.isfinite(m) and m > 0 for m in means):
            raise ValueError("mean gains must be positive and finite")
        if not 0 <= int(self.seed) <= _U64_MAX:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "mean_gains", means)
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class ChannelBlock:
    """Per-user channel power gains for one block, ascending (rank = index)."""

    gains: np.ndarray = field(repr=False)
    block_index: int = 0

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=np.float64)
        if g.ndim != 1 or g.size == 0:
            raise ValueError("gains must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("gains must be finite and non-negative")
        if np.any(np.diff(g) < 0):
            raise ValueError("gains must be sorted ascending")
        if self.block_index < 0:
            raise ValueError("block_index must be non-negative")
        g.setflags(write=False)
        object.__setattr__(self, "gains", g)

    @property
    def n_users(self):
        return self.gains.size

    def __repr__(self):
        return f"ChannelBlock(gains={self.gains.tolist()!r}, block_index={self.block_index})"


def sample_blocks(model, start, count):
    """Sorted gains for blocks ``start .. start+count-1`` as a (count, M) array."""
    if start < 0 or count < 0:
        raise ValueError("block range must be non-negative")
    return _accel.exp_gains(model.seed, start, count, model.mean_gains)


def sample_block(model, block_index):
    if block_index < 0:
        raise ValueError("block_index must be non-negative")
    gains = sample_blocks(model, block_index, 1)[0]
    return ChannelBlock(gains, block_index)


def chunk_ranges(n_blocks, chunk=CHUNK_BLOCKS):
    """Fixed (start, count) chunks covering ``range(n_blocks)``."""
    return [(s, min(chunk, n_blocks - s)) for s in range(0, n_blocks, chunk)]
