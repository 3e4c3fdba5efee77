"""Instantaneous achievable rates (b/s/Hz) for OMA, NOMA and NOMA-R.

All functions take gains in ascending rank order. Under uplink SIC the
strongest user is decoded first, so rank ``i`` is interfered by ranks
``0..i-1`` only and rank 0 is interference-free.
"""
import enum
from dataclasses import dataclass, field

import numpy as np

from . import _accel


class Scheme(str, enum.Enum):
    OMA = "OMA"
    NOMA = "NOMA"
    NOMA_R = "NOMA_R"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit power fractions, non-decreasing with user rank, summing to one."""

    fractions: tuple

    def __post_init__(self):
        f = tuple(float(x) for x in self.fractions)
        if not f:
            raise ValueError("power allocation is empty")
        if any(not np.isfinite(x) or x <= 0 for x in f):
            raise ValueError("power fractions must be positive")
        if abs(sum(f) - 1.0) > 1e-12:
            raise ValueError(f"power fractions sum to {sum(f)!r}, expected 1")
        if any(a > b for a, b in zip(f, f[1:])):
            raise ValueError("power fractions must be non-decreasing with rank")
        object.__setattr__(self, "fractions", f)

    def __len__(self):
        return len(self.fractions)

    def as_array(self):
        return np.array(self.fractions, dtype=np.float64)

    @classmethod
    def rank_proportional(cls, m):
        """Fractions proportional to rank+1: the default for full NOMA with M>2."""
        w = np.arange(1, m + 1, dtype=np.float64)
        f = w / w.sum()
        # absorb the normalisation residue in the largest share
        f[-1] = 1.0 - f[:-1].sum()
        return cls(tuple(f))


@dataclass
class RateMatrix:
    rates: np.ndarray
    chosen_scheme: np.ndarray = field(default=None)

    def __post_init__(self):
        self.rates = np.atleast_2d(np.asarray(self.rates, dtype=np.float64))
        if not np.all(np.isfinite(self.rates)) or np.any(self.rates < 0):
            raise ValueError("rates must be finite and non-negative")


def _check(block, powers, rho):
    if block.n_users != len(powers):
        raise ValueError(
            f"block has {block.n_users} users but {len(powers)} power fractions")
    if not rho > 0:
        raise ValueError("rho must be positive")


def noma_rates(block, powers, rho, resource_share=1.0, power_scale=1.0):
    _check(block, powers, rho)
    if not 0 < resource_share <= 1:
        raise ValueError("resource_share must lie in (0, 1]")
    if power_scale < 1:
        raise ValueError("power_scale must be >= 1")
    return _accel.sic_rates(block.gains[None, :], powers.as_array(), rho,
                            resource_share, power_scale)[0]


def oma_rates(block, powers, rho, n_shares):
    """Each user gets 1/n_shares of the resources at n_shares-times power."""
    _check(block, powers, rho)
    if n_shares < 1:
        raise ValueError("n_shares must be >= 1")
    return _accel.oma_rates(block.gains[None, :], powers.as_array(), rho, n_shares)[0]


def nomar_select(block, powers, rho, resource_share=1.0, power_scale=1.0):
    """Pick NOMA or OMA for a group, whichever gives its strongest user more rate.

    Ties go to NOMA. Returns ``(Scheme, rates)`` where rates covers every user
    in the group under the chosen scheme.
    """
    if block.n_users < 2:
        raise ValueError("NOMA-R needs at least two users in the group")
    _check(block, powers, rho)
    n = block.n_users
    g = block.gains[None, :]
    p = powers.as_array()
    r_noma = _accel.sic_rates(g, p, rho, resource_share, power_scale)[0]
    r_oma = _accel.oma_rates(g, p, rho, n, resource_share, power_scale)[0]
    if r_noma[-1] >= r_oma[-1]:
        return Scheme.NOMA, r_noma
    return Scheme.OMA, r_oma


def paired_rates(block, powers_per_pair, rho, plan, scheme):
    """Rates for a block under a pairing plan.

    Each of the G pairs occupies 1/G of the resources at G-times power; inside
    a pair users are superimposed (NOMA) or, for NOMA_R, the pair switches to
    OMA within its own share when that serves its strong member better.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.OMA:
        raise ValueError("paired_rates handles NOMA and NOMA_R only")
    if len(powers_per_pair) != 2:
        raise ValueError("pair power allocation needs exactly two fractions")
    if not rho > 0:
        raise ValueError("rho must be positive")
    plan.validate(block.n_users)
    table = np.array([plan.ordered_groups()], dtype=np.int64)
    pw, ps = powers_per_pair.fractions
    rates, chosen = _accel.paired_rates(block.gains[None, :], np.zeros(1, np.int64),
                                        table, pw, ps, rho, scheme is Scheme.NOMA_R)
    tags = np.where(chosen[0], Scheme.NOMA.value, Scheme.OMA.value)
    return RateMatrix(rates, tags[None, :] if scheme is Scheme.NOMA_R else None)
