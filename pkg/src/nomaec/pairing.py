"""User-pairing plans over rank indices (rank 0 = weakest user in the block)."""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _accel
from .channel import PAIRING_STREAM

MAX_USERS = 10


@dataclass(frozen=True, eq=False)
class PairingPlan:
    """A partition of ranks ``0..M-1`` into pairs.

    Groups keep the order they were built in; equality and hashing use the
    canonical form so two plans describing the same partition compare equal.
    """

    groups: tuple

    def __post_init__(self):
        groups = tuple(tuple(int(u) for u in g) for g in self.groups)
        if any(len(g) != 2 for g in groups):
            raise ValueError("every group must be a pair")
        object.__setattr__(self, "groups", groups)

    @property
    def key(self):
        return tuple(sorted(tuple(sorted(g)) for g in self.groups))

    def __eq__(self, other):
        if not isinstance(other, PairingPlan):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __lt__(self, other):
        return self.key < other.key

    @property
    def n_users(self):
        return 2 * len(self.groups)

    def validate(self, m):
        ranks = sorted(u for g in self.groups for u in g)
        if ranks != list(range(m)):
            raise ValueError(f"plan {self.groups} does not cover ranks 0..{m - 1} exactly once")

    def ordered_groups(self):
        """Groups as (weak, strong) rank tuples."""
        return [tuple(sorted(g)) for g in self.groups]

    def partner_of(self, rank):
        for a, b in self.groups:
            if a == rank:
                return b
            if b == rank:
                return a
        raise KeyError(rank)

    def label(self):
        return " ".join(f"({a},{b})" for a, b in self.groups)


def _check_m(m, limit=None):
    if m <= 0 or m % 2:
        raise ValueError(f"pairing needs an even positive user count, got {m}")
    if limit is not None and m > limit:
        raise ValueError(f"user count {m} exceeds the enumeration limit {limit}")


@lru_cache(maxsize=None)
def _matchings(m):
    def rec(rest):
        if not rest:
            yield ()
            return
        first = rest[0]
        for j in range(1, len(rest)):
            pair = (first, rest[j])
            for tail in rec(rest[1:j] + rest[j + 1:]):
                yield (pair,) + tail

    return tuple(PairingPlan(g) for g in rec(tuple(range(m))))


def enumerate_pairings(m):
    """All perfect matchings of ``m`` ranks in lexicographic (canonical) order."""
    _check_m(m, MAX_USERS)
    return list(_matchings(m))


def optimal_pairing(m):
    """Strongest with weakest, second strongest with second weakest, ..."""
    _check_m(m)
    return PairingPlan(tuple((i, m - 1 - i) for i in range(m // 2)))


def sequential_pairing(m):
    """Users paired in decreasing gain order: (M-1, M-2), (M-3, M-4), ..."""
    _check_m(m)
    return PairingPlan(tuple((m - 1 - 2 * i, m - 2 - 2 * i) for i in range(m // 2)))


def random_plan_indices(m, seed, start, count):
    """Uniform plan index (into ``enumerate_pairings(m)``) for each block."""
    n_plans = len(_matchings(m))
    u = _accel.uniforms(seed, start, count, 1, PAIRING_STREAM)[:, 0]
    # u lies in (0, 1]; map onto 0..n_plans-1
    return np.minimum(np.ceil(u * n_plans).astype(np.int64) - 1, n_plans - 1)


def random_pairing(m, seed):
    _check_m(m, MAX_USERS)
    return _matchings(m)[int(random_plan_indices(m, seed, 0, 1)[0])]


def heuristic_objective(gains, plan, powers_per_pair, rho):
    """Post-SIC SINR of the globally strongest user within its pair."""
    gains = np.asarray(gains, dtype=np.float64)
    m = gains.size
    pw, ps = powers_per_pair.fractions
    n_groups = m // 2
    partner = plan.partner_of(m - 1)
    return ps * gains[m - 1] / (1.0 / (n_groups * rho) + pw * gains[partner])


def nomar_heuristic_pairing(block, powers_per_pair, rho):
    """Plan maximising the strongest user's SINR; ties go to the smallest plan."""
    m = block.n_users
    _check_m(m, MAX_USERS)
    if not rho > 0:
        raise ValueError("rho must be positive")
    plans = _matchings(m)
    idx = heuristic_plan_indices(block.gains[None, :], powers_per_pair, rho)[0]
    return plans[int(idx)]


def plan_table(m):
    """(n_plans, M/2, 2) array of (weak, strong) groups for every matching."""
    return np.array([p.ordered_groups() for p in _matchings(m)], dtype=np.int64)


def plan_index(plan):
    return _matchings(plan.n_users).index(plan)


def heuristic_plan_indices(gains, powers_per_pair, rho):
    gains = np.asarray(gains, dtype=np.float64)
    m = gains.shape[1]
    partners = np.array([p.partner_of(m - 1) for p in _matchings(m)], dtype=np.int64)
    pw, ps = powers_per_pair.fractions
    return _accel.heuristic_choice(gains, partners, pw, ps, rho, m // 2)
