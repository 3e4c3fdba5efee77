"""Effective-capacity estimation and the exponential delay-violation bound."""
import math
from dataclasses import dataclass

import numpy as np

from . import _accel

#: Below this |beta| the estimator returns the arithmetic mean (the beta -> 0 limit).
SMALL_BETA = 1e-9
N_BATCHES = 100


@dataclass(frozen=True)
class DelayProfile:
    theta: float
    frame_duration: float = 1.0
    bandwidth: float = 1.0

    def __post_init__(self):
        beta_from_theta(self.theta, self.frame_duration, self.bandwidth)

    @property
    def beta(self):
        return -self.theta * self.frame_duration * self.bandwidth

    @classmethod
    def from_beta(cls, beta):
        if not beta < 0:
            raise ValueError("beta must be negative")
        return cls(theta=-beta)


@dataclass(frozen=True)
class EcEstimate:
    value: float
    std_error: float
    n_samples: int
    beta: float


@dataclass(frozen=True)
class DelayBudget:
    d_max: float
    nonempty_prob: float = 1.0
    target_outage: float = 1e-3

    def __post_init__(self):
        if not math.isfinite(self.d_max) or self.d_max < 0:
            raise ValueError("d_max must be finite and non-negative")
        if not 0.0 <= self.nonempty_prob <= 1.0:
            raise ValueError("nonempty_prob must lie in [0, 1]")
        if not 0.0 < self.target_outage <= 1.0:
            raise ValueError("target_outage must lie in (0, 1]")


def beta_from_theta(theta, frame_duration, bandwidth):
    if not (theta > 0 and frame_duration > 0 and bandwidth > 0):
        raise ValueError("theta, frame duration and bandwidth must all be positive")
    return -theta * frame_duration * bandwidth


def _validate_samples(rate_samples):
    r = np.asarray(rate_samples, dtype=np.float64).ravel()
    if r.size < 2:
        raise ValueError("effective capacity needs at least two rate samples")
    if np.isnan(r).any() or np.isinf(r).any():
        raise ValueError("rate samples must be finite")
    if (r < 0).any():
        raise ValueError("rate samples must be non-negative")
    return r


def effective_capacity(rate_samples, beta, n_batches=N_BATCHES):
    """EC = (1/beta) ln E[exp(beta R)] with a batch-means standard error.

    The mean is taken in the log domain, shifted by beta*min(R) per batch, so
    every exponent is <= 0 and nothing underflows to a zero mean. Batch
    partials are merged into the overall estimate.
    """
    r = _validate_samples(rate_samples)
    value, batch_ec = ec_with_batches(r, beta, n_batches)
    return EcEstimate(value, batch_se(batch_ec), int(r.size), float(beta))


def ec_with_batches(r, beta, n_batches=N_BATCHES):
    """Overall EC plus the per-batch EC values used for the standard error.

    ``r`` is assumed validated. Batches are contiguous and fixed by ``len(r)``.
    """
    beta = float(beta)
    k = min(n_batches, r.size)
    if abs(beta) < SMALL_BETA:
        batch_means = np.array([b.mean() for b in np.array_split(r, k)])
        return float(r.mean()), batch_means
    if beta > 0:
        raise ValueError("beta must be negative")
    mins, sums, counts = _accel.batch_lme(r, beta, k)
    return _merge(mins, sums, counts, beta), mins + np.log(sums / counts) / beta


def _merge(mins, sums, counts, beta):
    m = mins.min()
    total = float(np.sum(sums * np.exp(beta * (mins - m))))
    return float(m + math.log(total / counts.sum()) / beta)


def batch_se(batch_values):
    k = batch_values.size
    if k < 2:
        return 0.0
    return float(np.std(batch_values, ddof=1) / math.sqrt(k))


class EcAccumulator:
    """Streaming EC for one beta; partials from separate workers can be merged.

    Merging is order-insensitive up to floating-point associativity.
    """

    def __init__(self, beta):
        if not beta < 0:
            raise ValueError("beta must be negative")
        self.beta = float(beta)
        self.shift = math.inf
        self.total = 0.0
        self.count = 0

    def update(self, samples):
        r = np.asarray(samples, dtype=np.float64).ravel()
        if r.size == 0:
            return self
        m = float(r.min())
        s = float(np.exp(self.beta * (r - m)).sum())
        return self._absorb(m, s, r.size)

    def merge(self, other):
        if other.count:
            self._absorb(other.shift, other.total, other.count)
        return self

    def _absorb(self, m, s, n):
        if m < self.shift:
            self.total = self.total * math.exp(self.beta * (self.shift - m)) + s if self.count else s
            self.shift = m
        else:
            self.total += s * math.exp(self.beta * (m - self.shift))
        self.count += n
        return self

    @property
    def value(self):
        if self.count == 0:
            raise ValueError("no samples accumulated")
        return self.shift + math.log(self.total / self.count) / self.beta


def delay_violation_bound(theta, ec, budget):
    """Pr{delay > D_max} ~ Pr{q > 0} exp(-theta EC D_max), clamped to [0, 1]."""
    if theta < 0 or ec < 0:
        raise ValueError("theta and ec must be non-negative")
    if not (math.isfinite(theta) and math.isfinite(ec)):
        raise ValueError("theta and ec must be finite")
    p = budget.nonempty_prob * math.exp(-theta * ec * budget.d_max)
    return min(1.0, max(0.0, p))


def required_ec(theta, budget):
    """Smallest EC that keeps the delay-violation bound at the target outage."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    if budget.d_max <= 0:
        raise ValueError("d_max must be positive")
    if budget.target_outage >= budget.nonempty_prob:
        return 0.0
    return math.log(budget.nonempty_prob / budget.target_outage) / (theta * budget.d_max)
