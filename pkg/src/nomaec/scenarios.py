"""End-to-end sweeps: channel blocks -> per-scheme rates -> ECs -> comparison rows.

Every scheme and pairing strategy is evaluated on the same channel blocks
(common random numbers), so orderings that hold block by block also hold
exactly for the estimated ECs.
"""
import dataclasses
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .channel import ChannelModel, chunk_ranges, sample_blocks
from .ec_engine import SMALL_BETA, batch_se, ec_with_batches
from .pairing import (MAX_USERS, optimal_pairing, plan_index, plan_table,
                      random_plan_indices, sequential_pairing, heuristic_plan_indices)
from .ratelaw import PowerAllocation, Scheme

SCHEMES = ("oma", "noma_full", "noma_paired", "nomar_paired")
PAIRINGS = ("optimal", "sequential", "random", "heuristic")

DEFAULT_SNR_DB = tuple(float(x) for x in range(0, 41, 2))
DEFAULT_BETAS = (-0.1, -0.5, -1.0, -2.0, -5.0, -10.0)
DEFAULT_BLOCKS = 10 ** 6
MIN_BLOCKS = 10 ** 3
DEFAULT_PAIR_POWERS = (0.2, 0.8)

# CSV labels
_SCHEME_LABEL = {"oma": Scheme.OMA.value, "noma_full": Scheme.NOMA.value,
                 "noma_paired": Scheme.NOMA.value, "nomar_paired": Scheme.NOMA_R.value}


@dataclass(frozen=True)
class ScenarioConfig:
    channel: ChannelModel
    powers_per_pair: PowerAllocation = PowerAllocation(DEFAULT_PAIR_POWERS)
    snr_db_grid: tuple = DEFAULT_SNR_DB
    beta_grid: tuple = ((-5.0, -5.0),)
    schemes: tuple = ("oma", "noma_full")
    pairings: tuple = ("optimal",)
    n_blocks: int = DEFAULT_BLOCKS
    full_powers: PowerAllocation = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "snr_db_grid", tuple(float(x) for x in self.snr_db_grid))
        set_(self, "beta_grid", tuple((float(w), float(s)) for w, s in self.beta_grid))
        set_(self, "schemes", tuple(self.schemes))
        set_(self, "pairings", tuple(self.pairings))
        m = self.channel.n_users
        if self.full_powers is None:
            full = self.powers_per_pair if m == 2 else PowerAllocation.rank_proportional(m)
            set_(self, "full_powers", full)
        if self.n_blocks < MIN_BLOCKS:
            raise ValueError(f"n_blocks must be at least {MIN_BLOCKS}")
        if not self.snr_db_grid or not all(math.isfinite(x) for x in self.snr_db_grid):
            raise ValueError("SNR grid must be non-empty and finite")
        if not self.beta_grid:
            raise ValueError("beta grid must be non-empty")
        for pair in self.beta_grid:
            for b in pair:
                if not math.isfinite(b) or b >= SMALL_BETA:
                    raise ValueError(f"beta values must be negative, got {b}")
        if not self.schemes:
            raise ValueError("no schemes selected")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}; expected one of {SCHEMES}")
        for p in self.pairings:
            if p not in PAIRINGS:
                raise ValueError(f"unknown pairing {p!r}; expected one of {PAIRINGS}")
        if len(self.powers_per_pair) != 2:
            raise ValueError("powers_per_pair needs exactly two fractions")
        if len(self.full_powers) != m:
            raise ValueError(f"full_powers needs {m} fractions")
        if self.paired_schemes:
            if m % 2 or m > MAX_USERS:
                raise ValueError(f"paired schemes need an even user count <= {MAX_USERS}")
            if not self.pairings:
                raise ValueError("paired schemes selected but no pairing strategy")

    @property
    def seed(self):
        return self.channel.seed

    @property
    def n_users(self):
        return self.channel.n_users

    @property
    def paired_schemes(self):
        return [s for s in self.schemes if s in ("noma_paired", "nomar_paired")]

    def user_betas(self, beta_pair):
        """Lower half of the ranks uses the weak-user beta, upper half the strong one."""
        m = self.n_users
        bw, bs = beta_pair
        return [bw if r < m / 2 else bs for r in range(m)]

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass
class SweepRow:
    snr_db: float
    scheme: str
    pairing: str
    user_rank: int
    ec_value: float
    ec_std_error: float
    sum_ec: float
    delta_ec_vs_oma: float
    p_noma: float = None
    beta_weak: float = None
    beta_strong: float = None
    sum_ec_std_error: float = 0.0


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    multi_beta: bool = False

    def select(self, **where):
        out = []
        for r in self.rows:
            if all(_close(getattr(r, k), v) for k, v in where.items()):
                out.append(r)
        return out

    def get(self, **where):
        found = self.select(**where)
        if len(found) != 1:
            raise LookupError(f"{len(found)} rows match {where}")
        return found[0]

    def series(self, scheme, pairing, user_rank=None, beta=None, attr="ec_value"):
        """(snr_db array, values array) for one row family."""
        where = {"scheme": scheme, "pairing": pairing}
        if user_rank is not None:
            where["user_rank"] = user_rank
        if beta is not None:
            where["beta_weak"], where["beta_strong"] = beta
        rows = self.select(**where)
        if user_rank is None:
            rows = [r for r in rows if r.user_rank == 0]
        rows.sort(key=lambda r: r.snr_db)
        return (np.array([r.snr_db for r in rows]),
                np.array([getattr(r, attr) for r in rows]))


def _close(a, b):
    if isinstance(b, float) and isinstance(a, float):
        return math.isclose(a, b, rel_tol=0, abs_tol=1e-12)
    return a == b


def _map(fn, items, n_workers):
    if n_workers and n_workers > 1:
        with ThreadPoolExecutor(n_workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _families(config):
    """(key, scheme_label, pairing_label) in output order."""
    fams = []
    for s in config.schemes:
        if s == "oma":
            fams.append(("oma", "none", Scheme.OMA.value, "none"))
        elif s == "noma_full":
            fams.append(("noma_full", "full", Scheme.NOMA.value, "full"))
        else:
            for p in config.pairings:
                fams.append((s, p, _SCHEME_LABEL[s], p))
    return fams


def _fixed_plan(strategy, m):
    plan = optimal_pairing(m) if strategy == "optimal" else sequential_pairing(m)
    return plan_index(plan)


def _rates_for_chunk(config, family, rho, gains, start):
    kind, strategy = family
    m = config.n_users
    if kind == "oma":
        return _accel.oma_rates(gains, config.full_powers.as_array(), rho, m), None
    if kind == "noma_full":
        return _accel.sic_rates(gains, config.full_powers.as_array(), rho), None
    if strategy in ("optimal", "sequential"):
        idx = np.full(gains.shape[0], _fixed_plan(strategy, m), dtype=np.int64)
    elif strategy == "random":
        idx = random_plan_indices(m, config.seed, start, gains.shape[0])
    else:
        idx = heuristic_plan_indices(gains, config.powers_per_pair, rho)
    pw, ps = config.powers_per_pair.fractions
    return _accel.paired_rates(gains, idx, plan_table(m), pw, ps, rho,
                               kind == "nomar_paired")


def _simulate_family(config, family, rho, chunks, n_workers):
    def work(item):
        (start, _), gains = item
        return _rates_for_chunk(config, family, rho, gains, start)

    parts = _map(work, chunks, n_workers)
    rates = np.concatenate([p[0] for p in parts], axis=0)
    chosen = None
    if parts[0][1] is not None:
        chosen = np.concatenate([p[1] for p in parts], axis=0)
    return rates, chosen


def _user_ecs(rates, betas):
    vals, batches = [], []
    for u in range(rates.shape[1]):
        v, b = ec_with_batches(np.ascontiguousarray(rates[:, u]), betas[u])
        vals.append(v)
        batches.append(b)
    return np.array(vals), np.array(batches)


def generate_gains(config, n_workers=1):
    """Chunk list [((start, count), gains)] covering all blocks of the config."""
    ranges = chunk_ranges(config.n_blocks)
    gains = _map(lambda r: sample_blocks(config.channel, r[0], r[1]), ranges, n_workers)
    return list(zip(ranges, gains))


def run_scenario(config, n_workers=1):
    """Simulate every (SNR, scheme, pairing, beta) combination of ``config``.

    The result is a deterministic function of the config; ``n_workers`` only
    changes how fixed-size chunks of blocks are scheduled.
    """
    chunks = generate_gains(config, n_workers)
    families = _families(config)
    m = config.n_users
    beta_sets = [config.user_betas(bp) for bp in config.beta_grid]
    # ec[(snr, beta_i, family_key)] = (values, batch_ecs, p_noma)
    table = {}
    for snr in config.snr_db_grid:
        rho = 10.0 ** (snr / 10.0)
        keys = [("oma", "none")] + [f[:2] for f in families if f[0] != "oma"]
        for key in keys:
            rates, chosen = _simulate_family(config, key, rho, chunks, n_workers)
            p_noma = float(chosen.mean()) if key[0] == "nomar_paired" else None
            for bi, betas in enumerate(beta_sets):
                vals, batches = _user_ecs(rates, betas)
                table[(snr, bi, key)] = (vals, batches, p_noma)
            del rates, chosen

    result = SweepResult(multi_beta=len(config.beta_grid) > 1)
    for bi, (bw, bs) in enumerate(config.beta_grid):
        for snr in config.snr_db_grid:
            oma_vals = table[(snr, bi, ("oma", "none"))][0]
            for kind, strategy, scheme_label, pairing_label in families:
                vals, batches, p_noma = table[(snr, bi, (kind, strategy))]
                total = float(np.sum(vals))
                total_se = batch_se(batches.sum(axis=0))
                ses = [batch_se(b) for b in batches]
                for u in range(m):
                    result.rows.append(SweepRow(
                        snr_db=snr, scheme=scheme_label, pairing=pairing_label,
                        user_rank=u, ec_value=float(vals[u]), ec_std_error=ses[u],
                        sum_ec=total, delta_ec_vs_oma=float(vals[u] - oma_vals[u]),
                        p_noma=p_noma, beta_weak=bw, beta_strong=bs,
                        sum_ec_std_error=total_se))
    return result


def choice_probability(config, pairing=None, n_workers=1):
    """Per-SNR frequency with which NOMA-R keeps NOMA, averaged over pairs."""
    if "nomar_paired" not in config.schemes:
        raise ValueError("choice_probability needs the nomar_paired scheme")
    strategy = pairing or config.pairings[0]
    chunks = generate_gains(config, n_workers)
    out = []
    for snr in config.snr_db_grid:
        rho = 10.0 ** (snr / 10.0)
        _, chosen = _simulate_family(config, ("nomar_paired", strategy), rho, chunks, n_workers)
        out.append((snr, float(chosen.mean())))
    return out


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def _surface(values=DEFAULT_BETAS):
    return tuple(itertools.product(values, values))


def preset(name, seed=1, n_blocks=DEFAULT_BLOCKS):
    """Configuration for one of the figure reproductions."""
    pair = PowerAllocation(DEFAULT_PAIR_POWERS)
    two = ChannelModel(2, seed=seed)
    four = ChannelModel(4, seed=seed)
    common = dict(powers_per_pair=pair, n_blocks=n_blocks)
    if name == "fig2":
        return ScenarioConfig(two, beta_grid=((-5.0, -5.0),),
                              schemes=("oma", "noma_full"), pairings=(), **common)
    if name == "fig3":
        return ScenarioConfig(two, beta_grid=tuple((b, b) for b in DEFAULT_BETAS),
                              schemes=("oma", "noma_full"), pairings=(), **common)
    if name == "fig6":
        return ScenarioConfig(four, beta_grid=((-5.0, -5.0),),
                              schemes=("oma", "noma_full", "noma_paired"),
                              pairings=("optimal", "sequential"), **common)
    if name == "fig_sumec_surface_2u":
        return ScenarioConfig(two, snr_db_grid=(20.0,), beta_grid=_surface(),
                              schemes=("oma", "noma_full", "nomar_paired"),
                              pairings=("optimal",), **common)
    if name == "fig_sumec_4u":
        return ScenarioConfig(four, beta_grid=((-5.0, -5.0),),
                              schemes=("oma", "noma_paired", "nomar_paired"),
                              pairings=("random", "optimal", "heuristic"), **common)
    if name == "fig_sumec_surface_4u":
        return ScenarioConfig(four, snr_db_grid=(20.0,), beta_grid=_surface(),
                              schemes=("oma", "noma_paired", "nomar_paired"),
                              pairings=("optimal",), **common)
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")


PRESETS = ("fig2", "fig3", "fig6", "fig_sumec_surface_2u", "fig_sumec_4u",
           "fig_sumec_surface_4u")
