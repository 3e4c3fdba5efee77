"""Recommended multiple-access technique per latency/SNR scenario."""
from dataclasses import dataclass

from .ec_engine import SMALL_BETA
from .scenarios import run_scenario

NOMAR_OPT = "NOMA-R(optimal pairing)"
NOMA_OPT = "NOMA(optimal pairing)"
OMA = "OMA"
TECHNIQUES = (NOMAR_OPT, NOMA_OPT, OMA)

#: Representative SNR points (dB) for the low and high regimes.
LOW_SNR_DB = 5.0
HIGH_SNR_DB = 35.0

#: beta used for a low-latency user and for a delay-tolerant one in justify().
LOW_LATENCY_BETA = -5.0
TOLERANT_BETA = -0.1

# (weak low latency, strong low latency, snr regime) -> techniques, in listed order
TABLE = {
    (True, True, "low"): (NOMAR_OPT, NOMA_OPT),
    (True, True, "high"): (NOMAR_OPT, OMA),
    (True, False, "low"): (NOMAR_OPT, NOMA_OPT),
    (True, False, "high"): (NOMA_OPT,),
    (False, True, "low"): (NOMAR_OPT, NOMA_OPT),
    (False, True, "high"): (NOMAR_OPT,),
    (False, False, "low"): (NOMAR_OPT, NOMA_OPT),
    (False, False, "high"): (NOMAR_OPT,),
}


@dataclass(frozen=True)
class ScenarioQuery:
    weak_low_latency: bool
    strong_low_latency: bool
    snr_regime: str

    def __post_init__(self):
        if self.snr_regime not in ("high", "low"):
            raise ValueError(f"snr_regime must be 'high' or 'low', got {self.snr_regime!r}")
        object.__setattr__(self, "weak_low_latency", bool(self.weak_low_latency))
        object.__setattr__(self, "strong_low_latency", bool(self.strong_low_latency))

    def betas(self):
        pick = lambda low: LOW_LATENCY_BETA if low else TOLERANT_BETA
        return pick(self.weak_low_latency), pick(self.strong_low_latency)


@dataclass(frozen=True)
class Recommendation:
    techniques: tuple

    def __post_init__(self):
        if not self.techniques or len(set(self.techniques)) != len(self.techniques):
            raise ValueError("recommendation must be non-empty without duplicates")


def recommend(query):
    key = (query.weak_low_latency, query.strong_low_latency, query.snr_regime)
    return Recommendation(TABLE[key])


def justify(query, config, n_workers=1):
    """Run ``config`` at the representative low and high SNR with the query's betas."""
    bw, bs = query.betas()
    assert bw < -SMALL_BETA and bs < -SMALL_BETA
    cfg = config.replace(snr_db_grid=(LOW_SNR_DB, HIGH_SNR_DB), beta_grid=((bw, bs),))
    return run_scenario(cfg, n_workers=n_workers)
