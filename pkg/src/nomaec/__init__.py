"""Effective capacity of uplink OMA, NOMA, paired NOMA and NOMA-R."""
from ._accel import BACKEND
from .channel import ChannelBlock, ChannelModel, sample_block, sample_blocks
from .ec_engine import (DelayBudget, DelayProfile, EcAccumulator, EcEstimate,
                        beta_from_theta, delay_violation_bound, effective_capacity,
                        required_ec)
from .pairing import (PairingPlan, enumerate_pairings, nomar_heuristic_pairing,
                      optimal_pairing, random_pairing, sequential_pairing)
from .ratelaw import (PowerAllocation, RateMatrix, Scheme, noma_rates, nomar_select,
                      oma_rates, paired_rates)
from .recommend import Recommendation, ScenarioQuery, justify, recommend
from .scenarios import (PRESETS, ScenarioConfig, SweepResult, SweepRow,
                        choice_probability, preset, run_scenario)

__version__ = "0.1.0"
