"""Coding for erasures, stuck-at defects, and both at once.

Submodules: ``gf2`` (bit-matrix algebra), ``codes`` (Hamming, BCH and
partitioned BCH constructions), ``channels``, ``schemes`` (encoders and
decoders), ``bounds``, ``alloc`` (parity allocation), ``harness``
(simulation and exact oracles) and ``cli``.
"""

from .alloc import allocate, allocate_discrete, allocate_kkt, candidate_table_1023
from .bounds import bdec_finite_bound, bec_finite_bound, bdc_finite_bound, rank_deficiency_prob
from .channels import ChannelParams
from .codes import (
    BudgetExceeded,
    LinearCode,
    PartitionedCode,
    UnrealizableCode,
    build_code,
    hamming_7_4,
    make_pbch,
)
from .harness import ExperimentConfig, exact_failure_small, run_trials

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "ChannelParams", "ExperimentConfig", "LinearCode", "PartitionedCode",
    "UnrealizableCode", "allocate", "allocate_discrete", "allocate_kkt", "bdc_finite_bound",
    "bdec_finite_bound", "bec_finite_bound", "build_code", "candidate_table_1023",
    "exact_failure_small", "hamming_7_4", "make_pbch", "rank_deficiency_prob", "run_trials",
]
