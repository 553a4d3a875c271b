"""
Risk certificates for additively-uncertain scenario programs
"""

from certificates.certmath import apriori_eps, binom_tail_log, eps_n_beta
from certificates.scenario_core import (
    Decision,
    DominanceSummary,
    ScenarioSet,
    a_posteriori_certificate,
    a_priori_certificate,
    reduce,
)

__all__ = [
    "apriori_eps", "binom_tail_log", "eps_n_beta",
    "Decision", "DominanceSummary", "ScenarioSet",
    "a_posteriori_certificate", "a_priori_certificate", "reduce",
]
