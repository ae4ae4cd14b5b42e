"""Transition probabilities of the inhomogeneous q-TAZRP."""

from qtazrp.errors import HorizonTooLong, NonConvergence, PoleError, QTazrpError, StateSpaceTooLarge
from qtazrp.io import export_results, load_rate_profile, records_to_frame
from qtazrp.models import (
    ContourOptions,
    ContourSpec,
    Estimate,
    ProbabilityResult,
    QParams,
    RateProfile,
    SimConfig,
    StackDecomposition,
    StateVector,
    TransitionRequest,
)
from qtazrp.montecarlo import estimate_prob, sample_states, simulate_one
from qtazrp.oracle import oracle_distribution, oracle_prob
from qtazrp.transition import one_particle_prob, step_init_prob, transition_probability, u0_sum

__all__ = [
    "ContourOptions",
    "ContourSpec",
    "Estimate",
    "HorizonTooLong",
    "NonConvergence",
    "PoleError",
    "ProbabilityResult",
    "QParams",
    "QTazrpError",
    "RateProfile",
    "SimConfig",
    "StackDecomposition",
    "StateSpaceTooLarge",
    "StateVector",
    "TransitionRequest",
    "estimate_prob",
    "export_results",
    "load_rate_profile",
    "one_particle_prob",
    "oracle_distribution",
    "oracle_prob",
    "records_to_frame",
    "sample_states",
    "simulate_one",
    "step_init_prob",
    "transition_probability",
    "u0_sum",
]
