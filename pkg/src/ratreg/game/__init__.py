"""Bayesian game between clients and rational malicious servers."""

from .payoffs import (
    TIE_TOLERANCE,
    Belief,
    PayoffParams,
    Strategy,
    attack_threshold,
    best_response,
    brute_force_best_response,
    expected_client_gain,
    expected_gain,
    loss_outweighs_gains,
    outcome,
)

__all__ = [
    "TIE_TOLERANCE",
    "Belief",
    "PayoffParams",
    "Strategy",
    "attack_threshold",
    "best_response",
    "brute_force_best_response",
    "expected_client_gain",
    "expected_gain",
    "loss_outweighs_gains",
    "outcome",
]
