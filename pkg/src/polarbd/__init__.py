"""Polar-code blind detection: codes, decoding, detection pipeline, metrics."""

from .blind import (
    BlindDetectionConfig,
    Detection,
    PhaseOneRecord,
    TrialStats,
    phase1,
    phase2,
    pick_detection,
    run_blind_detection,
    select_candidates,
)
from .channel import ChannelParams, modulate_bpsk, snr_to_sigma, transmit_and_demodulate
from .code import PolarCode, construct_code, encode, polar_transform, reliability_order
from .decoder import (
    DecodeResult,
    beta_combine,
    decode,
    decode_batch,
    early_stop_filter,
    f_op,
    g_op,
    leaf_decision,
    pm_update,
    prune_paths,
)
from .latency import (
    LatencyParams,
    average_latency,
    cycles_to_seconds,
    t_scl,
    worst_case_latency,
)
from .sim import (
    CandidateSpec,
    Metrics,
    SimParams,
    TransmissionScenario,
    emit_csv,
    generate_scenario,
    run_experiment,
    run_trial,
    transmit_scenario,
    trial_rng,
)

__version__ = "0.1.0"

__all__ = [
    "BlindDetectionConfig", "Detection", "PhaseOneRecord", "TrialStats",
    "phase1", "phase2", "pick_detection", "run_blind_detection", "select_candidates",
    "ChannelParams", "modulate_bpsk", "snr_to_sigma", "transmit_and_demodulate",
    "PolarCode", "construct_code", "encode", "polar_transform", "reliability_order",
    "DecodeResult", "beta_combine", "decode", "decode_batch", "early_stop_filter",
    "f_op", "g_op", "leaf_decision", "pm_update", "prune_paths",
    "LatencyParams", "average_latency", "cycles_to_seconds", "t_scl",
    "worst_case_latency",
    "CandidateSpec", "Metrics", "SimParams", "TransmissionScenario",
    "emit_csv", "generate_scenario", "run_experiment", "run_trial",
    "transmit_scenario", "trial_rng",
]
