"""Desk-scale simulator of a QKD-secured free-space optical link.

Layers, bottom to top: a fading optical channel (turbulence, weather,
pointing), BB84 key establishment with reconciliation and privacy
amplification, Lamport one-time signatures under an HMAC envelope, a
closed-form Grover detection monitor, and session/sweep orchestration with
CSV artifacts. Every run is a pure function of (config, seed).
"""

from .auth import (AuthVerdict, KeyReuseError, LamportPrivateKey,
                   LamportPublicKey, LamportSignature, SignaturePackage,
                   keygen, open_package, parse_package, seal_package,
                   serialize_package, sign, verify)
from .bb84 import (Basis, MeasurementBatch, QberEstimate, QkdAbort, QubitBatch,
                   SessionKeyMaterial, SiftedKey, ThresholdDecision,
                   check_threshold, error_correct, estimate_qber,
                   prepare_qubits, privacy_amplify, sift, transmit_and_measure)
from .experiments import (CellSummary, SweepResult, SweepSpec, run_scenario,
                          run_sweep, write_sweep_outputs)
from .fso_channel import (ChannelParams, ChannelGainSample, TurbulenceParams,
                          WeatherCondition, default_weathers,
                          gamma_gamma_params, pointing_factor, rytov_variance,
                          sample_gain, sample_turbulence,
                          weather_attenuation_db_per_km)
from .grover import (GroverReport, TrustVerdict, detection_curve,
                     expected_queries, first_local_max, marked_count,
                     success_probability, trust_verdict)
from .session import (SessionConfig, SessionOutcome, TranscriptEntry,
                      apply_classical_tamper, derive_session_seed,
                      evaluate_dual_layer, flip_payload_bit, run_session,
                      scenario_preset, serialize_outcome, splitmix64)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
