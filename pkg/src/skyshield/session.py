"""End-to-end protocol sessions: QKD, key distillation, sealed telemetry.

A session is a pure function of its configuration: one seeded stream drives
every random draw in a fixed order, so identical configs reproduce identical
outcomes byte for byte. The dual-layer design degrades in two independent
ways: the quantum layer aborts (no key, nothing transmitted) or the
classical layer rejects (key agreed, package failed authentication).

Scenario presets toggle the two attack switches:

    A  baseline          eve off, tamper off  -> secure
    B  intercept-resend  eve on,  tamper off  -> abort_quantum
    C  payload tamper    eve off, tamper on   -> reject_classical
    D  both attacks      eve on,  tamper on   -> abort_both
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .auth import (SignaturePackage, keygen, open_package, seal_package,
                   serialize_package)
from .bb84 import (ABORT_QBER, QBER_THRESHOLD, QkdAbort, SAMPLE_FRACTION,
                   check_threshold, error_correct, estimate_qber,
                   prepare_qubits, privacy_amplify, sift, transmit_and_measure)
from .fso_channel import ChannelParams, WeatherCondition, clear_weather
from .grover import GroverReport, TrustVerdict, trust_verdict

SECURE = "secure"
ABORT_QUANTUM = "abort_quantum"
REJECT_CLASSICAL = "reject_classical"
ABORT_BOTH = "abort_both"

DEFAULT_SEED = 7
DEFAULT_PULSE_RATE_HZ = 20_000.0
DEFAULT_WINDOW_MS = (150.0, 300.0)
DEFAULT_PAYLOAD = (b"TLM|id=UAV-07|alt_m=0118|hdg_deg=042|spd_mps=011"
                   b"|bat_pct=87|fix=3D|cmd=HOLD")

SCENARIO_SWITCHES = {
    "A": (False, False),
    "B": (True, False),
    "C": (False, True),
    "D": (True, True),
}

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 output step; the normative seed derivation primitive."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_session_seed(seed_base: int, session_index: int) -> int:
    """Per-session seed: splitmix64(seed_base + session_index)."""
    return splitmix64((seed_base + session_index) & _MASK64)


@dataclass(frozen=True)
class SessionConfig:
    """Everything a session depends on; two configs equal => outcomes equal."""

    channel: ChannelParams = field(default_factory=ChannelParams)
    weather: WeatherCondition = field(default_factory=clear_weather)
    n_photons: int = 4096
    qkd_eve: bool = False
    classical_tamper: bool = False
    qber_threshold: float = QBER_THRESHOLD
    sample_fraction: float = SAMPLE_FRACTION
    payload: bytes = DEFAULT_PAYLOAD
    seed: int = DEFAULT_SEED
    pulse_rate_hz: float = DEFAULT_PULSE_RATE_HZ
    window_ms: tuple[float, float] = DEFAULT_WINDOW_MS
    lossless_channel: bool = False


def scenario_preset(scenario: str, seed: int = DEFAULT_SEED,
                    **overrides) -> SessionConfig:
    """Config for scenario A, B, C or D; identity is the two switches only."""
    key = scenario.strip().upper()
    if key not in SCENARIO_SWITCHES:
        raise ValueError(f"unknown scenario {scenario!r}, expected A, B, C or D")
    eve, tamper = SCENARIO_SWITCHES[key]
    return SessionConfig(qkd_eve=eve, classical_tamper=tamper, seed=seed,
                         **overrides)


@dataclass(frozen=True)
class TranscriptEntry:
    """One classical-channel message: direction, kind, modelled byte cost."""

    direction: str
    kind: str
    byte_length: int


@dataclass
class SessionOutcome:
    """Observable result of one session run."""

    seed: int
    eve: bool
    tamper: bool
    n_photons: int
    n_received: int
    sifted_len: int
    qber: float | None
    qber_threshold: float
    qkd_aborted: bool
    abort_reason: str | None
    key_len: int
    sig_ok: bool | None
    hmac_ok: bool | None
    accepted: bool | None
    verdict: str
    grover: GroverReport | None
    trust: TrustVerdict | None
    duration_ms: float
    within_window: bool
    transcript: list[TranscriptEntry]

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "eve": self.eve,
            "tamper": self.tamper,
            "n_photons": self.n_photons,
            "n_received": self.n_received,
            "sifted_len": self.sifted_len,
            "qber": self.qber,
            "qber_threshold": self.qber_threshold,
            "qkd_aborted": self.qkd_aborted,
            "abort_reason": self.abort_reason,
            "key_len": self.key_len,
            "sig_ok": self.sig_ok,
            "hmac_ok": self.hmac_ok,
            "accepted": self.accepted,
            "verdict": self.verdict,
            "grover": None if self.grover is None else self.grover.to_json_dict(),
            "trust": None if self.trust is None else {
                "level": self.trust.level,
                "detection_p1": self.trust.detection_p1,
            },
            "duration_ms": self.duration_ms,
            "within_window": self.within_window,
            "transcript": [[t.direction, t.kind, t.byte_length]
                           for t in self.transcript],
        }


def serialize_outcome(outcome: SessionOutcome) -> str:
    """Canonical JSON text; identical configs give identical bytes."""
    return json.dumps(outcome.to_json_dict(), indent=2) + "\n"


def evaluate_dual_layer(outcome: SessionOutcome) -> str:
    """Map (quantum abort, tamper switch, auth verdict) to the four verdicts.

    A quantum abort takes reporting precedence; the tamper switch is recorded
    in the verdict regardless of whether a package ever existed.
    """
    if outcome.qkd_aborted:
        return ABORT_BOTH if outcome.tamper else ABORT_QUANTUM
    return SECURE if outcome.accepted else REJECT_CLASSICAL


def flip_payload_bit(pkg: SignaturePackage, bit_index: int) -> SignaturePackage:
    """Return a copy of the package with one payload bit inverted.

    Bit order is big-endian within each byte, matching the signature's digest
    convention. Flipping the same index twice restores the original.
    """
    n_bits = len(pkg.payload) * 8
    if not 0 <= bit_index < n_bits:
        raise ValueError(f"bit index {bit_index} outside payload of {n_bits} bits")
    tampered = bytearray(pkg.payload)
    tampered[bit_index >> 3] ^= 0x80 >> (bit_index & 7)
    return SignaturePackage(bytes(tampered), pkg.public_key, pkg.signature,
                            pkg.hmac_tag)


def apply_classical_tamper(pkg: SignaturePackage,
                           rng: np.random.Generator) -> SignaturePackage:
    """In-flight attacker: flip one uniformly chosen payload bit."""
    if len(pkg.payload) == 0:
        raise ValueError("cannot tamper an empty payload")
    bit = int(rng.integers(0, len(pkg.payload) * 8))
    return flip_payload_bit(pkg, bit)


def run_session(cfg: SessionConfig) -> SessionOutcome:
    """Run one full session; never raises for in-protocol aborts."""
    rng = np.random.default_rng(cfg.seed)
    transcript: list[TranscriptEntry] = []

    alice = prepare_qubits(cfg.n_photons, rng)
    bob = transmit_and_measure(alice, cfg.channel, cfg.weather, rng,
                               eve=cfg.qkd_eve, lossless=cfg.lossless_channel)
    a_sift, b_sift = sift(alice, bob)
    n_received = int(np.count_nonzero(bob.received))
    sifted_len = len(a_sift)
    transcript.append(TranscriptEntry("bob->alice", "bases", cfg.n_photons))
    transcript.append(TranscriptEntry("alice->bob", "matching-indices",
                                      4 * sifted_len))

    duration_ms = cfg.n_photons / cfg.pulse_rate_hz * 1000.0
    within_window = cfg.window_ms[0] <= duration_ms <= cfg.window_ms[1]

    qber: float | None = None
    abort_reason: str | None = None
    grover_rep: GroverReport | None = None
    trust: TrustVerdict | None = None
    key_len = 0
    sig_ok: bool | None = None
    hmac_ok: bool | None = None
    accepted: bool | None = None

    try:
        estimate, a_rem, b_rem = estimate_qber(a_sift.bits, b_sift.bits,
                                               cfg.sample_fraction, rng)
    except QkdAbort as abort:
        abort_reason = abort.reason
    else:
        qber = estimate.qber
        transcript.append(TranscriptEntry("alice->bob", "sample-indices",
                                          4 * estimate.sample_size))
        transcript.append(TranscriptEntry("bob->alice", "sample-bits",
                                          math.ceil(estimate.sample_size / 8)))
        # Grover profile uses the sifted length before sample removal.
        grover_rep = GroverReport.from_qber(qber, sifted_len)
        trust = trust_verdict(qber, grover_rep, cfg.qber_threshold)

        if check_threshold(estimate, cfg.qber_threshold).abort:
            abort_reason = ABORT_QBER
        else:
            corrected, leaked = error_correct(a_rem, b_rem)
            transcript.append(TranscriptEntry("alice->bob", "parities",
                                              math.ceil(leaked / 8)))
            try:
                key = privacy_amplify(corrected, leaked, qber, rng)
            except QkdAbort as abort:
                abort_reason = abort.reason
            else:
                transcript.append(TranscriptEntry("alice->bob", "pa-seed",
                                                  len(key.pa_seed)))
                key_len = key.length
                keypair = keygen(rng)
                pkg = seal_package(cfg.payload, keypair, key)
                if cfg.classical_tamper:
                    pkg = apply_classical_tamper(pkg, rng)
                verdict = open_package(pkg, key)
                sig_ok, hmac_ok, accepted = (verdict.sig_ok, verdict.hmac_ok,
                                             verdict.accepted)
                transcript.append(TranscriptEntry(
                    "alice->bob", "signature-package",
                    len(serialize_package(pkg))))

    outcome = SessionOutcome(
        seed=cfg.seed,
        eve=cfg.qkd_eve,
        tamper=cfg.classical_tamper,
        n_photons=cfg.n_photons,
        n_received=n_received,
        sifted_len=sifted_len,
        qber=qber,
        qber_threshold=cfg.qber_threshold,
        qkd_aborted=abort_reason is not None,
        abort_reason=abort_reason,
        key_len=key_len,
        sig_ok=sig_ok,
        hmac_ok=hmac_ok,
        accepted=accepted,
        verdict="",
        grover=grover_rep,
        trust=trust,
        duration_ms=duration_ms,
        within_window=within_window,
        transcript=transcript,
    )
    outcome.verdict = evaluate_dual_layer(outcome)
    return outcome
