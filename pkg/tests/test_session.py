"""Session orchestration tests: presets, verdict logic, transcripts, replay.

The SplitMix64 vectors are the published outputs for a state of 0 (first two
next() results), which this implementation must reproduce because downstream
seeds are derived with it.
"""

import dataclasses
import json

import numpy as np
import pytest

from skyshield.auth import keygen, open_package, seal_package
from skyshield.bb84 import privacy_amplify
from skyshield.session import (ABORT_BOTH, ABORT_QUANTUM, DEFAULT_PAYLOAD,
                               DEFAULT_SEED, REJECT_CLASSICAL, SECURE,
                               SessionConfig, SessionOutcome,
                               apply_classical_tamper, derive_session_seed,
                               evaluate_dual_layer, flip_payload_bit,
                               run_session, scenario_preset,
                               serialize_outcome, splitmix64)


def rng(seed=0):
    return np.random.default_rng(seed)


# ------------------------------------------------------------ seed derivation

def test_splitmix64_published_vectors():
    # first two outputs of the reference generator started at state 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4


def test_splitmix64_matches_reference_reimplementation():
    mask = (1 << 64) - 1

    def reference(x):
        z = (x + 0x9E3779B97F4A7C15) & mask
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        return z ^ (z >> 31)

    for x in [0, 1, 2, 12345, 2 ** 63, mask]:
        assert splitmix64(x) == reference(x)
        assert 0 <= splitmix64(x) <= mask


def test_derive_session_seed_wraps_modulo_64():
    assert derive_session_seed(20250823, 17) == splitmix64(20250823 + 17)
    mask = (1 << 64) - 1
    assert derive_session_seed(mask, 5) == splitmix64(4)


# -------------------------------------------------------------------- presets

def test_scenario_switches():
    assert (scenario_preset("A").qkd_eve, scenario_preset("A").classical_tamper) \
        == (False, False)
    assert (scenario_preset("B").qkd_eve, scenario_preset("B").classical_tamper) \
        == (True, False)
    assert (scenario_preset("C").qkd_eve, scenario_preset("C").classical_tamper) \
        == (False, True)
    assert (scenario_preset("D").qkd_eve, scenario_preset("D").classical_tamper) \
        == (True, True)


def test_scenario_preset_accepts_lowercase_and_overrides():
    cfg = scenario_preset(" b ", seed=99, n_photons=512)
    assert cfg.qkd_eve and not cfg.classical_tamper
    assert cfg.seed == 99 and cfg.n_photons == 512


def test_scenario_preset_rejects_unknown():
    with pytest.raises(ValueError):
        scenario_preset("E")


def test_config_is_frozen():
    cfg = SessionConfig()
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.seed = 1


# -------------------------------------------------------------- verdict logic

def outcome_stub(**kw):
    base = dict(seed=0, eve=False, tamper=False, n_photons=0, n_received=0,
                sifted_len=0, qber=None, qber_threshold=0.11, qkd_aborted=False,
                abort_reason=None, key_len=0, sig_ok=None, hmac_ok=None,
                accepted=None, verdict="", grover=None, trust=None,
                duration_ms=0.0, within_window=True, transcript=[])
    base.update(kw)
    return SessionOutcome(**base)


def test_dual_layer_truth_table():
    assert evaluate_dual_layer(outcome_stub(accepted=True)) == SECURE
    assert evaluate_dual_layer(outcome_stub(accepted=False)) == REJECT_CLASSICAL
    assert evaluate_dual_layer(outcome_stub(qkd_aborted=True)) == ABORT_QUANTUM
    assert evaluate_dual_layer(
        outcome_stub(qkd_aborted=True, tamper=True)) == ABORT_BOTH
    # tamper switch alone does not change a non-aborted verdict
    assert evaluate_dual_layer(
        outcome_stub(tamper=True, accepted=True)) == SECURE


# ------------------------------------------------------------------ tampering

def sealed_package(seed=30):
    key = privacy_amplify(rng(seed).integers(0, 2, 200, dtype=np.uint8), 0, 0.0)
    return seal_package(b"\x00\xff tamper me", keygen(rng(seed + 1)), key), key


def test_flip_payload_bit_msb_first():
    pkg, _ = sealed_package()
    flipped = flip_payload_bit(pkg, 0)
    assert flipped.payload[0] == 0x80          # bit 0 is the MSB of byte 0
    assert flipped.payload[1:] == pkg.payload[1:]
    again = flip_payload_bit(flipped, 0)
    assert again.payload == pkg.payload        # involution


def test_flip_payload_bit_bounds():
    pkg, _ = sealed_package()
    n_bits = len(pkg.payload) * 8
    flip_payload_bit(pkg, n_bits - 1)
    with pytest.raises(ValueError):
        flip_payload_bit(pkg, n_bits)
    with pytest.raises(ValueError):
        flip_payload_bit(pkg, -1)


def test_tamper_always_detected():
    pkg, key = sealed_package()
    for bit in range(0, len(pkg.payload) * 8, 7):
        verdict = open_package(flip_payload_bit(pkg, bit), key)
        assert not verdict.accepted
        assert not verdict.hmac_ok


def test_apply_classical_tamper_flips_exactly_one_bit():
    pkg, _ = sealed_package()
    tampered = apply_classical_tamper(pkg, rng(31))
    diff = np.bitwise_xor(np.frombuffer(pkg.payload, dtype=np.uint8),
                          np.frombuffer(tampered.payload, dtype=np.uint8))
    assert int(np.unpackbits(diff).sum()) == 1
    empty = dataclasses.replace(pkg, payload=b"")
    with pytest.raises(ValueError):
        apply_classical_tamper(empty, rng(32))


# ------------------------------------------------------------------- sessions

def test_scenario_matrix_at_default_seed():
    a = run_session(scenario_preset("A"))
    assert a.verdict == SECURE
    assert a.qber == 0.0 and a.key_len > 0
    assert a.sig_ok and a.hmac_ok and a.accepted
    assert a.trust.level == "trusted"

    b = run_session(scenario_preset("B"))
    assert b.verdict == ABORT_QUANTUM
    assert b.abort_reason == "qber above threshold"
    assert b.qber > 0.11 and b.key_len == 0
    assert b.sig_ok is None and b.accepted is None
    assert b.trust.level == "compromised"

    c = run_session(scenario_preset("C"))
    assert c.verdict == REJECT_CLASSICAL
    assert not c.qkd_aborted and c.key_len > 0
    assert c.accepted is False

    d = run_session(scenario_preset("D"))
    assert d.verdict == ABORT_BOTH
    assert d.qkd_aborted and d.tamper


def test_insufficient_material_abort():
    ocm = run_session(SessionConfig(n_photons=40, lossless_channel=True))
    assert ocm.qkd_aborted
    assert ocm.abort_reason == "insufficient key material"
    assert ocm.verdict == ABORT_QUANTUM
    assert ocm.qber is None and ocm.grover is None and ocm.trust is None
    assert [t.kind for t in ocm.transcript] == ["bases", "matching-indices"]


def test_timing_window():
    a = run_session(scenario_preset("A"))
    assert a.duration_ms == pytest.approx(4096 / 20_000.0 * 1000.0, rel=1e-12)
    assert a.within_window
    slow = run_session(scenario_preset("A", pulse_rate_hz=10_000.0))
    assert slow.duration_ms == pytest.approx(409.6, rel=1e-12)
    assert not slow.within_window
    fast = run_session(SessionConfig(n_photons=64, lossless_channel=True))
    assert not fast.within_window  # 3.2 ms, below the window floor


def test_transcript_secure_run():
    out = run_session(scenario_preset("A"))
    kinds = [t.kind for t in out.transcript]
    assert kinds == ["bases", "matching-indices", "sample-indices",
                     "sample-bits", "parities", "pa-seed", "signature-package"]
    by_kind = {t.kind: t for t in out.transcript}
    assert by_kind["bases"].direction == "bob->alice"
    assert by_kind["bases"].byte_length == out.n_photons
    assert by_kind["matching-indices"].byte_length == 4 * out.sifted_len
    assert by_kind["sample-bits"].direction == "bob->alice"
    assert by_kind["pa-seed"].byte_length == 32
    # envelope: header + payload + public key + root + signature + tag
    assert by_kind["signature-package"].byte_length == \
        4 + len(DEFAULT_PAYLOAD) + 16384 + 32 + 8192 + 32


def test_transcript_stops_at_abort():
    out = run_session(scenario_preset("B"))
    kinds = [t.kind for t in out.transcript]
    assert kinds == ["bases", "matching-indices", "sample-indices",
                     "sample-bits"]
    assert "signature-package" not in kinds


def test_grover_uses_presample_sifted_length():
    out = run_session(scenario_preset("B"))
    assert out.grover is not None
    assert out.grover.n == out.sifted_len
    # marked count is the qber estimate applied to that length
    assert out.grover.m == round(out.qber * out.sifted_len)


def test_session_replay_byte_identical():
    for scenario in "ABCD":
        first = serialize_outcome(run_session(scenario_preset(scenario)))
        second = serialize_outcome(run_session(scenario_preset(scenario)))
        assert first == second


def test_different_seeds_differ():
    a = serialize_outcome(run_session(scenario_preset("A", seed=1)))
    b = serialize_outcome(run_session(scenario_preset("A", seed=2)))
    assert a != b


def test_serialized_outcome_is_loadable_json():
    out = run_session(scenario_preset("A"))
    text = serialize_outcome(out)
    assert text.endswith("\n")
    data = json.loads(text)
    assert data == out.to_json_dict()
    assert data["verdict"] == SECURE
    assert data["seed"] == DEFAULT_SEED
    assert data["grover"]["n"] == out.sifted_len
    assert isinstance(data["transcript"][0], list)
