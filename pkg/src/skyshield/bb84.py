"""BB84 key establishment over a lossy channel.

Implements the full post-processing chain: state preparation, transmission
and measurement (with an optional intercept-resend attacker), basis sifting,
sampled QBER estimation, threshold gating, interactive parity reconciliation
and privacy amplification down to a bounded session key.

Error sources are exactly two: basis mismatch (discarded by sifting) and the
attacker (induces a 25% sifted error rate). The channel itself only deletes
photons, it never flips encoded bits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from hashlib import sha256

import numpy as np

from .fso_channel import ChannelParams, WeatherCondition, sample_gain

# Post-processing policy constants.
QBER_THRESHOLD = 0.11
SAMPLE_FRACTION = 0.25
MIN_SAMPLE_BITS = 16
MIN_SIFTED_BITS = 32
MAX_KEY_BITS = 128
CASCADE_PASSES = 4
CASCADE_RATE_FLOOR = 0.01
HMAC_KEY_BYTES = 16

ABORT_INSUFFICIENT = "insufficient key material"
ABORT_QBER = "qber above threshold"
ABORT_NO_KEY = "no extractable key"


class QkdAbort(Exception):
    """Protocol abort carrying one of the canonical reason strings."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class Basis(enum.IntEnum):
    """Encoding basis: rectilinear {0, 90} deg or diagonal {45, 135} deg."""

    RECTILINEAR = 0
    DIAGONAL = 1


@dataclass(frozen=True)
class QubitRecord:
    """Scalar view of one prepared qubit."""

    bit: int
    basis: Basis


@dataclass(frozen=True)
class MeasurementRecord:
    """Scalar view of one detection attempt; outcome is None when lost."""

    received: bool
    basis: Basis
    outcome: int | None


@dataclass
class QubitBatch:
    """Alice's prepared train as parallel arrays (bit and basis per photon)."""

    bits: np.ndarray
    bases: np.ndarray

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, i: int) -> QubitRecord:
        return QubitRecord(int(self.bits[i]), Basis(int(self.bases[i])))


@dataclass
class MeasurementBatch:
    """Bob's side of the exchange as parallel arrays."""

    received: np.ndarray
    bases: np.ndarray
    outcomes: np.ndarray

    def __len__(self) -> int:
        return len(self.received)

    def __getitem__(self, i: int) -> MeasurementRecord:
        got = bool(self.received[i])
        return MeasurementRecord(got, Basis(int(self.bases[i])),
                                 int(self.outcomes[i]) if got else None)


@dataclass
class SiftedKey:
    """Bits surviving sifting plus their positions in the original train."""

    bits: np.ndarray
    source_indices: np.ndarray

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class QberEstimate:
    """Disclosed-sample error estimate. qber == mismatches / sample_size."""

    sample_size: int
    mismatches: int
    qber: float
    sample_indices: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class ThresholdDecision:
    """Outcome of the QBER gate: abort iff qber strictly exceeds threshold."""

    abort: bool
    qber: float
    threshold: float


@dataclass
class SessionKeyMaterial:
    """Final secret: key bits, their count, and the derived MAC key."""

    bits: np.ndarray
    length: int
    hmac_key: bytes
    pa_seed: bytes


def prepare_qubits(n: int, rng: np.random.Generator) -> QubitBatch:
    """Draw n uniform (bit, basis) pairs.

    Args:
        n: number of photons in the train, n >= 1.
        rng: per-session random stream.
    """
    if n < 1:
        raise ValueError("photon count must be >= 1")
    bits = rng.integers(0, 2, n, dtype=np.uint8)
    bases = rng.integers(0, 2, n, dtype=np.uint8)
    return QubitBatch(bits, bases)


def measure_qubits(src_bits: np.ndarray, src_bases: np.ndarray,
                   bob_bases: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Measure encoded bits in Bob's bases.

    A matched basis reproduces the encoded bit deterministically; a mismatched
    basis yields a uniform random outcome.
    """
    random_bits = rng.integers(0, 2, len(src_bits), dtype=np.uint8)
    return np.where(bob_bases == src_bases, src_bits, random_bits).astype(np.uint8)


def transmit_and_measure(qubits: QubitBatch, params: ChannelParams,
                         weather: WeatherCondition, rng: np.random.Generator,
                         eve: bool = False,
                         lossless: bool = False) -> MeasurementBatch:
    """Send the train through the channel and measure at the receiver.

    Per photon: survival is a Bernoulli draw from the channel gain sample;
    with ``eve`` set, an intercept-resend attacker measures in a uniform
    random basis and resends its outcome in that basis; Bob measures in his
    own uniform random basis. ``lossless`` skips the channel entirely
    (every photon arrives), used to isolate protocol statistics from loss.
    """
    n = len(qubits)
    if lossless:
        received = np.ones(n, dtype=bool)
    else:
        gain = sample_gain(params, weather, rng, size=n)
        p = gain.survival_probability(params.detector_efficiency)
        received = rng.random(n) < p

    src_bits, src_bases = qubits.bits, qubits.bases
    if eve:
        eve_bases = rng.integers(0, 2, n, dtype=np.uint8)
        src_bits = measure_qubits(src_bits, src_bases, eve_bases, rng)
        src_bases = eve_bases

    bob_bases = rng.integers(0, 2, n, dtype=np.uint8)
    outcomes = measure_qubits(src_bits, src_bases, bob_bases, rng)
    return MeasurementBatch(received, bob_bases, outcomes)


def sift(alice: QubitBatch, bob: MeasurementBatch) -> tuple[SiftedKey, SiftedKey]:
    """Keep positions that were received and measured in the matching basis."""
    keep = bob.received & (alice.bases == bob.bases)
    idx = np.nonzero(keep)[0]
    return (SiftedKey(alice.bits[idx].copy(), idx),
            SiftedKey(bob.outcomes[idx].copy(), idx))


def estimate_qber(alice_bits: np.ndarray, bob_bits: np.ndarray,
                  sample_fraction: float, rng: np.random.Generator,
                  ) -> tuple[QberEstimate, np.ndarray, np.ndarray]:
    """Disclose a random sample, estimate the error rate, discard the sample.

    The sample size is max(16, round(fraction * n)). Sifted keys shorter than
    32 bits abort the session outright. Returns the estimate and both
    remaining (undisclosed) bit sequences; disclosed bits never re-enter the
    key material.

    Raises:
        QkdAbort: with reason "insufficient key material" when n < 32.
    """
    n = len(alice_bits)
    if n != len(bob_bits):
        raise ValueError("sifted keys must have equal length")
    if n < MIN_SIFTED_BITS:
        raise QkdAbort(ABORT_INSUFFICIENT)
    k = max(MIN_SAMPLE_BITS, int(math.floor(sample_fraction * n + 0.5)))
    sample = np.sort(rng.choice(n, size=k, replace=False))
    mismatches = int(np.sum(alice_bits[sample] != bob_bits[sample]))
    est = QberEstimate(k, mismatches, mismatches / k, sample)
    remaining = np.ones(n, dtype=bool)
    remaining[sample] = False
    return est, alice_bits[remaining].copy(), bob_bits[remaining].copy()


def check_threshold(estimate: QberEstimate,
                    threshold: float = QBER_THRESHOLD) -> ThresholdDecision:
    """Gate on the estimate: abort iff qber > threshold (equality proceeds)."""
    return ThresholdDecision(estimate.qber > threshold, estimate.qber, threshold)


def _parity(bits: np.ndarray, positions: np.ndarray) -> int:
    return int(np.sum(bits[positions]) & 1)


def _binary_search_fix(a: np.ndarray, b: np.ndarray,
                       positions: np.ndarray) -> int:
    """Locate and flip one error inside an odd-parity block.

    Each halving discloses one parity of the first half; the second half's
    parity is implied. Returns the number of parities disclosed.
    """
    leaked = 0
    while len(positions) > 1:
        half = len(positions) // 2
        left = positions[:half]
        leaked += 1
        if _parity(a, left) != _parity(b, left):
            positions = left
        else:
            positions = positions[half:]
    b[positions[0]] ^= 1
    return leaked


def error_correct(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, int]:
    """Reconcile Bob's string toward Alice's by iterated parity exchange.

    Four scheduled passes with doubling block sizes; the initial size is
    ceil(0.73 / max(error_rate, 0.01)). Pass 1 runs in natural order, later
    passes on permutations seeded from a digest of Alice's bits so the whole
    function is a pure deterministic function of its inputs. If mismatches
    survive the schedule (rare even-error patterns), additional cleanup
    passes run until both strings are equal, so convergence is guaranteed.
    Every disclosed parity, top-level and binary-search step alike, counts
    toward the returned leak total.

    Returns:
        (corrected Bob string, number of parity bits disclosed)
    """
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8).copy()
    n = len(a)
    if n != len(b):
        raise ValueError("strings must have equal length")
    if n == 0:
        return b, 0

    rate = float(np.mean(a != b))
    base_block = math.ceil(0.73 / max(rate, CASCADE_RATE_FLOOR))
    perm_seed = int.from_bytes(sha256(np.packbits(a).tobytes()).digest()[:8], "little")
    perm_rng = np.random.default_rng(perm_seed)

    leaked = 0
    pass_idx = 0
    while True:
        if pass_idx < CASCADE_PASSES:
            block = base_block * (2 ** pass_idx)
        else:
            block = base_block  # cleanup passes revert to small blocks
        block = min(block, n)
        order = np.arange(n) if pass_idx == 0 else perm_rng.permutation(n)
        for start in range(0, n, block):
            chunk = order[start:start + block]
            leaked += 1  # top-level block parity
            if _parity(a, chunk) != _parity(b, chunk):
                leaked += _binary_search_fix(a, b, chunk)
        pass_idx += 1
        if pass_idx >= CASCADE_PASSES and np.array_equal(a, b):
            return b, leaked


def binary_entropy(q: float) -> float:
    """Shannon entropy of a bit with bias q; h2(0) = h2(1) = 0."""
    if q <= 0.0 or q >= 1.0:
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def privacy_amplify(bits: np.ndarray, leaked_bits: int, qber: float,
                    rng: np.random.Generator | None = None) -> SessionKeyMaterial:
    """Compress reconciled bits into the final session key.

    The secure length is max(0, floor(n (1 - 2 h2(qber))) - leaked_bits),
    capped at 128 bits. Compression is a seeded Toeplitz hash over GF(2); the
    seed is drawn from ``rng`` when given (and is considered public), else
    derived from a digest of the input so the call stays deterministic. The
    16-byte MAC key is the truncated SHA-256 of the packed key bits.

    Raises:
        QkdAbort: with reason "no extractable key" when the length is <= 0.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    n = len(bits)
    m = min(MAX_KEY_BITS,
            max(0, math.floor(n * (1.0 - 2.0 * binary_entropy(qber))) - leaked_bits))
    if m <= 0:
        raise QkdAbort(ABORT_NO_KEY)

    if rng is not None:
        seed = rng.bytes(32)
    else:
        seed = sha256(np.packbits(bits).tobytes() + b"toeplitz-seed").digest()
    trng = np.random.default_rng(int.from_bytes(seed, "little"))
    # Toeplitz matrix from m + n - 1 diagonal bits; key = T b over GF(2),
    # evaluated as a full convolution slice.
    diag = trng.integers(0, 2, m + n - 1, dtype=np.int64)
    conv = np.convolve(diag, bits.astype(np.int64))
    key_bits = (conv[n - 1:n - 1 + m] & 1).astype(np.uint8)
    hmac_key = sha256(np.packbits(key_bits).tobytes()).digest()[:HMAC_KEY_BYTES]
    return SessionKeyMaterial(key_bits, m, hmac_key, seed)
