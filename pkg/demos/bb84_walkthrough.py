"""One BB84 exchange, narrated phase by phase.

Runs the post-processing chain by hand on a short-range clear-sky link so
every intermediate quantity is visible: how many photons survived, how many
positions sifted, what the disclosed sample said, how much the reconciliation
leaked, and what is left after privacy amplification.

Run with an argument to turn the eavesdropper on: python bb84_walkthrough.py eve
"""

import sys

import numpy as np

from skyshield.bb84 import (QkdAbort, check_threshold, error_correct,
                            estimate_qber, prepare_qubits, privacy_amplify,
                            sift, transmit_and_measure)
from skyshield.fso_channel import ChannelParams, clear_weather

eve = len(sys.argv) > 1 and sys.argv[1] == "eve"
rng = np.random.default_rng(7)
params = ChannelParams()
n = 4096

alice = prepare_qubits(n, rng)
print(f"alice prepares {n} qubits, first ten bits  {alice.bits[:10]}")
print(f"                          first ten bases {alice.bases[:10]}")

bob = transmit_and_measure(alice, params, clear_weather(), rng, eve=eve)
print(f"channel delivers {int(bob.received.sum())} photons"
      f" ({'with' if eve else 'no'} intercept-resend attack)")

key_a, key_b = sift(alice, bob)
print(f"sifting keeps {len(key_a)} positions (matching basis AND detected)")

try:
    est, rem_a, rem_b = estimate_qber(key_a.bits, key_b.bits, 0.25, rng)
except QkdAbort as abort:
    print(f" abort: {abort.reason}")
    sys.exit(0)

print(f"disclosed sample: {est.sample_size} bits, {est.mismatches} mismatches"
      f" -> qber {est.qber:.4f}")
decision = check_threshold(est)
if decision.abort:
    print(f"abort: qber {decision.qber:.4f} > threshold {decision.threshold}")
    sys.exit(0)
print(f"gate: qber {decision.qber:.4f} <= {decision.threshold}, proceeding"
      f" with {len(rem_a)} undisclosed bits")

corrected, leaked = error_correct(rem_a, rem_b)
agree = "equal" if np.array_equal(corrected, rem_a) else "STILL DIFFERENT"
print(f"cascade reconciliation disclosed {leaked} parities; strings now {agree}")
try:
    key = privacy_amplify(corrected, leaked, est.qber, rng)
except QkdAbort as abort:
    print(f"abort: {abort.reason}")
    sys.exit(0)

print(f"privacy amplification: {len(corrected)} bits -> {key.length}-bit key")
print(f"session key bits  {''.join(map(str, key.bits[:32]))}...")
print(f"derived hmac key  {key.hmac_key.hex()}")
