"""Sign and authenticate one telemetry frame, then attack it.

Shows the one-time signature lifecycle: keygen, seal, wire encoding, verify,
a payload bit-flip caught by both layers, and the reuse guard.
"""

import numpy as np

from skyshield.auth import (KeyReuseError, keygen, open_package,
                            parse_package, seal_package, serialize_package,
                            sign)
from skyshield.bb84 import privacy_amplify
from skyshield.session import DEFAULT_PAYLOAD, flip_payload_bit

rng = np.random.default_rng(42)

# a session key as QKD would hand it over
key = privacy_amplify(rng.integers(0, 2, 300, dtype=np.uint8), 0, 0.0, rng)
print(f"session key: {key.length} bits, hmac key {key.hmac_key.hex()}")

keypair = keygen(rng)
pkg = seal_package(DEFAULT_PAYLOAD, keypair, key)
wire = serialize_package(pkg)
print(f"payload ({len(DEFAULT_PAYLOAD)} bytes): {DEFAULT_PAYLOAD.decode()}")
print(f"wire size {len(wire)} bytes "
      f"(4 header + {len(DEFAULT_PAYLOAD)} payload + 16384 pubkey"
      f" + 32 root + 8192 signature + 32 tag)")

verdict = open_package(parse_package(wire), key)
print(f"clean delivery: sig_ok={verdict.sig_ok} hmac_ok={verdict.hmac_ok}"
      f" accepted={verdict.accepted}")

tampered = flip_payload_bit(pkg, 13)
bad = open_package(tampered, key)
print(f"one flipped bit: sig_ok={bad.sig_ok} hmac_ok={bad.hmac_ok}"
      f" accepted={bad.accepted}")
print(f"  tampered text: {tampered.payload.decode(errors='replace')}")

try:
    sign(keypair[0], b"second message")
except KeyReuseError as err:
    print(f"signing again: KeyReuseError ({err})")
