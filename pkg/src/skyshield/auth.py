"""Hash-based one-time signatures and the authenticated payload envelope.

Lamport scheme over SHA-256: 256 secret pairs of 32 random bytes, a public
key of the 512 leaf hashes plus one flat root hash, signatures that reveal
one secret per digest bit. Verification is pure hashing, no number theory.
The envelope binds payload, public key and signature under an HMAC-SHA-256
tag keyed by the QKD session key.

Wire layout (little-endian length prefix):

    u32 payload_len | payload | 512 * 32B leaf hashes (pair order
    hash[i][0], hash[i][1]) | 32B root | 256 * 32B revealed secrets |
    32B hmac tag
"""

from __future__ import annotations

import hmac as hmac_mod
import struct
from dataclasses import dataclass, field
from hashlib import sha256

import numpy as np

from .bb84 import SessionKeyMaterial

N_PAIRS = 256
SECRET_BYTES = 32
HASH_BYTES = 32
PUB_BYTES = N_PAIRS * 2 * HASH_BYTES  # 16384
SIG_BYTES = N_PAIRS * SECRET_BYTES    # 8192
TAG_BYTES = 32
_HEADER = struct.Struct("<I")


class KeyReuseError(Exception):
    """A Lamport private key signed twice; the scheme is strictly one-time."""


@dataclass
class LamportPrivateKey:
    secrets: list[tuple[bytes, bytes]]
    used: bool = False


@dataclass(frozen=True)
class LamportPublicKey:
    hashes: tuple[tuple[bytes, bytes], ...]
    root: bytes


@dataclass(frozen=True)
class LamportSignature:
    revealed: tuple[bytes, ...]


@dataclass(frozen=True)
class AuthVerdict:
    sig_ok: bool
    hmac_ok: bool
    accepted: bool


@dataclass(frozen=True)
class SignaturePackage:
    payload: bytes
    public_key: LamportPublicKey
    signature: LamportSignature
    hmac_tag: bytes = field(repr=False)


def keygen(rng: np.random.Generator) -> tuple[LamportPrivateKey, LamportPublicKey]:
    """Generate one key pair: 512 secrets, their hashes, and the root.

    Costs exactly 513 hash calls: one per leaf plus one flat root hash over
    the 512 concatenated leaf hashes in index order.
    """
    raw = rng.bytes(PUB_BYTES)
    secrets = []
    leaves = []
    for i in range(N_PAIRS):
        off = i * 2 * SECRET_BYTES
        s0 = raw[off:off + SECRET_BYTES]
        s1 = raw[off + SECRET_BYTES:off + 2 * SECRET_BYTES]
        secrets.append((s0, s1))
        leaves.append((sha256(s0).digest(), sha256(s1).digest()))
    root = sha256(b"".join(h0 + h1 for h0, h1 in leaves)).digest()
    return LamportPrivateKey(secrets), LamportPublicKey(tuple(leaves), root)


def digest_bits(digest: bytes):
    """Iterate the 256 digest bits, big-endian within each byte."""
    for byte in digest:
        for shift in range(7, -1, -1):
            yield (byte >> shift) & 1


def sign(priv: LamportPrivateKey, message: bytes) -> LamportSignature:
    """Reveal secret[i][bit_i] for each bit of SHA-256(message).

    No hashing beyond the message digest. Marks the key used; a second call
    raises KeyReuseError.
    """
    if priv.used:
        raise KeyReuseError("one-time key already used")
    priv.used = True
    digest = sha256(message).digest()
    return LamportSignature(tuple(priv.secrets[i][b]
                                  for i, b in enumerate(digest_bits(digest))))


def verify(pub: LamportPublicKey, message: bytes, sig: LamportSignature) -> bool:
    """Check every revealed secret against the published leaf hashes.

    Returns False (never raises) on any mismatch, including a public key
    whose root hash does not match its own leaves.
    """
    if len(sig.revealed) != N_PAIRS or len(pub.hashes) != N_PAIRS:
        return False
    recomputed_root = sha256(b"".join(h0 + h1 for h0, h1 in pub.hashes)).digest()
    ok = hmac_mod.compare_digest(recomputed_root, pub.root)
    digest = sha256(message).digest()
    for i, bit in enumerate(digest_bits(digest)):
        if sha256(sig.revealed[i]).digest() != pub.hashes[i][bit]:
            ok = False
    return ok


def _body_bytes(pkg: SignaturePackage) -> bytes:
    pub = b"".join(h0 + h1 for h0, h1 in pkg.public_key.hashes)
    sig = b"".join(pkg.signature.revealed)
    return _HEADER.pack(len(pkg.payload)) + pkg.payload + pub + pkg.public_key.root + sig


def seal_package(payload: bytes,
                 keypair: tuple[LamportPrivateKey, LamportPublicKey],
                 session_key: SessionKeyMaterial) -> SignaturePackage:
    """Sign the payload and tag everything with the session HMAC key."""
    if session_key is None or session_key.length <= 0:
        raise ValueError("no session key")
    priv, pub = keypair
    sig = sign(priv, payload)
    draft = SignaturePackage(payload, pub, sig, b"")
    tag = hmac_mod.new(session_key.hmac_key, _body_bytes(draft), sha256).digest()
    return SignaturePackage(payload, pub, sig, tag)


def serialize_package(pkg: SignaturePackage) -> bytes:
    return _body_bytes(pkg) + pkg.hmac_tag


def parse_package(data: bytes) -> SignaturePackage:
    """Inverse of serialize_package; raises ValueError on bad framing."""
    if len(data) < _HEADER.size:
        raise ValueError("package truncated: missing length header")
    (payload_len,) = _HEADER.unpack_from(data, 0)
    expected = _HEADER.size + payload_len + PUB_BYTES + HASH_BYTES + SIG_BYTES + TAG_BYTES
    if len(data) != expected:
        raise ValueError(f"package framing: expected {expected} bytes, got {len(data)}")
    off = _HEADER.size
    payload = data[off:off + payload_len]
    off += payload_len
    leaves = []
    for i in range(N_PAIRS):
        h0 = data[off:off + HASH_BYTES]
        h1 = data[off + HASH_BYTES:off + 2 * HASH_BYTES]
        leaves.append((h0, h1))
        off += 2 * HASH_BYTES
    root = data[off:off + HASH_BYTES]
    off += HASH_BYTES
    revealed = tuple(data[off + i * SECRET_BYTES:off + (i + 1) * SECRET_BYTES]
                     for i in range(N_PAIRS))
    off += SIG_BYTES
    tag = data[off:off + TAG_BYTES]
    return SignaturePackage(payload, LamportPublicKey(tuple(leaves), root),
                            LamportSignature(revealed), tag)


def open_package(pkg: SignaturePackage,
                 session_key: SessionKeyMaterial) -> AuthVerdict:
    """Independent signature and MAC checks; accepted iff both hold.

    The tag comparison is timing-uniform (hmac.compare_digest).
    """
    expected = hmac_mod.new(session_key.hmac_key, _body_bytes(pkg), sha256).digest()
    hmac_ok = hmac_mod.compare_digest(expected, pkg.hmac_tag)
    sig_ok = verify(pkg.public_key, pkg.payload, pkg.signature)
    return AuthVerdict(sig_ok, hmac_ok, sig_ok and hmac_ok)
