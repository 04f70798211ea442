"""Ed25519 key material.

One scheme for everything: issuers sign credentials, holders sign
presentations, both with 32-byte-seed Ed25519 keys.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

SEED_LEN = 32
PUBLIC_KEY_LEN = 32


@dataclass(frozen=True)
class KeyPair:
    """Seed plus the public key deterministically derived from it.

    The seed is excluded from repr so key material never leaks into logs
    or CLI output.
    """

    seed: bytes = field(repr=False)
    public_key: bytes

    def __post_init__(self):
        if len(self.seed) != SEED_LEN:
            raise ValueError(f"seed must be {SEED_LEN} bytes, got {len(self.seed)}")
        if len(self.public_key) != PUBLIC_KEY_LEN:
            raise ValueError("public key must be 32 bytes")

    def sign(self, message: bytes) -> bytes:
        return Ed25519PrivateKey.from_private_bytes(self.seed).sign(message)


def generate_keypair(
    seed: bytes | None = None, rng: Callable[[int], bytes] = os.urandom
) -> KeyPair:
    """Derive a keypair from ``seed``, or from ``rng`` when no seed is given."""
    if seed is None:
        seed = rng(SEED_LEN)
    if len(seed) != SEED_LEN:
        raise ValueError(f"seed must be {SEED_LEN} bytes, got {len(seed)}")
    private = Ed25519PrivateKey.from_private_bytes(seed)
    public = private.public_key().public_bytes(
        encoding=serialization.Encoding.Raw, format=serialization.PublicFormat.Raw
    )
    return KeyPair(seed=seed, public_key=public)


def verify_signature(public_key: bytes, message: bytes, signature: bytes) -> bool:
    if len(public_key) != PUBLIC_KEY_LEN:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False
