from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from src.crypto_suite.interfaces import CryptoSuite, KeyPair
from src.crypto_suite.randomness import sha256
from src.errors import CryptoError, DecryptionFailure

RAW = serialization.Encoding.Raw
RAW_PUBLIC = serialization.PublicFormat.Raw
RAW_PRIVATE = serialization.PrivateFormat.Raw
NO_ENCRYPTION = serialization.NoEncryption()

POINT_SIZE = 32  # X25519 and Ed25519 raw keys share this width
GCM_NONCE_SIZE = 12
GCM_TAG_SIZE = 16
SEAL_INFO = b"pvkit/seal/v1"


class DefaultSuite(CryptoSuite):
    """
    Ed25519 signatures, X25519+HKDF-SHA256 hybrid sealing into AES-256-GCM,
    AES-256-GCM for symmetric envelopes, SHA-256 as the KDF hash.

    A key pair's public half is `x25519_pub || ed25519_pub`; the private half is
    `x25519_priv || ed25519_priv`.
    """

    name = "default"

    def _generate_keypair(self, role_label: str) -> KeyPair:
        dh = X25519PrivateKey.from_private_bytes(self.rng.bytes(POINT_SIZE))
        signer = Ed25519PrivateKey.from_private_bytes(self.rng.bytes(POINT_SIZE))
        public = dh.public_key().public_bytes(RAW, RAW_PUBLIC) + signer.public_key().public_bytes(
            RAW, RAW_PUBLIC
        )
        private = dh.private_bytes(RAW, RAW_PRIVATE, NO_ENCRYPTION) + signer.private_bytes(
            RAW, RAW_PRIVATE, NO_ENCRYPTION
        )
        return KeyPair(public_key=public, private_key=private, role_label=role_label)

    def _hash(self, data: bytes) -> bytes:
        return sha256(data)

    # ---------- hybrid envelope ----------
    def _envelope_key(self, shared: bytes, ephemeral_pub: bytes, recipient_pub: bytes) -> bytes:
        return HKDF(
            algorithm=hashes.SHA256(),
            length=32,
            salt=None,
            info=SEAL_INFO + ephemeral_pub + recipient_pub,
        ).derive(shared)

    def _seal_asym(self, public_key: bytes, plaintext: bytes) -> bytes:
        try:
            recipient = X25519PublicKey.from_public_bytes(public_key[:POINT_SIZE])
        except ValueError as exc:
            raise CryptoError("malformed recipient public key") from exc
        ephemeral = X25519PrivateKey.from_private_bytes(self.rng.bytes(POINT_SIZE))
        ephemeral_pub = ephemeral.public_key().public_bytes(RAW, RAW_PUBLIC)
        try:
            shared = ephemeral.exchange(recipient)
        except ValueError as exc:
            raise CryptoError("degenerate recipient public key") from exc
        key = self._envelope_key(shared, ephemeral_pub, public_key[:POINT_SIZE])
        return ephemeral_pub + self._encrypt(key, plaintext, ephemeral_pub)

    def _unseal_asym(self, private_key: bytes, ciphertext: bytes) -> bytes:
        if len(ciphertext) < POINT_SIZE:
            raise DecryptionFailure("sealed envelope too short")
        ephemeral_pub, body = ciphertext[:POINT_SIZE], ciphertext[POINT_SIZE:]
        try:
            own = X25519PrivateKey.from_private_bytes(private_key[:POINT_SIZE])
            shared = own.exchange(X25519PublicKey.from_public_bytes(ephemeral_pub))
        except ValueError as exc:
            raise DecryptionFailure("cannot agree on envelope key") from exc
        own_pub = own.public_key().public_bytes(RAW, RAW_PUBLIC)
        key = self._envelope_key(shared, ephemeral_pub, own_pub)
        return self._decrypt(key, body, ephemeral_pub)

    # ---------- signatures ----------
    def _sign(self, private_key: bytes, message: bytes) -> bytes:
        try:
            signer = Ed25519PrivateKey.from_private_bytes(private_key[POINT_SIZE:])
        except ValueError as exc:
            raise CryptoError("malformed signing key") from exc
        return signer.sign(message)

    def _verify(self, public_key: bytes, message: bytes, signature: bytes) -> bool:
        try:
            Ed25519PublicKey.from_public_bytes(public_key[POINT_SIZE:]).verify(signature, message)
        except (InvalidSignature, ValueError):
            return False
        return True

    # ---------- symmetric ----------
    def _enc_sym(self, key: bytes, plaintext: bytes) -> bytes:
        return self._encrypt(key, plaintext, b"")

    def _dec_sym(self, key: bytes, ciphertext: bytes) -> bytes:
        return self._decrypt(key, ciphertext, b"")

    def _encrypt(self, key: bytes, plaintext: bytes, aad: bytes) -> bytes:
        nonce = self.rng.bytes(GCM_NONCE_SIZE)
        return nonce + AESGCM(key).encrypt(nonce, plaintext, aad)

    def _decrypt(self, key: bytes, ciphertext: bytes, aad: bytes) -> bytes:
        if len(ciphertext) < GCM_NONCE_SIZE + GCM_TAG_SIZE:
            raise DecryptionFailure("ciphertext too short")
        nonce, body = ciphertext[:GCM_NONCE_SIZE], ciphertext[GCM_NONCE_SIZE:]
        try:
            return AESGCM(key).decrypt(nonce, body, aad)
        except InvalidTag as exc:
            raise DecryptionFailure("authentication tag mismatch") from exc


class UnauthenticatedSuite(DefaultSuite):
    """
    Negative control: same keys and KDF, but every envelope is bare AES-256-CTR.
    Wrong keys and flipped bits decrypt to garbage instead of failing.
    """

    name = "unauthenticated"

    def _encrypt(self, key: bytes, plaintext: bytes, aad: bytes) -> bytes:
        nonce = self.rng.bytes(16)
        encryptor = Cipher(algorithms.AES(key), modes.CTR(nonce)).encryptor()
        return nonce + encryptor.update(plaintext) + encryptor.finalize()

    def _decrypt(self, key: bytes, ciphertext: bytes, aad: bytes) -> bytes:
        if len(ciphertext) < 16:
            raise DecryptionFailure("ciphertext too short")
        decryptor = Cipher(algorithms.AES(key), modes.CTR(ciphertext[:16])).decryptor()
        return decryptor.update(ciphertext[16:]) + decryptor.finalize()
