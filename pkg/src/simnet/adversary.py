"""
Network adversary: captures, replays, reorders, alters and injects bus traffic, and
signs with its own keys. It never holds an honest actor's private key.
"""

from dataclasses import replace
from typing import Optional

from logging_config import simnet_logger
from src.crypto_suite import CryptoSuite, KeyPair
from src.encoding import MAX_U64, pack_fields
from src.errors import ScenarioError
from src.messages import ForwardToHN, ServiceRequest, VisaRequest
from src.simnet.coordinator import SimNet
from src.simnet.trace import Trace
from src.tokens import Certificate, PassportBody, SealedPassport, SealedVisa, VisaBody
from src.wire_codec import decode, encode

TOKEN_KINDS = ("passport", "visa")


def adversary_replay(net: SimNet, message_index: int, deliver_to: str, sender: Optional[str] = None) -> Trace:
    """
    Re-sends the bytes of trace entry `message_index` to `deliver_to` and runs the bus
    until it is quiet. Replies go to `sender`, by default the original sender.
    """
    try:
        entry = net.trace.entry(message_index)
    except IndexError as exc:
        raise ScenarioError(str(exc)) from exc
    net.node(deliver_to)
    net.send(sender or entry.sender, deliver_to, entry.raw, origin="replay")
    simnet_logger.info(f"replaying #{message_index} ({entry.name}) to {deliver_to}")
    net.deliver_all()
    return net.trace


def _default_body(kind: str, suite: CryptoSuite) -> PassportBody | VisaBody:
    serial = 1 + suite.rng.randbelow(1 << 32)
    if kind == "passport":
        return PassportBody("mallory", serial, MAX_U64, suite.random_key(), {"issuer_id": "mallory"})
    return VisaBody(serial, serial, MAX_U64, suite.random_key(), {"issuer_id": "mallory"})


def adversary_forge_token(
    suite: CryptoSuite,
    kind: str,
    attacker_keys: KeyPair,
    target_pk: bytes,
    body: PassportBody | VisaBody | None = None,
    signature: Optional[bytes] = None,
) -> bytes:
    """
    Builds a sealed token that parses like an honest one but carries the attacker's
    signature, sealed to the honest verifier's public key.

    Args:
        suite (CryptoSuite): The attacker's suite.
        kind (str): "passport" or "visa".
        attacker_keys (KeyPair): Keys the attacker signs with.
        target_pk (bytes): Public key of the HN (passport) or FN (visa) that will open it.
        body (PassportBody | VisaBody | None): Fields to claim; random ones when None.
        signature (bytes | None): A signature to reuse instead of signing, e.g. an honest
            token's signature over different fields.

    Returns:
        bytes: The sealed token ciphertext.
    """
    if kind not in TOKEN_KINDS:
        raise ValueError(f"Unknown token kind: {kind}")
    if attacker_keys.public_key == target_pk:
        raise ValueError("attacker keys must differ from the verifier's keys")
    body = body or _default_body(kind, suite)
    raw = body.to_bytes()
    if signature is None:
        signature = suite.sign(attacker_keys.private_key, raw)
    return suite.seal_asym(target_pk, pack_fields([raw, signature]))


def splice_token(raw: bytes, kind: str, forged: bytes) -> bytes:
    """Swaps the token inside an intercepted VisaRequest/ForwardToHN (passport) or ServiceRequest (visa)."""
    message = decode(raw)
    if kind == "passport" and isinstance(message, (VisaRequest, ForwardToHN)):
        return encode(replace(message, sealed_passport=SealedPassport(forged)))
    if kind == "visa" and isinstance(message, ServiceRequest):
        return encode(replace(message, sealed_visa=SealedVisa(forged)))
    raise ScenarioError(f"cannot carry a forged {kind} inside {type(message).__name__}")


def forge_in_flight(net: SimNet, suite: CryptoSuite, kind: str, attacker_keys: KeyPair, target_pk: bytes) -> None:
    """Replaces the token in the next queued message with a forgery."""
    top = net.peek()
    if top is None:
        raise ScenarioError("no message in flight to carry a forged token")
    forged = adversary_forge_token(suite, kind, attacker_keys, target_pk)
    net.rewrite(splice_token(top.raw, kind, forged), origin=f"forged-{kind}")
    simnet_logger.info(f"forged {kind} spliced into {top.sender} -> {top.recipient}")


def substitute_certificate(raw: bytes, cert: Certificate) -> bytes:
    """Rewrites the FN identity of an intercepted ForwardToHN to another certified FN."""
    message = decode(raw)
    if not isinstance(message, ForwardToHN):
        raise ScenarioError(f"no Cert_FN in {type(message).__name__}")
    return encode(replace(message, cert_fn=cert))
