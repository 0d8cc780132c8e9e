"""Session key chain shared by the mobile user and the networks."""

from src.crypto_suite import CryptoSuite, SymmetricKey
from src.encoding import text, u64


def session_key_mu_hn(suite: CryptoSuite, master_key: SymmetricKey, id_mu: str, id_fn: str) -> SymmetricKey:
    """SK_MU-HN = h(K_MU-HN, id_MU, id_FN)."""
    return suite.kdf([master_key.raw, text(id_mu), text(id_fn)])


def session_key_mu_fn(
    suite: CryptoSuite,
    pass_no: int,
    id_fn: str,
    r_mu: bytes,
    r_fn: bytes,
    key_nonce_mu: bytes,
    key_nonce_fn: bytes,
) -> SymmetricKey:
    """SK_MU-FN = h(Pass_No, id_FN, r_MU, r_FN, r″_MU, r″_FN)."""
    return suite.kdf([u64(pass_no), text(id_fn), r_mu, r_fn, key_nonce_mu, key_nonce_fn])


def first_session_key(suite: CryptoSuite, chain_key: SymmetricKey, visa_no: int, pass_no: int) -> SymmetricKey:
    """SK′ = h(chain key, Visa_No, Pass_No). The chain key starts as SK_MU-FN."""
    return suite.kdf([chain_key.raw, u64(visa_no), u64(pass_no)])


def second_session_key(
    suite: CryptoSuite, first: SymmetricKey, master_key: SymmetricKey, service_nonce_mu: bytes
) -> SymmetricKey:
    """SK″ = h(SK′, K_MU-FN, r′_MU)."""
    return suite.kdf([first.raw, master_key.raw, service_nonce_mu])


def third_session_key(
    suite: CryptoSuite, second: SymmetricKey, first: SymmetricKey, service_nonce_fn: bytes
) -> SymmetricKey:
    """SK‴ = h(SK″, SK′, r′_FN). Becomes the next chain key."""
    return suite.kdf([second.raw, first.raw, service_nonce_fn])
