from dataclasses import dataclass, field

from src.crypto_suite import SymmetricKey
from src.encoding import pack_fields, read_text, read_u64, text, u64, unpack_fields
from src.errors import MalformedMessage
from src.tokens import Certificate, SealedPassport

CARD_MAGIC = b"pvkit-card/1"


@dataclass(frozen=True)
class SmartCard:
    """
    What the HN hands the MU at registration.

    File layout is length-prefixed: magic, id_MU, sc_id, K_MU-HN, SealedPassport,
    Pass_No, Cert_HN.
    """

    id_mu: str
    sc_id: bytes
    master_key: SymmetricKey = field(repr=False)
    sealed_passport: SealedPassport = field(repr=False)
    pass_no: int
    cert_hn: Certificate

    def to_bytes(self) -> bytes:
        return pack_fields(
            [
                CARD_MAGIC,
                text(self.id_mu),
                self.sc_id,
                self.master_key.raw,
                self.sealed_passport.ciphertext,
                u64(self.pass_no),
                self.cert_hn.to_bytes(),
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "SmartCard":
        magic, id_mu, sc_id, master_key, passport, pass_no, cert = unpack_fields(data, 7)
        if magic != CARD_MAGIC:
            raise MalformedMessage("not a smart card file")
        try:
            key = SymmetricKey(master_key)
        except ValueError as exc:
            raise MalformedMessage(str(exc)) from exc
        return cls(
            id_mu=read_text(id_mu),
            sc_id=sc_id,
            master_key=key,
            sealed_passport=SealedPassport(passport),
            pass_no=read_u64(pass_no),
            cert_hn=Certificate.from_bytes(cert),
        )

    def save(self, path: str) -> None:
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path: str) -> "SmartCard":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())
