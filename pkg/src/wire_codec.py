"""
Wire format: one tag byte, then the message fields in protocol order, each framed with a
4-byte big-endian length. Nested certificates use the same framing inside their field.
"""

from dataclasses import fields as dataclass_fields
from typing import Any, Callable, Dict, List, Tuple, Type

from src.encoding import pack_fields, read_text, read_u64, text, u64, unpack_fields
from src.errors import MalformedMessage, RejectReason
from src.messages import (
    FLOW_LABELS,
    ForwardToHN,
    HNDecision,
    PassportRevoke,
    ProtocolMessage,
    Reject,
    ServiceRequest,
    ServiceResponse,
    VisaGrant,
    VisaRequest,
    VisaRevoke,
)
from src.tokens import Certificate, SealedPassport, SealedVisa
from utils import hex_dump

TAGS: Dict[int, Type[Any]] = {
    0x01: VisaRequest,
    0x02: ForwardToHN,
    0x03: HNDecision,
    0x04: VisaGrant,
    0x05: ServiceRequest,
    0x06: ServiceResponse,
    0x07: PassportRevoke,
    0x08: VisaRevoke,
    0x09: Reject,
}
TAG_OF = {cls: tag for tag, cls in TAGS.items()}


def _decode_reason(field: bytes) -> RejectReason:
    if len(field) != 1 or field[0] not in RejectReason._value2member_map_:
        raise MalformedMessage("unknown reject reason")
    return RejectReason(field[0])


# kind → (encoder, decoder)
CODECS: Dict[type, Tuple[Callable[[Any], bytes], Callable[[bytes], Any]]] = {
    bytes: (lambda value: value, lambda field: field),
    int: (u64, read_u64),
    str: (text, read_text),
    Certificate: (lambda cert: cert.to_bytes(), Certificate.from_bytes),
    SealedPassport: (lambda sp: sp.ciphertext, SealedPassport),
    SealedVisa: (lambda sv: sv.ciphertext, SealedVisa),
    RejectReason: (lambda reason: bytes([reason]), _decode_reason),
}


LAYOUT: Dict[Type[Any], List[Tuple[str, type]]] = {
    cls: [(f.name, f.type) for f in dataclass_fields(cls)] for cls in TAGS.values()
}


def encode(message: ProtocolMessage) -> bytes:
    cls = type(message)
    if cls not in TAG_OF:
        raise TypeError(f"not a protocol message: {cls.__name__}")
    encoded = [CODECS[kind][0](getattr(message, name)) for name, kind in LAYOUT[cls]]
    return bytes([TAG_OF[cls]]) + pack_fields(encoded)


def decode(data: bytes) -> ProtocolMessage:
    """
    Total decoder: returns a message or raises MalformedMessage, for any input bytes.
    """
    if not data:
        raise MalformedMessage("empty input")
    cls = TAGS.get(data[0])
    if cls is None:
        raise MalformedMessage(f"unknown tag 0x{data[0]:02x}")
    layout = LAYOUT[cls]
    raw_fields = unpack_fields(data[1:], len(layout))
    values = {name: CODECS[kind][1](raw) for (name, kind), raw in zip(layout, raw_fields)}
    message: ProtocolMessage = cls(**values)
    return message


def message_name(message: ProtocolMessage) -> str:
    label = FLOW_LABELS.get(type(message))
    name = type(message).__name__
    return f"{name}({label})" if label else name


def describe(message: ProtocolMessage) -> List[Tuple[str, str]]:
    """Human-readable (field, value) pairs; opaque bytes are shown by length and prefix."""
    rows = []
    for name, kind in LAYOUT[type(message)]:
        value = getattr(message, name)
        if kind is int or kind is str:
            rows.append((name, repr(value)))
        elif kind is RejectReason:
            rows.append((name, value.label))
        elif kind is Certificate:
            rows.append((name, f"cert<{value.subject_id}, {value.role.name.lower()}, exp={value.expiry}>"))
        else:
            raw = CODECS[kind][0](value)
            rows.append((name, f"{len(raw)}B {raw[:8].hex()}{'…' if len(raw) > 8 else ''}"))
    return rows


def annotate(data: bytes) -> str:
    """Annotated hex dump of one wire message (decoded view, then raw bytes)."""
    lines = []
    try:
        message = decode(data)
    except MalformedMessage as exc:
        lines.append(f"<malformed: {exc}> {len(data)}B")
    else:
        lines.append(f"{message_name(message)} {len(data)}B")
        lines += [f"  {name} = {value}" for name, value in describe(message)]
    if data:
        lines.append(hex_dump(data, indent="  "))
    return "\n".join(lines)
