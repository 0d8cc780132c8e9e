"""
Canonical length-prefixed field packing.

Every field is written as a 4-byte big-endian length followed by its bytes. The same
framing feeds the KDF, token bodies, the plaintexts inside symmetric envelopes, and
the wire codec, so two different field lists can never encode to the same bytes.
"""

import struct
from typing import Dict, List, Sequence

from src.errors import MalformedMessage

LENGTH = struct.Struct(">I")
U64 = struct.Struct(">Q")
MAX_U64 = 2**64 - 1


def pack_fields(fields: Sequence[bytes]) -> bytes:
    out = bytearray()
    for field in fields:
        out += LENGTH.pack(len(field))
        out += field
    return bytes(out)


def unpack_fields(data: bytes, count: int | None = None) -> List[bytes]:
    """
    Splits `data` back into its fields.

    Args:
        data (bytes): Packed fields.
        count (int | None): Exact number of fields expected, or None for any.

    Returns:
        List[bytes]: The fields in order.

    Raises:
        MalformedMessage: On a short read, trailing bytes, or a field-count mismatch.
    """
    fields: List[bytes] = []
    offset = 0
    view = memoryview(data)
    while offset < len(data):
        if len(data) - offset < LENGTH.size:
            raise MalformedMessage("truncated length prefix")
        (length,) = LENGTH.unpack_from(view, offset)
        offset += LENGTH.size
        if length > len(data) - offset:
            raise MalformedMessage("field runs past end of input")
        fields.append(bytes(view[offset : offset + length]))
        offset += length
    if count is not None and len(fields) != count:
        raise MalformedMessage(f"expected {count} fields, found {len(fields)}")
    return fields


def u64(value: int) -> bytes:
    if not 0 <= value <= MAX_U64:
        raise ValueError(f"value out of u64 range: {value}")
    return U64.pack(value)


def read_u64(field: bytes) -> int:
    if len(field) != U64.size:
        raise MalformedMessage("u64 field must be 8 bytes")
    (value,) = U64.unpack(field)
    return int(value)


def flag(value: bool) -> bytes:
    return b"\x01" if value else b"\x00"


def read_flag(field: bytes) -> bool:
    if field not in (b"\x00", b"\x01"):
        raise MalformedMessage("flag field must be 0x00 or 0x01")
    return field == b"\x01"


def text(value: str) -> bytes:
    return value.encode("utf-8")


def read_text(field: bytes) -> str:
    try:
        return field.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedMessage("text field is not valid UTF-8") from exc


def pack_map(data: Dict[str, str]) -> bytes:
    """Sorted key/value pairs, alternating, in one packed block."""
    fields: List[bytes] = []
    for key in sorted(data):
        fields += [text(key), text(data[key])]
    return pack_fields(fields)


def unpack_map(block: bytes) -> Dict[str, str]:
    fields = unpack_fields(block)
    if len(fields) % 2:
        raise MalformedMessage("map block has an odd number of fields")
    keys = [read_text(f) for f in fields[0::2]]
    if keys != sorted(keys) or len(set(keys)) != len(keys):
        raise MalformedMessage("map keys must be sorted and unique")
    return dict(zip(keys, (read_text(f) for f in fields[1::2])))
