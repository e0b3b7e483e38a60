"""Open Sound Control 1.0 message encoding and decoding.

Messages only (no bundles): a null-padded address pattern, a type tag
string, then big-endian arguments, everything aligned to 4 bytes.
Supported tags are i (int32), f (float32), s (string) and b (blob).
Floats travel as 32-bit, so values survive a round trip exactly iff
they are float32-representable.

Decoding is strict: truncation, bad padding, unknown tags or trailing
bytes raise OscDecodeError with the offending offset, never a partial
message.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .errors import FormatError, InputError

INT32_MIN, INT32_MAX = -(2**31), 2**31 - 1


class OscDecodeError(FormatError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass(frozen=True)
class OscMessage:
    address: str
    args: tuple = field(default_factory=tuple)


def _padded_string(text: str) -> bytes:
    raw = text.encode("utf-8") + b"\x00"
    return raw + b"\x00" * (-len(raw) % 4)


def _padded_blob(data: bytes) -> bytes:
    return struct.pack(">i", len(data)) + data + b"\x00" * (-len(data) % 4)


def encode_message(msg: OscMessage) -> bytes:
    """Serialize a message. Python int -> i, float -> f, str -> s, bytes -> b."""
    if not msg.address.startswith("/"):
        raise InputError(f"OSC address must start with '/', got {msg.address!r}")
    tags = ","
    body = b""
    for arg in msg.args:
        if isinstance(arg, bool):
            raise InputError("booleans have no OSC 1.0 required type")
        if isinstance(arg, int):
            if not INT32_MIN <= arg <= INT32_MAX:
                raise InputError(f"int argument out of int32 range: {arg}")
            tags += "i"
            body += struct.pack(">i", arg)
        elif isinstance(arg, float):
            tags += "f"
            body += struct.pack(">f", arg)
        elif isinstance(arg, str):
            tags += "s"
            body += _padded_string(arg)
        elif isinstance(arg, (bytes, bytearray)):
            tags += "b"
            body += _padded_blob(bytes(arg))
        else:
            raise InputError(f"unsupported OSC argument type {type(arg).__name__}")
    return _padded_string(msg.address) + _padded_string(tags) + body


def _read_string(data: bytes, offset: int) -> tuple[str, int]:
    end = data.find(b"\x00", offset)
    if end < 0:
        raise OscDecodeError("unterminated string", offset)
    text = data[offset:end]
    # content plus its NUL, rounded up to a multiple of 4
    next_offset = offset + ((end + 1 - offset + 3) // 4) * 4
    if next_offset > len(data):
        raise OscDecodeError("string padding runs past the packet", end)
    if data[end:next_offset].strip(b"\x00"):
        raise OscDecodeError("string padding contains non-null bytes", end)
    try:
        return text.decode("utf-8"), next_offset
    except UnicodeDecodeError as exc:
        raise OscDecodeError(f"invalid UTF-8 in string: {exc}", offset) from exc


def decode_message(data: bytes) -> OscMessage:
    """Parse exactly one OSC message from a datagram."""
    if len(data) % 4 != 0:
        raise OscDecodeError(f"packet length {len(data)} is not a multiple of 4", len(data))
    if not data:
        raise OscDecodeError("empty packet", 0)
    address, offset = _read_string(data, 0)
    if not address.startswith("/"):
        raise OscDecodeError(f"address {address!r} does not start with '/'", 0)
    tags, offset = _read_string(data, offset)
    if not tags.startswith(","):
        raise OscDecodeError("type tag string does not start with ','", offset)

    args: list = []
    for tag in tags[1:]:
        if tag == "i":
            if offset + 4 > len(data):
                raise OscDecodeError("truncated int32 argument", offset)
            args.append(struct.unpack_from(">i", data, offset)[0])
            offset += 4
        elif tag == "f":
            if offset + 4 > len(data):
                raise OscDecodeError("truncated float32 argument", offset)
            args.append(struct.unpack_from(">f", data, offset)[0])
            offset += 4
        elif tag == "s":
            text, offset = _read_string(data, offset)
            args.append(text)
        elif tag == "b":
            if offset + 4 > len(data):
                raise OscDecodeError("truncated blob size", offset)
            size = struct.unpack_from(">i", data, offset)[0]
            if size < 0:
                raise OscDecodeError(f"negative blob size {size}", offset)
            offset += 4
            padded = size + (-size % 4)
            if offset + padded > len(data):
                raise OscDecodeError("truncated blob payload", offset)
            args.append(data[offset:offset + size])
            offset += padded
        else:
            raise OscDecodeError(f"unsupported type tag {tag!r}", offset)
    if offset != len(data):
        raise OscDecodeError(f"{len(data) - offset} trailing bytes after arguments", offset)
    return OscMessage(address=address, args=tuple(args))
