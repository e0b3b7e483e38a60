"""Minimal Standard MIDI File (format 0) writer and event scanner.

Only what the sequencer needs: a single track of note-on/note-off pairs
plus a tempo meta event, and a reader good enough to verify our own
output in tests and demos.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import FormatError, InputError

HEADER_CHUNK = b"MThd"
TRACK_CHUNK = b"MTrk"
META_TEMPO = 0x51
META_END_OF_TRACK = 0x2F


@dataclass(frozen=True)
class SmfNote:
    onset_tick: int
    duration: int
    pitch: int
    velocity: int
    channel: int = 0


def encode_var_len(value: int) -> bytes:
    """MIDI variable-length quantity: 7 bits per byte, MSB marks continuation."""
    if value < 0:
        raise InputError("variable-length values must be nonnegative")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def decode_var_len(data: bytes, offset: int) -> tuple[int, int]:
    value = 0
    for _ in range(4):
        if offset >= len(data):
            raise FormatError("truncated variable-length quantity")
        byte = data[offset]
        offset += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, offset
    raise FormatError("variable-length quantity longer than 4 bytes")


def write_smf0(notes: list[SmfNote], division: int, tempo_bpm: float) -> bytes:
    """Serialize notes into a single-track format-0 SMF."""
    if division <= 0 or division > 0x7FFF:
        raise InputError(f"division out of range: {division}")
    if tempo_bpm <= 0:
        raise InputError(f"tempo must be positive, got {tempo_bpm}")

    events: list[tuple[int, int, bytes]] = []
    for n in notes:
        if n.onset_tick < 0 or n.duration <= 0:
            raise InputError(f"bad note timing: {n}")
        ch = n.channel & 0x0F
        # Sort key 0/1 keeps a note-off ahead of a simultaneous note-on.
        events.append((n.onset_tick, 1, bytes([0x90 | ch, n.pitch & 0x7F, n.velocity & 0x7F])))
        events.append((n.onset_tick + n.duration, 0, bytes([0x80 | ch, n.pitch & 0x7F, 0])))
    events.sort(key=lambda e: (e[0], e[1]))

    mpqn = int(round(60_000_000 / tempo_bpm))
    track = bytearray()
    track += b"\x00\xff\x51\x03" + struct.pack(">I", mpqn)[1:]
    last_tick = 0
    for tick, _, msg in events:
        track += encode_var_len(tick - last_tick) + msg
        last_tick = tick
    track += b"\x00\xff\x2f\x00"

    header = HEADER_CHUNK + struct.pack(">IHHH", 6, 0, 1, division)
    return header + TRACK_CHUNK + struct.pack(">I", len(track)) + bytes(track)


@dataclass(frozen=True)
class SmfSummary:
    division: int
    tempo_bpm: float
    # (tick, "on"|"off", pitch, velocity) in file order
    note_events: list


def scan_smf0(data: bytes) -> SmfSummary:
    """Parse a format-0 SMF back into its note events.

    Understands running status and skips meta/sysex events other than
    tempo. Raises FormatError on anything structurally broken.
    """
    if len(data) < 14 or data[:4] != HEADER_CHUNK:
        raise FormatError("not a standard MIDI file")
    hlen, fmt, ntrks, division = struct.unpack(">IHHH", data[4:14])
    if hlen != 6 or fmt != 0 or ntrks != 1:
        raise FormatError(f"expected single-track format 0, got format {fmt} with {ntrks} tracks")
    if data[14:18] != TRACK_CHUNK:
        raise FormatError("missing track chunk")
    (tlen,) = struct.unpack(">I", data[18:22])
    track = data[22 : 22 + tlen]
    if len(track) != tlen:
        raise FormatError("truncated track chunk")

    tempo_bpm = 120.0
    note_events = []
    tick = 0
    offset = 0
    running_status = None
    while offset < len(track):
        delta, offset = decode_var_len(track, offset)
        tick += delta
        status = track[offset]
        if status & 0x80:
            offset += 1
            if status < 0xF0:
                running_status = status
        elif running_status is not None:
            status = running_status
        else:
            raise FormatError(f"data byte without running status at offset {offset}")

        if status == 0xFF:
            meta_type = track[offset]
            length, offset = decode_var_len(track, offset + 1)
            payload = track[offset : offset + length]
            offset += length
            if meta_type == META_TEMPO and length == 3:
                mpqn = int.from_bytes(payload, "big")
                tempo_bpm = 60_000_000 / mpqn
            if meta_type == META_END_OF_TRACK:
                break
        elif status in (0xF0, 0xF7):
            length, offset = decode_var_len(track, offset)
            offset += length
        else:
            kind = status & 0xF0
            if kind in (0xC0, 0xD0):
                offset += 1
            else:
                d1, d2 = track[offset], track[offset + 1]
                offset += 2
                if kind == 0x90 and d2 > 0:
                    note_events.append((tick, "on", d1, d2))
                elif kind == 0x80 or (kind == 0x90 and d2 == 0):
                    note_events.append((tick, "off", d1, d2))
    return SmfSummary(division=division, tempo_bpm=tempo_bpm, note_events=note_events)
