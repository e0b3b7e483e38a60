import pytest

from latentseq.errors import FormatError, InputError
from latentseq.midifile import (
    SmfNote,
    decode_var_len,
    encode_var_len,
    scan_smf0,
    write_smf0,
)


@pytest.mark.parametrize("value, encoded", [
    (0x00, b"\x00"),
    (0x40, b"\x40"),
    (0x7F, b"\x7f"),
    (0x80, b"\x81\x00"),
    (0x2000, b"\xc0\x00"),
    (0x3FFF, b"\xff\x7f"),
    (0x4000, b"\x81\x80\x00"),
    (0x0FFFFFFF, b"\xff\xff\xff\x7f"),
])
def test_var_len_known_values(value, encoded):
    assert encode_var_len(value) == encoded
    decoded, offset = decode_var_len(encoded, 0)
    assert decoded == value
    assert offset == len(encoded)


def test_var_len_round_trip_sweep():
    for value in list(range(0, 300)) + [2**14 - 1, 2**14, 2**21 - 1, 2**21]:
        decoded, _ = decode_var_len(encode_var_len(value), 0)
        assert decoded == value


def test_var_len_truncated():
    with pytest.raises(FormatError):
        decode_var_len(b"\x81", 0)


def test_header_layout():
    data = write_smf0([], division=480, tempo_bpm=120.0)
    assert data[:4] == b"MThd"
    assert data[4:8] == (6).to_bytes(4, "big")
    assert data[8:10] == (0).to_bytes(2, "big")   # format 0
    assert data[10:12] == (1).to_bytes(2, "big")  # one track
    assert data[12:14] == (480).to_bytes(2, "big")
    assert data[14:18] == b"MTrk"


def test_write_scan_round_trip():
    notes = [
        SmfNote(onset_tick=0, duration=60, pitch=60, velocity=100),
        SmfNote(onset_tick=480, duration=60, pitch=62, velocity=90),
        SmfNote(onset_tick=480, duration=240, pitch=48, velocity=40),
    ]
    summary = scan_smf0(write_smf0(notes, division=480, tempo_bpm=120.0))
    ons = [e for e in summary.note_events if e[1] == "on"]
    offs = [e for e in summary.note_events if e[1] == "off"]
    assert ons == [(0, "on", 60, 100), (480, "on", 62, 90), (480, "on", 48, 40)]
    assert sorted(offs) == [(60, "off", 60, 0), (540, "off", 62, 0), (720, "off", 48, 0)]


def test_simultaneous_off_before_on():
    # A note ending exactly where the next begins must close first.
    notes = [
        SmfNote(onset_tick=0, duration=120, pitch=60, velocity=100),
        SmfNote(onset_tick=120, duration=120, pitch=60, velocity=100),
    ]
    events = scan_smf0(write_smf0(notes, division=480, tempo_bpm=120.0)).note_events
    kinds_at_120 = [e[1] for e in events if e[0] == 120]
    assert kinds_at_120 == ["off", "on"]


def test_scan_rejects_garbage():
    with pytest.raises(FormatError):
        scan_smf0(b"RIFF" + b"\x00" * 20)
    with pytest.raises(FormatError):
        scan_smf0(write_smf0([], 480, 120.0)[:-3])


def test_write_rejects_bad_notes():
    with pytest.raises(InputError):
        write_smf0([SmfNote(onset_tick=-1, duration=60, pitch=60, velocity=100)], 480, 120.0)
    with pytest.raises(InputError):
        write_smf0([SmfNote(onset_tick=0, duration=0, pitch=60, velocity=100)], 480, 120.0)
    with pytest.raises(InputError):
        write_smf0([], division=0, tempo_bpm=120.0)
