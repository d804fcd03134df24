"""Server-side audio duration decoding.

Recording durations are decoded from the uploaded bytes, never taken from
client claims. Two containers are accepted: RIFF/WAVE (PCM) and WebM with an
explicit Duration in its Info element (what MediaRecorder produces once the
recording is finalized). Anything else raises `UnsupportedAudio`, which the
HTTP layer maps to 415.
"""
from __future__ import annotations

import io
import struct
import wave

WEBM_MAGIC = b"\x1a\x45\xdf\xa3"

_SEGMENT = 0x18538067
_INFO = 0x1549A966
_TIMECODE_SCALE = 0x2AD7B1
_DURATION = 0x4489

_DEFAULT_TIMECODE_SCALE_NS = 1_000_000  # EBML default: one tick per millisecond


class UnsupportedAudio(Exception):
    def __init__(self, detail: str = "unsupported audio container"):
        super().__init__(detail)
        self.detail = detail


def sniff(data: bytes) -> str | None:
    """Identify the container: 'wav', 'webm', or None."""
    if data[:4] == b"RIFF" and data[8:12] == b"WAVE":
        return "wav"
    if data[:4] == WEBM_MAGIC:
        return "webm"
    return None


def decode_duration(data: bytes) -> float:
    """Decoded length in seconds of a WAV or WebM blob."""
    kind = sniff(data)
    if kind == "wav":
        return _wav_duration(data)
    if kind == "webm":
        return _webm_duration(data)
    raise UnsupportedAudio()


def _wav_duration(data: bytes) -> float:
    try:
        with wave.open(io.BytesIO(data)) as wf:
            rate = wf.getframerate()
            if rate <= 0:
                raise UnsupportedAudio("WAV frame rate is zero")
            return wf.getnframes() / rate
    except wave.Error as exc:
        raise UnsupportedAudio(f"malformed WAV: {exc}") from exc
    except EOFError as exc:
        raise UnsupportedAudio("truncated WAV") from exc


def _read_vint(data: bytes, pos: int, *, keep_marker: bool) -> tuple[int, int, bool]:
    """Read one EBML variable-length integer.

    Returns (value, next position, is_unknown). Element IDs keep their
    length-marker bit (`keep_marker=True`); sizes clear it, and an all-ones
    payload means "unknown size".
    """
    if pos >= len(data):
        raise UnsupportedAudio("truncated WebM")
    first = data[pos]
    if first == 0:
        raise UnsupportedAudio("invalid WebM varint")
    length = 8 - first.bit_length() + 1
    if pos + length > len(data):
        raise UnsupportedAudio("truncated WebM")
    raw = int.from_bytes(data[pos : pos + length], "big")
    marker = 1 << (7 * length)
    value = raw if keep_marker else raw - marker
    unknown = not keep_marker and value == marker - 1
    return value, pos + length, unknown


def _iter_elements(data: bytes, start: int, end: int):
    """Yield (element_id, payload_start, payload_end) over [start, end)."""
    pos = start
    while pos < end:
        element_id, pos, _ = _read_vint(data, pos, keep_marker=True)
        size, pos, unknown = _read_vint(data, pos, keep_marker=False)
        payload_end = end if unknown else min(pos + size, end)
        yield element_id, pos, payload_end
        pos = payload_end


def _webm_duration(data: bytes) -> float:
    scale_ns = _DEFAULT_TIMECODE_SCALE_NS
    duration_ticks: float | None = None
    for element_id, start, end in _iter_elements(data, 0, len(data)):
        if element_id != _SEGMENT:
            continue
        for inner_id, istart, iend in _iter_elements(data, start, end):
            if inner_id != _INFO:
                continue
            for field_id, fstart, fend in _iter_elements(data, istart, iend):
                body = data[fstart:fend]
                if field_id == _TIMECODE_SCALE and body:
                    scale_ns = int.from_bytes(body, "big")
                elif field_id == _DURATION:
                    if len(body) == 4:
                        duration_ticks = struct.unpack(">f", body)[0]
                    elif len(body) == 8:
                        duration_ticks = struct.unpack(">d", body)[0]
                    else:
                        raise UnsupportedAudio("WebM Duration has a non-float width")
            break
        break
    if duration_ticks is None:
        raise UnsupportedAudio("WebM carries no Duration element")
    if scale_ns <= 0:
        raise UnsupportedAudio("WebM TimecodeScale is zero")
    return duration_ticks * scale_ns / 1e9
