"""Binary framing codec for the skin readout stream.

Record layout (little-endian), 216 bytes total:

    0xA5 0x5A | u32 seq | u64 timestamp_us | 100 x u16 counts | u16 crc

The CRC is CRC-16/CCITT (poly 0x1021, init 0xFFFF, unreflected) over the
212-byte payload between magic and CRC.  The decoder resynchronizes on the
magic after corruption and never raises on arbitrary input.  Capture files
(extension ``.skn``) are raw concatenations of records.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .grid import GRID_SHAPE, RawFrame

MAGIC = b"\xa5\x5a"
HEADER = struct.Struct("<IQ")      # seq, timestamp_us
PAYLOAD_SIZE = HEADER.size + 200   # + 100 x u16 counts
RECORD_SIZE = 2 + PAYLOAD_SIZE + 2


def _build_crc_table(poly: int = 0x1021) -> list[int]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ poly) if crc & 0x8000 else (crc << 1)
            crc &= 0xFFFF
        table.append(crc)
    return table


_CRC_TABLE = _build_crc_table()


def crc16_ccitt(data: bytes, init: int = 0xFFFF) -> int:
    crc = init
    for byte in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[(crc >> 8) ^ byte]
    return crc


@dataclass
class WireStats:
    """Decoder diagnostics for one pass over a byte stream."""

    frames_ok: int = 0
    crc_dropped: int = 0
    skipped_bytes: int = 0
    truncated_tail: bool = False

    def merge(self, other: "WireStats") -> None:
        self.frames_ok += other.frames_ok
        self.crc_dropped += other.crc_dropped
        self.skipped_bytes += other.skipped_bytes
        self.truncated_tail = self.truncated_tail or other.truncated_tail


def encode_frame(frame: RawFrame) -> bytes:
    payload = HEADER.pack(frame.seq, frame.timestamp_us) + \
        frame.counts.astype("<u2").tobytes()
    return MAGIC + payload + struct.pack("<H", crc16_ccitt(payload))


def encode_wire(frames) -> bytes:
    return b"".join(encode_frame(f) for f in frames)


def decode_wire(data: bytes) -> tuple[list[RawFrame], WireStats]:
    """Scan a byte buffer for valid records.

    Corrupted records fail their CRC and are dropped; scanning resumes one
    byte past the failed magic so later records are still recovered.  A
    magic with fewer than RECORD_SIZE bytes remaining marks a truncated
    tail.  Total function: any byte input yields (frames, stats).
    """
    frames: list[RawFrame] = []
    stats = WireStats()
    n = len(data)
    pos = 0
    while True:
        start = data.find(MAGIC, pos)
        if start < 0:
            stats.skipped_bytes += n - pos
            break
        stats.skipped_bytes += start - pos
        if n - start < RECORD_SIZE:
            stats.truncated_tail = True
            stats.skipped_bytes += n - start
            break
        payload = data[start + 2:start + 2 + PAYLOAD_SIZE]
        (crc_recv,) = struct.unpack_from("<H", data, start + 2 + PAYLOAD_SIZE)
        if crc16_ccitt(payload) == crc_recv:
            seq, timestamp_us = HEADER.unpack_from(payload)
            counts = np.frombuffer(payload, dtype="<u2",
                                   offset=HEADER.size).reshape(GRID_SHAPE)
            frames.append(RawFrame(counts=counts.copy(), seq=seq,
                                   timestamp_us=timestamp_us))
            stats.frames_ok += 1
            pos = start + RECORD_SIZE
        else:
            stats.crc_dropped += 1
            pos = start + 1
    return frames, stats


class StreamDecoder:
    """Incremental decoder for live byte streams (keeps a partial tail)."""

    def __init__(self):
        self._buf = bytearray()
        self.stats = WireStats()

    def feed(self, chunk: bytes) -> list[RawFrame]:
        self._buf.extend(chunk)
        frames: list[RawFrame] = []
        n = len(self._buf)
        pos = 0
        data = bytes(self._buf)
        while True:
            start = data.find(MAGIC, pos)
            if start < 0:
                # keep a trailing first-magic-byte: its partner may arrive next
                keep = 1 if n > pos and data[n - 1] == MAGIC[0] else 0
                self.stats.skipped_bytes += n - pos - keep
                pos = n - keep
                break
            self.stats.skipped_bytes += start - pos
            if n - start < RECORD_SIZE:
                pos = start  # keep the partial record for the next feed
                break
            payload = data[start + 2:start + 2 + PAYLOAD_SIZE]
            (crc_recv,) = struct.unpack_from("<H", data, start + 2 + PAYLOAD_SIZE)
            if crc16_ccitt(payload) == crc_recv:
                seq, timestamp_us = HEADER.unpack_from(payload)
                counts = np.frombuffer(payload, dtype="<u2",
                                       offset=HEADER.size).reshape(GRID_SHAPE)
                frames.append(RawFrame(counts=counts.copy(), seq=seq,
                                       timestamp_us=timestamp_us))
                self.stats.frames_ok += 1
                pos = start + RECORD_SIZE
            else:
                self.stats.crc_dropped += 1
                pos = start + 1
        del self._buf[:pos]
        return frames


def write_capture(path, frames) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_wire(frames))


def read_capture(path) -> tuple[list[RawFrame], WireStats]:
    with open(path, "rb") as fh:
        return decode_wire(fh.read())
