// Binary frame records shared with the session service.
// Layout (little-endian, 216 bytes): A5 5A | u32 seq | u64 timestamp_us |
// 100 x u16 counts | u16 CRC-16/CCITT over the 212-byte payload.

export const RECORD_SIZE = 216;
export const GRID_CELLS = 100;
const MAGIC0 = 0xa5;
const MAGIC1 = 0x5a;

const CRC_TABLE = (() => {
  const table = new Uint16Array(256);
  for (let byte = 0; byte < 256; byte++) {
    let crc = byte << 8;
    for (let bit = 0; bit < 8; bit++) {
      crc = crc & 0x8000 ? ((crc << 1) ^ 0x1021) & 0xffff : (crc << 1) & 0xffff;
    }
    table[byte] = crc;
  }
  return table;
})();

export function crc16ccitt(data: Uint8Array, init = 0xffff): number {
  let crc = init;
  for (let i = 0; i < data.length; i++) {
    crc = ((crc << 8) & 0xffff) ^ CRC_TABLE[((crc >> 8) ^ data[i]) & 0xff];
  }
  return crc;
}

export interface FrameRecord {
  seq: number;
  timestampUs: bigint;
  counts: Uint16Array; // 100 cells, row-major [v][u]
}

export function encodeFrame(frame: FrameRecord): Uint8Array {
  if (frame.counts.length !== GRID_CELLS) {
    throw new Error(`expected ${GRID_CELLS} counts, got ${frame.counts.length}`);
  }
  const buf = new Uint8Array(RECORD_SIZE);
  const view = new DataView(buf.buffer);
  buf[0] = MAGIC0;
  buf[1] = MAGIC1;
  view.setUint32(2, frame.seq >>> 0, true);
  view.setBigUint64(6, frame.timestampUs, true);
  for (let i = 0; i < GRID_CELLS; i++) {
    view.setUint16(14 + 2 * i, frame.counts[i], true);
  }
  const crc = crc16ccitt(buf.subarray(2, RECORD_SIZE - 2));
  view.setUint16(RECORD_SIZE - 2, crc, true);
  return buf;
}

export interface DecodeResult {
  frames: FrameRecord[];
  crcDropped: number;
  skippedBytes: number;
}

export function decodeFrames(data: Uint8Array): DecodeResult {
  const frames: FrameRecord[] = [];
  let crcDropped = 0;
  let skippedBytes = 0;
  let pos = 0;
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  while (pos + RECORD_SIZE <= data.length) {
    if (data[pos] !== MAGIC0 || data[pos + 1] !== MAGIC1) {
      pos += 1;
      skippedBytes += 1;
      continue;
    }
    const payload = data.subarray(pos + 2, pos + RECORD_SIZE - 2);
    const crc = view.getUint16(pos + RECORD_SIZE - 2, true);
    if (crc16ccitt(payload) !== crc) {
      crcDropped += 1;
      pos += 1;
      continue;
    }
    const counts = new Uint16Array(GRID_CELLS);
    for (let i = 0; i < GRID_CELLS; i++) {
      counts[i] = view.getUint16(pos + 14 + 2 * i, true);
    }
    frames.push({
      seq: view.getUint32(pos + 2, true),
      timestampUs: view.getBigUint64(pos + 6, true),
      counts,
    });
    pos += RECORD_SIZE;
  }
  return { frames, crcDropped, skippedBytes };
}
