// Pointer traces -> 10x10 tactile frames.
// The canvas maps onto the skin's 100 mm x 140 mm aperture: u (columns)
// spans the width, v (rows) the height with v increasing upward.  Each
// active pointer becomes a Gaussian blob (sigma 0.8 cells); amplitude
// comes from the pressure proxy where 1.0 is full scale (100 kPa).

import { FrameRecord, GRID_CELLS } from './codec';

export const GRID = 10;
export const BLOB_SIGMA = 0.8;
export const MOUSE_PRESSURE = 0.6; // 60 kPa-equivalent fallback
export const SKIN_ASPECT = 140 / 100; // height / width of the aperture

const COUNTS_BASELINE = 500;
const COUNTS_PER_UNIT = 1000;

export interface PointerTrace {
  id: number;
  x: number; // canvas px
  y: number; // canvas px, growing downward
  pressure: number; // 0..1, full scale = saturating contact
}

export function canvasToGrid(
  x: number,
  y: number,
  width: number,
  height: number,
): [number, number] {
  const u = (x / width) * 9;
  const v = ((height - y) / height) * 9; // grid v grows upward
  return [u, v];
}

export function rasterize(
  traces: PointerTrace[],
  width: number,
  height: number,
): Float32Array {
  const frame = new Float32Array(GRID_CELLS);
  for (const trace of traces) {
    const [cu, cv] = canvasToGrid(trace.x, trace.y, width, height);
    const amp = Math.min(Math.max(trace.pressure, 0), 1);
    if (amp <= 0) continue;
    for (let v = 0; v < GRID; v++) {
      for (let u = 0; u < GRID; u++) {
        const d2 = (u - cu) * (u - cu) + (v - cv) * (v - cv);
        frame[v * GRID + u] += amp * Math.exp(-d2 / (2 * BLOB_SIGMA * BLOB_SIGMA));
      }
    }
  }
  for (let i = 0; i < GRID_CELLS; i++) {
    frame[i] = Math.min(frame[i], 1.0); // clamp at full scale
  }
  return frame;
}

export function frameToCounts(values: Float32Array): Uint16Array {
  const counts = new Uint16Array(GRID_CELLS);
  for (let i = 0; i < GRID_CELLS; i++) {
    const c = Math.round(COUNTS_BASELINE + COUNTS_PER_UNIT * values[i]);
    counts[i] = Math.min(Math.max(c, 0), 0xffff);
  }
  return counts;
}

export function makeFrameRecord(
  values: Float32Array,
  seq: number,
  timestampUs: bigint,
): FrameRecord {
  return { seq, timestampUs, counts: frameToCounts(values) };
}
