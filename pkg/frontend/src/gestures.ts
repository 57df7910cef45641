// Synthetic pointer sequences for the 14 gestures, used by the
// end-to-end tests (and handy for demo mode).  All coordinates are canvas
// pixels; the canvas y axis grows downward, so an upward swipe moves
// toward smaller y.

import { PointerTrace } from './rasterize';

export const GESTURE_NAMES = [
  'translate_x_pos', // two-finger pinch-in
  'translate_x_neg', // single-finger push (rising pressure)
  'translate_y_pos', // swipe right
  'translate_y_neg', // swipe left
  'translate_z_pos', // swipe up
  'translate_z_neg', // swipe down
  'rotate_x_pos', // two-finger clockwise circle
  'rotate_x_neg', // two-finger anti-clockwise circle
  'rotate_y_pos', // two-finger swipe up
  'rotate_y_neg', // two-finger swipe down
  'rotate_z_pos', // two-finger swipe right
  'rotate_z_neg', // two-finger swipe left
  'aux_init_pose', // five-finger pinch-in
  'aux_home', // five-finger pinch-out
] as const;

export type GestureName = (typeof GESTURE_NAMES)[number];

export interface GestureFrameFn {
  /** pointer traces at phase t in [0, 1]; empty array = no contact */
  (t: number): PointerTrace[];
}

function swipe(
  width: number,
  height: number,
  dir: 'up' | 'down' | 'left' | 'right',
  fingers: number,
  pressure = 0.6,
): GestureFrameFn {
  const cx = width / 2;
  const cy = height / 2;
  const lenX = width * 0.55;
  const lenY = height * 0.55;
  const gap = width * 0.3;
  return (t) => {
    let x = cx;
    let y = cy;
    if (dir === 'up') y = cy + lenY / 2 - lenY * t;
    if (dir === 'down') y = cy - lenY / 2 + lenY * t;
    if (dir === 'right') x = cx - lenX / 2 + lenX * t;
    if (dir === 'left') x = cx + lenX / 2 - lenX * t;
    const traces: PointerTrace[] = [];
    for (let f = 0; f < fingers; f++) {
      const off = fingers === 1 ? 0 : (f - (fingers - 1) / 2) * gap;
      const horizontal = dir === 'up' || dir === 'down';
      traces.push({
        id: f,
        x: horizontal ? x + off : x,
        y: horizontal ? y : y + off,
        pressure,
      });
    }
    return traces;
  };
}

function pinch(
  width: number,
  height: number,
  fingers: number,
  inward: boolean,
): GestureFrameFn {
  const cx = width / 2;
  const cy = height / 2;
  const rMax = Math.min(width, height) * 0.32;
  const rMin = rMax * 0.25;
  return (t) => {
    const r = inward ? rMax - (rMax - rMin) * t : rMin + (rMax - rMin) * t;
    const traces: PointerTrace[] = [];
    for (let f = 0; f < fingers; f++) {
      const ang = (2 * Math.PI * f) / fingers + 0.4;
      traces.push({
        id: f,
        x: cx + r * Math.cos(ang),
        y: cy + r * Math.sin(ang),
        pressure: 0.6,
      });
    }
    return traces;
  };
}

function push(width: number, height: number): GestureFrameFn {
  const cx = width / 2;
  const cy = height / 2;
  return (t) => [{ id: 0, x: cx, y: cy, pressure: 0.2 + 0.65 * t }];
}

function circle(width: number, height: number, clockwise: boolean): GestureFrameFn {
  const cx = width / 2;
  const cy = height / 2;
  const r = Math.min(width, height) * 0.25;
  return (t) => {
    // canvas y grows downward: a screen-clockwise stroke (as the user sees
    // it) means decreasing math angle in grid space
    const sweep = 2 * Math.PI * 1.05;
    const ang = clockwise ? -sweep * t : sweep * t;
    const traces: PointerTrace[] = [];
    for (const phase of [0, Math.PI]) {
      traces.push({
        id: phase === 0 ? 0 : 1,
        x: cx + r * Math.cos(ang + phase),
        y: cy - r * Math.sin(ang + phase), // minus: grid v mirrors canvas y
        pressure: 0.6,
      });
    }
    return traces;
  };
}

export function gestureScript(
  name: GestureName,
  width: number,
  height: number,
): GestureFrameFn {
  switch (name) {
    case 'translate_z_pos':
      return swipe(width, height, 'up', 1);
    case 'translate_z_neg':
      return swipe(width, height, 'down', 1);
    case 'translate_y_pos':
      return swipe(width, height, 'right', 1);
    case 'translate_y_neg':
      return swipe(width, height, 'left', 1);
    case 'translate_x_pos':
      return pinch(width, height, 2, true);
    case 'translate_x_neg':
      return push(width, height);
    case 'rotate_y_pos':
      return swipe(width, height, 'up', 2);
    case 'rotate_y_neg':
      return swipe(width, height, 'down', 2);
    case 'rotate_z_pos':
      return swipe(width, height, 'right', 2);
    case 'rotate_z_neg':
      return swipe(width, height, 'left', 2);
    case 'rotate_x_pos':
      return circle(width, height, true);
    case 'rotate_x_neg':
      return circle(width, height, false);
    case 'aux_init_pose':
      return pinch(width, height, 5, true);
    case 'aux_home':
      return pinch(width, height, 5, false);
  }
}
