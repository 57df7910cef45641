// Rendering: probability bars, heatmap of the last sent frame, and a
// three-view end-effector position display with an orientation triad.

import { UiState } from './client';
import { GRID } from './rasterize';

export const CLASS_NAMES = [
  'translate_x_pos', 'translate_x_neg', 'translate_y_pos', 'translate_y_neg',
  'translate_z_pos', 'translate_z_neg', 'rotate_x_pos', 'rotate_x_neg',
  'rotate_y_pos', 'rotate_y_neg', 'rotate_z_pos', 'rotate_z_neg',
  'aux_init_pose', 'aux_home', 'invalid',
];

export function renderProbBars(root: HTMLElement, state: UiState) {
  const rows = root.querySelectorAll<HTMLElement>('.prob-row');
  rows.forEach((row, i) => {
    const bar = row.querySelector<HTMLElement>('.prob-fill')!;
    const pct = Math.round((state.probs[i] ?? 0) * 100);
    bar.style.width = `${pct}%`;
    row.classList.toggle('active', state.active === CLASS_NAMES[i]);
  });
}

export function buildProbBars(root: HTMLElement) {
  root.innerHTML = '';
  for (const name of CLASS_NAMES) {
    const row = document.createElement('div');
    row.className = 'prob-row';
    row.innerHTML = `<span class="prob-label">${name}</span>` +
      `<span class="prob-track"><span class="prob-fill"></span></span>`;
    root.appendChild(row);
  }
}

export function renderHeatmap(canvas: HTMLCanvasElement, frame: Float32Array | null) {
  const ctx = canvas.getContext('2d')!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (!frame) return;
  const cw = canvas.width / GRID;
  const ch = canvas.height / GRID;
  for (let v = 0; v < GRID; v++) {
    for (let u = 0; u < GRID; u++) {
      const val = Math.min(Math.max(frame[v * GRID + u], 0), 1);
      const hue = 240 - 240 * val;
      ctx.fillStyle = val > 0.01 ? `hsl(${hue}, 85%, ${25 + 35 * val}%)` : '#101418';
      // grid v grows upward; canvas y grows downward
      ctx.fillRect(u * cw, (GRID - 1 - v) * ch, cw - 1, ch - 1);
    }
  }
}

function quatRotate(q: number[], v: number[]): number[] {
  const [w, x, y, z] = q;
  // R(q) * v via the sandwich product expanded
  const uvx = y * v[2] - z * v[1];
  const uvy = z * v[0] - x * v[2];
  const uvz = x * v[1] - y * v[0];
  const uuvx = y * uvz - z * uvy;
  const uuvy = z * uvx - x * uvz;
  const uuvz = x * uvy - y * uvx;
  return [
    v[0] + 2 * (w * uvx + uuvx),
    v[1] + 2 * (w * uvy + uuvy),
    v[2] + 2 * (w * uvz + uuvz),
  ];
}

const VIEWS: Array<{ label: string; ax: number; ay: number }> = [
  { label: 'x / y', ax: 0, ay: 1 },
  { label: 'x / z', ax: 0, ay: 2 },
  { label: 'y / z', ax: 1, ay: 2 },
];

const TRIAD_COLORS = ['#ff5555', '#55ff7a', '#5599ff'];
const RANGE_M = 0.4; // +/- range shown in each view

export function renderPoseViews(canvas: HTMLCanvasElement, state: UiState) {
  const ctx = canvas.getContext('2d')!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const w = canvas.width / 3;
  const h = canvas.height;
  const pos = state.pose.position;
  const q = state.pose.orientation;
  const axes = [
    quatRotate(q, [1, 0, 0]),
    quatRotate(q, [0, 1, 0]),
    quatRotate(q, [0, 0, 1]),
  ];
  VIEWS.forEach((view, i) => {
    const ox = i * w;
    ctx.strokeStyle = '#2a2f36';
    ctx.strokeRect(ox + 0.5, 0.5, w - 1, h - 1);
    ctx.fillStyle = '#8a93a0';
    ctx.font = '10px monospace';
    ctx.fillText(view.label, ox + 4, 12);
    const px = ox + w / 2 + (pos[view.ax] / RANGE_M) * (w / 2 - 8);
    const py = h / 2 - (pos[view.ay] / RANGE_M) * (h / 2 - 8);
    axes.forEach((axis, k) => {
      ctx.strokeStyle = TRIAD_COLORS[k];
      ctx.beginPath();
      ctx.moveTo(px, py);
      ctx.lineTo(px + axis[view.ax] * 16, py - axis[view.ay] * 16);
      ctx.stroke();
    });
    ctx.fillStyle = '#e8eef4';
    ctx.beginPath();
    ctx.arc(px, py, 3, 0, 2 * Math.PI);
    ctx.fill();
  });
}

export function renderStatus(el: HTMLElement, state: UiState) {
  el.textContent =
    `${state.status}  events:${state.eventsSeen}  dropped:${state.droppedFrames}` +
    (state.active ? `  active:${state.active}` : '') +
    `  pos:[${state.pose.position.map((p) => p.toFixed(3)).join(', ')}]`;
  el.dataset.status = state.status;
}
