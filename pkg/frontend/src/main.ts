// Touchpad page: capture pointers on the pad canvas, stream rasterized
// frames at the display rate, render live classification and pose.
// Query parameters: ?endpoint=ws://host:port/session&rate=60

import { SessionClient } from './client';
import { PointerTrace, rasterize } from './rasterize';
import {
  buildProbBars,
  renderHeatmap,
  renderPoseViews,
  renderProbBars,
  renderStatus,
} from './view';

const params = new URLSearchParams(location.search);
const proto = location.protocol === 'https:' ? 'wss' : 'ws';
const endpoint =
  params.get('endpoint') ?? `${proto}://${location.hostname}:8765/session`;
const frameRate = Number(params.get('rate') ?? 60);

const pad = document.getElementById('pad') as HTMLCanvasElement;
const heatmap = document.getElementById('heatmap') as HTMLCanvasElement;
const poseView = document.getElementById('pose') as HTMLCanvasElement;
const probsRoot = document.getElementById('probs') as HTMLElement;
const statusEl = document.getElementById('status') as HTMLElement;
const connectBtn = document.getElementById('connect') as HTMLButtonElement;

buildProbBars(probsRoot);

const pointers = new Map<number, PointerTrace>();

pad.addEventListener('pointerdown', (e) => {
  pad.setPointerCapture(e.pointerId);
  updatePointer(e);
});
pad.addEventListener('pointermove', (e) => {
  if (pointers.has(e.pointerId)) updatePointer(e);
});
for (const kind of ['pointerup', 'pointercancel', 'pointerout'] as const) {
  pad.addEventListener(kind, (e) => pointers.delete(e.pointerId));
}

function updatePointer(e: PointerEvent) {
  const rect = pad.getBoundingClientRect();
  // touch devices report real force; mouse buttons fall back to 0.6
  const pressure = e.pointerType === 'mouse' ? 0.6 : Math.max(e.pressure, 0.25);
  pointers.set(e.pointerId, {
    id: e.pointerId,
    x: ((e.clientX - rect.left) / rect.width) * pad.width,
    y: ((e.clientY - rect.top) / rect.height) * pad.height,
    pressure,
  });
}

const client = new SessionClient({
  url: endpoint,
  frameRate,
  onState: (state) => {
    renderProbBars(probsRoot, state);
    renderPoseViews(poseView, state);
    renderStatus(statusEl, state);
    connectBtn.textContent =
      state.status === 'disconnected' ? 'connect' : 'disconnect';
  },
});

connectBtn.addEventListener('click', () => {
  if (client.connected) {
    client.disconnect();
  } else {
    client.connect().catch(() => {
      statusEl.textContent = `cannot reach ${endpoint}`;
    });
  }
});

function drawPad() {
  const ctx = pad.getContext('2d')!;
  ctx.fillStyle = '#14181d';
  ctx.fillRect(0, 0, pad.width, pad.height);
  ctx.strokeStyle = '#2a2f36';
  for (let i = 1; i < 10; i++) {
    ctx.beginPath();
    ctx.moveTo((i * pad.width) / 10, 0);
    ctx.lineTo((i * pad.width) / 10, pad.height);
    ctx.stroke();
    ctx.beginPath();
    ctx.moveTo(0, (i * pad.height) / 10);
    ctx.lineTo(pad.width, (i * pad.height) / 10);
    ctx.stroke();
  }
  ctx.fillStyle = '#39424d';
  for (const trace of pointers.values()) {
    ctx.beginPath();
    ctx.arc(trace.x, trace.y, 14 * trace.pressure + 6, 0, 2 * Math.PI);
    ctx.fill();
  }
}

// display-cadence loop: rasterize current pointers, stream, repaint
setInterval(() => {
  drawPad();
  if (!client.connected) return;
  const frame = rasterize([...pointers.values()], pad.width, pad.height);
  client.sendFrame(frame);
  renderHeatmap(heatmap, client.state.lastSentFrame);
}, 1000 / frameRate);
