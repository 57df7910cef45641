// Session client: WebSocket lifecycle, frame streaming and UiState.
// The client never sends while disconnected, and after every (re)connect
// it performs the calibration handshake: a start message followed by idle
// frames until the service emits its first event.

import { encodeFrame } from './codec';
import { makeFrameRecord } from './rasterize';

export type ConnectionStatus =
  | 'disconnected'
  | 'connecting'
  | 'calibrating'
  | 'live';

export interface StateEventMsg {
  type: 'event';
  tick: number;
  detected: string;
  probs: number[];
  active: string | null;
  twist: { linear: number[]; angular: number[] } | null;
  aux: string | null;
  pose: { position: number[]; orientation: number[] };
}

export interface UiState {
  status: ConnectionStatus;
  probs: number[];
  active: string | null;
  detected: string | null;
  pose: { position: number[]; orientation: number[] };
  droppedFrames: number;
  lastSentFrame: Float32Array | null;
  eventsSeen: number;
}

export function initialUiState(): UiState {
  return {
    status: 'disconnected',
    probs: new Array(15).fill(1 / 15),
    active: null,
    detected: null,
    pose: { position: [0, 0, 0], orientation: [1, 0, 0, 0] },
    droppedFrames: 0,
    lastSentFrame: null,
    eventsSeen: 0,
  };
}

export function applyServerMessage(state: UiState, raw: string): UiState {
  let msg: any;
  try {
    msg = JSON.parse(raw);
  } catch {
    return state;
  }
  if (msg.type === 'event') {
    return {
      ...state,
      status: 'live',
      probs: msg.probs,
      active: msg.active,
      detected: msg.detected,
      pose: msg.pose,
      eventsSeen: state.eventsSeen + 1,
    };
  }
  if (msg.type === 'started') {
    return { ...state, status: 'calibrating' };
  }
  return state;
}

export interface SessionClientOptions {
  url: string;
  frameRate: number;
  webSocketCtor?: typeof WebSocket;
  onState?: (s: UiState) => void;
}

export class SessionClient {
  state: UiState = initialUiState();
  private ws: WebSocket | null = null;
  private seq = 0;
  private readonly opts: SessionClientOptions;

  constructor(opts: SessionClientOptions) {
    this.opts = opts;
  }

  get connected(): boolean {
    return this.ws !== null && this.ws.readyState === 1;
  }

  private emit() {
    this.opts.onState?.(this.state);
  }

  connect(): Promise<void> {
    const Ctor = this.opts.webSocketCtor ?? WebSocket;
    this.state = { ...initialUiState(), status: 'connecting' };
    this.emit();
    return new Promise((resolve, reject) => {
      const ws = new Ctor(this.opts.url);
      ws.binaryType = 'arraybuffer';
      ws.onopen = () => {
        this.ws = ws;
        ws.send(JSON.stringify({ type: 'start', frame_rate: this.opts.frameRate }));
        this.state = { ...this.state, status: 'calibrating' };
        this.emit();
        resolve();
      };
      ws.onmessage = (ev) => {
        if (typeof ev.data === 'string') {
          this.state = applyServerMessage(this.state, ev.data);
          this.emit();
        }
      };
      ws.onclose = () => {
        this.ws = null;
        this.state = { ...this.state, status: 'disconnected' };
        this.emit();
      };
      ws.onerror = (err) => {
        if (this.ws === null) reject(err);
      };
    });
  }

  disconnect() {
    this.ws?.close();
    this.ws = null;
    this.state = { ...this.state, status: 'disconnected' };
    this.emit();
  }

  /** Send one rasterized frame; silently refuses while disconnected. */
  sendFrame(values: Float32Array, timestampUs?: bigint): boolean {
    if (!this.connected) {
      this.state = { ...this.state, droppedFrames: this.state.droppedFrames + 1 };
      this.emit();
      return false;
    }
    const ts =
      timestampUs ?? BigInt(Math.round((this.seq * 1_000_000) / this.opts.frameRate));
    const record = makeFrameRecord(values, this.seq, ts);
    this.ws!.send(encodeFrame(record));
    this.seq += 1;
    this.state = { ...this.state, lastSentFrame: values.slice() };
    this.emit();
    return true;
  }
}
