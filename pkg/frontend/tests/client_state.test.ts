import { beforeEach, describe, expect, it } from 'vitest';
import {
  applyServerMessage,
  initialUiState,
  SessionClient,
} from '../src/client';

class FakeWebSocket {
  static instances: FakeWebSocket[] = [];
  static OPEN = 1;
  readyState = 0;
  binaryType = 'blob';
  sent: Array<string | Uint8Array> = [];
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: ((e: unknown) => void) | null = null;

  constructor(public url: string) {
    FakeWebSocket.instances.push(this);
    queueMicrotask(() => {
      this.readyState = 1;
      this.onopen?.();
    });
  }

  send(data: string | ArrayBuffer | Uint8Array) {
    this.sent.push(typeof data === 'string' ? data : new Uint8Array(data as ArrayBuffer));
  }

  close() {
    this.readyState = 3;
    this.onclose?.();
  }

  serverSays(obj: unknown) {
    this.onmessage?.({ data: JSON.stringify(obj) });
  }
}

function makeClient() {
  const client = new SessionClient({
    url: 'ws://test/session',
    frameRate: 60,
    webSocketCtor: FakeWebSocket as unknown as typeof WebSocket,
  });
  return client;
}

const EVENT = {
  type: 'event',
  tick: 0,
  detected: 'invalid',
  probs: new Array(15).fill(1 / 15),
  active: null,
  twist: null,
  aux: null,
  pose: { position: [0, 0, 0], orientation: [1, 0, 0, 0] },
};

describe('UiState reducer', () => {
  it('event messages update probs, pose and status', () => {
    let state = initialUiState();
    state = applyServerMessage(state, JSON.stringify({ ...EVENT, active: 'translate_z_pos' }));
    expect(state.status).toBe('live');
    expect(state.active).toBe('translate_z_pos');
    expect(state.eventsSeen).toBe(1);
    const sum = state.probs.reduce((a, b) => a + b, 0);
    expect(Math.abs(sum - 1)).toBeLessThan(1e-3);
  });

  it('garbage messages leave state untouched', () => {
    const state = initialUiState();
    expect(applyServerMessage(state, 'not json{{{')).toEqual(state);
  });
});

describe('SessionClient', () => {
  beforeEach(() => {
    FakeWebSocket.instances = [];
  });

  it('performs the start handshake on connect', async () => {
    const client = makeClient();
    await client.connect();
    const ws = FakeWebSocket.instances.at(-1)!;
    expect(ws.sent).toHaveLength(1);
    expect(JSON.parse(ws.sent[0] as string)).toEqual({
      type: 'start',
      frame_rate: 60,
    });
    expect(client.state.status).toBe('calibrating');
  });

  it('never sends frames while disconnected', () => {
    const client = makeClient();
    const ok = client.sendFrame(new Float32Array(100));
    expect(ok).toBe(false);
    expect(client.state.droppedFrames).toBe(1);
    expect(FakeWebSocket.instances.at(-1)?.sent ?? []).toHaveLength(0);
  });

  it('stops sending after disconnect and resumes after reconnect handshake', async () => {
    const client = makeClient();
    await client.connect();
    const ws1 = FakeWebSocket.instances.at(-1)!;
    expect(client.sendFrame(new Float32Array(100))).toBe(true);
    expect(ws1.sent).toHaveLength(2); // start + one binary frame
    client.disconnect();
    expect(client.state.status).toBe('disconnected');
    expect(client.sendFrame(new Float32Array(100))).toBe(false);
    expect(ws1.sent).toHaveLength(2);
    // reconnect: fresh socket, fresh start message before any frames
    await client.connect();
    const ws2 = FakeWebSocket.instances.at(-1)!;
    expect(ws2).not.toBe(ws1);
    expect(JSON.parse(ws2.sent[0] as string).type).toBe('start');
    expect(client.state.status).toBe('calibrating');
  });

  it('heatmap state equals the last transmitted frame exactly', async () => {
    const client = makeClient();
    await client.connect();
    const frame = new Float32Array(100);
    frame[55] = 0.75;
    client.sendFrame(frame);
    expect(client.state.lastSentFrame).not.toBeNull();
    expect([...client.state.lastSentFrame!]).toEqual([...frame]);
  });

  it('binary frames are 216 bytes', async () => {
    const client = makeClient();
    await client.connect();
    client.sendFrame(new Float32Array(100));
    const ws = FakeWebSocket.instances.at(-1)!;
    const binary = ws.sent[1] as Uint8Array;
    expect(binary.length).toBe(216);
  });
});
