"""Single-client WebSocket session service.

Inbound: binary messages carrying wire-format frame records (batched ok),
or JSON text control messages ({"type": "start", "frame_rate": 60},
{"type": "stop"}).  Outbound: one {"type": "event", ...} text message per
200 Hz tick, {"type": "heartbeat"} at 1 Hz while idle, and {"type":
"error"} replies for malformed input (the stream keeps going).  A client
disconnect halts motion immediately.
"""

from __future__ import annotations

import asyncio
import json

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .session import SessionConfig, SessionRunner, StreamResampler
from .wire import StreamDecoder

HEARTBEAT_INTERVAL_S = 1.0


def create_app(model, cfg: SessionConfig | None = None) -> FastAPI:
    app = FastAPI(title="weavetouch session service")
    app.state.model = model
    app.state.session_cfg = cfg or SessionConfig()
    app.state.last_runner = None

    @app.get("/health")
    async def health():
        return {"status": "ok", "arch": model.arch}

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket):
        await ws.accept()
        runner = SessionRunner(app.state.model, app.state.session_cfg)
        app.state.last_runner = runner
        decoder = StreamDecoder()
        resampler: StreamResampler | None = None
        started = False
        last_send = asyncio.get_event_loop().time()

        async def send(payload: dict):
            nonlocal last_send
            await ws.send_text(json.dumps(payload, separators=(",", ":")))
            last_send = asyncio.get_event_loop().time()

        async def heartbeat():
            while True:
                await asyncio.sleep(HEARTBEAT_INTERVAL_S / 4)
                now = asyncio.get_event_loop().time()
                if now - last_send >= HEARTBEAT_INTERVAL_S:
                    await send({"type": "heartbeat",
                                "calibrated": runner.calibrated})

        hb_task = asyncio.create_task(heartbeat())
        try:
            while True:
                message = await ws.receive()
                if message.get("type") == "websocket.disconnect":
                    break
                if message.get("bytes") is not None:
                    if not started:
                        await send({"type": "error",
                                    "error": "not_started",
                                    "detail": "send a start message first"})
                        continue
                    frames = decoder.feed(message["bytes"])
                    if resampler is not None:
                        frames = [g for f in frames for g in resampler.push(f)]
                    for frame in frames:
                        event = runner.push(frame)
                        if event is not None:
                            await send({"type": "event",
                                        **json.loads(event.to_json())})
                elif message.get("text") is not None:
                    try:
                        ctrl = json.loads(message["text"])
                        kind = ctrl["type"]
                    except (json.JSONDecodeError, TypeError, KeyError) as exc:
                        await send({"type": "error", "error": "bad_message",
                                    "detail": str(exc)})
                        continue
                    if kind == "start":
                        rate = float(ctrl.get("frame_rate", 200.0))
                        if rate <= 0 or rate > 1000:
                            await send({"type": "error", "error": "bad_rate",
                                        "detail": f"frame_rate {rate}"})
                            continue
                        resampler = None if rate == 200.0 else \
                            StreamResampler(rate, 200.0)
                        started = True
                        await send({"type": "started", "frame_rate": rate,
                                    "calibration_frames":
                                        runner.cfg.calibration_frames})
                    elif kind == "stop":
                        runner.halt()
                        started = False
                        await send({"type": "stopped"})
                    else:
                        await send({"type": "error", "error": "unknown_type",
                                    "detail": kind})
        except WebSocketDisconnect:
            pass
        finally:
            hb_task.cancel()
            runner.halt()  # safety stop: no motion survives a disconnect

    return app
