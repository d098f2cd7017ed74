"""FastAPI app wrapping a live platform session.

The platform runs on a worker thread; each websocket client gets a bounded
queue that drops oldest frames under backpressure, so one slow client can
never stall the master loop.
"""

from __future__ import annotations

import asyncio
import json
import queue
import threading
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from pydantic import ValidationError

from ..crowd import CommandVote, ReinforcementInput, parse_message
from ..orchestrator import Platform, SessionConfig
from .models import Ack, ChatSubmit, ErrorReply, PROTOCOL_DOC, PanelUpdate

QUEUE_LIMIT = 256


class _Subscriber:
    def __init__(self):
        self.q: queue.Queue = queue.Queue(maxsize=QUEUE_LIMIT)
        self.closed = False

    def push(self, text: str) -> None:
        while True:
            try:
                self.q.put_nowait(text)
                return
            except queue.Full:
                try:
                    self.q.get_nowait()  # drop oldest
                except queue.Empty:
                    pass

    def get(self, timeout: float = 0.2) -> Optional[str]:
        try:
            return self.q.get(timeout=timeout)
        except queue.Empty:
            return None


class LiveSession:
    """Runs a platform for a fixed number of ticks and fans out its updates."""

    def __init__(self, config: SessionConfig, ticks: int, out_dir=None):
        self.platform = Platform(config, out_dir=out_dir, listener=self)
        self.ticks = ticks
        self._subs: list = []
        self._lock = threading.Lock()
        self._panel_json = json.dumps(self.platform.panel_snapshot())
        self.done = threading.Event()
        self._thread: Optional[threading.Thread] = None

    # -- listener interface (master thread) --------------------------------

    def on_panel(self, panel: dict) -> None:
        text = json.dumps(panel)
        with self._lock:
            self._panel_json = text
            subs = list(self._subs)
        for s in subs:
            s.push(text)

    def on_frame(self, frame: dict) -> None:
        text = json.dumps(frame)
        with self._lock:
            subs = list(self._subs)
        for s in subs:
            s.push(text)

    def on_chat(self, username: str, text: str) -> None:
        doc = json.dumps({"v": 1, "type": "chat_echo", "username": username, "text": text})
        with self._lock:
            subs = list(self._subs)
        for s in subs:
            s.push(doc)

    # -- client-facing ------------------------------------------------------

    def panel_json(self) -> str:
        with self._lock:
            return self._panel_json

    def subscribe(self) -> _Subscriber:
        s = _Subscriber()
        with self._lock:
            self._subs.append(s)
        return s

    def unsubscribe(self, s: _Subscriber) -> None:
        s.closed = True
        with self._lock:
            if s in self._subs:
                self._subs.remove(s)

    def submit(self, username: str, text: str) -> Ack:
        parsed = parse_message(text)
        if isinstance(parsed, ReinforcementInput):
            kind = "reinforcement"
        elif isinstance(parsed, CommandVote):
            kind = "command_vote"
        else:
            kind = "other"
        self.platform.submit_chat(username, text)
        return Ack(accepted=True, parsed_as=kind)

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self) -> None:
        try:
            self.platform.run(self.ticks)
        finally:
            self.platform.close()
            self.done.set()

    def join(self, timeout=None) -> None:
        if self._thread:
            self._thread.join(timeout)


def create_app(session: LiveSession, frontend_dir=None) -> FastAPI:
    app = FastAPI(title="crowdbots", version="0.1.0")

    @app.get("/healthz")
    def healthz():
        return {"ok": True, "tick": session.platform.tick}

    @app.get("/v1/protocol")
    def protocol():
        return PROTOCOL_DOC

    @app.get("/v1/state")
    def state() -> PanelUpdate:
        return PanelUpdate.model_validate_json(session.panel_json())

    @app.post("/v1/chat")
    def chat(msg: ChatSubmit) -> Ack:
        return session.submit(msg.username, msg.text)

    @app.websocket("/v1/ws")
    async def ws(websocket: WebSocket):
        await websocket.accept()
        sub = session.subscribe()
        await websocket.send_text(session.panel_json())
        loop = asyncio.get_event_loop()
        stop = False

        async def pump_out():
            while not stop:
                item = await loop.run_in_executor(None, sub.get)
                if item is not None:
                    await websocket.send_text(item)

        out_task = asyncio.ensure_future(pump_out())
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    msg = ChatSubmit.model_validate_json(raw)
                except ValidationError as err:
                    await websocket.send_text(
                        ErrorReply(detail=f"invalid chat message: {err.error_count()} error(s)").model_dump_json()
                    )
                    continue
                ack = session.submit(msg.username, msg.text)
                await websocket.send_text(ack.model_dump_json())
        except WebSocketDisconnect:
            pass
        finally:
            stop = True
            session.unsubscribe(sub)
            out_task.cancel()

    if frontend_dir is not None:
        from pathlib import Path

        from fastapi.responses import FileResponse
        from fastapi.staticfiles import StaticFiles

        root = Path(frontend_dir)
        if (root / "index.html").exists():
            @app.get("/")
            def index():
                return FileResponse(root / "index.html")

            if (root / "dist").exists():
                app.mount("/dist", StaticFiles(directory=root / "dist"), name="dist")

    return app
