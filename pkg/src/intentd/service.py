"""Live teleoperation WebSocket service.

One authoritative 10 Hz stepper per session; connected clients are readers
of broadcast frames plus writers to a latest-wins command mailbox. The
server owns time: session time advances 0.1 s per tick regardless of wall
clock, so a recorded session replays to a bit-identical intent stream.

Wire protocol (JSON text frames):
  client -> server: {"type":"start","scenario":K,"declared_goal":g?,"seed":s?,"manual":bool?}
                    {"type":"cmd","v":f,"omega":f}   (normalized to [-1,1])
                    {"type":"tick"}                  (manual sessions only)
                    {"type":"attach","session":id}   (observe an existing session)
                    {"type":"end"}
  server -> client: {"type":"state","frame":n,"t":s,"pose":{x,y,yaw},"goals":[...]}
                    (first state frame per connection also carries
                    "obstacles", "bounds", "session", "declared_goal")
                    {"type":"intent","frame":n,"mloii":[p...]|null,"boir":[p...]}
                    {"type":"summary",...} / {"type":"warning",...} /
                    {"type":"rejected",...} / {"type":"error",...}
HTTP: GET /scenarios lists the shipped fixtures, GET /healthz liveness.
"""

from __future__ import annotations

import asyncio
import itertools
import logging
import math
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .baseline import BaselineParams
from .features import TrajectorySample, write_trajectory_jsonl
from .forest import ForestModel
from .inference import FrameEstimates, IntentStreamer, prediction_records
from .metrics import accuracy, log_loss
from .planner import GridPlanner
from .sim import DT, RobotState, step
from .world import BUILTIN_SCENARIO_IDS, ScenarioSpec, load_fixture, sample_start

log = logging.getLogger("intentd.service")

DEADMAN_S = 0.5


class TeleopSession:
    """Synchronous session core: stepping, recording, and live inference.

    The network layer drives tick() either from a wall-clock loop or from
    explicit tick messages; everything here is deterministic given the
    seed and the sequence of (command, tick) events.
    """

    def __init__(
        self,
        session_id: str,
        spec: ScenarioSpec,
        model: Optional[ForestModel],
        baseline_params: BaselineParams,
        seed: int = 0,
        declared_goal: Optional[int] = None,
        dt: float = DT,
        window: int = 5,
    ):
        if declared_goal is not None and not 0 <= declared_goal < spec.n_goals:
            raise ValueError(f"declared_goal {declared_goal} out of range for scenario {spec.id}")
        if model is not None and model.n_goals != spec.n_goals:
            raise ValueError(
                f"model expects {model.n_goals} goals, scenario {spec.id} has {spec.n_goals}")
        self.id = session_id
        self.spec = spec
        self.dt = dt
        self.declared_goal = declared_goal
        self.planner = GridPlanner(spec.map)
        pose = sample_start(spec, (seed, 0), free_fn=lambda p: not self.planner.is_blocked(p))
        self.state = RobotState(pose=pose)
        self.streamer = IntentStreamer(
            spec.goal_set, model=model,
            planner=self.planner, baseline_params=baseline_params, window=window)
        self.frame = 0
        self.status = "running"
        self._cmd = (0.0, 0.0)
        self._cmd_t = -math.inf
        self.recording: list[TrajectorySample] = []
        self.estimates: list[FrameEstimates] = []
        self._record_and_feed()

    # -- core stepping -----------------------------------------------------

    def _record_and_feed(self) -> tuple[Optional[FrameEstimates], Optional[str]]:
        sample = TrajectorySample(
            t=self.frame * self.dt, pose=self.state.pose,
            v=self.state.v, omega=self.state.omega,
            active_goal=self.declared_goal, trial_id=0, scenario_id=self.spec.id)
        self.recording.append(sample)
        try:
            est = self.streamer.feed(sample)
        except Exception as e:  # estimator failure must not kill the session
            log.exception("estimator failure at frame %d", self.frame)
            return None, f"estimator failure at frame {self.frame}: {e}"
        if est is not None:
            self.estimates.append(est)
        return est, None

    @property
    def session_time(self) -> float:
        return self.frame * self.dt

    def submit_command(self, v_norm: float, omega_norm: float) -> Optional[dict]:
        """Latest-wins mailbox update; returns a warning/rejection frame if any."""
        if self.status != "running":
            return {"type": "rejected", "reason": "session ended"}
        if not (math.isfinite(v_norm) and math.isfinite(omega_norm)):
            return {"type": "rejected", "reason": "non-finite command"}
        clamped = False
        if not -1.0 <= v_norm <= 1.0:
            v_norm = max(-1.0, min(1.0, v_norm))
            clamped = True
        if not -1.0 <= omega_norm <= 1.0:
            omega_norm = max(-1.0, min(1.0, omega_norm))
            clamped = True
        self._cmd = (v_norm * self.state.v_max, omega_norm * self.state.omega_max)
        self._cmd_t = self.session_time
        if clamped:
            return {"type": "warning", "warning": "command out of range; clamped",
                    "v": v_norm, "omega": omega_norm}
        return None

    def tick(self) -> list[dict]:
        """Advance one frame; returns the wire frames to broadcast."""
        if self.status != "running":
            return []
        now = (self.frame + 1) * self.dt
        cmd = self._cmd
        if now - self._cmd_t > DEADMAN_S - 1e-9:
            cmd = (0.0, 0.0)  # dead-man: stale commands decay to zero
        self.state = step(self.state, cmd, self.planner, self.dt)
        self.frame += 1
        est, failure = self._record_and_feed()
        frames = [self.state_frame()]
        if failure is not None:
            frames.append({"type": "error", "error": failure, "frame": self.frame})
        elif est is not None:
            frames.append({
                "type": "intent", "frame": self.frame,
                "mloii": list(est.mloii.probabilities) if est.mloii else None,
                "boir": list(est.boir.probabilities) if est.boir else None,
            })
        return frames

    # -- wire frames ---------------------------------------------------------

    def state_frame(self, include_static: bool = False) -> dict:
        p = self.state.pose
        frame = {
            "type": "state", "frame": self.frame, "t": self.session_time,
            "pose": {"x": p.x, "y": p.y, "yaw": p.yaw},
            "goals": [{"id": g.id, "label": g.label, "x": g.position[0], "y": g.position[1]}
                      for g in self.spec.goal_set],
        }
        if include_static:
            frame["obstacles"] = [
                {"x": o[0], "y": o[1], "w": o[2], "h": o[3]} for o in self.spec.map.obstacles]
            frame["bounds"] = {"width": self.spec.map.bounds[0],
                               "height": self.spec.map.bounds[1]}
            frame["session"] = self.id
            frame["scenario"] = self.spec.id
            frame["declared_goal"] = self.declared_goal
        return frame

    def end(self, reason: str, sessions_dir: Optional[Path]) -> dict:
        if self.status == "ended":
            return {"type": "rejected", "reason": "session already ended"}
        self.status = "ended"
        recording_path = None
        if sessions_dir is not None and self.recording:
            sessions_dir.mkdir(parents=True, exist_ok=True)
            recording_path = sessions_dir / f"session_{self.id}.jsonl"
            write_trajectory_jsonl(recording_path, self.recording)
        summary = {
            "type": "summary", "frame": self.frame, "reason": reason,
            "frames": self.frame + 1, "declared_goal": self.declared_goal,
            "recording": str(recording_path) if recording_path else None,
            "metrics": None,
        }
        if self.declared_goal is not None and self.estimates:
            metrics = {}
            for source in ("mloii", "boir"):
                if getattr(self.estimates[0], source) is None:
                    continue
                records = prediction_records(
                    self.recording, self.estimates, source, declared_goal=self.declared_goal)
                metrics[source] = {
                    "accuracy": accuracy(records),
                    "log_loss": log_loss(records, self.spec.n_goals),
                }
            summary["metrics"] = metrics
        return summary


def _scenario_listing() -> list[dict]:
    out = []
    for sid in BUILTIN_SCENARIO_IDS:
        spec = load_fixture(sid)
        out.append({
            "id": sid,
            "n_goals": spec.n_goals,
            "goals": [{"id": g.id, "label": g.label, "x": g.position[0], "y": g.position[1]}
                      for g in spec.goal_set],
            "bounds": {"width": spec.map.bounds[0], "height": spec.map.bounds[1]},
        })
    return out


def create_app(
    model: Optional[ForestModel] = None,
    default_scenario: Optional[ScenarioSpec] = None,
    sessions_dir: str | Path | None = "sessions",
    static_dir: str | Path | None = None,
    baseline_params: BaselineParams = BaselineParams(),
) -> FastAPI:
    app = FastAPI(title="intentd teleop service")
    sessions: dict[str, TeleopSession] = {}
    clients: dict[str, list[WebSocket]] = {}
    tasks: dict[str, asyncio.Task] = {}
    ids = itertools.count(1)
    out_dir = Path(sessions_dir) if sessions_dir else None

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "sessions": sum(
            1 for s in sessions.values() if s.status == "running")}

    @app.get("/scenarios")
    def scenarios():
        return _scenario_listing()

    async def broadcast(session_id: str, frames: list[dict]) -> None:
        for ws in list(clients.get(session_id, [])):
            try:
                for frame in frames:
                    await ws.send_json(frame)
            except Exception:
                # a dead client must never perturb the session
                if ws in clients.get(session_id, []):
                    clients[session_id].remove(ws)

    async def run_loop(session: TeleopSession) -> None:
        loop = asyncio.get_running_loop()
        t0 = loop.time()
        n = 0
        try:
            while session.status == "running":
                n += 1
                target = t0 + n * session.dt
                delay = target - loop.time()
                if delay > 0:
                    await asyncio.sleep(delay)
                await broadcast(session.id, session.tick())
        except asyncio.CancelledError:
            pass

    async def end_session(session: TeleopSession, reason: str) -> None:
        summary = session.end(reason, out_dir)
        task = tasks.pop(session.id, None)
        if task is not None:
            task.cancel()
        await broadcast(session.id, [summary])

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session: Optional[TeleopSession] = None
        is_driver = False
        try:
            while True:
                msg = await ws.receive_json()
                kind = msg.get("type")
                if kind == "start":
                    if session is not None:
                        await ws.send_json({"type": "error", "error": "session already started"})
                        continue
                    try:
                        sid = msg.get("scenario")
                        spec = load_fixture(sid) if sid is not None else default_scenario
                        if spec is None:
                            raise ValueError(
                                f"no scenario requested and no default; valid ids: "
                                f"{list(BUILTIN_SCENARIO_IDS)}")
                        use_model = model if (
                            model is not None and model.n_goals == spec.n_goals) else None
                        session = TeleopSession(
                            session_id=str(next(ids)), spec=spec, model=use_model,
                            baseline_params=baseline_params,
                            seed=msg.get("seed", 0),
                            declared_goal=msg.get("declared_goal"),
                        )
                    except ValueError as e:
                        await ws.send_json({"type": "error", "error": str(e)})
                        continue
                    sessions[session.id] = session
                    clients[session.id] = [ws]
                    is_driver = True
                    await ws.send_json(session.state_frame(include_static=True))
                    if not msg.get("manual", False):
                        tasks[session.id] = asyncio.create_task(run_loop(session))
                elif kind == "attach":
                    target = sessions.get(str(msg.get("session")))
                    if target is None:
                        await ws.send_json(
                            {"type": "error", "error": f"no session {msg.get('session')!r}"})
                        continue
                    session = target
                    clients[session.id].append(ws)
                    await ws.send_json(session.state_frame(include_static=True))
                elif kind == "cmd":
                    if session is None:
                        await ws.send_json({"type": "error", "error": "no session; send start first"})
                        continue
                    reply = session.submit_command(
                        float(msg.get("v", 0.0)), float(msg.get("omega", 0.0)))
                    if reply is not None:
                        await ws.send_json(reply)
                elif kind == "tick":
                    if session is None or session.id in tasks:
                        await ws.send_json(
                            {"type": "error", "error": "tick is only valid for manual sessions"})
                        continue
                    await broadcast(session.id, session.tick())
                elif kind == "end":
                    if session is None:
                        await ws.send_json({"type": "error", "error": "no session to end"})
                        continue
                    await end_session(session, reason="client end")
                else:
                    await ws.send_json({"type": "error", "error": f"unknown message type {kind!r}"})
        except WebSocketDisconnect:
            pass
        finally:
            if session is not None:
                if ws in clients.get(session.id, []):
                    clients[session.id].remove(ws)
                if is_driver and session.status == "running":
                    await end_session(session, reason="driver disconnected")

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="console")
    return app
