// WebSocket session client: connects, starts or re-attaches, and streams
// normalized driving commands at the server rate (10 Hz). The session id is
// kept in sessionStorage so a mid-session reload re-attaches and the display
// rebuilds from server frames alone.

import { commandFromGamepad, commandFromKeys, KeyboardTracker, ZERO } from "./input.js";
import type { Command } from "./input.js";
import { parseServerFrame } from "./protocol.js";
import type { Store } from "./store.js";

const COMMAND_PERIOD_MS = 100;
const SESSION_KEY = "intentd.session";

export class ConsoleClient {
  private ws: WebSocket | null = null;
  private loop: number | null = null;
  readonly keyboard = new KeyboardTracker();

  constructor(private store: Store, private url: string) {}

  connected(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  connect(onOpen?: () => void): void {
    this.store.setConnection("connecting");
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.store.setConnection("connected");
      const saved = sessionStorage.getItem(SESSION_KEY);
      if (saved) {
        ws.send(JSON.stringify({ type: "attach", session: saved }));
      }
      onOpen?.();
    };
    ws.onmessage = (ev: MessageEvent) => {
      const frame = parseServerFrame(String(ev.data));
      if (!frame) return;
      if (frame.type === "state" && frame.session) {
        sessionStorage.setItem(SESSION_KEY, frame.session);
      }
      if (frame.type === "summary") {
        sessionStorage.removeItem(SESSION_KEY);
        this.stopCommandLoop();
      }
      if (frame.type === "error") {
        // a failed attach (stale session id) must not wedge the console
        sessionStorage.removeItem(SESSION_KEY);
      }
      this.store.dispatch(frame);
    };
    ws.onclose = () => {
      this.store.setConnection("disconnected");
      this.stopCommandLoop();
      this.ws = null;
    };
    ws.onerror = () => ws.close();
  }

  start(scenario: number, declaredGoal: number | null): void {
    if (!this.connected()) return;
    this.store.reset();
    this.store.setConnection("connected");
    const msg: Record<string, unknown> = { type: "start", scenario };
    if (declaredGoal !== null) msg.declared_goal = declaredGoal;
    this.ws!.send(JSON.stringify(msg));
    this.startCommandLoop();
  }

  end(): void {
    if (this.connected()) {
      this.ws!.send(JSON.stringify({ type: "end" }));
    }
    this.stopCommandLoop();
  }

  sendCommand(cmd: Command): void {
    if (this.connected() && !this.store.view.ended) {
      this.ws!.send(JSON.stringify({ type: "cmd", v: cmd.v, omega: cmd.omega }));
    }
  }

  currentCommand(): Command {
    const pads = typeof navigator !== "undefined" && navigator.getGamepads
      ? navigator.getGamepads()
      : [];
    for (const pad of pads) {
      const cmd = commandFromGamepad(pad);
      if (cmd) return cmd;
    }
    return this.keyboard.current();
  }

  startCommandLoop(): void {
    this.stopCommandLoop();
    this.loop = window.setInterval(() => {
      this.sendCommand(this.currentCommand());
    }, COMMAND_PERIOD_MS);
  }

  stopCommandLoop(): void {
    if (this.loop !== null) {
      window.clearInterval(this.loop);
      this.loop = null;
      this.sendCommand(ZERO);
    }
  }
}

export { commandFromKeys, ZERO };
