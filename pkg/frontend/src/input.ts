// Driving input: keyboard (WASD / arrows) and optional gamepad, mapped to
// normalized (v, omega) commands. Axes are additive and clamped; releasing
// every key yields the zero command.

export interface Command {
  v: number;
  omega: number;
}

export const ZERO: Command = { v: 0, omega: 0 };

const FORWARD = new Set(["ArrowUp", "KeyW"]);
const BACK = new Set(["ArrowDown", "KeyS"]);
const LEFT = new Set(["ArrowLeft", "KeyA"]);
const RIGHT = new Set(["ArrowRight", "KeyD"]);

function clamp(x: number): number {
  return Math.max(-1, Math.min(1, x));
}

export function commandFromKeys(pressed: ReadonlySet<string>): Command {
  let v = 0;
  let omega = 0;
  for (const code of pressed) {
    if (FORWARD.has(code)) v += 1;
    else if (BACK.has(code)) v -= 1;
    else if (LEFT.has(code)) omega += 1; // +omega turns counter-clockwise
    else if (RIGHT.has(code)) omega -= 1;
  }
  return { v: clamp(v), omega: clamp(omega) };
}

const DEADZONE = 0.15;

export function commandFromGamepad(pad: Pick<Gamepad, "axes"> | null): Command | null {
  if (!pad || pad.axes.length < 2) return null;
  const raw_v = -pad.axes[1]; // stick up = forward
  const raw_w = -pad.axes[0]; // stick left = turn left
  const v = Math.abs(raw_v) < DEADZONE ? 0 : raw_v;
  const omega = Math.abs(raw_w) < DEADZONE ? 0 : raw_w;
  if (v === 0 && omega === 0) return null; // idle stick defers to keyboard
  return { v: clamp(v), omega: clamp(omega) };
}

// Tracks currently pressed keys from DOM events; query with current().
export class KeyboardTracker {
  private pressed = new Set<string>();

  readonly onKeyDown = (ev: KeyboardEvent): void => {
    if (FORWARD.has(ev.code) || BACK.has(ev.code) || LEFT.has(ev.code) || RIGHT.has(ev.code)) {
      ev.preventDefault();
      this.pressed.add(ev.code);
    }
  };

  readonly onKeyUp = (ev: KeyboardEvent): void => {
    this.pressed.delete(ev.code);
  };

  readonly onBlur = (): void => {
    this.pressed.clear();
  };

  attach(target: Window): void {
    target.addEventListener("keydown", this.onKeyDown);
    target.addEventListener("keyup", this.onKeyUp);
    target.addEventListener("blur", this.onBlur);
  }

  current(): Command {
    return commandFromKeys(this.pressed);
  }
}
