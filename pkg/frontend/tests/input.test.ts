import { describe, expect, it } from "vitest";

import { commandFromGamepad, commandFromKeys, KeyboardTracker, ZERO } from "../src/input.js";

const keys = (...codes: string[]) => new Set(codes);

describe("commandFromKeys", () => {
  it("maps nothing pressed to the zero command", () => {
    expect(commandFromKeys(keys())).toEqual({ v: 0, omega: 0 });
  });

  it("maps forward to (1, 0)", () => {
    expect(commandFromKeys(keys("KeyW"))).toEqual({ v: 1, omega: 0 });
    expect(commandFromKeys(keys("ArrowUp"))).toEqual({ v: 1, omega: 0 });
  });

  it("maps forward+left to (1, +1)", () => {
    expect(commandFromKeys(keys("KeyW", "KeyA"))).toEqual({ v: 1, omega: 1 });
    expect(commandFromKeys(keys("ArrowUp", "ArrowLeft"))).toEqual({ v: 1, omega: 1 });
  });

  it("maps right turn to negative omega (clockwise)", () => {
    expect(commandFromKeys(keys("KeyD"))).toEqual({ v: 0, omega: -1 });
  });

  it("cancels opposing keys", () => {
    expect(commandFromKeys(keys("KeyW", "KeyS"))).toEqual({ v: 0, omega: 0 });
    expect(commandFromKeys(keys("KeyA", "KeyD"))).toEqual({ v: 0, omega: 0 });
  });

  it("clamps duplicate-direction combinations to [-1, 1]", () => {
    expect(commandFromKeys(keys("KeyW", "ArrowUp"))).toEqual({ v: 1, omega: 0 });
  });
});

describe("KeyboardTracker", () => {
  const press = (code: string) =>
    ({ code, preventDefault() {} } as unknown as KeyboardEvent);

  it("release sends zeros", () => {
    const tracker = new KeyboardTracker();
    tracker.onKeyDown(press("KeyW"));
    expect(tracker.current()).toEqual({ v: 1, omega: 0 });
    tracker.onKeyUp(press("KeyW"));
    expect(tracker.current()).toEqual(ZERO);
  });

  it("window blur releases everything", () => {
    const tracker = new KeyboardTracker();
    tracker.onKeyDown(press("KeyW"));
    tracker.onKeyDown(press("KeyA"));
    tracker.onBlur();
    expect(tracker.current()).toEqual(ZERO);
  });

  it("ignores unrelated keys", () => {
    const tracker = new KeyboardTracker();
    tracker.onKeyDown(press("KeyQ"));
    expect(tracker.current()).toEqual(ZERO);
  });
});

describe("commandFromGamepad", () => {
  it("null when no pad or idle stick", () => {
    expect(commandFromGamepad(null)).toBeNull();
    expect(commandFromGamepad({ axes: [0.05, -0.1] })).toBeNull();
  });

  it("stick up-left maps to forward + counter-clockwise", () => {
    const cmd = commandFromGamepad({ axes: [-0.8, -0.9] });
    expect(cmd).not.toBeNull();
    expect(cmd!.v).toBeCloseTo(0.9);
    expect(cmd!.omega).toBeCloseTo(0.8);
  });

  it("clamps to the unit range", () => {
    const cmd = commandFromGamepad({ axes: [-2, -3] });
    expect(cmd).toEqual({ v: 1, omega: 1 });
  });
});
