// View-model store: a pure reducer over server frames.
//
// The console holds no truth of its own — everything rendered derives from
// the latest server-acknowledged frames, so a reload that reconnects
// (attach) rebuilds the same display from the stream alone.

import type { GoalInfo, Pose, Rect, ServerFrame, SummaryFrame } from "./protocol.js";

export type ConnectionStatus = "disconnected" | "connecting" | "connected";

export const TRAIL_LIMIT = 300;

export interface IntentSnapshot {
  frame: number;
  mloii: number[] | null;
  boir: number[] | null;
}

export interface ViewModel {
  connection: ConnectionStatus;
  session: string | null;
  scenario: number | null;
  declaredGoal: number | null;
  bounds: { width: number; height: number } | null;
  obstacles: Rect[];
  goals: GoalInfo[];
  pose: Pose | null;
  frame: number;
  t: number;
  trail: { x: number; y: number }[];
  intent: IntentSnapshot | null;
  summary: SummaryFrame | null;
  notice: string | null;
  ended: boolean;
}

export function initialView(): ViewModel {
  return {
    connection: "disconnected",
    session: null,
    scenario: null,
    declaredGoal: null,
    bounds: null,
    obstacles: [],
    goals: [],
    pose: null,
    frame: -1,
    t: 0,
    trail: [],
    intent: null,
    summary: null,
    notice: null,
    ended: false,
  };
}

export function setConnection(view: ViewModel, status: ConnectionStatus): ViewModel {
  return { ...view, connection: status };
}

export function reduce(view: ViewModel, frame: ServerFrame): ViewModel {
  switch (frame.type) {
    case "state": {
      if (frame.frame <= view.frame) return view; // frames arrive in order; drop stale
      const trail = view.pose
        ? [...view.trail.slice(-(TRAIL_LIMIT - 1)), { x: view.pose.x, y: view.pose.y }]
        : view.trail;
      return {
        ...view,
        pose: frame.pose,
        goals: frame.goals,
        frame: frame.frame,
        t: frame.t,
        trail,
        obstacles: frame.obstacles ?? view.obstacles,
        bounds: frame.bounds ?? view.bounds,
        session: frame.session ?? view.session,
        scenario: frame.scenario ?? view.scenario,
        declaredGoal:
          frame.declared_goal !== undefined ? frame.declared_goal : view.declaredGoal,
      };
    }
    case "intent":
      return { ...view, intent: { frame: frame.frame, mloii: frame.mloii, boir: frame.boir } };
    case "summary":
      return { ...view, summary: frame, ended: true };
    case "warning":
      return { ...view, notice: frame.warning };
    case "rejected":
      return { ...view, notice: frame.reason };
    case "error":
      return { ...view, notice: frame.error };
    default:
      return view;
  }
}

// Per-goal confidence for one method, aligned with the goal list; null when
// the method is unavailable or no intent frame has arrived yet.
export function overlay(view: ViewModel, method: "mloii" | "boir"): number[] | null {
  const probs = view.intent?.[method] ?? null;
  if (!probs || probs.length !== view.goals.length) return null;
  return probs;
}

export class Store {
  view: ViewModel = initialView();
  private listeners: Array<(v: ViewModel) => void> = [];

  dispatch(frame: ServerFrame): void {
    this.view = reduce(this.view, frame);
    for (const fn of this.listeners) fn(this.view);
  }

  setConnection(status: ConnectionStatus): void {
    this.view = setConnection(this.view, status);
    for (const fn of this.listeners) fn(this.view);
  }

  reset(): void {
    this.view = initialView();
    for (const fn of this.listeners) fn(this.view);
  }

  subscribe(fn: (v: ViewModel) => void): void {
    this.listeners.push(fn);
  }
}
