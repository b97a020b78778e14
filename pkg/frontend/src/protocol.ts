// Wire protocol types for the intentd teleop service (JSON text frames).

export interface Pose {
  x: number;
  y: number;
  yaw: number;
}

export interface GoalInfo {
  id: number;
  label: string;
  x: number;
  y: number;
}

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface StateFrame {
  type: "state";
  frame: number;
  t: number;
  pose: Pose;
  goals: GoalInfo[];
  // present on the first state frame per connection only
  obstacles?: Rect[];
  bounds?: { width: number; height: number };
  session?: string;
  scenario?: number;
  declared_goal?: number | null;
}

export interface IntentFrame {
  type: "intent";
  frame: number;
  mloii: number[] | null;
  boir: number[] | null;
}

export interface MethodMetrics {
  accuracy: number;
  log_loss: number;
}

export interface SummaryFrame {
  type: "summary";
  frame: number;
  frames: number;
  reason: string;
  declared_goal: number | null;
  recording: string | null;
  metrics: Record<string, MethodMetrics> | null;
}

export interface WarningFrame {
  type: "warning";
  warning: string;
  v?: number;
  omega?: number;
}

export interface RejectedFrame {
  type: "rejected";
  reason: string;
}

export interface ErrorFrame {
  type: "error";
  error: string;
}

export type ServerFrame =
  | StateFrame
  | IntentFrame
  | SummaryFrame
  | WarningFrame
  | RejectedFrame
  | ErrorFrame;

export interface ScenarioListing {
  id: number;
  n_goals: number;
  goals: GoalInfo[];
  bounds: { width: number; height: number };
}

export function parseServerFrame(raw: string): ServerFrame | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null || !("type" in doc)) return null;
  return doc as ServerFrame;
}
