// Scene building and painting, split so the scene itself is testable:
// render() reduces a ViewModel to draw primitives; paint() rasterizes them.

import type { ViewModel } from "./store.js";
import { overlay } from "./store.js";

export interface GoalPrimitive {
  kind: "goal";
  x: number;
  y: number;
  label: string;
  highlight: boolean; // declared goal
  mloii: number | null; // confidence in [0,1], null when unavailable
  boir: number | null;
}

export type Primitive =
  | { kind: "bounds"; width: number; height: number }
  | { kind: "obstacle"; x: number; y: number; w: number; h: number }
  | { kind: "trail"; points: { x: number; y: number }[] }
  | GoalPrimitive
  | { kind: "robot"; x: number; y: number; yaw: number }
  | { kind: "banner"; text: string };

export function render(view: ViewModel): Primitive[] {
  const out: Primitive[] = [];
  if (view.connection !== "connected") {
    out.push({ kind: "banner", text: "disconnected — inputs disabled" });
  }
  if (!view.bounds || !view.pose) return out;
  out.push({ kind: "bounds", width: view.bounds.width, height: view.bounds.height });
  for (const o of view.obstacles) {
    out.push({ kind: "obstacle", x: o.x, y: o.y, w: o.w, h: o.h });
  }
  if (view.trail.length > 1) {
    out.push({ kind: "trail", points: view.trail });
  }
  const mloii = overlay(view, "mloii");
  const boir = overlay(view, "boir");
  view.goals.forEach((g, i) => {
    out.push({
      kind: "goal",
      x: g.x,
      y: g.y,
      label: g.label,
      highlight: view.declaredGoal === g.id,
      mloii: mloii ? mloii[i] : null,
      boir: boir ? boir[i] : null,
    });
  });
  out.push({ kind: "robot", x: view.pose.x, y: view.pose.y, yaw: view.pose.yaw });
  return out;
}

// --- canvas painting ---------------------------------------------------------

const COLORS = {
  floor: "#16181d",
  gridline: "#22252c",
  obstacle: "#4a4f5a",
  trail: "#3d6a8f",
  robot: "#e8e8e8",
  heading: "#ff5a5f",
  goal: "#9aa0ab",
  goalHighlight: "#ffd166",
  mloii: "#4fc3f7", // forest confidence bar
  boir: "#ffb74d", // baseline confidence bar
  text: "#d8dade",
};

const BAR_W = 0.9; // meters, width of each confidence bar
const BAR_H = 0.22;

export function paint(
  ctx: CanvasRenderingContext2D,
  prims: Primitive[],
  canvasW: number,
  canvasH: number,
): void {
  ctx.clearRect(0, 0, canvasW, canvasH);
  const bounds = prims.find((p) => p.kind === "bounds") as
    | { kind: "bounds"; width: number; height: number }
    | undefined;
  if (!bounds) {
    const banner = prims.find((p) => p.kind === "banner");
    ctx.fillStyle = COLORS.text;
    ctx.font = "16px system-ui, sans-serif";
    ctx.fillText(banner ? (banner as { text: string }).text : "no session", 20, 30);
    return;
  }
  const margin = 24;
  const scale = Math.min(
    (canvasW - 2 * margin) / bounds.width,
    (canvasH - 2 * margin) / bounds.height,
  );
  const ox = (canvasW - scale * bounds.width) / 2;
  const oy = (canvasH + scale * bounds.height) / 2; // flip y: world up = screen up
  const X = (wx: number) => ox + wx * scale;
  const Y = (wy: number) => oy - wy * scale;

  ctx.fillStyle = COLORS.floor;
  ctx.fillRect(X(0), Y(bounds.height), bounds.width * scale, bounds.height * scale);
  ctx.strokeStyle = COLORS.gridline;
  ctx.lineWidth = 1;
  for (let gx = 0; gx <= bounds.width; gx += 2) {
    ctx.beginPath();
    ctx.moveTo(X(gx), Y(0));
    ctx.lineTo(X(gx), Y(bounds.height));
    ctx.stroke();
  }
  for (let gy = 0; gy <= bounds.height; gy += 2) {
    ctx.beginPath();
    ctx.moveTo(X(0), Y(gy));
    ctx.lineTo(X(bounds.width), Y(gy));
    ctx.stroke();
  }

  for (const p of prims) {
    switch (p.kind) {
      case "obstacle":
        ctx.fillStyle = COLORS.obstacle;
        ctx.fillRect(X(p.x), Y(p.y + p.h), p.w * scale, p.h * scale);
        break;
      case "trail": {
        ctx.strokeStyle = COLORS.trail;
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.moveTo(X(p.points[0].x), Y(p.points[0].y));
        for (const pt of p.points.slice(1)) ctx.lineTo(X(pt.x), Y(pt.y));
        ctx.stroke();
        break;
      }
      case "goal": {
        ctx.strokeStyle = p.highlight ? COLORS.goalHighlight : COLORS.goal;
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.arc(X(p.x), Y(p.y), 0.3 * scale, 0, 2 * Math.PI);
        ctx.stroke();
        ctx.fillStyle = p.highlight ? COLORS.goalHighlight : COLORS.text;
        ctx.font = `${Math.max(12, 0.35 * scale)}px system-ui, sans-serif`;
        ctx.textAlign = "center";
        ctx.fillText(p.label, X(p.x), Y(p.y - 0.75));
        // two stacked confidence bars, forest above baseline
        const bars: Array<[number | null, string, number]> = [
          [p.mloii, COLORS.mloii, 1.15],
          [p.boir, COLORS.boir, 0.85],
        ];
        for (const [value, color, dy] of bars) {
          if (value === null) continue;
          const x0 = X(p.x - BAR_W / 2);
          const y0 = Y(p.y + dy);
          ctx.fillStyle = "#000a";
          ctx.fillRect(x0, y0, BAR_W * scale, BAR_H * scale);
          ctx.fillStyle = color;
          ctx.fillRect(x0, y0, BAR_W * scale * value, BAR_H * scale);
        }
        break;
      }
      case "robot": {
        ctx.fillStyle = COLORS.robot;
        ctx.beginPath();
        ctx.arc(X(p.x), Y(p.y), 0.22 * scale, 0, 2 * Math.PI);
        ctx.fill();
        ctx.strokeStyle = COLORS.heading;
        ctx.lineWidth = 3;
        ctx.beginPath();
        ctx.moveTo(X(p.x), Y(p.y));
        ctx.lineTo(X(p.x + 0.5 * Math.cos(p.yaw)), Y(p.y + 0.5 * Math.sin(p.yaw)));
        ctx.stroke();
        break;
      }
      case "banner":
        ctx.fillStyle = COLORS.goalHighlight;
        ctx.font = "14px system-ui, sans-serif";
        ctx.textAlign = "left";
        ctx.fillText(p.text, 12, 20);
        break;
      default:
        break;
    }
  }
}
