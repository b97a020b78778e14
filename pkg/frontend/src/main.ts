// Console bootstrap: session controls, canvas loop, and summary panel.

import { ConsoleClient } from "./client.js";
import type { MethodMetrics, ScenarioListing } from "./protocol.js";
import { paint, render } from "./scene.js";
import { Store } from "./store.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const canvas = $<HTMLCanvasElement>("scene");
const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("2D canvas context unavailable");

const scenarioSelect = $<HTMLSelectElement>("scenario");
const goalSelect = $<HTMLSelectElement>("declared-goal");
const startBtn = $<HTMLButtonElement>("start");
const endBtn = $<HTMLButtonElement>("end");
const statusEl = $<HTMLSpanElement>("status");
const noticeEl = $<HTMLDivElement>("notice");
const summaryEl = $<HTMLDivElement>("summary");

const store = new Store();
const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
const client = new ConsoleClient(store, wsUrl);
client.keyboard.attach(window);

let scenarios: ScenarioListing[] = [];

async function loadScenarios(): Promise<void> {
  const resp = await fetch("/scenarios");
  scenarios = (await resp.json()) as ScenarioListing[];
  scenarioSelect.innerHTML = "";
  for (const s of scenarios) {
    const opt = document.createElement("option");
    opt.value = String(s.id);
    opt.textContent = `scenario ${s.id} (${s.n_goals} goals)`;
    scenarioSelect.appendChild(opt);
  }
  refreshGoalChoices();
}

function refreshGoalChoices(): void {
  const sid = Number(scenarioSelect.value);
  const listing = scenarios.find((s) => s.id === sid);
  goalSelect.innerHTML = "<option value=''>no declared goal</option>";
  for (const g of listing?.goals ?? []) {
    const opt = document.createElement("option");
    opt.value = String(g.id);
    opt.textContent = `goal ${g.label}`;
    goalSelect.appendChild(opt);
  }
}

scenarioSelect.addEventListener("change", refreshGoalChoices);

startBtn.addEventListener("click", () => {
  const declared = goalSelect.value === "" ? null : Number(goalSelect.value);
  summaryEl.textContent = "";
  client.start(Number(scenarioSelect.value), declared);
});

endBtn.addEventListener("click", () => client.end());

function fmtMetrics(metrics: Record<string, MethodMetrics> | null): string {
  if (!metrics) return "no ground truth declared — no metrics";
  return Object.entries(metrics)
    .map(([name, m]) =>
      `${name}: accuracy ${(m.accuracy * 100).toFixed(1)}%, log-loss ${m.log_loss.toFixed(3)}`)
    .join("\n");
}

store.subscribe((view) => {
  statusEl.textContent = view.connection + (view.session ? ` · session ${view.session}` : "");
  statusEl.className = view.connection;
  const controlsEnabled = view.connection === "connected";
  startBtn.disabled = !controlsEnabled;
  endBtn.disabled = !controlsEnabled || view.session === null || view.ended;
  noticeEl.textContent = view.notice ?? "";
  if (view.summary) {
    const s = view.summary;
    summaryEl.textContent =
      `session ended (${s.reason}) after ${s.frames} frames\n` +
      fmtMetrics(s.metrics) +
      (s.recording ? `\nrecording: ${s.recording}` : "");
  }
});

function resize(): void {
  const dpr = window.devicePixelRatio || 1;
  canvas.width = Math.round(canvas.clientWidth * dpr);
  canvas.height = Math.round(canvas.clientHeight * dpr);
  ctx!.setTransform(dpr, 0, 0, dpr, 0, 0);
}
window.addEventListener("resize", resize);
resize();

function frameLoop(): void {
  paint(ctx!, render(store.view), canvas.clientWidth, canvas.clientHeight);
  requestAnimationFrame(frameLoop);
}

loadScenarios().catch((e) => {
  noticeEl.textContent = `failed to load scenarios: ${e}`;
});
client.connect();
frameLoop();
