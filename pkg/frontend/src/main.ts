/**
 * Browser entry point: binds the viewer controller to the page controls and
 * renders the current scene to a canvas on every animation frame.
 *
 * The service base URL defaults to port 8000 on the page's host and can be
 * overridden with ?api=http://host:port.
 */

import { ViewerApi, type Layer, type WallMode } from "./api.js";
import { projectShapes, drawShapes } from "./render.js";
import { ViewerController } from "./viewer.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

const params = new URLSearchParams(location.search);
const base = params.get("api") ?? `http://${location.hostname || "127.0.0.1"}:8000`;

const canvas = el<HTMLCanvasElement>("view");
const ctx = canvas.getContext("2d");
if (ctx === null) throw new Error("canvas 2d context unavailable");

const buildingSelect = el<HTMLSelectElement>("building");
const layerSelect = el<HTMLSelectElement>("layer");
const wallsSelect = el<HTMLSelectElement>("walls");
const speedInput = el<HTMLInputElement>("speed");
const playButton = el<HTMLButtonElement>("play");
const seekRange = el<HTMLInputElement>("seek");
const banner = el<HTMLDivElement>("banner");
const status = el<HTMLDivElement>("status");
const legendBox = el<HTMLDivElement>("legend");

const api = new ViewerApi(base);
const controller = new ViewerController({
  api,
  onChange: (state) => {
    banner.textContent = state.banner ?? "";
    banner.style.display = state.banner === null ? "none" : "block";
    const ts = state.displayedTimestamp;
    const poly = state.scene?.nominalPolygons;
    status.textContent =
      (ts === null ? "no frame" : `t=${ts.toFixed(1)} s`) +
      (poly === undefined ? "" : ` · ${poly} nominal polygons`) +
      (state.playing ? ` · ${state.speed}x` : "");
    playButton.textContent = state.playing ? "Pause" : "Play";
    if (state.legend !== null) {
      legendBox.textContent = `${state.legend.layer}: ${state.legend.lo} – ${state.legend.hi} ${state.legend.units}`;
    }
    const plan = controller.playback?.plan;
    if (plan !== undefined && plan !== null && ts !== null && plan.t1 > plan.t0) {
      seekRange.value = String(((ts - plan.t0) / (plan.t1 - plan.t0)) * 1000);
    }
  },
});

async function boot(): Promise<void> {
  try {
    const buildings = await api.listBuildings();
    buildingSelect.innerHTML = "";
    for (const id of buildings) {
      const option = document.createElement("option");
      option.value = id;
      option.textContent = id;
      buildingSelect.appendChild(option);
    }
    if (buildings.length > 0) {
      await controller.selectBuilding(buildings[0]);
      await controller.loadPlayback();
    }
  } catch (error) {
    banner.textContent = error instanceof Error ? error.message : String(error);
    banner.style.display = "block";
  }
}

buildingSelect.addEventListener("change", () => {
  void controller.selectBuilding(buildingSelect.value).then(() => controller.loadPlayback());
});
layerSelect.addEventListener("change", () => {
  void controller.setLayer(layerSelect.value as Layer);
});
wallsSelect.addEventListener("change", () => {
  controller.setWallMode(wallsSelect.value as WallMode);
});
speedInput.addEventListener("change", () => {
  const speed = Number(speedInput.value);
  if (speed > 0) void controller.setSpeed(speed);
});
playButton.addEventListener("click", () => {
  if (controller.playback === null) {
    void controller.loadPlayback().then(() => controller.play());
  } else if (controller.state.playing) {
    controller.pause();
  } else {
    controller.play();
  }
});
seekRange.addEventListener("input", () => {
  const plan = controller.playback?.plan;
  if (plan === undefined || plan === null) return;
  const fraction = Number(seekRange.value) / 1000;
  controller.seekTo(plan.t0 + fraction * (plan.t1 - plan.t0));
});

// Fly controls: drag to look, WASD/RF to move, Shift for a faster stride.
const held = new Set<string>();
window.addEventListener("keydown", (e) => held.add(e.key.toLowerCase()));
window.addEventListener("keyup", (e) => held.delete(e.key.toLowerCase()));
let dragging = false;
let lastX = 0;
let lastY = 0;
canvas.addEventListener("pointerdown", (e) => {
  dragging = true;
  lastX = e.clientX;
  lastY = e.clientY;
  canvas.setPointerCapture(e.pointerId);
});
canvas.addEventListener("pointermove", (e) => {
  if (!dragging) return;
  controller.turn(-(e.clientX - lastX) * 0.005, -(e.clientY - lastY) * 0.005);
  lastX = e.clientX;
  lastY = e.clientY;
});
canvas.addEventListener("pointerup", () => {
  dragging = false;
  controller.refreshScene();
});

function applyKeys(): void {
  const stride = held.has("shift") ? 0.5 : 0.12;
  let forward = 0;
  let right = 0;
  let up = 0;
  if (held.has("w")) forward += stride;
  if (held.has("s")) forward -= stride;
  if (held.has("d")) right += stride;
  if (held.has("a")) right -= stride;
  if (held.has("r")) up += stride;
  if (held.has("f")) up -= stride;
  if (forward !== 0 || right !== 0 || up !== 0) controller.move(forward, right, up);
}

function resize(): void {
  canvas.width = canvas.clientWidth * devicePixelRatio;
  canvas.height = canvas.clientHeight * devicePixelRatio;
}
window.addEventListener("resize", resize);
resize();

function frame(): void {
  applyKeys();
  controller.tick();
  const viewport = { width: canvas.width, height: canvas.height };
  if (ctx !== null) {
    drawShapes(ctx, projectShapes(controller.state.shapes, controller.state.camera, viewport), viewport);
  }
  requestAnimationFrame(frame);
}

void boot();
requestAnimationFrame(frame);
