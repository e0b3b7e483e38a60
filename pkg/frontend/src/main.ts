/**
 * Browser bootstrap: builds the performance surface and binds it to the
 * controller. Layout: an XY pad with the training-data scatter under
 * the cursor, threshold / length / bpm sliders, an 8-slot pitch lane,
 * transport, a model selector and one 32-step lamp row per model.
 */

import { AppController } from "./app.js";
import { EngineClient, WebSocketCtor } from "./client.js";
import { PadGeometry } from "./pad.js";
import { drawCrosshair, drawScatter } from "./scatter.js";
import { PATTERN_LENGTH, PITCH_SLOTS } from "./schema.js";
import { Store, UiState } from "./store.js";

const PAD_SIZE = 420;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, parent: Element, className = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  parent.appendChild(node);
  return node;
}

function slider(parent: Element, label: string, min: number, max: number,
                step: number, value: number,
                onInput: (v: number) => void): HTMLInputElement {
  const wrap = el("label", parent, "control");
  wrap.textContent = label;
  const input = el("input", wrap);
  input.type = "range";
  input.min = String(min);
  input.max = String(max);
  input.step = String(step);
  input.value = String(value);
  input.addEventListener("input", () => onInput(Number(input.value)));
  return input;
}

export function boot(root: HTMLElement, wsUrl: string, socketCtor: WebSocketCtor): void {
  const store = new Store();
  const client = new EngineClient(wsUrl, socketCtor, store);
  const controller = new AppController(client);

  root.innerHTML = "";
  const status = el("div", root, "status");
  const columns = el("div", root, "columns");
  const padColumn = el("div", columns, "pad-column");
  const controlColumn = el("div", columns, "control-column");

  // XY pad: scatter canvas below, crosshair canvas above
  const padWrap = el("div", padColumn, "pad");
  padWrap.style.width = `${PAD_SIZE}px`;
  padWrap.style.height = `${PAD_SIZE}px`;
  const scatterCanvas = el("canvas", padWrap);
  const cursorCanvas = el("canvas", padWrap);
  for (const canvas of [scatterCanvas, cursorCanvas]) {
    canvas.width = PAD_SIZE;
    canvas.height = PAD_SIZE;
  }
  const geom: PadGeometry = { width: PAD_SIZE, height: PAD_SIZE };
  const rangeLabel = el("div", padColumn, "range-label");

  let dragging = false;
  const pointer = (ev: PointerEvent) => {
    const rect = cursorCanvas.getBoundingClientRect();
    controller.padPointer(ev.clientX - rect.left, ev.clientY - rect.top, geom);
  };
  cursorCanvas.addEventListener("pointerdown", (ev) => {
    dragging = true;
    cursorCanvas.setPointerCapture(ev.pointerId);
    pointer(ev);
  });
  cursorCanvas.addEventListener("pointermove", (ev) => {
    if (dragging) pointer(ev);
  });
  cursorCanvas.addEventListener("pointerup", () => {
    dragging = false;
    controller.padRelease();
  });

  // controls
  const thresholdSlider = slider(controlColumn, "threshold", 0, 1, 0.01, 0.5,
                                 (v) => controller.threshold(v));
  const lengthSlider = slider(controlColumn, "length", 1, PATTERN_LENGTH, 1,
                              PATTERN_LENGTH, (v) => controller.length(v));
  const bpmSlider = slider(controlColumn, "bpm", 40, 240, 1, 120,
                           (v) => controller.bpm(v));

  const pitchWrap = el("div", controlColumn, "pitch-lane");
  const pitchInputs: HTMLInputElement[] = [];
  for (let slot = 0; slot < PITCH_SLOTS; slot++) {
    const input = el("input", pitchWrap, "pitch");
    input.type = "number";
    input.min = "0";
    input.max = "127";
    input.value = "60";
    input.addEventListener("change", () => controller.pitch(slot, Number(input.value)));
    pitchInputs.push(input);
  }

  const transportWrap = el("div", controlColumn, "transport");
  const startButton = el("button", transportWrap);
  startButton.textContent = "start";
  startButton.addEventListener("click", () => controller.transport("start"));
  const stopButton = el("button", transportWrap);
  stopButton.textContent = "stop";
  stopButton.addEventListener("click", () => controller.transport("stop"));

  const modelWrap = el("div", controlColumn, "models");
  const rowsWrap = el("div", root, "pattern-rows");

  function render(state: UiState): void {
    status.textContent = state.connected
      ? `connected | ${state.running ? "playing" : "stopped"}`
      : "disconnected";
    status.classList.toggle("offline", !state.connected);

    const atlas = store.activeAtlas();
    const scatterCtx = scatterCanvas.getContext("2d");
    if (scatterCtx && state.connected) {
      drawScatter(scatterCtx, atlas.points, atlas.range, geom);
    } else if (scatterCtx) {
      scatterCtx.clearRect(0, 0, geom.width, geom.height);
    }
    const cursorCtx = cursorCanvas.getContext("2d");
    if (cursorCtx) {
      cursorCtx.clearRect(0, 0, geom.width, geom.height);
      drawCrosshair(cursorCtx, state.latent.x, state.latent.y, atlas.range, geom);
    }
    rangeLabel.textContent =
      `x/y range [${atlas.range.suggested_ui_min}, ${atlas.range.suggested_ui_max}]`;

    thresholdSlider.value = String(state.threshold);
    lengthSlider.value = String(state.length);
    bpmSlider.value = String(state.bpm);
    state.pitchLane.forEach((note, slot) => {
      const input = pitchInputs[slot];
      if (input && document.activeElement !== input) input.value = String(note);
    });

    modelWrap.innerHTML = "";
    for (const id of state.models) {
      const button = el("button", modelWrap,
                        id === state.activeModel ? "model active" : "model");
      button.textContent = id;
      button.addEventListener("click", () => controller.selectModel(id));
    }

    rowsWrap.innerHTML = "";
    for (const id of state.models) {
      const pattern = state.patterns[id];
      const row = el("div", rowsWrap, "row");
      const name = el("span", row, "row-name");
      name.textContent = id;
      for (let step = 0; step < PATTERN_LENGTH; step++) {
        const lamp = el("span", row, "lamp");
        const on = pattern !== undefined && pattern.steps[step] === 1;
        const velocity = pattern !== undefined ? pattern.velocities[step] ?? 0 : 0;
        if (on) {
          lamp.classList.add("on");
          lamp.style.opacity = String(0.35 + 0.65 * (velocity / 127));
        }
        if (id === state.activeModel && step === state.playhead % state.length) {
          lamp.classList.add("playhead");
        }
        if (step >= state.length) lamp.classList.add("muted");
      }
    }
  }

  store.subscribe(render);
  render(store.state);
  client.connect();
}

declare global {
  interface Window {
    LATENTSEQ_WS_URL?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  const url = window.LATENTSEQ_WS_URL ?? `ws://${location.hostname}:8080`;
  boot(document.getElementById("app") as HTMLElement, url,
       WebSocket as unknown as WebSocketCtor);
}
