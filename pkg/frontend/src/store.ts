/**
 * Single state store fed exclusively by inbound engine messages.
 * The UI holds no truth of its own: a snapshot rebuilds everything,
 * so reconnecting is indistinguishable from a fresh page load.
 */

import {
  Atlas,
  DEFAULT_UI_RANGE,
  InboundMsg,
  PATTERN_LENGTH,
  PITCH_SLOTS,
} from "./schema.js";

export interface PatternRow {
  steps: number[];
  velocities: number[];
}

export interface UiState {
  connected: boolean;
  models: string[];
  activeModel: string | null;
  latent: { x: number; y: number };
  threshold: number;
  pitchLane: number[];
  length: number;
  bpm: number;
  running: boolean;
  playhead: number;
  patterns: Record<string, PatternRow>;
  atlases: Record<string, Atlas>;
  lastError: string | null;
}

export function initialState(): UiState {
  return {
    connected: false,
    models: [],
    activeModel: null,
    latent: { x: 0, y: 0 },
    threshold: 0.5,
    pitchLane: new Array(PITCH_SLOTS).fill(60),
    length: PATTERN_LENGTH,
    bpm: 120,
    running: false,
    playhead: 0,
    patterns: {},
    atlases: {},
    lastError: null,
  };
}

export type Listener = (state: UiState) => void;

export class Store {
  state: UiState = initialState();
  private listeners = new Set<Listener>();

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  setConnected(connected: boolean): void {
    this.state = { ...this.state, connected };
    this.emit();
  }

  /** Optimistic local echo for controls the engine does not broadcast back. */
  localControl(patch: Partial<UiState>): void {
    this.state = { ...this.state, ...patch };
    this.emit();
  }

  applyInbound(msg: InboundMsg): void {
    this.state = reduce(this.state, msg);
    this.emit();
  }

  /** Atlas (points + range) for the selected model, with a safe default range. */
  activeAtlas(): Atlas {
    const id = this.state.activeModel;
    const atlas = id !== null ? this.state.atlases[id] : undefined;
    return atlas ?? { points: [], range: DEFAULT_UI_RANGE };
  }
}

export function reduce(state: UiState, msg: InboundMsg): UiState {
  switch (msg.type) {
    case "snapshot": {
      const seq = msg.sequencer;
      const patterns: Record<string, PatternRow> = {};
      patterns[msg.active_model] = {
        steps: seq.pattern.slice(),
        velocities: seq.velocities.slice(),
      };
      return {
        ...initialState(),
        connected: true,
        models: msg.models.slice(),
        activeModel: msg.active_model,
        latent: { ...msg.latent },
        threshold: msg.threshold,
        pitchLane: seq.pitch_lane.slice(),
        length: seq.length,
        bpm: seq.bpm,
        running: seq.running,
        playhead: seq.playhead,
        patterns,
        atlases: msg.atlases,
      };
    }
    case "pattern": {
      const patterns = { ...state.patterns };
      patterns[msg.model_id] = {
        steps: msg.steps.slice(),
        velocities: msg.velocities.slice(),
      };
      return { ...state, patterns };
    }
    case "playhead":
      return { ...state, playhead: msg.step };
    case "transport":
      return { ...state, running: msg.running };
    case "error":
      return { ...state, lastError: msg.message };
    default:
      return state;
  }
}
