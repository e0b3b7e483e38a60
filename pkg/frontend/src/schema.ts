/**
 * The WebSocket wire contract, plus the client-side clamping that keeps
 * every outbound message inside the ranges the engine will accept.
 * Controls are built through the make* factories only, so an
 * out-of-range slider or pointer can never reach the socket raw.
 */

export interface LatentMsg {
  type: "latent";
  x: number;
  y: number;
}

export interface ThresholdMsg {
  type: "threshold";
  value: number;
}

export interface ModelMsg {
  type: "model";
  id: string;
}

export interface PitchMsg {
  type: "pitch";
  slot: number;
  note: number;
}

export interface LengthMsg {
  type: "length";
  value: number;
}

export interface BpmMsg {
  type: "bpm";
  value: number;
}

export interface TransportMsg {
  type: "transport";
  action: "start" | "stop";
}

export type OutboundMsg =
  | LatentMsg
  | ThresholdMsg
  | ModelMsg
  | PitchMsg
  | LengthMsg
  | BpmMsg
  | TransportMsg;

export interface AtlasPoint {
  id: string;
  x: number;
  y: number;
}

export interface AtlasRange {
  min_x: number;
  max_x: number;
  min_y: number;
  max_y: number;
  suggested_ui_min: number;
  suggested_ui_max: number;
}

export interface Atlas {
  points: AtlasPoint[];
  range: AtlasRange;
}

export interface SequencerSnapshot {
  pattern: number[];
  velocities: number[];
  pitch_lane: number[];
  length: number;
  bpm: number;
  playhead: number;
  running: boolean;
}

export interface SnapshotMsg {
  type: "snapshot";
  models: string[];
  active_model: string;
  latent: { x: number; y: number };
  threshold: number;
  atlases: Record<string, Atlas>;
  sequencer: SequencerSnapshot;
}

export interface PatternMsg {
  type: "pattern";
  model_id: string;
  steps: number[];
  velocities: number[];
  active: boolean;
}

export interface PlayheadMsg {
  type: "playhead";
  step: number;
}

export interface TransportStateMsg {
  type: "transport";
  running: boolean;
}

export interface ErrorMsg {
  type: "error";
  message: string;
}

export type InboundMsg =
  | SnapshotMsg
  | PatternMsg
  | PlayheadMsg
  | TransportStateMsg
  | ErrorMsg;

export const PATTERN_LENGTH = 32;
export const PITCH_SLOTS = 8;
export const DEFAULT_UI_RANGE: AtlasRange = {
  min_x: 0,
  max_x: 0,
  min_y: 0,
  max_y: 0,
  suggested_ui_min: -10,
  suggested_ui_max: 10,
};

export function clamp(value: number, lo: number, hi: number): number {
  if (Number.isNaN(value)) return lo;
  return Math.min(hi, Math.max(lo, value));
}

export function makeLatent(x: number, y: number, range: AtlasRange): LatentMsg {
  return {
    type: "latent",
    x: clamp(x, range.suggested_ui_min, range.suggested_ui_max),
    y: clamp(y, range.suggested_ui_min, range.suggested_ui_max),
  };
}

export function makeThreshold(value: number): ThresholdMsg {
  return { type: "threshold", value: clamp(value, 0, 1) };
}

export function makeModel(id: string): ModelMsg {
  return { type: "model", id };
}

export function makePitch(slot: number, note: number): PitchMsg {
  return {
    type: "pitch",
    slot: Math.round(clamp(slot, 0, PITCH_SLOTS - 1)),
    note: Math.round(clamp(note, 0, 127)),
  };
}

export function makeLength(value: number): LengthMsg {
  return { type: "length", value: Math.round(clamp(value, 1, PATTERN_LENGTH)) };
}

export function makeBpm(value: number): BpmMsg {
  return { type: "bpm", value: clamp(value, 20, 300) };
}

export function makeTransport(action: "start" | "stop"): TransportMsg {
  return { type: "transport", action };
}

/** Wire-level guard mirroring the server's validation exactly. */
export function isValidOutbound(msg: OutboundMsg): boolean {
  switch (msg.type) {
    case "latent":
      return Number.isFinite(msg.x) && Number.isFinite(msg.y);
    case "threshold":
      return Number.isFinite(msg.value) && msg.value >= 0 && msg.value <= 1;
    case "model":
      return typeof msg.id === "string" && msg.id.length > 0;
    case "pitch":
      return (
        Number.isInteger(msg.slot) && msg.slot >= 0 && msg.slot < PITCH_SLOTS &&
        Number.isInteger(msg.note) && msg.note >= 0 && msg.note <= 127
      );
    case "length":
      return Number.isInteger(msg.value) && msg.value >= 1 && msg.value <= PATTERN_LENGTH;
    case "bpm":
      return Number.isFinite(msg.value) && msg.value > 0;
    case "transport":
      return msg.action === "start" || msg.action === "stop";
    default:
      return false;
  }
}
