/**
 * Headless controller between user gestures and the wire.
 *
 * Every control path runs: raw input -> clamped schema message ->
 * client (which validates again) -> WebSocket. The XY pad stream
 * additionally runs through the 60 Hz latest-wins throttle. main.ts
 * binds this to the DOM; tests drive it directly.
 */

import { EngineClient } from "./client.js";
import { PadGeometry, pixelToLatent } from "./pad.js";
import {
  makeBpm,
  makeLatent,
  makeLength,
  makeModel,
  makePitch,
  makeThreshold,
  makeTransport,
  OutboundMsg,
} from "./schema.js";
import { LatestWinsThrottle } from "./throttle.js";

export class AppController {
  readonly latentThrottle: LatestWinsThrottle<OutboundMsg>;

  constructor(private readonly client: EngineClient,
              throttle?: LatestWinsThrottle<OutboundMsg>) {
    this.latentThrottle = throttle ?? new LatestWinsThrottle((msg) => this.client.send(msg));
  }

  private get store() {
    return this.client.store;
  }

  /** Pointer position on the pad, in pixels; range comes from the active atlas. */
  padPointer(px: number, py: number, geom: PadGeometry): void {
    const range = this.store.activeAtlas().range;
    const { x, y } = pixelToLatent(px, py, geom, range);
    this.store.localControl({ latent: { x, y } });
    this.latentThrottle.push(makeLatent(x, y, range));
  }

  /** Latent coordinates directly (scripted drags, tests, MIDI mapping). */
  latent(x: number, y: number): void {
    const range = this.store.activeAtlas().range;
    const msg = makeLatent(x, y, range);
    this.store.localControl({ latent: { x: msg.x, y: msg.y } });
    this.latentThrottle.push(msg);
  }

  padRelease(): void {
    this.latentThrottle.flush();
  }

  threshold(value: number): void {
    const msg = makeThreshold(value);
    this.store.localControl({ threshold: msg.value });
    this.client.send(msg);
  }

  length(value: number): void {
    const msg = makeLength(value);
    this.store.localControl({ length: msg.value });
    this.client.send(msg);
  }

  pitch(slot: number, note: number): void {
    const msg = makePitch(slot, note);
    const lane = this.store.state.pitchLane.slice();
    lane[msg.slot] = msg.note;
    this.store.localControl({ pitchLane: lane });
    this.client.send(msg);
  }

  bpm(value: number): void {
    const msg = makeBpm(value);
    this.store.localControl({ bpm: msg.value });
    this.client.send(msg);
  }

  transport(action: "start" | "stop"): void {
    this.client.send(makeTransport(action));
  }

  selectModel(id: string): void {
    if (!this.store.state.models.includes(id)) return;
    this.store.localControl({ activeModel: id });
    this.client.send(makeModel(id));
  }
}
