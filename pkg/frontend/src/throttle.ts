/**
 * Latest-wins rate limiter for the XY pad stream.
 *
 * Pointer events arrive at whatever rate the device produces (easily
 * beyond 1 kHz with coalesced touch input); the engine only wants the
 * newest position, at most 60 times a second. The first push in a quiet
 * period goes out immediately, later pushes overwrite a pending slot
 * that flushes when the interval expires.
 */

export type Clock = () => number;
export type Scheduler = (fn: () => void, ms: number) => unknown;
export type Canceller = (handle: unknown) => void;

// 17 ms, not 1000/60: a 16.67 ms spacing admits a 61st message inside a
// one-second window, and the contract is a hard 60.
export const DEFAULT_MIN_INTERVAL_MS = 17;

export class LatestWinsThrottle<T> {
  private lastSent = -Infinity;
  private pending: T | undefined;
  private timer: unknown = null;
  sent = 0;

  constructor(
    private readonly emit: (value: T) => void,
    private readonly minIntervalMs: number = DEFAULT_MIN_INTERVAL_MS,
    private readonly now: Clock = () => Date.now(),
    private readonly schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
    private readonly cancel: Canceller = (h) => clearTimeout(h as never),
  ) {}

  push(value: T): void {
    const elapsed = this.now() - this.lastSent;
    if (elapsed >= this.minIntervalMs && this.timer === null) {
      this.send(value);
      return;
    }
    this.pending = value;
    if (this.timer === null) {
      const wait = Math.max(0, this.minIntervalMs - elapsed);
      this.timer = this.schedule(() => this.fire(), wait);
    }
  }

  /** Send any pending value right away (e.g. on pointer-up). */
  flush(): void {
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.fire();
    }
  }

  private fire(): void {
    this.timer = null;
    if (this.pending !== undefined) {
      const value = this.pending;
      this.pending = undefined;
      this.send(value);
    }
  }

  private send(value: T): void {
    this.lastSent = this.now();
    this.sent += 1;
    this.emit(value);
  }
}
