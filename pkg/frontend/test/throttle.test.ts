import { describe, expect, it } from "vitest";

import { LatestWinsThrottle } from "../src/throttle.js";

/** Deterministic clock + scheduler so the 1 kHz stream is exact. */
function fakeTime() {
  let now = 0;
  const timers: Array<{ at: number; fn: () => void; dead: boolean }> = [];
  return {
    now: () => now,
    schedule: (fn: () => void, ms: number) => {
      const timer = { at: now + ms, fn, dead: false };
      timers.push(timer);
      return timer;
    },
    cancel: (handle: unknown) => {
      (handle as { dead: boolean }).dead = true;
    },
    advance(to: number) {
      while (true) {
        const due = timers
          .filter((t) => !t.dead && t.at <= to)
          .sort((a, b) => a.at - b.at)[0];
        if (due === undefined) break;
        due.dead = true;
        now = due.at;
        due.fn();
      }
      now = to;
    },
  };
}

describe("latest-wins throttle", () => {
  it("keeps a 1 kHz pointer stream at or under 60 messages per second", () => {
    const time = fakeTime();
    const sent: number[] = [];
    const throttle = new LatestWinsThrottle<number>(
      (v) => sent.push(v), undefined, time.now, time.schedule, time.cancel,
    );
    for (let ms = 0; ms < 1000; ms++) {
      time.advance(ms);
      throttle.push(ms);
    }
    time.advance(1100); // let the trailing timer flush
    expect(sent.length).toBeLessThanOrEqual(60);
    expect(sent.length).toBeGreaterThan(30); // still a responsive stream
    expect(sent[sent.length - 1]).toBe(999); // newest value always wins
  });

  it("first push in a quiet period goes out immediately", () => {
    const time = fakeTime();
    const sent: number[] = [];
    const throttle = new LatestWinsThrottle<number>(
      (v) => sent.push(v), undefined, time.now, time.schedule, time.cancel,
    );
    throttle.push(1);
    expect(sent).toEqual([1]);
    time.advance(500);
    throttle.push(2);
    expect(sent).toEqual([1, 2]);
  });

  it("intermediate values are dropped, not queued", () => {
    const time = fakeTime();
    const sent: number[] = [];
    const throttle = new LatestWinsThrottle<number>(
      (v) => sent.push(v), undefined, time.now, time.schedule, time.cancel,
    );
    throttle.push(1);
    throttle.push(2);
    throttle.push(3);
    time.advance(100);
    expect(sent).toEqual([1, 3]);
  });

  it("flush sends the pending value at once", () => {
    const time = fakeTime();
    const sent: number[] = [];
    const throttle = new LatestWinsThrottle<number>(
      (v) => sent.push(v), undefined, time.now, time.schedule, time.cancel,
    );
    throttle.push(1);
    throttle.push(2);
    throttle.flush();
    expect(sent).toEqual([1, 2]);
    time.advance(1000);
    expect(sent).toEqual([1, 2]); // cancelled timer must not re-fire
  });
});
