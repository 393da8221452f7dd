import { describe, expect, it } from "vitest";

import { IllegalTransition, Session } from "../src/state.js";

const tenIds = Array.from({ length: 10 }, (_, i) => `b${i}`);

describe("session state machine", () => {
  it("starts in demographics", () => {
    expect(new Session().phase).toBe("demographics");
  });

  it("moves to labeling only via registration", () => {
    const s = new Session();
    s.beginLabeling("w1", tenIds);
    expect(s.phase).toBe("labeling");
    expect(s.currentBatchId).toBe("b0");
  });

  it("cannot begin labeling twice", () => {
    const s = new Session();
    s.beginLabeling("w1", tenIds);
    expect(() => s.beginLabeling("w1", tenIds)).toThrow(IllegalTransition);
  });

  it("cannot submit from demographics (no skipping)", () => {
    expect(() => new Session().markSubmitted("b0")).toThrow(IllegalTransition);
  });

  it("reaches done only after every batch", () => {
    const s = new Session();
    s.beginLabeling("w1", tenIds);
    for (const id of tenIds.slice(0, 9)) {
      s.markSubmitted(id);
      expect(s.phase).toBe("labeling");
    }
    s.markSubmitted("b9");
    expect(s.phase).toBe("done");
    expect(s.progress).toEqual({ done: 10, total: 10 });
  });

  it("rejects duplicate submissions", () => {
    const s = new Session();
    s.beginLabeling("w1", tenIds);
    s.markSubmitted("b0");
    expect(() => s.markSubmitted("b0")).toThrow(IllegalTransition);
  });

  it("rejects foreign batches", () => {
    const s = new Session();
    s.beginLabeling("w1", tenIds);
    expect(() => s.markSubmitted("zz")).toThrow(IllegalTransition);
  });

  it("advances to the next unfinished batch", () => {
    const s = new Session();
    s.beginLabeling("w1", tenIds);
    s.markSubmitted("b0");
    expect(s.currentBatchId).toBe("b1");
    s.goTo(5);
    s.markSubmitted("b5");
    expect(s.currentBatchId).toBe("b6");
  });

  it("navigation is bounded", () => {
    const s = new Session();
    s.beginLabeling("w1", tenIds);
    expect(() => s.goTo(10)).toThrow(IllegalTransition);
    expect(() => s.goTo(-1)).toThrow(IllegalTransition);
  });
});
