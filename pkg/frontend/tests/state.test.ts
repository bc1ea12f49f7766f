import { beforeEach, describe, expect, it } from "vitest";

import { applyFrame, initialState, visibleEvents } from "../src/state.js";
import { countersFrame, frame, resetSeq, snapshotFrame, studentEvent } from "./helpers.js";

beforeEach(resetSeq);

describe("frame folding", () => {
  it("snapshot replaces the mirrored state wholesale", () => {
    const state = initialState();
    applyFrame(state, snapshotFrame({ events: [studentEvent(1), studentEvent(2)] }));
    expect(state.connection).toBe("connected");
    expect([...state.events.keys()]).toEqual([1, 2]);
    expect(state.you?.displayName).toBe("Ada");
    applyFrame(state, snapshotFrame({ events: [studentEvent(3)] }));
    expect([...state.events.keys()]).toEqual([3]);
  });

  it("counters are taken verbatim, never computed", () => {
    const state = initialState();
    applyFrame(state, snapshotFrame());
    applyFrame(state, countersFrame(12, 7, 5));
    expect(state.counters?.totalEvents).toBe(12);
    expect(state.counters?.falsePositive).toBe(7);
    expect(state.counters?.genuine).toBe(5);
    // deliberately inconsistent payload still renders verbatim
    applyFrame(state, countersFrame(99, 1, 1));
    expect(state.counters?.totalEvents).toBe(99);
  });

  it("event updates merge changed fields only", () => {
    const state = initialState();
    applyFrame(state, snapshotFrame({ events: [studentEvent(1)] }));
    applyFrame(state, frame("event.update", {
      eventId: 1, changed: { triageState: "escalated", triagedBy: "someone" },
    }));
    const event = state.events.get(1)!;
    expect(event.triageState).toBe("escalated");
    expect(event.description).toContain("suspicious activity");
  });

  it("a reveal update adds ground-truth fields previously absent", () => {
    const state = initialState();
    applyFrame(state, snapshotFrame({ events: [studentEvent(1)] }));
    expect("status" in state.events.get(1)!).toBe(false);
    applyFrame(state, frame("event.update", {
      eventId: 1,
      changed: { verdict: "confirmed_genuine", status: "genuine",
                 templateId: "malware-signature", injected: false },
    }));
    expect(state.events.get(1)!.status).toBe("genuine");
  });

  it("event.delete drops the event and the selection", () => {
    const state = initialState();
    applyFrame(state, snapshotFrame({ events: [studentEvent(1)] }));
    state.selectedId = 1;
    applyFrame(state, frame("event.delete", { eventId: 1 }));
    expect(state.events.size).toBe(0);
    expect(state.selectedId).toBeNull();
  });

  it("chat goes to its channel and bumps unread for inactive ones", () => {
    const state = initialState();
    applyFrame(state, snapshotFrame());
    expect(state.activeChannel).toBe("Europe");
    applyFrame(state, frame("chat.message", {
      id: 5, channel: "instructor", senderId: "x", senderName: "T",
      senderRole: "teacher", body: "hi", at: 0,
    }));
    expect(state.chats.get("instructor")).toHaveLength(1);
    expect(state.unread.get("instructor")).toBe(1);
    applyFrame(state, frame("chat.message", {
      id: 6, channel: "Europe", senderId: "x", senderName: "S",
      senderRole: "student", body: "yo", at: 0,
    }));
    expect(state.unread.get("Europe")).toBeUndefined();
  });

  it("errors become dismissible notices", () => {
    const state = initialState();
    applyFrame(state, frame("error", { code: "forbidden", message: "nope" }));
    expect(state.notices).toHaveLength(1);
    expect(state.notices[0].code).toBe("forbidden");
  });

  it("unknown frame kinds are ignored", () => {
    const state = initialState();
    applyFrame(state, frame("future.kind", { anything: true }));
    expect(state.events.size).toBe(0);
  });
});

describe("filtering", () => {
  it("applies conjunction of filters, newest first", () => {
    const state = initialState();
    applyFrame(state, snapshotFrame({
      events: [
        studentEvent(1, { region: "Europe", severity: "low" }),
        studentEvent(2, { region: "Europe", severity: "critical" }),
        studentEvent(3, { region: "Asia-Pacific", severity: "critical" }),
      ],
    }));
    state.filters.region = "Europe";
    state.filters.severity = "critical";
    expect(visibleEvents(state).map((e) => e.id)).toEqual([2]);
    state.filters.severity = "";
    expect(visibleEvents(state).map((e) => e.id)).toEqual([2, 1]);
    state.filters.region = "";
    state.filters.text = "number 3";
    expect(visibleEvents(state).map((e) => e.id)).toEqual([3]);
  });
});
