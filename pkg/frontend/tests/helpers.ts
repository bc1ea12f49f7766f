import type { EventView, ServerFrame } from "../src/protocol.js";

let seqCounter = 0;

export function resetSeq(): void {
  seqCounter = 0;
}

export function frame(kind: string, payload: unknown): ServerFrame {
  return { seq: ++seqCounter, kind, at: Date.now(), payload };
}

export function studentEvent(id: number, extra: Partial<EventView> = {}): EventView {
  return {
    id,
    createdAt: 1_700_000_000_000 + id,
    region: "Europe",
    deviceType: "firewall",
    severity: "high",
    sourceIp: "192.0.2.10",
    description: `suspicious activity number ${id}`,
    triageState: "untriaged",
    triagedBy: null,
    triagedAt: null,
    annotation: null,
    colourTag: "none",
    verdict: "pending",
    ...extra,
  };
}

export function snapshotFrame(overrides: Record<string, unknown> = {}): ServerFrame {
  return frame("snapshot", {
    you: {
      clientId: "me", displayName: "Ada", role: "student", region: "Europe",
      connectedAt: 0, lastSeen: 0, connected: true,
    },
    presence: { clients: [] },
    generatorState: { running: false, ratePerMinute: 30, fpRatio: 0.6 },
    counters: {
      totalEvents: 0, genuine: 0, falsePositive: 0,
      byRegion: { Europe: 0, "Asia-Pacific": 0 },
      byDeviceType: { firewall: 0, server: 0 },
      bySeverity: { low: 0, medium: 0, high: 0, critical: 0 },
    },
    events: [],
    chatHistories: { Europe: [], instructor: [], broadcast: [] },
    ...overrides,
  });
}

export function countersFrame(total: number, fp: number, genuine: number): ServerFrame {
  return frame("counters", {
    totalEvents: total, genuine, falsePositive: fp,
    byRegion: { Europe: total }, byDeviceType: { firewall: total },
    bySeverity: { high: total },
  });
}
