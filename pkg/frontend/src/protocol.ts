// Wire types mirroring the server's frame schemas. One JSON object per
// WebSocket text message; the server frames carry {seq, kind, payload, at}.

export type Role = "student" | "teacher";

export interface ServerFrame {
  seq: number;
  kind: string;
  at: number;
  payload: any;
}

export interface EventView {
  id: number;
  createdAt: number;
  region: string;
  deviceType: string;
  severity: string;
  sourceIp: string;
  description: string;
  triageState: string;
  triagedBy: string | null;
  triagedAt: number | null;
  annotation: string | null;
  colourTag: string;
  verdict: string;
  // Present only on teacher views or once the event is revealed:
  status?: string;
  templateId?: string;
  injected?: boolean;
  deleted?: boolean;
}

export interface CountersPayload {
  totalEvents: number;
  genuine: number;
  falsePositive: number;
  byRegion: Record<string, number>;
  byDeviceType: Record<string, number>;
  bySeverity: Record<string, number>;
}

export interface SessionInfo {
  clientId: string;
  displayName: string;
  role: Role;
  region: string | null;
  connectedAt: number;
  lastSeen: number;
  connected: boolean;
}

export interface ChatMessage {
  id: number;
  channel: string;
  senderId: string;
  senderName: string;
  senderRole: Role;
  body: string;
  at: number;
}

export interface GeneratorState {
  running: boolean;
  ratePerMinute: number;
  fpRatio: number;
}

export interface EndgameCells {
  [key: string]: number | null;
}

export interface EndgameReport {
  perRegion: Record<string, EndgameCells>;
  overall: EndgameCells;
  generatedAt: number;
}

export interface SnapshotPayload {
  you: SessionInfo;
  presence: { clients: SessionInfo[] };
  generatorState: GeneratorState;
  counters: CountersPayload;
  events: EventView[];
  chatHistories: Record<string, ChatMessage[]>;
  endgame?: EndgameReport;
}

export interface ErrorPayload {
  code: string;
  message: string;
  refSeq?: number;
}

export interface HelloPayload {
  displayName: string;
  role: Role;
  region?: string;
  teacherToken?: string;
}

export function clientFrame(kind: string, payload: Record<string, unknown>): string {
  return JSON.stringify({ kind, payload });
}

export const SEVERITIES = ["low", "medium", "high", "critical"] as const;
export const COLOURS = ["none", "red", "amber", "green", "blue"] as const;
export const TRIAGE_DECISIONS = ["escalated", "monitoring", "dismissed"] as const;
