// Wire types mirroring the server's frame schemas. One JSON object per
// WebSocket text message; the server frames carry {seq, kind, payload, at}.
export function clientFrame(kind, payload) {
    return JSON.stringify({ kind, payload });
}
export const SEVERITIES = ["low", "medium", "high", "critical"];
export const COLOURS = ["none", "red", "amber", "green", "blue"];
export const TRIAGE_DECISIONS = ["escalated", "monitoring", "dismissed"];
