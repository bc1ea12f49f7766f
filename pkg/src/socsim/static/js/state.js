// Mirrored client state: exactly the fold of (snapshot, subsequent frames).
// The client never computes counters or redaction itself; whatever field is
// absent from a payload simply does not exist here.
export function initialState() {
    return {
        connection: "connecting",
        you: null,
        events: new Map(),
        counters: null,
        presence: [],
        generator: null,
        chats: new Map(),
        unread: new Map(),
        activeChannel: null,
        endgame: null,
        notices: [],
        filters: { region: "", deviceType: "", severity: "", triageState: "", text: "" },
        selectedId: null,
        lastSeq: null,
    };
}
let noticeCounter = 0;
/** Fold one server frame into the state. Strictly sequential in seq order. */
export function applyFrame(state, frame) {
    state.lastSeq = frame.seq;
    const payload = frame.payload;
    switch (frame.kind) {
        case "snapshot": {
            state.connection = "connected";
            state.you = payload.you;
            state.counters = payload.counters;
            state.presence = payload.presence.clients;
            state.generator = payload.generatorState;
            state.endgame = payload.endgame ?? null;
            state.events = new Map();
            for (const event of payload.events) {
                state.events.set(event.id, event);
            }
            state.chats = new Map();
            for (const [channel, messages] of Object.entries(payload.chatHistories)) {
                state.chats.set(channel, [...messages]);
            }
            if (!state.activeChannel || !state.chats.has(state.activeChannel)) {
                state.activeChannel = state.you?.region ?? "instructor";
            }
            break;
        }
        case "event.new":
            state.events.set(payload.id, payload);
            break;
        case "event.update": {
            const event = state.events.get(payload.eventId);
            if (event) {
                Object.assign(event, payload.changed);
            }
            break;
        }
        case "event.delete":
            state.events.delete(payload.eventId);
            if (state.selectedId === payload.eventId) {
                state.selectedId = null;
            }
            break;
        case "counters":
            state.counters = payload;
            break;
        case "chat.message": {
            const message = payload;
            const list = state.chats.get(message.channel) ?? [];
            list.push(message);
            state.chats.set(message.channel, list);
            if (message.channel !== state.activeChannel) {
                state.unread.set(message.channel, (state.unread.get(message.channel) ?? 0) + 1);
            }
            break;
        }
        case "presence":
            state.presence = payload.clients;
            break;
        case "generator.state":
            state.generator = payload;
            break;
        case "endgame.report":
            state.endgame = payload;
            break;
        case "error":
            state.notices.push({
                id: ++noticeCounter,
                code: payload.code,
                message: payload.message,
            });
            break;
        default:
            // Forward compatibility: unknown kinds are ignored.
            break;
    }
}
/** Events passing the active filters, newest first. */
export function visibleEvents(state) {
    const f = state.filters;
    const text = f.text.trim().toLowerCase();
    const out = [];
    for (const event of state.events.values()) {
        if (f.region && event.region !== f.region)
            continue;
        if (f.deviceType && event.deviceType !== f.deviceType)
            continue;
        if (f.severity && event.severity !== f.severity)
            continue;
        if (f.triageState && event.triageState !== f.triageState)
            continue;
        if (text && !event.description.toLowerCase().includes(text))
            continue;
        out.push(event);
    }
    out.sort((a, b) => b.id - a.id);
    return out;
}
export function selectedEvent(state) {
    return state.selectedId === null ? null : state.events.get(state.selectedId) ?? null;
}
export function channelsFor(state) {
    return [...state.chats.keys()];
}
