// Controller: one WebSocket in, one fold, targeted DOM updates out.
// Server-authoritative throughout: no user action mutates local state; the
// UI changes only when the resulting broadcast comes back.
import { clientFrame } from "./protocol.js";
import { applyFrame, initialState } from "./state.js";
import { renderShell, updateChat, updateConnection, updateCounters, updateEndgame, updateEvents, updateGenerator, updateNotices, updatePresence, } from "./render.js";
const HEARTBEAT_INTERVAL_MS = 10_000;
export class App {
    constructor(root, socketFactory) {
        this.root = root;
        this.socketFactory = socketFactory;
        this.state = initialState();
        this.sent = [];
        this.socket = null;
        this.heartbeat = null;
        this.endgameArmed = false;
        this.root.addEventListener("click", (ev) => this.onClick(ev));
        this.root.addEventListener("submit", (ev) => this.onSubmit(ev));
        this.root.addEventListener("change", (ev) => this.onChange(ev));
        this.root.addEventListener("input", (ev) => this.onFilterInput(ev));
    }
    join(url, hello) {
        renderShell(this.root, hello.role);
        this.state = initialState();
        const socket = this.socketFactory(url);
        this.socket = socket;
        socket.onopen = () => {
            socket.send(clientFrame("hello", hello));
            this.heartbeat = setInterval(() => this.send("heartbeat", {}), HEARTBEAT_INTERVAL_MS);
        };
        socket.onmessage = (ev) => {
            this.handleFrame(JSON.parse(String(ev.data)));
        };
        socket.onclose = () => {
            this.state.connection = "disconnected";
            if (this.heartbeat)
                clearInterval(this.heartbeat);
            updateConnection(this.root, this.state);
        };
    }
    send(kind, payload) {
        this.sent.push({ kind, payload });
        this.socket?.send(clientFrame(kind, payload));
    }
    close() {
        if (this.heartbeat)
            clearInterval(this.heartbeat);
        this.socket?.close();
    }
    handleFrame(frame) {
        applyFrame(this.state, frame);
        switch (frame.kind) {
            case "snapshot":
                updateConnection(this.root, this.state);
                updateCounters(this.root, this.state);
                updateEvents(this.root, this.state);
                updateChat(this.root, this.state);
                updatePresence(this.root, this.state);
                updateGenerator(this.root, this.state);
                updateEndgame(this.root, this.state);
                break;
            case "event.new":
            case "event.update":
            case "event.delete":
                updateEvents(this.root, this.state);
                break;
            case "counters":
                updateCounters(this.root, this.state);
                break;
            case "chat.message":
                updateChat(this.root, this.state);
                break;
            case "presence":
                updatePresence(this.root, this.state);
                break;
            case "generator.state":
                updateGenerator(this.root, this.state);
                break;
            case "endgame.report":
                updateEndgame(this.root, this.state);
                break;
            case "error":
                updateNotices(this.root, this.state);
                break;
            default:
                break;
        }
    }
    // -- user actions -------------------------------------------------------------
    selectedId() {
        return this.state.selectedId;
    }
    onClick(ev) {
        const target = ev.target.closest("[data-action], .event-row");
        if (!target)
            return;
        if (target.classList.contains("event-row")) {
            this.selectEvent(Number(target.dataset.eventId));
            return;
        }
        const action = target.dataset.action;
        const eventId = this.selectedId();
        switch (action) {
            case "triage":
                if (eventId !== null) {
                    this.send("event.triage", { eventId, decision: target.dataset.decision });
                }
                break;
            case "annotate": {
                const input = this.root.querySelector("#annotation-input");
                if (eventId !== null && input) {
                    this.send("event.annotate", { eventId, text: input.value });
                }
                break;
            }
            case "confirm":
                if (eventId !== null)
                    this.send("teacher.confirm", { eventId });
                break;
            case "delete":
                if (eventId !== null)
                    this.send("teacher.delete", { eventId });
                break;
            case "gen-toggle":
                this.send("teacher.pacing", { running: !this.state.generator?.running });
                break;
            case "apply-rate": {
                const rate = this.numberInput("#rate-input");
                if (rate !== null)
                    this.send("teacher.pacing", { ratePerMinute: rate });
                break;
            }
            case "apply-fp": {
                const fp = this.numberInput("#fp-input");
                if (fp !== null)
                    this.send("teacher.pacing", { fpRatio: fp });
                break;
            }
            case "inject":
                this.send("teacher.inject", this.injectSpec());
                break;
            case "endgame": {
                const button = target;
                if (!this.endgameArmed) {
                    this.endgameArmed = true;
                    button.textContent = "Really end the exercise?";
                    setTimeout(() => {
                        this.endgameArmed = false;
                        button.textContent = "End exercise";
                    }, 5000);
                }
                else {
                    this.endgameArmed = false;
                    button.textContent = "End exercise";
                    this.send("teacher.endgame", {});
                }
                break;
            }
            case "chat-tab": {
                const channel = target.dataset.channel ?? null;
                this.state.activeChannel = channel;
                if (channel)
                    this.state.unread.delete(channel);
                updateChat(this.root, this.state);
                break;
            }
            case "dismiss-notice": {
                const id = Number(target.dataset.noticeId);
                this.state.notices = this.state.notices.filter((n) => n.id !== id);
                updateNotices(this.root, this.state);
                break;
            }
            default:
                break;
        }
    }
    onSubmit(ev) {
        const form = ev.target;
        if (form.id !== "chat-form")
            return;
        ev.preventDefault();
        const input = this.root.querySelector("#chat-input");
        const channel = this.state.activeChannel;
        if (input && channel && input.value.trim()) {
            this.send("chat.send", { channel, body: input.value });
            input.value = "";
        }
    }
    onChange(ev) {
        const target = ev.target;
        const action = target.dataset.action;
        if (action === "colour") {
            const eventId = this.selectedId();
            if (eventId !== null) {
                this.send("teacher.colour", {
                    eventId, colour: target.value,
                });
            }
        }
        else if (action === "assign") {
            const select = target;
            this.send("teacher.assign", {
                clientId: select.dataset.clientId, region: select.value,
            });
        }
        else if (action === "filter") {
            this.readFilters();
            updateEvents(this.root, this.state);
        }
    }
    onFilterInput(ev) {
        const target = ev.target;
        if (target.id === "filter-text") {
            this.readFilters();
            updateEvents(this.root, this.state);
        }
    }
    readFilters() {
        const value = (id) => this.root.querySelector(id)?.value ?? "";
        this.state.filters = {
            region: value("#filter-region"),
            deviceType: value("#filter-device"),
            severity: value("#filter-severity"),
            triageState: value("#filter-triage"),
            text: value("#filter-text"),
        };
    }
    selectEvent(id) {
        this.state.selectedId = id;
        const annotation = this.root.querySelector("#annotation-input");
        if (annotation) {
            annotation.value = this.state.events.get(id)?.annotation ?? "";
        }
        updateEvents(this.root, this.state);
    }
    numberInput(id) {
        const input = this.root.querySelector(id);
        if (!input || input.value.trim() === "")
            return null;
        const value = Number(input.value);
        return Number.isFinite(value) ? value : null;
    }
    injectSpec() {
        const spec = {};
        const pick = (id, key) => {
            const select = this.root.querySelector(id);
            if (select && select.value)
                spec[key] = select.value;
        };
        pick("#inject-region", "region");
        pick("#inject-device", "deviceType");
        pick("#inject-severity", "severity");
        pick("#inject-status", "status");
        return spec;
    }
}
