// Controller: one WebSocket in, one fold, targeted DOM updates out.
// Server-authoritative throughout: no user action mutates local state; the
// UI changes only when the resulting broadcast comes back.

import type { HelloPayload, ServerFrame } from "./protocol.js";
import { clientFrame } from "./protocol.js";
import type { ViewState } from "./state.js";
import { applyFrame, initialState } from "./state.js";
import {
  renderShell,
  updateChat,
  updateConnection,
  updateCounters,
  updateEndgame,
  updateEvents,
  updateGenerator,
  updateNotices,
  updatePresence,
} from "./render.js";

// Minimal socket surface so tests can substitute the `ws` package for the
// browser WebSocket. Handler params stay `any` for interop between the two.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev: any) => void) | null;
  onmessage: ((ev: any) => void) | null;
  onclose: ((ev: any) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

const HEARTBEAT_INTERVAL_MS = 10_000;

export class App {
  state: ViewState = initialState();
  sent: { kind: string; payload: Record<string, unknown> }[] = [];
  private socket: SocketLike | null = null;
  private heartbeat: ReturnType<typeof setInterval> | null = null;
  private endgameArmed = false;

  constructor(
    private root: HTMLElement,
    private socketFactory: SocketFactory,
  ) {
    this.root.addEventListener("click", (ev) => this.onClick(ev));
    this.root.addEventListener("submit", (ev) => this.onSubmit(ev));
    this.root.addEventListener("change", (ev) => this.onChange(ev));
    this.root.addEventListener("input", (ev) => this.onFilterInput(ev));
  }

  join(url: string, hello: HelloPayload): void {
    renderShell(this.root, hello.role);
    this.state = initialState();
    const socket = this.socketFactory(url);
    this.socket = socket;
    socket.onopen = () => {
      socket.send(clientFrame("hello", hello as unknown as Record<string, unknown>));
      this.heartbeat = setInterval(
        () => this.send("heartbeat", {}), HEARTBEAT_INTERVAL_MS);
    };
    socket.onmessage = (ev) => {
      this.handleFrame(JSON.parse(String(ev.data)) as ServerFrame);
    };
    socket.onclose = () => {
      this.state.connection = "disconnected";
      if (this.heartbeat) clearInterval(this.heartbeat);
      updateConnection(this.root, this.state);
    };
  }

  send(kind: string, payload: Record<string, unknown>): void {
    this.sent.push({ kind, payload });
    this.socket?.send(clientFrame(kind, payload));
  }

  close(): void {
    if (this.heartbeat) clearInterval(this.heartbeat);
    this.socket?.close();
  }

  handleFrame(frame: ServerFrame): void {
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

  private selectedId(): number | null {
    return this.state.selectedId;
  }

  private onClick(ev: Event): void {
    const target = (ev.target as HTMLElement).closest<HTMLElement>("[data-action], .event-row");
    if (!target) return;

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
        const input = this.root.querySelector<HTMLTextAreaElement>("#annotation-input");
        if (eventId !== null && input) {
          this.send("event.annotate", { eventId, text: input.value });
        }
        break;
      }
      case "confirm":
        if (eventId !== null) this.send("teacher.confirm", { eventId });
        break;
      case "delete":
        if (eventId !== null) this.send("teacher.delete", { eventId });
        break;
      case "gen-toggle":
        this.send("teacher.pacing", { running: !this.state.generator?.running });
        break;
      case "apply-rate": {
        const rate = this.numberInput("#rate-input");
        if (rate !== null) this.send("teacher.pacing", { ratePerMinute: rate });
        break;
      }
      case "apply-fp": {
        const fp = this.numberInput("#fp-input");
        if (fp !== null) this.send("teacher.pacing", { fpRatio: fp });
        break;
      }
      case "inject":
        this.send("teacher.inject", this.injectSpec());
        break;
      case "endgame": {
        const button = target as HTMLButtonElement;
        if (!this.endgameArmed) {
          this.endgameArmed = true;
          button.textContent = "Really end the exercise?";
          setTimeout(() => {
            this.endgameArmed = false;
            button.textContent = "End exercise";
          }, 5000);
        } else {
          this.endgameArmed = false;
          button.textContent = "End exercise";
          this.send("teacher.endgame", {});
        }
        break;
      }
      case "chat-tab": {
        const channel = target.dataset.channel ?? null;
        this.state.activeChannel = channel;
        if (channel) this.state.unread.delete(channel);
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

  private onSubmit(ev: Event): void {
    const form = ev.target as HTMLElement;
    if (form.id !== "chat-form") return;
    ev.preventDefault();
    const input = this.root.querySelector<HTMLInputElement>("#chat-input");
    const channel = this.state.activeChannel;
    if (input && channel && input.value.trim()) {
      this.send("chat.send", { channel, body: input.value });
      input.value = "";
    }
  }

  private onChange(ev: Event): void {
    const target = ev.target as HTMLElement;
    const action = target.dataset.action;
    if (action === "colour") {
      const eventId = this.selectedId();
      if (eventId !== null) {
        this.send("teacher.colour", {
          eventId, colour: (target as HTMLSelectElement).value,
        });
      }
    } else if (action === "assign") {
      const select = target as HTMLSelectElement;
      this.send("teacher.assign", {
        clientId: select.dataset.clientId, region: select.value,
      });
    } else if (action === "filter") {
      this.readFilters();
      updateEvents(this.root, this.state);
    }
  }

  private onFilterInput(ev: Event): void {
    const target = ev.target as HTMLElement;
    if (target.id === "filter-text") {
      this.readFilters();
      updateEvents(this.root, this.state);
    }
  }

  private readFilters(): void {
    const value = (id: string) =>
      this.root.querySelector<HTMLInputElement | HTMLSelectElement>(id)?.value ?? "";
    this.state.filters = {
      region: value("#filter-region"),
      deviceType: value("#filter-device"),
      severity: value("#filter-severity"),
      triageState: value("#filter-triage"),
      text: value("#filter-text"),
    };
  }

  selectEvent(id: number): void {
    this.state.selectedId = id;
    const annotation = this.root.querySelector<HTMLTextAreaElement>("#annotation-input");
    if (annotation) {
      annotation.value = this.state.events.get(id)?.annotation ?? "";
    }
    updateEvents(this.root, this.state);
  }

  private numberInput(id: string): number | null {
    const input = this.root.querySelector<HTMLInputElement>(id);
    if (!input || input.value.trim() === "") return null;
    const value = Number(input.value);
    return Number.isFinite(value) ? value : null;
  }

  private injectSpec(): Record<string, unknown> {
    const spec: Record<string, unknown> = {};
    const pick = (id: string, key: string) => {
      const select = this.root.querySelector<HTMLSelectElement>(id);
      if (select && select.value) spec[key] = select.value;
    };
    pick("#inject-region", "region");
    pick("#inject-device", "deviceType");
    pick("#inject-severity", "severity");
    pick("#inject-status", "status");
    return spec;
  }
}
