// DOM updaters. The shell is rendered once after join; each updater rewrites
// only its own container so user input elsewhere survives every frame.
import { COLOURS, SEVERITIES } from "./protocol.js";
import { channelsFor, selectedEvent, visibleEvents } from "./state.js";
const MAX_LOG_ROWS = 300;
export function esc(value) {
    return String(value ?? "")
        .replaceAll("&", "&amp;")
        .replaceAll("<", "&lt;")
        .replaceAll(">", "&gt;")
        .replaceAll('"', "&quot;");
}
function fmtTime(ms) {
    if (!ms)
        return "";
    const d = new Date(ms);
    return d.toLocaleTimeString([], { hour12: false });
}
function option(value, label) {
    return `<option value="${esc(value)}">${esc(label ?? value)}</option>`;
}
// -- shell -------------------------------------------------------------------
export function renderShell(root, role) {
    const teacher = role === "teacher";
    root.innerHTML = `
  <div id="banner" class="banner hidden"></div>
  <div id="notices"></div>
  <header class="topbar">
    <h1>SOC Exercise</h1>
    <span id="whoami" class="muted"></span>
    <span id="gen-status" class="muted"></span>
  </header>
  <div id="endgame-view" class="hidden"></div>
  <main class="layout ${teacher ? "teacher" : "student"}">
    <section class="col main-col">
      <div id="cards" class="cards"></div>
      <div class="charts">
        <div class="chart"><h3>By region</h3><div id="chart-region"></div></div>
        <div class="chart"><h3>By device</h3><div id="chart-device"></div></div>
      </div>
      <div class="filters" id="filters">
        <select id="filter-region" data-action="filter"><option value="">all regions</option></select>
        <select id="filter-device" data-action="filter"><option value="">all devices</option></select>
        <select id="filter-severity" data-action="filter">
          <option value="">all severities</option>
          ${SEVERITIES.map((s) => option(s)).join("")}
        </select>
        <select id="filter-triage" data-action="filter">
          <option value="">any triage</option>
          ${["untriaged", "escalated", "monitoring", "dismissed"].map((s) => option(s)).join("")}
        </select>
        <input id="filter-text" data-action="filter" type="search" placeholder="search text">
      </div>
      <div id="event-log" class="event-log"></div>
    </section>
    <section class="col side-col">
      <div class="detail">
        <h3>Event detail</h3>
        <div id="detail-rows" class="detail-rows"><p class="muted">Select an event.</p></div>
        <div id="detail-actions" class="detail-actions hidden">
          <div class="triage-buttons">
            <button data-action="triage" data-decision="escalated">Escalate</button>
            <button data-action="triage" data-decision="monitoring">Monitor</button>
            <button data-action="triage" data-decision="dismissed">Dismiss</button>
          </div>
          <textarea id="annotation-input" rows="2"
            placeholder="written justification"></textarea>
          <button data-action="annotate">Save annotation</button>
          ${teacher ? `
          <div class="teacher-event-actions">
            <select id="colour-select" data-action="colour">
              ${COLOURS.map((c) => option(c)).join("")}
            </select>
            <button data-action="confirm" id="confirm-btn" disabled>Confirm escalation</button>
            <button data-action="delete" id="delete-btn" class="danger">Delete</button>
          </div>` : ""}
        </div>
      </div>
      <div class="chat">
        <h3>Chat</h3>
        <div id="chat-tabs" class="chat-tabs"></div>
        <div id="chat-messages" class="chat-messages"></div>
        <form id="chat-form" data-action="chat">
          <input id="chat-input" autocomplete="off" placeholder="message">
          <button type="submit">Send</button>
        </form>
      </div>
    </section>
    ${teacher ? `
    <section class="col teacher-col">
      <div class="gen-controls">
        <h3>Generator</h3>
        <button id="gen-toggle" data-action="gen-toggle">Start</button>
        <label>rate/min <input id="rate-input" type="number" min="1" step="1"></label>
        <button data-action="apply-rate">Apply</button>
        <label>fp ratio <input id="fp-input" type="number" min="0" max="1" step="0.05"></label>
        <button data-action="apply-fp">Apply</button>
      </div>
      <div class="inject">
        <h3>Inject event</h3>
        <select id="inject-region"><option value="">any region</option></select>
        <select id="inject-device"><option value="">any device</option></select>
        <select id="inject-severity">
          <option value="">default (high)</option>
          ${SEVERITIES.map((s) => option(s)).join("")}
        </select>
        <select id="inject-status">
          <option value="">default (genuine)</option>
          <option value="genuine">genuine</option>
          <option value="false_positive">false positive</option>
        </select>
        <button data-action="inject">Inject</button>
      </div>
      <div class="endgame">
        <button id="endgame-btn" data-action="endgame" class="danger">End exercise</button>
      </div>
      <div class="presence">
        <h3>Students</h3>
        <div id="presence-list"></div>
      </div>
    </section>` : ""}
  </main>`;
}
// -- per-frame updaters -----------------------------------------------------------
export function updateConnection(root, state) {
    const banner = root.querySelector("#banner");
    if (!banner)
        return;
    if (state.connection === "disconnected") {
        banner.textContent = "Disconnected from the exercise server. Reload to rejoin.";
        banner.classList.remove("hidden");
        root.classList.add("offline");
    }
    else {
        banner.classList.add("hidden");
        root.classList.remove("offline");
    }
    const whoami = root.querySelector("#whoami");
    if (whoami && state.you) {
        const region = state.you.region ? ` · ${state.you.region}` : "";
        whoami.textContent = `${state.you.displayName} (${state.you.role}${region})`;
    }
}
export function updateCounters(root, state) {
    const cards = root.querySelector("#cards");
    const counters = state.counters;
    if (!cards || !counters)
        return;
    cards.innerHTML = `
    <div class="card"><div class="card-label">Total events</div>
      <div class="card-value" id="card-total">${counters.totalEvents}</div></div>
    <div class="card"><div class="card-label">False positives</div>
      <div class="card-value" id="card-fp">${counters.falsePositive}</div></div>
    <div class="card"><div class="card-label">Genuine</div>
      <div class="card-value" id="card-genuine">${counters.genuine}</div></div>`;
    drawBars(root.querySelector("#chart-region"), counters.byRegion);
    drawBars(root.querySelector("#chart-device"), counters.byDeviceType);
    populateNameSelects(root, counters.byRegion, counters.byDeviceType);
}
function drawBars(container, data) {
    if (!container)
        return;
    const max = Math.max(1, ...Object.values(data));
    container.innerHTML = Object.entries(data)
        .map(([name, count]) => `
      <div class="bar-row">
        <span class="bar-label">${esc(name)}</span>
        <span class="bar-track"><span class="bar-fill" style="width:${(100 * count) / max}%"></span></span>
        <span class="bar-count">${count}</span>
      </div>`)
        .join("");
}
function populateNameSelects(root, regions, devices) {
    const fill = (id, names) => {
        const select = root.querySelector(id);
        if (select && select.options.length <= 1) {
            select.insertAdjacentHTML("beforeend", names.map((n) => option(n)).join(""));
        }
    };
    fill("#filter-region", Object.keys(regions));
    fill("#filter-device", Object.keys(devices));
    fill("#inject-region", Object.keys(regions));
    fill("#inject-device", Object.keys(devices));
}
export function updateEvents(root, state) {
    const log = root.querySelector("#event-log");
    if (!log)
        return;
    const rows = visibleEvents(state).slice(0, MAX_LOG_ROWS);
    log.innerHTML = rows.length
        ? rows.map((e) => eventRow(e, e.id === state.selectedId)).join("")
        : `<p class="muted">No events yet.</p>`;
    updateDetail(root, state);
}
function eventRow(event, selected) {
    const colour = event.colourTag && event.colourTag !== "none"
        ? `<span class="dot ${esc(event.colourTag)}"></span>` : "";
    const triage = event.triageState !== "untriaged"
        ? `<span class="badge triage-${esc(event.triageState)}">${esc(event.triageState)}</span>` : "";
    const deleted = event.deleted ? `<span class="badge deleted">deleted</span>` : "";
    return `
  <div class="event-row ${selected ? "selected" : ""}" data-event-id="${event.id}">
    <span class="eid">#${event.id}</span>
    <span class="etime">${fmtTime(event.createdAt)}</span>
    <span class="badge sev-${esc(event.severity)}">${esc(event.severity)}</span>
    <span class="eregion">${esc(event.region)}</span>
    <span class="edevice">${esc(event.deviceType)}</span>
    <span class="edesc">${esc(event.description)}</span>
    ${colour}${triage}${deleted}
  </div>`;
}
function detailRow(label, value) {
    return `<div class="detail-row"><span class="detail-label">${esc(label)}</span>` +
        `<span class="detail-value">${value}</span></div>`;
}
function updateDetail(root, state) {
    const rowsBox = root.querySelector("#detail-rows");
    const actions = root.querySelector("#detail-actions");
    if (!rowsBox || !actions)
        return;
    const event = selectedEvent(state);
    if (!event) {
        rowsBox.innerHTML = `<p class="muted">Select an event.</p>`;
        actions.classList.add("hidden");
        return;
    }
    const rows = [
        detailRow("Event", `#${event.id}`),
        detailRow("Timestamp", esc(fmtTime(event.createdAt))),
        detailRow("Region", esc(event.region)),
        detailRow("IP", esc(event.sourceIp)),
        detailRow("Device", esc(event.deviceType)),
        detailRow("Severity", `<span class="badge sev-${esc(event.severity)}">${esc(event.severity)}</span>`),
        detailRow("Description", esc(event.description)),
        detailRow("Triage", esc(event.triageState)),
    ];
    if (event.triagedBy) {
        rows.push(detailRow("Triaged by", `${esc(event.triagedBy)} at ${esc(fmtTime(event.triagedAt))}`));
    }
    if (event.annotation) {
        rows.push(detailRow("Annotation", esc(event.annotation)));
    }
    // Ground-truth rows exist only when the server sent the fields.
    if ("status" in event) {
        rows.push(detailRow("Status", `<span class="badge status-${esc(event.status)}">${esc(event.status)}</span>`));
    }
    if ("injected" in event) {
        rows.push(detailRow("Injected", event.injected ? "yes" : "no"));
    }
    if ("templateId" in event) {
        rows.push(detailRow("Template", esc(event.templateId)));
    }
    if (event.verdict !== "pending") {
        rows.push(detailRow("Verdict", esc(event.verdict)));
    }
    if (event.deleted) {
        rows.push(detailRow("Deleted", "yes"));
    }
    rowsBox.innerHTML = rows.join("");
    actions.classList.remove("hidden");
    const confirmBtn = root.querySelector("#confirm-btn");
    if (confirmBtn) {
        confirmBtn.disabled = !(event.triageState === "escalated" && event.verdict === "pending");
    }
    const colourSelect = root.querySelector("#colour-select");
    if (colourSelect) {
        colourSelect.value = event.colourTag ?? "none";
    }
}
export function updateChat(root, state) {
    const tabs = root.querySelector("#chat-tabs");
    const box = root.querySelector("#chat-messages");
    if (!tabs || !box)
        return;
    tabs.innerHTML = channelsFor(state)
        .map((channel) => {
        const unread = state.unread.get(channel) ?? 0;
        const active = channel === state.activeChannel ? "active" : "";
        const badge = unread ? `<span class="unread">${unread}</span>` : "";
        return `<button class="chat-tab ${active}" data-action="chat-tab"
        data-channel="${esc(channel)}">${esc(channel)}${badge}</button>`;
    })
        .join("");
    const messages = state.chats.get(state.activeChannel ?? "") ?? [];
    box.innerHTML = messages
        .map((m) => `
      <div class="chat-msg">
        <span class="chat-sender ${m.senderRole}">${esc(m.senderName)}</span>
        <span class="chat-body">${esc(m.body)}</span>
        <span class="chat-time">${fmtTime(m.at)}</span>
      </div>`)
        .join("");
    box.scrollTop = box.scrollHeight;
    // Students may not post to the broadcast channel.
    const form = root.querySelector("#chat-form");
    if (form && state.you) {
        const readOnly = state.you.role !== "teacher" && state.activeChannel === "broadcast";
        form.classList.toggle("hidden", readOnly);
    }
}
export function updatePresence(root, state) {
    const box = root.querySelector("#presence-list");
    if (!box)
        return;
    const regions = state.counters ? Object.keys(state.counters.byRegion) : [];
    box.innerHTML = state.presence
        .filter((s) => s.role === "student")
        .map((s) => presenceRow(s, regions))
        .join("") || `<p class="muted">No students yet.</p>`;
}
function presenceRow(s, regions) {
    const options = regions
        .map((r) => `<option value="${esc(r)}" ${r === s.region ? "selected" : ""}>${esc(r)}</option>`)
        .join("");
    return `
  <div class="presence-row ${s.connected ? "online" : "offline"}">
    <span class="presence-dot"></span>
    <span class="presence-name">${esc(s.displayName)}</span>
    <select data-action="assign" data-client-id="${esc(s.clientId)}">${options}</select>
    <span class="presence-seen">${s.connected ? "online" : `last seen ${fmtTime(s.lastSeen)}`}</span>
  </div>`;
}
export function updateGenerator(root, state) {
    const status = root.querySelector("#gen-status");
    const gen = state.generator;
    if (status && gen) {
        status.textContent =
            `${gen.running ? "running" : "paused"} · ${gen.ratePerMinute}/min · fp ${gen.fpRatio.toFixed(2)}`;
    }
    const toggle = root.querySelector("#gen-toggle");
    if (toggle && gen) {
        // The label mirrors the last generator.state frame, not the click.
        toggle.textContent = gen.running ? "Stop" : "Start";
    }
}
export function updateNotices(root, state) {
    const box = root.querySelector("#notices");
    if (!box)
        return;
    box.innerHTML = state.notices
        .map((n) => `
      <div class="notice">
        <span>${esc(n.code)}: ${esc(n.message)}</span>
        <button data-action="dismiss-notice" data-notice-id="${n.id}">×</button>
      </div>`)
        .join("");
}
export function updateEndgame(root, state) {
    const box = root.querySelector("#endgame-view");
    if (!box)
        return;
    if (!state.endgame) {
        box.classList.add("hidden");
        return;
    }
    const cellKeys = [
        "escalatedGenuine", "escalatedFalsePositive", "dismissedGenuine",
        "dismissedFalsePositive", "monitoringGenuine", "monitoringFalsePositive",
        "untriagedGenuine", "untriagedFalsePositive",
    ];
    const header = ["Region", ...cellKeys, "precision", "recall"];
    const ratio = (v) => v === null || v === undefined ? "n/a" : v.toFixed(2);
    const rows = Object.entries(state.endgame.perRegion).map(([region, cells]) => `
    <tr><td>${esc(region)}</td>
      ${cellKeys.map((k) => `<td>${cells[k] ?? 0}</td>`).join("")}
      <td>${ratio(cells.precision)}</td><td>${ratio(cells.recall)}</td></tr>`);
    const overall = state.endgame.overall;
    box.innerHTML = `
    <h2>Exercise complete — debrief report</h2>
    <table class="endgame-table">
      <thead><tr>${header.map((h) => `<th>${esc(h)}</th>`).join("")}</tr></thead>
      <tbody>
        ${rows.join("")}
        <tr class="overall"><td>overall</td>
          ${cellKeys.map((k) => `<td>${overall[k] ?? 0}</td>`).join("")}
          <td>${ratio(overall.precision)}</td><td>${ratio(overall.recall)}</td></tr>
      </tbody>
    </table>`;
    box.classList.remove("hidden");
}
