// Browser bootstrap: join screen, then hand the root over to the App.
import { App } from "./app.js";
function wsUrl() {
    const scheme = location.protocol === "https:" ? "wss" : "ws";
    return `${scheme}://${location.host}/ws`;
}
function renderJoinScreen(root) {
    root.innerHTML = `
  <div class="join-screen">
    <h1>SOC Exercise</h1>
    <form id="join-form">
      <label>Name <input id="join-name" required maxlength="40" autocomplete="off"></label>
      <label>Role
        <select id="join-role">
          <option value="student">student</option>
          <option value="teacher">teacher</option>
        </select>
      </label>
      <label id="join-region-label">Region
        <input id="join-region" placeholder="leave empty to auto-assign">
      </label>
      <label id="join-token-label" class="hidden">Teacher token
        <input id="join-token" type="password">
      </label>
      <button type="submit">Join exercise</button>
    </form>
  </div>`;
    const roleSelect = root.querySelector("#join-role");
    roleSelect.addEventListener("change", () => {
        const teacher = roleSelect.value === "teacher";
        root.querySelector("#join-region-label").classList.toggle("hidden", teacher);
        root.querySelector("#join-token-label").classList.toggle("hidden", !teacher);
    });
    root.querySelector("#join-form").addEventListener("submit", (ev) => {
        ev.preventDefault();
        const value = (id) => root.querySelector(id).value;
        const role = roleSelect.value;
        const hello = { displayName: value("#join-name"), role };
        if (role === "student" && value("#join-region").trim()) {
            hello.region = value("#join-region").trim();
        }
        if (role === "teacher") {
            hello.teacherToken = value("#join-token");
        }
        const app = new App(root, (url) => new WebSocket(url));
        app.join(wsUrl(), hello);
    });
}
const root = document.getElementById("app");
if (root) {
    renderJoinScreen(root);
}
