// DOM wiring: a dashboard listing sessions with a create form, and a session
// view with the live timeline, the top-down scene, and the answer panel.

import { Api, ApiError } from "./api.js";
import { paint, sceneShapes, Viewport } from "./scene.js";
import { SessionSubscription } from "./stream.js";
import { SessionView } from "./timeline.js";
import type { SessionRecord } from "./types.js";

const api = new Api("..");  // console is served under /console
const root = document.getElementById("root")!;
const banner = document.getElementById("banner")!;

const CONFIG_TEMPLATE = JSON.stringify(
  {
    instruction: "Interchange the locations of two objects: apple_0 and soup_can_0.",
    scene: { generator: { n_objects: 3, seed: 7 } },
    backend: { kind: "oracle" },
  },
  null,
  2,
);

let subscription: SessionSubscription | null = null;
let pollTimer: number | undefined;

function setBanner(text: string | null) {
  banner.textContent = text ?? "";
  banner.style.display = text ? "block" : "none";
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  node.append(...children);
  return node;
}

// ---------------------------------------------------------------- dashboard

async function renderDashboard() {
  cleanup();
  root.replaceChildren(el("h1", {}, "planning sessions"));

  const list = el("div", { class: "session-list" });
  const form = el("div", { class: "create-form" });
  const textarea = el("textarea", { rows: "10" }) as HTMLTextAreaElement;
  textarea.value = CONFIG_TEMPLATE;
  const button = el("button", {}, "create session") as HTMLButtonElement;
  const error = el("div", { class: "error" });
  button.onclick = async () => {
    error.textContent = "";
    try {
      const config = JSON.parse(textarea.value);
      const id = await api.createSession(config);
      location.hash = `#/session/${id}`;
    } catch (err) {
      error.textContent = err instanceof Error ? err.message : String(err);
    }
  };
  form.append(el("h2", {}, "new session"), textarea, button, error);

  async function refresh() {
    try {
      const sessions = await api.listSessions();
      setBanner(null);
      renderSessionList(list, sessions);
    } catch {
      setBanner("service unreachable; retrying");
    }
  }
  await refresh();
  pollTimer = window.setInterval(refresh, 2000);
  root.append(list, form);
}

function renderSessionList(list: HTMLElement, sessions: SessionRecord[]) {
  const rows = sessions
    .slice()
    .reverse()
    .map((s) =>
      el(
        "a",
        { class: "session-row", href: `#/session/${s.session_id}` },
        el("span", { class: `badge badge-${s.status}` }, s.status),
        el("span", { class: "session-id" }, s.session_id),
        el("span", { class: "instruction" }, s.instruction || "(replay)"),
      ),
    );
  list.replaceChildren(
    ...(rows.length ? rows : [el("p", { class: "empty" }, "no sessions yet")]),
  );
}

// ------------------------------------------------------------- session view

const VIEWPORT: Viewport = { width: 460, height: 340, margin: 20 };

async function renderSession(id: string) {
  cleanup();
  root.replaceChildren(
    el("a", { href: "#/" }, "< all sessions"),
    el("h1", {}, `session ${id}`),
  );
  const status = el("div", { class: "status-line" });
  const canvas = el("canvas", {
    width: String(VIEWPORT.width),
    height: String(VIEWPORT.height),
    class: "scene",
  }) as HTMLCanvasElement;
  const answerPanel = el("div", { class: "answer-panel" });
  const timeline = el("div", { class: "timeline" });
  root.append(status, el("div", { class: "columns" },
    el("div", {}, canvas, answerPanel), timeline));

  const update = (view: SessionView) => {
    status.replaceChildren(
      el("span", { class: `badge badge-${view.status}` }, view.status),
      el("span", {}, ` ${view.instruction}`),
    );
    renderTimeline(timeline, view);
    const ctx = canvas.getContext("2d");
    if (ctx) {
      paint(ctx, sceneShapes(view.scene, view.workspace, view.moveTargets, VIEWPORT),
            VIEWPORT);
    }
    renderAnswerPanel(answerPanel, view, id);
  };

  subscription = new SessionSubscription(api, id, {
    onUpdate: update,
    onConnectionChange: (ok) =>
      setBanner(ok ? null : "stream lost; reconnecting"),
  });
  subscription.run().catch(() => setBanner("session stream ended unexpectedly"));
}

function renderTimeline(container: HTMLElement, view: SessionView) {
  const items = view.items.map((item) => {
    const row = el(
      "div",
      { class: `item role-${item.role}` },
      el("span", { class: "role" }, item.role),
      el("span", { class: "text" }, item.text),
    );
    if (item.plan) {
      row.append(
        el(
          "ol",
          { class: "plan" },
          ...item.plan.map((step) =>
            el(
              "li",
              {},
              step.action === "grasp"
                ? `grasp ${step.object}`
                : step.action === "move"
                  ? `move to [${step.target.map((v) => v.toFixed(3)).join(", ")}]`
                  : "home",
            ),
          ),
        ),
      );
    }
    if (item.verdict?.result === "failure") {
      row.classList.add("failure");
      if (item.verdict.suggestion) {
        row.append(el("div", { class: "suggestion" },
                      `suggestion: ${item.verdict.suggestion}`));
      }
    }
    return row;
  });
  container.replaceChildren(...items);
  container.scrollTop = container.scrollHeight;
}

function renderAnswerPanel(panel: HTMLElement, view: SessionView, id: string) {
  if (view.status !== "awaiting_human" || !view.pendingQuestions) {
    panel.replaceChildren();
    return;
  }
  if (panel.childElementCount > 0) return; // keep any half-typed answers
  const inputs: HTMLInputElement[] = [];
  const children: Node[] = [el("h3", {}, "the planner asks")];
  for (const q of view.pendingQuestions) {
    const input = el("input", { type: "text", placeholder: "answer" }) as HTMLInputElement;
    inputs.push(input);
    children.push(el("label", {}, q, input));
  }
  const error = el("div", { class: "error" });
  const button = el("button", {}, "send answers") as HTMLButtonElement;
  button.onclick = async () => {
    const answers = inputs.map((i) => i.value.trim());
    if (answers.some((a) => a.length === 0)) {
      error.textContent = "every question needs an answer";
      return;
    }
    try {
      await api.submitAnswers(id, answers);
      error.textContent = "";
    } catch (err) {
      error.textContent = err instanceof ApiError ? err.message : String(err);
    }
  };
  children.push(button, error);
  panel.replaceChildren(...children);
}

// ----------------------------------------------------------------- routing

function cleanup() {
  if (subscription) {
    subscription.stop();
    subscription = null;
  }
  if (pollTimer !== undefined) {
    clearInterval(pollTimer);
    pollTimer = undefined;
  }
}

function route() {
  const hash = location.hash || "#/";
  const match = hash.match(/^#\/session\/(.+)$/);
  if (match) void renderSession(match[1]);
  else void renderDashboard();
}

window.addEventListener("hashchange", route);
route();
