/** Hash-routed single-page app over the privmine API.
 *
 * Routes:
 *   #/sessions                     session list
 *   #/label/<session>/<annotator>  labeling flow
 *   #/keywords                     bootstrap run list
 *   #/keywords/<run>               keyword approval flow
 *   #/topics                       topic run list
 *   #/topics/<run>                 topic explorer
 */

import { ApiClient } from "./api.js";
import { LabelFlow, shortcutToLabel } from "./labeling.js";
import { KeywordFlow } from "./keywords.js";
import { buildTopicView, renderTopicExplorer } from "./topics.js";

const api = new ApiClient("");

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function errorBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "error-banner");
  banner.appendChild(el("span", undefined, message));
  const retry = el("button", "retry", "Retry");
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  return banner;
}

function root(): HTMLElement {
  return document.getElementById("app") as HTMLElement;
}

async function showSessions(): Promise<void> {
  const host = root();
  host.textContent = "";
  host.appendChild(el("h2", undefined, "Labeling sessions"));
  try {
    const sessions = await api.listSessions();
    if (!sessions.length) {
      host.appendChild(el("p", "hint", "No sessions yet. Create one with the CLI or the API."));
      return;
    }
    const list = el("ul", "session-list");
    for (const session of sessions) {
      const item = el("li");
      item.appendChild(el("strong", undefined, session.id));
      item.appendChild(
        el("span", "hint", ` ${session.n_candidates} candidates · annotators: `),
      );
      for (const annotator of session.annotators) {
        const link = el("a", "annotator-link", annotator);
        link.href = `#/label/${encodeURIComponent(session.id)}/${encodeURIComponent(annotator)}`;
        item.appendChild(link);
        item.appendChild(document.createTextNode(" "));
      }
      list.appendChild(item);
    }
    host.appendChild(list);
  } catch (error) {
    host.appendChild(errorBanner(String(error), () => void showSessions()));
  }
}

let activeKeyHandler: ((event: KeyboardEvent) => void) | null = null;

function setKeyHandler(handler: ((event: KeyboardEvent) => void) | null): void {
  if (activeKeyHandler) document.removeEventListener("keydown", activeKeyHandler);
  activeKeyHandler = handler;
  if (handler) document.addEventListener("keydown", handler);
}

async function showLabeling(sessionId: string, annotator: string): Promise<void> {
  const host = root();
  const flow = new LabelFlow(api, sessionId, annotator);

  const render = async () => {
    host.textContent = "";
    host.appendChild(el("h2", undefined, `Labeling ${sessionId} as ${annotator}`));
    const progress = flow.progress();
    host.appendChild(
      el(
        "p",
        "progress",
        `labeled ${progress.labeled} · skipped ${progress.skipped} · remaining ${progress.unlabeled}`,
      ),
    );
    if (flow.lastError) {
      host.appendChild(
        errorBanner(flow.lastError, () => void flow.retry().then(render)),
      );
      return;
    }
    if (flow.done || !flow.current) {
      host.appendChild(el("p", "done", "All candidates labeled. Thank you!"));
      try {
        const agreement = await api.agreement(sessionId);
        host.appendChild(
          el("p", "kappa", `Cohen's kappa so far: ${agreement.kappa.toFixed(4)}`),
        );
      } catch {
        host.appendChild(el("p", "hint", "Agreement appears once both annotators overlap."));
      }
      return;
    }
    const card = el("div", "candidate-card");
    card.appendChild(el("div", "review-meta", `${flow.current.id} · ${flow.current.app}`));
    card.appendChild(el("div", "review-text", flow.current.text || "(text unavailable)"));
    host.appendChild(card);
    const buttons = el("div", "label-buttons");
    const actions: [string, 0 | 1 | "skip"][] = [
      ["Privacy (1)", 1],
      ["Not privacy (0)", 0],
      ["Skip (s)", "skip"],
    ];
    for (const [caption, value] of actions) {
      const button = el("button", "label-button", caption);
      button.addEventListener("click", () => void flow.submit(value).then(render));
      buttons.appendChild(button);
    }
    host.appendChild(buttons);
    host.appendChild(el("p", "hint", "Keyboard: 1 = privacy, 0 = not privacy, s = skip"));
  };

  setKeyHandler((event) => {
    const value = shortcutToLabel(event.key);
    if (value !== null) void flow.submit(value).then(render);
  });

  await flow.start();
  await render();
}

async function showBootstrapList(): Promise<void> {
  const host = root();
  host.textContent = "";
  host.appendChild(el("h2", undefined, "Keyword bootstrap runs"));
  try {
    const runs = await api.listBootstrap();
    if (!runs.length) {
      host.appendChild(el("p", "hint", "No bootstrap runs. Initialize one with the CLI."));
      return;
    }
    const list = el("ul", "session-list");
    for (const run of runs) {
      const item = el("li");
      const link = el("a", undefined, run.id);
      link.href = `#/keywords/${encodeURIComponent(run.id)}`;
      item.appendChild(link);
      item.appendChild(
        el(
          "span",
          "hint",
          ` iteration ${run.iteration} · ${run.n_pending} pending${run.finished ? " · finished" : ""}`,
        ),
      );
      list.appendChild(item);
    }
    host.appendChild(list);
  } catch (error) {
    host.appendChild(errorBanner(String(error), () => void showBootstrapList()));
  }
}

async function showKeywordReview(runId: string): Promise<void> {
  const host = root();
  const flow = new KeywordFlow(api, runId);

  const render = () => {
    host.textContent = "";
    host.appendChild(el("h2", undefined, `Keyword review: ${runId}`));
    host.appendChild(el("p", "progress", `iteration ${flow.iteration}`));
    if (flow.lastError) {
      host.appendChild(errorBanner(flow.lastError, () => void flow.load().then(render)));
      return;
    }
    if (flow.finished) {
      host.appendChild(el("p", "done", "Bootstrap finished; no pending keywords."));
      return;
    }
    const keyword = flow.currentKeyword;
    if (!keyword) {
      host.appendChild(el("p", "hint", "No pending keywords right now."));
      return;
    }
    const card = el("div", "candidate-card");
    card.appendChild(el("h3", "keyword", keyword.keyword));
    card.appendChild(el("p", "hint", "Sample matching reviews:"));
    const samples = el("ul", "representatives");
    for (const review of keyword.samples) {
      const item = el("li", "review-card");
      item.appendChild(el("div", "review-meta", `${review.id} · ${review.app}`));
      item.appendChild(el("div", "review-text", review.text));
      samples.appendChild(item);
    }
    card.appendChild(samples);
    host.appendChild(card);
    const buttons = el("div", "label-buttons");
    const approve = el("button", "label-button", "Approve");
    approve.addEventListener("click", () => void flow.decide(true).then(render));
    const reject = el("button", "label-button", "Reject");
    reject.addEventListener("click", () => void flow.decide(false).then(render));
    buttons.appendChild(approve);
    buttons.appendChild(reject);
    host.appendChild(buttons);
  };

  await flow.load();
  render();
}

async function showRunList(): Promise<void> {
  const host = root();
  host.textContent = "";
  host.appendChild(el("h2", undefined, "Topic runs"));
  try {
    const runs = await api.listRuns();
    if (!runs.length) {
      host.appendChild(el("p", "hint", "No topic runs in the data directory."));
      return;
    }
    const list = el("ul", "session-list");
    for (const run of runs) {
      const item = el("li");
      const link = el("a", undefined, run.id);
      link.href = `#/topics/${encodeURIComponent(run.id)}`;
      item.appendChild(link);
      item.appendChild(el("span", "hint", ` K=${run.k} · ${run.n_docs} reviews`));
      list.appendChild(item);
    }
    host.appendChild(list);
  } catch (error) {
    host.appendChild(errorBanner(String(error), () => void showRunList()));
  }
}

async function showTopicExplorer(runId: string): Promise<void> {
  const host = root();
  host.textContent = "";
  try {
    const payload = await api.runTopics(runId);
    let projection = null;
    try {
      projection = await api.projection(runId);
    } catch {
      projection = null; // scatter hidden, lists still shown
    }
    renderTopicExplorer(host, buildTopicView(payload), projection, {
      loadClusterReviews: (cluster) => api.clusterReviews(runId, cluster),
    });
  } catch (error) {
    host.appendChild(el("h2", undefined, "Run not found"));
    host.appendChild(el("p", "error-banner", String(error)));
  }
}

async function route(): Promise<void> {
  setKeyHandler(null);
  const hash = window.location.hash || "#/sessions";
  const parts = hash.replace(/^#\//, "").split("/").map(decodeURIComponent);
  switch (parts[0]) {
    case "label":
      if (parts.length >= 3) return showLabeling(parts[1], parts[2]);
      return showSessions();
    case "keywords":
      if (parts.length >= 2 && parts[1]) return showKeywordReview(parts[1]);
      return showBootstrapList();
    case "topics":
      if (parts.length >= 2 && parts[1]) return showTopicExplorer(parts[1]);
      return showRunList();
    default:
      return showSessions();
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
