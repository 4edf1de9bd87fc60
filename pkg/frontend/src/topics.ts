/** Topic explorer: cluster list, top-word panels, and the 2-D scatter.
 *
 * Renders exactly what the run manifest and projection CSV carry; no metric
 * is recomputed client-side.
 */

import {
  ClusterReviewsPayload,
  ProjectionPayload,
  ReviewInfo,
  TopicEntry,
  TopicsPayload,
} from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const PALETTE = [
  "#4e79a7",
  "#f28e2b",
  "#59a14f",
  "#e15759",
  "#b07aa1",
  "#76b7b2",
  "#edc948",
  "#ff9da7",
  "#9c755f",
  "#bab0ac",
];

export interface ClusterView {
  cluster: number;
  size: number;
  words: { word: string; score: number }[];
  representativeIds: string[];
}

export interface TopicView {
  runId: string;
  k: number;
  clusters: ClusterView[];
}

export function clusterColor(cluster: number | null): string {
  if (cluster === null || cluster < 0) return "#999999";
  return PALETTE[cluster % PALETTE.length];
}

export function buildTopicView(payload: TopicsPayload): TopicView {
  const clusters = payload.topics
    .slice()
    .sort((a, b) => a.cluster - b.cluster)
    .map((topic: TopicEntry) => ({
      cluster: topic.cluster,
      size: topic.size,
      words: topic.words.map(([word, score]) => ({ word, score })),
      representativeIds: topic.representative_ids,
    }));
  return { runId: payload.id, k: payload.k, clusters };
}

function element<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Scatter plot of projected reviews, one circle per point, colored by cluster. */
export function renderScatter(
  projection: ProjectionPayload,
  width = 520,
  height = 360,
): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "scatter");
  const points = projection.points;
  if (!points.length) return svg;
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const pad = 12;
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  for (const point of points) {
    const circle = document.createElementNS(SVG_NS, "circle");
    const cx = pad + ((point.x - minX) / spanX) * (width - 2 * pad);
    const cy = height - pad - ((point.y - minY) / spanY) * (height - 2 * pad);
    circle.setAttribute("cx", cx.toFixed(2));
    circle.setAttribute("cy", cy.toFixed(2));
    circle.setAttribute("r", "3");
    circle.setAttribute("fill", clusterColor(point.cluster));
    circle.setAttribute("data-id", point.id);
    if (point.cluster !== null) circle.setAttribute("data-cluster", String(point.cluster));
    svg.appendChild(circle);
  }
  return svg;
}

export interface TopicExplorerHooks {
  loadClusterReviews(cluster: number): Promise<ClusterReviewsPayload>;
}

/** Render the explorer: selectable cluster chips, word list, representatives. */
export function renderTopicExplorer(
  root: HTMLElement,
  view: TopicView,
  projection: ProjectionPayload | null,
  hooks: TopicExplorerHooks,
): void {
  root.textContent = "";
  const heading = element("h2", undefined, `Run ${view.runId} (K = ${view.k})`);
  root.appendChild(heading);

  if (projection && projection.points.length) {
    const figure = element("div", "scatter-box");
    figure.appendChild(renderScatter(projection));
    root.appendChild(figure);
  }

  const chipRow = element("div", "cluster-chips");
  const detail = element("div", "cluster-detail");
  detail.id = "cluster-detail";

  const select = async (cluster: ClusterView) => {
    for (const child of Array.from(chipRow.children)) {
      child.classList.toggle(
        "selected",
        (child as HTMLElement).dataset.cluster === String(cluster.cluster),
      );
    }
    detail.textContent = "";
    detail.appendChild(
      element("h3", undefined, `Cluster ${cluster.cluster} (${cluster.size} reviews)`),
    );
    const words = element("ol", "topic-words");
    for (const { word, score } of cluster.words) {
      const item = element("li");
      item.appendChild(element("span", "word", word));
      item.appendChild(element("span", "score", score.toFixed(4)));
      words.appendChild(item);
    }
    detail.appendChild(words);
    const repHeading = element("h4", undefined, "Representative reviews");
    detail.appendChild(repHeading);
    const repList = element("ul", "representatives");
    detail.appendChild(repList);
    try {
      const payload = await hooks.loadClusterReviews(cluster.cluster);
      for (const review of payload.representative) {
        repList.appendChild(renderReview(review));
      }
    } catch (error) {
      repList.appendChild(element("li", "error-banner", String(error)));
    }
  };

  for (const cluster of view.clusters) {
    const chip = element("button", "cluster-chip", `Cluster ${cluster.cluster}`);
    chip.dataset.cluster = String(cluster.cluster);
    chip.style.borderColor = clusterColor(cluster.cluster);
    chip.addEventListener("click", () => void select(cluster));
    chipRow.appendChild(chip);
  }
  root.appendChild(chipRow);
  root.appendChild(detail);
}

function renderReview(review: ReviewInfo): HTMLLIElement {
  const item = document.createElement("li");
  item.className = "review-card";
  const meta = element("div", "review-meta", `${review.id} · ${review.app}`);
  const body = element("div", "review-text", review.text || "(text unavailable)");
  item.appendChild(meta);
  item.appendChild(body);
  return item;
}
