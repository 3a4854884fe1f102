/** DOM rendering for the labeling view. */

import { Snapshot } from "./api.js";
import { SessionController } from "./controller.js";

const IMAGE_META = /\.(png|jpe?g|gif|webp|svg)(\?.*)?$/i;

/** Render a query's meta payload as an image when it looks like an image
 * URL, as text otherwise. */
export function renderMeta(meta: string | null): HTMLElement {
  if (meta && IMAGE_META.test(meta)) {
    const img = document.createElement("img");
    img.src = meta;
    img.alt = meta;
    img.className = "query-image";
    return img;
  }
  const p = document.createElement("p");
  p.className = "query-text";
  p.textContent = meta ?? "(no preview available)";
  return p;
}

export function showError(root: HTMLElement, message: string, onRetry: () => void): void {
  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.textContent = message;
  const retry = document.createElement("button");
  retry.textContent = "Retry";
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  root.replaceChildren(banner);
}

function counters(snap: Snapshot): HTMLElement {
  const box = document.createElement("div");
  box.className = "counters";
  const total = Number(snap.config["batch_size"] ?? 0);
  const frac = snap.metrics.id_label_fraction;
  box.textContent =
    `batch ${snap.batch_index} | ${snap.batch_progress}/${total} this batch | ` +
    `${snap.metrics.labels_used} labels total | ID fraction ${frac.toFixed(3)}`;
  const bar = document.createElement("progress");
  bar.max = Math.max(total, 1);
  bar.value = snap.batch_progress;
  box.appendChild(bar);
  return box;
}

export function render(
  root: HTMLElement,
  controller: SessionController,
  onChoice: (cls: number) => void,
): void {
  const snap = controller.snapshot;
  if (!snap) return;
  root.replaceChildren();
  root.appendChild(counters(snap));

  if (snap.state !== "awaiting-label" || !snap.next) {
    const done = document.createElement("div");
    done.className = "summary";
    const heading = document.createElement("h2");
    heading.textContent =
      snap.state === "exhausted" ? "Pool exhausted" : "Batch complete";
    const body = document.createElement("p");
    body.textContent =
      `${snap.metrics.labels_used} labels collected, ` +
      `ID fraction ${snap.metrics.id_label_fraction.toFixed(3)}. ` +
      "Waiting for refreshed scores.";
    done.append(heading, body);
    root.appendChild(done);
    return;
  }

  const query = document.createElement("div");
  query.className = "query";
  const title = document.createElement("h2");
  title.textContent = `Example ${snap.next.example_id}`;
  query.append(title, renderMeta(snap.next.meta));
  root.appendChild(query);

  const buttons = document.createElement("div");
  buttons.className = "class-buttons";
  const names = controller.classNames();
  for (let c = 0; c < controller.classCount(); c++) {
    const btn = document.createElement("button");
    btn.textContent = `${c + 1}: ${names ? names[c] : `class ${c}`}`;
    btn.disabled = controller.busy;
    btn.addEventListener("click", () => onChoice(c));
    buttons.appendChild(btn);
  }
  root.appendChild(buttons);
}

/** Keyboard shortcuts: digits 1..K choose a class. */
export function bindKeys(
  target: { addEventListener: Window["addEventListener"] },
  controller: SessionController,
  onChoice: (cls: number) => void,
): void {
  target.addEventListener("keydown", (ev: KeyboardEvent) => {
    const digit = parseInt(ev.key, 10);
    if (!Number.isNaN(digit) && digit >= 1 && digit <= controller.classCount()) {
      onChoice(digit - 1);
    }
  });
}
