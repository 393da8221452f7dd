// DOM rendering. Batches are rendered purely from the service payload, so a
// control batch produces exactly the same structure as a real one.

import { BatchPayload, Demographics, LABELS } from "./api.js";

const AGE_BANDS = ["18-24", "25-31", "32-38", "39-45", "46+", "unknown"];
const EDUCATION = ["secondary", "bachelor", "master", "phd", "unknown"];
const INCOME = ["<10k", "10k-20k", "20k-100k", ">100k", "unknown"];
const GENDERS = ["female", "male", "other", "unknown"];

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

function select(name: string, options: string[]): HTMLSelectElement {
  const s = el("select");
  s.name = name;
  s.id = `field-${name}`;
  for (const opt of options) {
    const o = el("option", undefined, opt);
    o.value = opt;
    s.appendChild(o);
  }
  return s;
}

export interface DemographicsFormHandlers {
  onSubmit(demographics: Demographics): void;
}

export function renderDemographicsForm(
  root: HTMLElement,
  handlers: DemographicsFormHandlers,
  errorMessage?: string,
): void {
  root.replaceChildren();
  const panel = el("div", "screen screen-demographics");
  panel.appendChild(el("h1", "title", "Annotator sign-up"));
  if (errorMessage) {
    panel.appendChild(el("div", "banner banner-error", errorMessage));
  }
  const form = el("form", "demographics-form");
  const fields: Array<[string, HTMLElement]> = [
    ["registration token", (() => {
      const input = el("input");
      input.name = "token";
      input.id = "field-token";
      input.required = true;
      return input;
    })()],
    ["gender", select("gender", GENDERS)],
    ["age", select("age_band", AGE_BANDS)],
    ["nationality", (() => {
      const input = el("input");
      input.name = "nationality";
      input.id = "field-nationality";
      input.value = "unknown";
      return input;
    })()],
    ["education", select("education", EDUCATION)],
    ["annual income", select("income_band", INCOME)],
  ];
  for (const [label, control] of fields) {
    const row = el("label", "form-row", `${label}: `);
    row.appendChild(control);
    form.appendChild(row);
  }
  const submit = el("button", "button-primary", "Start labeling");
  submit.type = "submit";
  form.appendChild(submit);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const data = new FormData(form);
    handlers.onSubmit({
      token: String(data.get("token") ?? ""),
      gender: String(data.get("gender") ?? "unknown"),
      age_band: String(data.get("age_band") ?? "unknown"),
      nationality: String(data.get("nationality") ?? "unknown") || "unknown",
      education: String(data.get("education") ?? "unknown"),
      income_band: String(data.get("income_band") ?? "unknown"),
    });
  });
  panel.appendChild(form);
  root.appendChild(panel);
}

export interface BatchViewHandlers {
  onSelect(label: string): void;
  onSubmit(): void;
  onNavigate(index: number): void;
}

export interface BatchViewState {
  batch: BatchPayload;
  definitions: string;
  position: number; // 0-based position in the assignment
  total: number;
  progressDone: number;
  selected: string | null;
  submitted: boolean;
  error?: string;
}

function highlightTweet(text: string): HTMLElement {
  const p = el("p", "tweet-text");
  for (const token of text.split(/(\s+)/)) {
    if (token.startsWith("#") || token.startsWith("@")) {
      p.appendChild(el("mark", "token-entity", token));
    } else {
      p.appendChild(document.createTextNode(token));
    }
  }
  return p;
}

export function renderBatchView(
  root: HTMLElement,
  view: BatchViewState,
  handlers: BatchViewHandlers,
): void {
  root.replaceChildren();
  const panel = el("div", "screen screen-labeling");

  const progress = el(
    "div",
    "progress",
    `Batch ${view.position + 1} of ${view.total} — ${view.progressDone} labeled`,
  );
  panel.appendChild(progress);

  const nav = el("div", "batch-nav");
  for (let i = 0; i < view.total; i += 1) {
    const b = el("button", "nav-dot", String(i + 1));
    b.type = "button";
    b.dataset.index = String(i);
    if (i === view.position) b.classList.add("nav-current");
    b.addEventListener("click", () => handlers.onNavigate(i));
    nav.appendChild(b);
  }
  panel.appendChild(nav);

  const definitions = el("aside", "definitions-panel");
  definitions.appendChild(el("h2", "panel-title", "Behavior definitions"));
  const pre = el("pre", "definitions-text", view.definitions);
  definitions.appendChild(pre);
  panel.appendChild(definitions);

  const profile = el(
    "div",
    "poster-profile",
    view.batch.profile_description
      ? `Poster bio: ${view.batch.profile_description}`
      : "Poster bio: (none)",
  );
  panel.appendChild(profile);

  const list = el("ol", "tweet-list");
  const ordered = [...view.batch.tweets].sort((a, b) => a.created_at - b.created_at);
  for (const tweet of ordered) {
    const item = el("li", "tweet");
    item.appendChild(highlightTweet(tweet.text));
    list.appendChild(item);
  }
  panel.appendChild(list);

  if (view.error) {
    panel.appendChild(el("div", "banner banner-error", view.error));
  }

  const choices = el("div", "label-choices");
  for (const label of LABELS) {
    const b = el("button", "label-button", label);
    b.type = "button";
    b.dataset.label = label;
    if (view.selected === label) b.classList.add("label-selected");
    b.disabled = view.submitted;
    b.addEventListener("click", () => handlers.onSelect(label));
    choices.appendChild(b);
  }
  panel.appendChild(choices);

  const submit = el("button", "button-primary submit-label", "Submit label");
  submit.type = "button";
  submit.disabled = view.selected === null || view.submitted;
  submit.addEventListener("click", () => handlers.onSubmit());
  panel.appendChild(submit);

  if (view.submitted) {
    panel.appendChild(el("div", "banner banner-info", "Already submitted."));
  }

  root.appendChild(panel);
}

export function renderDone(root: HTMLElement, statsUrl: string): void {
  root.replaceChildren();
  const panel = el("div", "screen screen-done");
  panel.appendChild(el("h1", "title", "All batches labeled — thank you!"));
  const link = el("a", "stats-link", "See live labeling statistics");
  link.href = statsUrl;
  panel.appendChild(link);
  root.appendChild(panel);
}

export function renderRetry(root: HTMLElement, message: string, onRetry: () => void): void {
  root.replaceChildren();
  const panel = el("div", "screen screen-retry");
  panel.appendChild(el("h1", "title", "Service unavailable"));
  panel.appendChild(el("p", "retry-message", message));
  const b = el("button", "button-primary retry-button", "Retry");
  b.type = "button";
  b.addEventListener("click", onRetry);
  panel.appendChild(b);
  root.appendChild(panel);
}
