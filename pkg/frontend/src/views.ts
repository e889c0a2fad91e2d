/** View construction. Every builder takes a Document plus data/callbacks and
 * returns a detached element, so views are unit-testable without a browser. */

import type {
  Decision,
  SampleDetail,
  SampleSummary,
  VerifierReportDoc,
} from "./types.js";
import {
  CRITERIA,
  VerdictFormState,
  buildVerdictPayload,
  canSelectGood,
  canSubmit,
  emptyVerdictForm,
  finalCategory,
} from "./model.js";
import { renderTree, renderTraceInspector, unreferencedFacts } from "./tree.js";
import type { VerdictPayload, MetaPayload } from "./api.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Scenario text with the binary question highlighted after it. */
export function renderScenario(doc: Document, sample: SampleDetail): HTMLElement {
  const box = el(doc, "div", "scenario");
  box.append(el(doc, "p", "scenario-text", sample.scenario));
  box.append(el(doc, "p", "question", sample.question));
  const label = el(
    doc,
    "p",
    "label",
    `stored label: ${sample.label === null ? "(none)" : String(sample.label)}`,
  );
  box.append(label);
  return box;
}

export function renderScoreCards(doc: Document, reports: VerifierReportDoc[]): HTMLElement {
  const row = el(doc, "div", "score-cards");
  for (const report of reports) {
    const card = el(doc, "div", `card ${report.degraded ? "degraded" : ""}`);
    card.append(el(doc, "h4", "card-kind", report.kind));
    card.append(el(doc, "div", "card-score", String(report.score)));
    card.append(el(doc, "p", "card-feedback", report.feedback));
    row.append(card);
  }
  return row;
}

export function renderFactsChecklist(doc: Document, sample: SampleDetail): HTMLElement {
  const unreferenced = unreferencedFacts(sample.rule_tree, sample.facts);
  const list = el(doc, "ul", "facts");
  for (const fact of sample.facts) {
    const item = el(doc, "li", unreferenced.has(fact) ? "fact unreferenced" : "fact");
    item.textContent = fact;
    if (unreferenced.has(fact)) {
      item.append(" ");
      item.append(el(doc, "span", "flag", "⚠ referenced by no rule"));
    }
    list.append(item);
  }
  return list;
}

export interface VerdictFormHandles {
  root: HTMLElement;
  /** Current form state (exposed for tests and for the submit handler). */
  state: VerdictFormState;
  goodInput: HTMLInputElement;
  badInput: HTMLInputElement;
  submitButton: HTMLButtonElement;
}

/** Verdict form: three criterion checkboxes, Good/Bad selector, notes.
 * The Good radio is disabled — genuinely unclickable — while any criterion
 * is unchecked; unchecking a criterion after selecting Good clears it. */
export function renderVerdictForm(
  doc: Document,
  onSubmit: (payload: Omit<VerdictPayload, "annotator_id">) => void,
): VerdictFormHandles {
  const state = emptyVerdictForm();
  const root = el(doc, "form", "verdict-form");
  root.addEventListener("submit", (e) => e.preventDefault());

  const sync = () => {
    goodInput.disabled = !canSelectGood(state);
    if (goodInput.disabled && state.category === "Good") {
      state.category = null;
      goodInput.checked = false;
    }
    submitButton.disabled = !canSubmit(state);
  };

  for (const criterion of CRITERIA) {
    const row = el(doc, "label", "criterion");
    const box = doc.createElement("input");
    box.type = "checkbox";
    box.name = criterion.key;
    box.addEventListener("change", () => {
      state[criterion.key] = box.checked;
      sync();
    });
    row.append(box, " ", criterion.label);
    root.append(row);
  }

  const choice = el(doc, "div", "category-choice");
  const goodInput = doc.createElement("input");
  goodInput.type = "radio";
  goodInput.name = "category";
  goodInput.value = "Good";
  goodInput.disabled = true;
  goodInput.addEventListener("change", () => {
    if (goodInput.checked) state.category = "Good";
    sync();
  });
  const badInput = doc.createElement("input");
  badInput.type = "radio";
  badInput.name = "category";
  badInput.value = "Bad";
  badInput.addEventListener("change", () => {
    if (badInput.checked) state.category = "Bad";
    sync();
  });
  const goodLabel = el(doc, "label", "category-good");
  goodLabel.append(goodInput, " Good");
  const badLabel = el(doc, "label", "category-bad");
  badLabel.append(badInput, " Bad");
  choice.append(goodLabel, badLabel);
  root.append(choice);

  const notes = doc.createElement("textarea");
  notes.className = "notes";
  notes.placeholder = "notes (optional)";
  notes.addEventListener("input", () => {
    state.notes = notes.value;
  });
  root.append(notes);

  const submitButton = el(doc, "button", "submit", "Submit verdict");
  submitButton.type = "submit";
  submitButton.disabled = true;
  submitButton.addEventListener("click", () => {
    // buildVerdictPayload re-checks the invariant; the annotator id is
    // attached by the caller, which knows the session.
    const payload = buildVerdictPayload("_", state);
    const { annotator_id: _ignored, ...rest } = payload;
    onSubmit(rest);
  });
  root.append(submitButton);

  sync();
  return { root, state, goodInput, badInput, submitButton };
}

export function renderQueueCard(
  doc: Document,
  sample: SampleSummary,
  remaining: number,
  onOpen: (id: string) => void,
): HTMLElement {
  const card = el(doc, "div", "queue-card");
  card.append(el(doc, "h3", "queue-article", sample.article));
  card.append(el(doc, "p", "queue-question", sample.question));
  card.append(el(doc, "p", "queue-remaining", `${remaining} sample(s) left in your queue`));
  const open = el(doc, "button", "open", "Review");
  open.addEventListener("click", () => onOpen(sample.id));
  card.append(open);
  return card;
}

export interface MetaRowHandles {
  root: HTMLElement;
  decide: (decision: Decision, rationale: string) => void;
}

/** One row of the meta-review list: the annotator verdict plus
 * Confirm/Overturn controls with a rationale field. */
export function renderMetaRow(
  doc: Document,
  sample: SampleDetail,
  onDecision: (payload: Omit<MetaPayload, "reviewer_id">) => void,
): HTMLElement {
  const row = el(doc, "div", "meta-row");
  row.append(el(doc, "h3", "meta-article", `${sample.article} — ${sample.id}`));
  const verdict = sample.verdict;
  if (verdict) {
    const flags = CRITERIA.map(
      (c) => `${c.label.slice(0, 3)} ${verdict[c.key] ? "✓" : "✗"}`,
    ).join("  ");
    row.append(el(doc, "p", "meta-verdict", `${verdict.category} by ${verdict.annotator_id}  ${flags}`));
    row.append(
      el(doc, "p", "meta-projection",
        `Overturn would make this ${finalCategory("Overturn", verdict)}`),
    );
  }
  const rationale = doc.createElement("textarea");
  rationale.className = "rationale";
  rationale.placeholder = "rationale";
  row.append(rationale);
  for (const decision of ["Confirm", "Overturn"] as const) {
    const button = el(doc, "button", `decide-${decision.toLowerCase()}`, decision);
    button.addEventListener("click", () =>
      onDecision({ decision, rationale: rationale.value }),
    );
    row.append(button);
  }
  return row;
}

/** Full read-only sample panel: scenario, tree, facts, score cards, trace. */
export function renderSamplePanel(doc: Document, sample: SampleDetail): HTMLElement {
  const panel = el(doc, "div", "sample-panel");
  panel.append(el(doc, "h2", "sample-title", `${sample.article} (${sample.status})`));
  panel.append(renderScenario(doc, sample));
  panel.append(el(doc, "h3", undefined, "Rule tree"));
  panel.append(renderTree(doc, sample.rule_tree, sample.trace));
  panel.append(el(doc, "h3", undefined, "Facts"));
  panel.append(renderFactsChecklist(doc, sample));
  panel.append(el(doc, "h3", undefined, "Verifier reports"));
  panel.append(renderScoreCards(doc, sample.reports));
  const inspector = el(doc, "details", "trace-inspector");
  const summary = el(doc, "summary", undefined, "Derivation trace");
  inspector.append(summary, renderTraceInspector(doc, sample.trace));
  panel.append(inspector);
  return panel;
}
