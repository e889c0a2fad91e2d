/** Collapsible rule-tree rendering with per-node status coloring from the
 * derivation trace, plus the unreferenced-fact flag for the facts checklist. */

import type { EntryKind, RuleDoc, TraceEntry } from "./types.js";

export type NodeStatus = EntryKind | "unknown";

export function traceIndex(trace: TraceEntry[]): Map<string, TraceEntry> {
  return new Map(trace.map((e) => [e.predicate, e]));
}

export function nodeStatus(byPred: Map<string, TraceEntry>, predicate: string): NodeStatus {
  return byPred.get(predicate)?.kind ?? "unknown";
}

const STATUS_TEXT: Record<NodeStatus, string> = {
  fact: "asserted fact",
  derived: "derived",
  defeated: "defeated by exception",
  failed: "conditions not met",
  not_established: "not established",
  cut_on_cycle: "cut on cycle",
  unknown: "not evaluated",
};

/** Facts no rule ever references (the L3 lint concern, mirrored in the UI). */
export function unreferencedFacts(rules: RuleDoc[], facts: string[]): Set<string> {
  const referenced = new Set<string>();
  for (const rule of rules) {
    referenced.add(rule.p);
    for (const c of rule.conditions) referenced.add(c);
    for (const e of rule.exceptions ?? []) referenced.add(e);
  }
  return new Set(facts.filter((f) => !referenced.has(f)));
}

function rulesFor(rules: RuleDoc[], head: string): RuleDoc[] {
  return rules.filter((r) => r.p === head);
}

function statusBadge(doc: Document, status: NodeStatus): HTMLElement {
  const badge = doc.createElement("span");
  badge.className = `status status-${status}`;
  badge.textContent = STATUS_TEXT[status];
  return badge;
}

function renderPredicate(
  doc: Document,
  rules: RuleDoc[],
  byPred: Map<string, TraceEntry>,
  predicate: string,
  role: "condition" | "exception" | "target",
  seen: Set<string>,
): HTMLElement {
  const status = nodeStatus(byPred, predicate);
  const definitions = rulesFor(rules, predicate);
  const cyclic = seen.has(predicate);

  const label = doc.createElement("span");
  label.className = `pred pred-${role} pred-${status}`;
  label.textContent = predicate;

  if (definitions.length === 0 || cyclic) {
    const leaf = doc.createElement("div");
    leaf.className = "node leaf";
    leaf.append(label, " ", statusBadge(doc, status));
    if (cyclic) leaf.append(" ", "(cycle)");
    return leaf;
  }

  const details = doc.createElement("details");
  details.className = "node";
  details.open = true;
  const summary = doc.createElement("summary");
  summary.append(label, " ", statusBadge(doc, status));
  details.append(summary);

  const nextSeen = new Set(seen);
  nextSeen.add(predicate);
  for (const rule of definitions) {
    const body = doc.createElement("div");
    body.className = "rule-body";
    const op = doc.createElement("span");
    op.className = "op";
    op.textContent = rule.op;
    body.append(op);
    for (const cond of rule.conditions) {
      body.append(renderPredicate(doc, rules, byPred, cond, "condition", nextSeen));
    }
    for (const exc of rule.exceptions ?? []) {
      const wrap = renderPredicate(doc, rules, byPred, exc, "exception", nextSeen);
      wrap.classList.add("exception");
      const tag = doc.createElement("span");
      tag.className = "exception-tag";
      tag.textContent = "unless";
      wrap.prepend(tag, " ");
      body.append(wrap);
    }
    details.append(body);
  }
  return details;
}

/** Render the whole tree rooted at its target (first rule's head). The DOM
 * mirrors the rule document node-for-node: one element per rule body, one
 * per condition/exception reference. */
export function renderTree(
  doc: Document,
  rules: RuleDoc[],
  trace: TraceEntry[],
): HTMLElement {
  const container = doc.createElement("div");
  container.className = "rule-tree";
  if (rules.length === 0) {
    container.textContent = "(empty tree)";
    return container;
  }
  const byPred = traceIndex(trace);
  container.append(
    renderPredicate(doc, rules, byPred, rules[0].p, "target", new Set()),
  );
  return container;
}

/** Flat trace inspector: one line per evaluated predicate, in evaluation
 * order, so criterion (c) can be judged against the actual path. */
export function renderTraceInspector(doc: Document, trace: TraceEntry[]): HTMLElement {
  const table = doc.createElement("table");
  table.className = "trace";
  const head = doc.createElement("tr");
  for (const col of ["predicate", "value", "how"]) {
    const th = doc.createElement("th");
    th.textContent = col;
    head.append(th);
  }
  table.append(head);
  for (const entry of trace) {
    const row = doc.createElement("tr");
    row.className = `trace-${entry.kind}`;
    const cells = [
      entry.predicate,
      String(entry.value),
      describeEntry(entry),
    ];
    for (const text of cells) {
      const td = doc.createElement("td");
      td.textContent = text;
      row.append(td);
    }
    table.append(row);
  }
  return table;
}

export function describeEntry(entry: TraceEntry): string {
  switch (entry.kind) {
    case "fact":
      return "asserted fact";
    case "derived":
      return `rules[${entry.rule_index}] via ${entry.satisfied.join(", ") || "(empty)"}`;
    case "defeated":
      return `rules[${entry.rule_index}] defeated by ${entry.exception}`;
    case "failed":
      return `conditions not met (rules ${entry.failed_rules.join(", ")})`;
    case "cut_on_cycle":
      return "cyclic dependency cut to false";
    case "not_established":
      return "no fact, no rule";
  }
}
