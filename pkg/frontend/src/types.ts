/** Wire types matching the review service's JSON exactly. */

export type Op = "ALL" | "ANY";

export interface RuleDoc {
  p: string;
  op: Op;
  conditions: string[];
  exceptions?: string[];
}

export type EntryKind =
  | "fact"
  | "derived"
  | "defeated"
  | "failed"
  | "not_established"
  | "cut_on_cycle";

export interface TraceEntry {
  predicate: string;
  kind: EntryKind;
  value: boolean;
  rule_index: number | null;
  satisfied: string[];
  exception: string | null;
  failed_rules: number[];
  cycle: boolean;
}

export type SampleStatus =
  | "Drafted"
  | "AutoVerified"
  | "Queued"
  | "HumanVerified"
  | "MetaReviewed"
  | "Rejected";

export type Category = "Good" | "Bad";
export type Decision = "Confirm" | "Overturn";

export type VerifierKind = "Scenario" | "Representation" | "Logical" | "Legal";

export interface VerifierReportDoc {
  kind: VerifierKind;
  score: number;
  feedback: string;
  elapsed?: number;
  degraded?: boolean;
}

export interface VerdictDoc {
  annotator_id: string;
  relevant: boolean;
  well_formalized: boolean;
  logically_sound: boolean;
  category: Category;
  notes: string;
  timestamp?: string;
}

export interface MetaReviewDoc {
  reviewer_id: string;
  decision: Decision;
  final_category: Category;
  rationale: string;
  timestamp?: string;
}

export interface SampleSummary {
  id: string;
  article: string;
  question: string;
  label: boolean | null;
  status: SampleStatus;
  category: Category | null;
  updated_at: string;
}

export interface SampleDetail {
  id: string;
  article: string;
  scenario: string;
  question: string;
  rule_tree: RuleDoc[];
  facts: string[];
  label: boolean | null;
  reports: VerifierReportDoc[];
  status: SampleStatus;
  verdict: VerdictDoc | null;
  meta_review: MetaReviewDoc | null;
  created_at: string;
  updated_at: string;
  trace: TraceEntry[];
  assigned_to: string | null;
}

export interface SampleList {
  total: number;
  items: SampleSummary[];
}

export interface QueueNext {
  sample: SampleSummary;
  remaining: number;
}

export interface Stats {
  total: number;
  by_status: Record<string, number>;
  by_category: Record<string, number>;
  by_article: Record<string, number>;
}
