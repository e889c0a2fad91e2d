/** Pure verdict/meta form logic. Mirrors the server's HumanVerdict invariants
 * client-side; the server remains authoritative. */

import type { Category, Decision, VerdictDoc } from "./types.js";
import type { VerdictPayload } from "./api.js";

/** The three review criteria, with the wording shown to annotators. */
export const CRITERIA = [
  {
    key: "relevant",
    label: "(a) the scenario is relevant to the target article",
  },
  {
    key: "well_formalized",
    label: "(b) the rule tree faithfully formalizes the article for this scenario",
  },
  {
    key: "logically_sound",
    label: "(c) the label follows logically from the rule tree and facts",
  },
] as const;

export type CriterionKey = (typeof CRITERIA)[number]["key"];

export interface VerdictFormState {
  relevant: boolean;
  well_formalized: boolean;
  logically_sound: boolean;
  category: Category | null;
  notes: string;
}

export function emptyVerdictForm(): VerdictFormState {
  return {
    relevant: false,
    well_formalized: false,
    logically_sound: false,
    category: null,
    notes: "",
  };
}

export function allCriteriaTrue(form: VerdictFormState): boolean {
  return form.relevant && form.well_formalized && form.logically_sound;
}

/** Good is selectable only when every criterion is checked. */
export function canSelectGood(form: VerdictFormState): boolean {
  return allCriteriaTrue(form);
}

/** A form is submittable when a category is chosen and, for Good, the
 * invariant holds (toggling a criterion off after choosing Good must block). */
export function canSubmit(form: VerdictFormState): boolean {
  if (form.category === null) return false;
  if (form.category === "Good" && !allCriteriaTrue(form)) return false;
  return true;
}

/** Build the wire payload; throws rather than produce an invalid verdict. */
export function buildVerdictPayload(
  annotatorId: string,
  form: VerdictFormState,
): VerdictPayload {
  if (!annotatorId) throw new Error("annotator id is required");
  if (form.category === null) throw new Error("choose Good or Bad before submitting");
  if (form.category === "Good" && !allCriteriaTrue(form)) {
    throw new Error("a Good verdict requires all three criteria to hold");
  }
  return {
    annotator_id: annotatorId,
    relevant: form.relevant,
    well_formalized: form.well_formalized,
    logically_sound: form.logically_sound,
    category: form.category,
    notes: form.notes,
  };
}

/** Mirror of the server's meta-review semantics: Confirm keeps the
 * annotator's category, Overturn flips it (in either direction). */
export function finalCategory(decision: Decision, verdict: VerdictDoc): Category {
  if (decision === "Confirm") return verdict.category;
  return verdict.category === "Good" ? "Bad" : "Good";
}
