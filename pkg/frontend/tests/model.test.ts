import { describe, expect, it } from "vitest";

import {
  buildVerdictPayload,
  canSelectGood,
  canSubmit,
  emptyVerdictForm,
  finalCategory,
} from "../src/model.js";
import type { VerdictDoc } from "../src/types.js";

function verdictDoc(category: "Good" | "Bad"): VerdictDoc {
  return {
    annotator_id: "alice",
    relevant: category === "Good",
    well_formalized: true,
    logically_sound: true,
    category,
    notes: "",
  };
}

describe("verdict gating", () => {
  it("Good is not selectable on an empty form", () => {
    expect(canSelectGood(emptyVerdictForm())).toBe(false);
  });

  it("Good requires every criterion, not a majority", () => {
    const form = emptyVerdictForm();
    form.relevant = true;
    form.well_formalized = true;
    expect(canSelectGood(form)).toBe(false);
    form.logically_sound = true;
    expect(canSelectGood(form)).toBe(true);
  });

  it("Bad is submittable regardless of criteria", () => {
    const form = emptyVerdictForm();
    form.category = "Bad";
    expect(canSubmit(form)).toBe(true);
  });

  it("unchecking a criterion after choosing Good blocks submission", () => {
    const form = emptyVerdictForm();
    form.relevant = form.well_formalized = form.logically_sound = true;
    form.category = "Good";
    expect(canSubmit(form)).toBe(true);
    form.logically_sound = false;
    expect(canSubmit(form)).toBe(false);
  });
});

describe("buildVerdictPayload", () => {
  it("never produces a Good payload with a failed criterion", () => {
    const form = emptyVerdictForm();
    form.relevant = true;
    form.category = "Good";
    expect(() => buildVerdictPayload("alice", form)).toThrow(/all three criteria/);
  });

  it("requires a chosen category", () => {
    expect(() => buildVerdictPayload("alice", emptyVerdictForm())).toThrow(/Good or Bad/);
  });

  it("carries all fields onto the wire shape", () => {
    const form = emptyVerdictForm();
    form.relevant = form.well_formalized = form.logically_sound = true;
    form.category = "Good";
    form.notes = "solid";
    expect(buildVerdictPayload("alice", form)).toEqual({
      annotator_id: "alice",
      relevant: true,
      well_formalized: true,
      logically_sound: true,
      category: "Good",
      notes: "solid",
    });
  });
});

describe("finalCategory", () => {
  it("Confirm preserves, Overturn flips in both directions", () => {
    expect(finalCategory("Confirm", verdictDoc("Good"))).toBe("Good");
    expect(finalCategory("Overturn", verdictDoc("Good"))).toBe("Bad");
    expect(finalCategory("Confirm", verdictDoc("Bad"))).toBe("Bad");
    expect(finalCategory("Overturn", verdictDoc("Bad"))).toBe("Good");
  });
});
