import { describe, expect, it } from "vitest";

import { brushToFilter, emptyFilter, mergeFilters } from "../src/filters.js";

describe("brushToFilter", () => {
  it("yields exactly two range predicates", () => {
    const fragment = brushToFilter({
      x_attr: "prbc_units",
      y_attr: "postop_hgb",
      x_min: 1,
      x_max: 20,
      y_min: 0,
      y_max: 18,
    });
    expect(fragment.range_predicates).toEqual([
      { attribute: "prbc_units", min: 1, max: 20 },
      { attribute: "postop_hgb", min: 0, max: 18 },
    ]);
    expect(fragment.procedures).toEqual([]);
    expect(fragment.urgency).toBeNull();
  });
});

describe("mergeFilters", () => {
  it("concatenates predicates and keeps single-sided constraints", () => {
    const a = { ...emptyFilter(), procedures: ["PROC-001"], urgency: ["elective"] as never };
    const b = brushToFilter({ x_attr: "prbc_units", y_attr: "postop_hgb", x_min: 1, x_max: 9, y_min: 0, y_max: 20 });
    const merged = mergeFilters(a, b);
    expect(merged.procedures).toEqual(["PROC-001"]);
    expect(merged.urgency).toEqual(["elective"]);
    expect(merged.range_predicates).toHaveLength(2);
  });

  it("intersects urgencies and date ranges", () => {
    const a = { ...emptyFilter(), urgency: ["elective", "urgent"] as never, date_range: { start: "2015-01-01", end: "2018-06-30" } };
    const b = { ...emptyFilter(), urgency: ["urgent", "emergent"] as never, date_range: { start: "2016-02-01", end: "2019-12-31" } };
    const merged = mergeFilters(a, b);
    expect(merged.urgency).toEqual(["urgent"]);
    expect(merged.date_range).toEqual({ start: "2016-02-01", end: "2018-06-30" });
  });

  it("intersects provider ids, mapping disjoint sets to the unsatisfiable sentinel", () => {
    const a = { ...emptyFilter(), surgeons: ["S1", "S2"] };
    const b = { ...emptyFilter(), surgeons: ["S2", "S3"] };
    expect(mergeFilters(a, b).surgeons).toEqual(["S2"]);
    const disjoint = mergeFilters({ ...emptyFilter(), surgeons: ["S1"] }, { ...emptyFilter(), surgeons: ["S9"] });
    expect(disjoint.surgeons).toEqual([""]);
  });

  it("refuses two different procedure constraints", () => {
    const a = { ...emptyFilter(), procedures: ["PROC-001"] };
    const b = { ...emptyFilter(), procedures: ["PROC-002"] };
    expect(() => mergeFilters(a, b)).toThrow(/procedure/);
    expect(mergeFilters(a, { ...emptyFilter(), procedures: ["PROC-001"] }).procedures).toEqual(["PROC-001"]);
  });
});
