/** Filter document construction and conjunction, mirroring the backend rules. */

import type { BrushRect, FilterDoc, Urgency } from "./types.js";

export function emptyFilter(): FilterDoc {
  return {
    procedures: [],
    surgeons: [],
    anesthesiologists: [],
    date_range: null,
    urgency: null,
    range_predicates: [],
    flag_predicates: [],
  };
}

/** A rectangle brush becomes a fragment of two range predicates. */
export function brushToFilter(brush: BrushRect): FilterDoc {
  return {
    ...emptyFilter(),
    range_predicates: [
      { attribute: brush.x_attr, min: brush.x_min, max: brush.x_max },
      { attribute: brush.y_attr, min: brush.y_min, max: brush.y_max },
    ],
  };
}

// Ids are never empty strings, so this set matches nothing (used when two id
// constraints are disjoint; an empty list means "all").
const UNSATISFIABLE_IDS = [""];

function mergeIdSets(a: string[], b: string[]): string[] {
  if (a.length && b.length) {
    const common = a.filter((x) => b.includes(x));
    return common.length ? common.sort() : UNSATISFIABLE_IDS.slice();
  }
  return [...a, ...b].sort();
}

function sameSet(a: string[], b: string[]): boolean {
  const x = [...a].sort();
  const y = [...b].sort();
  return x.length === y.length && x.every((v, i) => v === y[i]);
}

/**
 * Conjunction of two filters. Two different non-empty procedure sets cannot
 * be conjoined into one intersection-matched set (cases carry several
 * codes), so that merge throws.
 */
export function mergeFilters(a: FilterDoc, b: FilterDoc): FilterDoc {
  if (a.procedures.length && b.procedures.length && !sameSet(a.procedures, b.procedures)) {
    throw new Error("cannot merge two different procedure constraints");
  }
  let urgency: Urgency[] | null;
  if (a.urgency === null) {
    urgency = b.urgency;
  } else if (b.urgency === null) {
    urgency = a.urgency;
  } else {
    urgency = a.urgency.filter((u) => b.urgency!.includes(u));
  }
  let dateRange = a.date_range ?? b.date_range;
  if (a.date_range && b.date_range) {
    dateRange = {
      start: a.date_range.start > b.date_range.start ? a.date_range.start : b.date_range.start,
      end: a.date_range.end < b.date_range.end ? a.date_range.end : b.date_range.end,
    };
  }
  return {
    procedures: [...new Set([...a.procedures, ...b.procedures])].sort(),
    surgeons: mergeIdSets(a.surgeons, b.surgeons),
    anesthesiologists: mergeIdSets(a.anesthesiologists, b.anesthesiologists),
    date_range: dateRange,
    urgency: urgency === null ? null : [...urgency].sort(),
    range_predicates: [...a.range_predicates, ...b.range_predicates],
    flag_predicates: [...a.flag_predicates, ...b.flag_predicates],
  };
}

export function describePredicate(p: { attribute: string; min: number | null; max: number | null }): string {
  const lo = p.min === null ? "-inf" : String(p.min);
  const hi = p.max === null ? "inf" : String(p.max);
  return `${p.attribute} in [${lo}, ${hi}]`;
}
