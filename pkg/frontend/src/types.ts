/** Wire types mirroring the API's canonical documents. */

export type Facet = "by_surgeon" | "by_anesthesiologist" | "by_year";
export type BloodComponent = "PRBC" | "FFP" | "PLT" | "CRYO" | "CELL_SALVAGE";
export type Urgency = "elective" | "urgent" | "emergent";
export type ChartKind = "heatmap" | "dumbbell" | "dotplot" | "cost_placeholder_none";
export type DumbbellSort = "pre" | "post" | "gap";

export interface RangePredicateDoc {
  attribute: string;
  min: number | null;
  max: number | null;
}

export interface FlagPredicateDoc {
  attribute: string;
  value: boolean;
}

export interface FilterDoc {
  procedures: string[];
  surgeons: string[];
  anesthesiologists: string[];
  date_range: { start: string; end: string } | null;
  urgency: Urgency[] | null;
  range_predicates: RangePredicateDoc[];
  flag_predicates: FlagPredicateDoc[];
}

export interface SplitDoc {
  kind: "none" | "boolean_attribute" | "date_cutoff";
  attribute?: string;
  cutoff?: string;
}

export interface ChartConfigDoc {
  chart_id: string;
  kind: ChartKind;
  facet: Facet | null;
  split: SplitDoc;
  component: BloodComponent | null;
  x_attr: string | null;
  y_attr: string | null;
  sort_key: DumbbellSort | null;
  context_keys: string[];
  zero_exclusion: boolean;
}

export interface WorkspaceStateDoc {
  schema_version: number;
  charts: ChartConfigDoc[];
  filter: FilterDoc;
  annotations: Record<string, string>;
  view_mode: boolean;
}

export interface DistributionSummaryDoc {
  kind: "distribution";
  n: number;
  median: number | null;
  q1: number | null;
  q3: number | null;
  kde: [number, number][] | null;
  points: number[] | null;
}

export interface ScalarSummaryDoc {
  kind: "scalar";
  value: number | null;
}

export interface RateSummaryDoc {
  kind: "rate";
  numerator: number;
  denominator: number;
  fraction: number | null;
}

export type ContextSummaryDoc = DistributionSummaryDoc | ScalarSummaryDoc | RateSummaryDoc;

export interface HeatmapRowDoc {
  group: string | number;
  sub_label: string | null;
  count: number;
  bins: string[];
  counts: number[];
  fraction_all: number[] | null;
  fraction_transfused: (number | null)[] | null;
  zero_fraction: number | null;
  context: { attribute: string; summary: ContextSummaryDoc }[];
}

export interface DumbbellCaseDoc {
  case_id: string;
  preop_hgb: number;
  postop_hgb: number;
}

export interface DumbbellRowDoc {
  group: string | number;
  cases: DumbbellCaseDoc[];
  median_pre: number;
  median_post: number;
  reference_lines: { preop_target_hgb: number; transfusion_trigger_hgb: number };
}

export interface DotPointDoc {
  case_id: string;
  x: number;
  y: number;
}

export interface DotPlotRowDoc {
  group: string | number;
  points: DotPointDoc[];
  mean_y: number;
  ci_low: number | null;
  ci_high: number | null;
}

export interface CaseDoc {
  case_id: string;
  patient_id: string;
  surgeon_id: string;
  anesthesiologist_id: string;
  date: string;
  year: number;
  procedures: string[];
  urgency: Urgency;
  prbc_units: number;
  ffp_units: number;
  platelet_units: number;
  cryo_units: number;
  cell_salvage_ml: number;
  preop_hgb: number | null;
  postop_hgb: number | null;
  drg_weight: number | null;
  death: boolean;
  vent_over_24h: boolean;
  ecmo: boolean;
  b12: boolean;
  amicar: boolean;
  txa: boolean;
}

export interface ProcedureEntry {
  code: string;
  count: number;
}

export interface ThresholdsDoc {
  preop_target_hgb: number;
  transfusion_trigger_hgb: number;
  anemia_hgb: number;
  postop_target_low: number;
  postop_target_high: number;
}

export interface CasesPageDoc {
  cases: CaseDoc[];
  total: number;
  page: number;
  page_size: number;
}

export interface ErrorBodyDoc {
  code: string;
  message: string;
  field: string | null;
}

export interface BrushRect {
  x_attr: string;
  y_attr: string;
  x_min: number;
  x_max: number;
  y_min: number;
  y_max: number;
}
