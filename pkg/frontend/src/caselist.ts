/** Paginated case list plus the per-case detail panel. */

import { el } from "./dom.js";
import type { CaseDoc, CasesPageDoc } from "./types.js";

export interface CaseListOptions {
  onPage: (page: number) => void;
  onSelect: (caseDoc: CaseDoc) => void;
}

export function renderCaseList(page: CasesPageDoc, options: CaseListOptions): HTMLElement {
  const panel = el("div", { class: "case-list", "data-case-list": "true" });
  panel.append(el("h3", {}, `Cases (${page.total})`));
  const table = el("table", { class: "cases" });
  table.append(
    el(
      "thead",
      {},
      el("tr", {}, ...["case", "surgeon", "date", "urgency", "RBC", "salvage mL"].map((h) => el("th", {}, h))),
    ),
  );
  const body = el("tbody", {});
  for (const caseDoc of page.cases) {
    body.append(
      el(
        "tr",
        { class: "case-row", "data-case-row": caseDoc.case_id, onclick: () => options.onSelect(caseDoc) },
        el("td", {}, caseDoc.case_id),
        el("td", {}, caseDoc.surgeon_id),
        el("td", {}, caseDoc.date),
        el("td", {}, caseDoc.urgency),
        el("td", {}, String(caseDoc.prbc_units)),
        el("td", {}, String(caseDoc.cell_salvage_ml)),
      ),
    );
  }
  table.append(body);
  panel.append(table);

  const lastPage = Math.max(0, Math.ceil(page.total / page.page_size) - 1);
  panel.append(
    el(
      "div",
      { class: "pager" },
      el(
        "button",
        { disabled: page.page <= 0, onclick: () => options.onPage(page.page - 1), "data-pager": "prev" },
        "Prev",
      ),
      el("span", {}, ` page ${page.page + 1} of ${lastPage + 1} `),
      el(
        "button",
        { disabled: page.page >= lastPage, onclick: () => options.onPage(page.page + 1), "data-pager": "next" },
        "Next",
      ),
    ),
  );
  return panel;
}

function yesNo(flag: boolean): string {
  return flag ? "yes" : "no";
}

function lab(value: number | null): string {
  return value === null ? "not recorded" : String(value);
}

export function renderCaseDetail(caseDoc: CaseDoc): HTMLElement {
  const dl = (pairs: [string, string][]) =>
    el("dl", {}, ...pairs.flatMap(([k, v]) => [el("dt", {}, k), el("dd", {}, v)]));
  return el(
    "div",
    { class: "case-detail", "data-case-detail": caseDoc.case_id },
    el("h3", {}, `Case ${caseDoc.case_id}`),
    el("h4", {}, "Surgery"),
    dl([
      ["procedures", caseDoc.procedures.join(", ")],
      ["date", caseDoc.date],
      ["urgency", caseDoc.urgency],
      ["surgeon", caseDoc.surgeon_id],
      ["anesthesiologist", caseDoc.anesthesiologist_id],
      ["DRG weight", lab(caseDoc.drg_weight)],
    ]),
    el("h4", {}, "Transfusions"),
    dl([
      ["RBC units", String(caseDoc.prbc_units)],
      ["plasma units", String(caseDoc.ffp_units)],
      ["platelet units", String(caseDoc.platelet_units)],
      ["cryo units", String(caseDoc.cryo_units)],
      ["cell salvage (mL)", String(caseDoc.cell_salvage_ml)],
      ["preop hgb", lab(caseDoc.preop_hgb)],
      ["postop hgb", lab(caseDoc.postop_hgb)],
    ]),
    el("h4", {}, "Medications"),
    dl([
      ["aminocaproic acid", yesNo(caseDoc.amicar)],
      ["tranexamic acid", yesNo(caseDoc.txa)],
      ["B12", yesNo(caseDoc.b12)],
    ]),
    el("h4", {}, "Outcomes"),
    dl([
      ["death", yesNo(caseDoc.death)],
      ["ventilation > 24h", yesNo(caseDoc.vent_over_24h)],
      ["ECMO", yesNo(caseDoc.ecmo)],
    ]),
  );
}
