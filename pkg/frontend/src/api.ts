/** Typed client for the analytics API.
 *
 * Chart queries POST a JSON envelope; in read-only mode (shared View Mode)
 * the same envelope is sent URL-encoded via the GET alias instead, so a
 * view-mode session issues GET traffic exclusively. The fetch implementation
 * is injectable for tests.
 */

import type {
  CasesPageDoc,
  DotPlotRowDoc,
  DumbbellRowDoc,
  ErrorBodyDoc,
  HeatmapRowDoc,
  ProcedureEntry,
  ThresholdsDoc,
  WorkspaceStateDoc,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ErrorBodyDoc,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
    readonly readOnly: boolean = false,
  ) {}

  private async parse<T>(response: Response): Promise<T> {
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body as ErrorBodyDoc);
    }
    return body as T;
  }

  private async query<T>(path: string, envelope: unknown): Promise<T> {
    if (this.readOnly) {
      const q = encodeURIComponent(JSON.stringify(envelope));
      return this.parse<T>(await this.fetchFn(`${this.base}${path}?q=${q}`));
    }
    const response = await this.fetchFn(`${this.base}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(envelope),
    });
    return this.parse<T>(response);
  }

  async procedures(): Promise<ProcedureEntry[]> {
    const doc = await this.parse<{ procedures: ProcedureEntry[] }>(
      await this.fetchFn(`${this.base}/api/procedures`),
    );
    return doc.procedures;
  }

  heatmap(envelope: unknown): Promise<{ rows: HeatmapRowDoc[] }> {
    return this.query("/api/query/heatmap", envelope);
  }

  dumbbell(envelope: unknown): Promise<{ rows: DumbbellRowDoc[] }> {
    return this.query("/api/query/dumbbell", envelope);
  }

  dotplot(envelope: unknown): Promise<{ rows: DotPlotRowDoc[] }> {
    return this.query("/api/query/dotplot", envelope);
  }

  cases(envelope: unknown): Promise<CasesPageDoc> {
    return this.query("/api/query/cases", envelope);
  }

  async saveState(state: WorkspaceStateDoc): Promise<string> {
    const response = await this.fetchFn(`${this.base}/api/state`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(state),
    });
    const doc = await this.parse<{ id: string }>(response);
    return doc.id;
  }

  async loadState(shareId: string, mode?: "view" | "edit"): Promise<WorkspaceStateDoc> {
    const suffix = mode ? `?mode=${mode}` : "";
    return this.parse(await this.fetchFn(`${this.base}/api/state/${shareId}${suffix}`));
  }

  async thresholds(): Promise<ThresholdsDoc> {
    return this.parse(await this.fetchFn(`${this.base}/api/config/thresholds`));
  }
}
