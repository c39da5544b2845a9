// Thin typed client over the service's JSON API. Every UI number comes from
// one of these responses; the client computes nothing itself.

import type {
  CompareResponse,
  EvaluateResponse,
  MaterializeResponse,
  QueryJson,
  ScenarioView,
  ScenariosResponse,
  SchemaView,
  UploadResponse,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/** A service error envelope, preserved verbatim for display. */
export class ApiRequestError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly status: number,
    readonly detail?: unknown,
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const text = await response.text();
    let data: unknown = null;
    if (text) {
      try {
        data = JSON.parse(text);
      } catch {
        data = null;
      }
    }
    if (!response.ok) {
      const envelope = (data ?? {}) as {
        error?: string;
        message?: string;
        detail?: unknown;
      };
      throw new ApiRequestError(
        envelope.error ?? `HTTP_${response.status}`,
        envelope.message ?? response.statusText,
        response.status,
        envelope.detail,
      );
    }
    return data as T;
  }

  uploadCube(
    dimensions: string[],
    measures: string[],
    csv: string,
  ): Promise<UploadResponse> {
    return this.request("PUT", "/api/cube", {
      manifest: { dimensions, measures },
      csv,
    });
  }

  schema(): Promise<SchemaView> {
    return this.request("GET", "/api/schema");
  }

  scenarios(): Promise<ScenariosResponse> {
    return this.request("GET", "/api/scenarios");
  }

  createScenario(value: string, dimension: string): Promise<unknown> {
    return this.request("POST", "/api/scenarios", { value, dimension });
  }

  deleteScenario(value: string): Promise<unknown> {
    return this.request("DELETE", `/api/scenarios/${encodeURIComponent(value)}`);
  }

  addScenarioQuery(
    value: string,
    query: QueryJson,
    factors: Record<string, number>,
  ): Promise<{ scenario: ScenarioView }> {
    return this.request(
      "POST",
      `/api/scenarios/${encodeURIComponent(value)}/queries`,
      { query, factors },
    );
  }

  updateFactors(
    value: string,
    key: QueryJson,
    valueIndex: number,
    factors: Record<string, number>,
  ): Promise<{ scenario: ScenarioView }> {
    return this.request(
      "PATCH",
      `/api/scenarios/${encodeURIComponent(value)}/queries`,
      { key, valueIndex, factors },
    );
  }

  removeEntry(value: string, key: QueryJson): Promise<{ scenario: ScenarioView }> {
    return this.request(
      "DELETE",
      `/api/scenarios/${encodeURIComponent(value)}/queries`,
      { key },
    );
  }

  evaluate(query: QueryJson, specs: string[]): Promise<EvaluateResponse> {
    return this.request("POST", "/api/evaluate", { query, specs });
  }

  materialize(query: QueryJson, limit?: number): Promise<MaterializeResponse> {
    return this.request("POST", "/api/materialize", { query, limit });
  }

  compare(
    query1: QueryJson,
    query2: QueryJson,
    spec: string,
  ): Promise<CompareResponse> {
    return this.request("POST", "/api/compare", { query1, query2, spec });
  }
}
