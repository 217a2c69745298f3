/**
 * Typed client for the stockflow service. The UI consumes these three
 * endpoints and performs no simulation arithmetic of its own: every number
 * it draws came out of a payload defined here.
 */

export interface ConstantSummary {
  name: string;
  default: number;
  min: number;
  max: number;
}

export interface ModelSummary {
  id: string;
  name: string;
  elements: string[];
  constants: ConstantSummary[];
}

export interface ModelsPayload {
  models: ModelSummary[];
  errors: { id: string; message: string }[];
}

export interface SettledPoint {
  time: number;
  value: number;
}

export interface AnalyticEquilibrium {
  price: number;
  quantity: number;
}

export interface RunPayload {
  id: string;
  times: number[];
  series: Record<string, number[]>;
  settled: Record<string, SettledPoint | null>;
  analytic_equilibrium: AnalyticEquilibrium | null;
  diagnostics: { time: number; message: string }[];
}

export interface LoopSummary {
  nodes: string[];
  polarity: "balancing" | "reinforcing" | "indeterminate";
  delayed: boolean;
}

export interface LoopsPayload {
  id: string;
  loops: LoopSummary[];
}

export interface RunRequest {
  overrides: Record<string, number>;
  stop_time?: number;
  dt?: number;
  method?: string;
  save_interval?: number;
}

export interface FieldError {
  field: string;
  message: string;
}

/** Thrown for non-2xx responses, carrying the structured detail. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly fields: FieldError[],
    readonly faultTime: number | null,
  ) {
    super(
      faultTime !== null
        ? `simulation fault at t=${faultTime}`
        : fields.map((f) => `${f.field}: ${f.message}`).join("; ") || `HTTP ${status}`,
    );
  }
}

async function parseError(response: Response): Promise<ServiceError> {
  let fields: FieldError[] = [];
  let faultTime: number | null = null;
  try {
    const body = await response.json();
    if (Array.isArray(body.detail)) {
      fields = body.detail as FieldError[];
    } else if (body.detail && typeof body.detail === "object") {
      faultTime = typeof body.detail.time === "number" ? body.detail.time : null;
    } else if (typeof body.detail === "string") {
      fields = [{ field: "request", message: body.detail }];
    }
  } catch {
    /* non-JSON error body: keep the bare status */
  }
  return new ServiceError(response.status, fields, faultTime);
}

export class ApiClient {
  constructor(readonly base: string) {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.base}${path}`);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  listModels(): Promise<ModelsPayload> {
    return this.get<ModelsPayload>("/models");
  }

  loops(modelId: string): Promise<LoopsPayload> {
    return this.get<LoopsPayload>(`/models/${modelId}/loops`);
  }

  async run(modelId: string, request: RunRequest): Promise<RunPayload> {
    const response = await fetch(`${this.base}/models/${modelId}/run`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as RunPayload;
  }
}
