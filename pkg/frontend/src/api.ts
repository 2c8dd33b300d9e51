// Typed client for the search service's JSON HTTP API.

export interface RegionRect {
  min_lat: number;
  max_lat: number;
  min_lon: number;
  max_lon: number;
}

export interface Region {
  name: string;
  rect: RegionRect;
}

export interface RecommendedPoi {
  id: string;
  name: string;
  lat: number;
  lon: number;
  rank: number;
  reason: string;
}

export interface FilteredOutPoi {
  id: string;
  name: string;
  lat: number;
  lon: number;
  similarity: number;
}

export interface QueryResponse {
  recommended: RecommendedPoi[];
  filtered_out: FilteredOutPoi[];
  degraded: boolean;
  timings_ms: { filter: number; refine: number };
}

export interface QueryRequest {
  region_name: string;
  text: string;
  k?: number;
}

export class ApiError extends Error {
  readonly code: string;

  constructor(code: string, message: string) {
    super(message);
    this.code = code;
  }
}

async function parseError(response: Response): Promise<ApiError> {
  try {
    const body = await response.json();
    return new ApiError(body.code ?? "http_error", body.message ?? `HTTP ${response.status}`);
  } catch {
    return new ApiError("http_error", `HTTP ${response.status}`);
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  async regions(): Promise<Region[]> {
    const response = await fetch(`${this.baseUrl}/api/regions`);
    if (!response.ok) throw await parseError(response);
    return response.json();
  }

  async query(request: QueryRequest): Promise<QueryResponse> {
    const response = await fetch(`${this.baseUrl}/api/query`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) throw await parseError(response);
    return response.json();
  }
}
