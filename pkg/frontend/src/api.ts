/** Typed client for the curve inference service. */

export interface ModelInfo {
  latentDim: number;
  noiseDim: number;
  degree: number;
  symmetry: string;
  constraint: string;
  totalPoints: number;
}

export type Point = [number, number];

export interface GenerateResponse {
  points: Point[];
  dat: string;
  clamped: boolean;
  controlPoints?: Point[];
  weights?: number[];
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(`service unreachable: ${String(err)}`);
    }
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const detail = (body as { error?: string }).error ?? resp.statusText;
      throw new ApiError(detail, resp.status);
    }
    return body;
  }

  async getModel(): Promise<ModelInfo> {
    const raw = (await this.request("/model")) as Record<string, unknown>;
    return {
      latentDim: raw["latent-dim"] as number,
      noiseDim: raw["noise-dim"] as number,
      degree: raw["degree"] as number,
      symmetry: raw["symmetry"] as string,
      constraint: raw["constraint"] as string,
      totalPoints: raw["total-points"] as number,
    };
  }

  async generate(
    latent: number[],
    noiseSeed: number,
    includeControlPoints: boolean,
  ): Promise<GenerateResponse> {
    const raw = (await this.request("/generate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        latent,
        "noise-seed": noiseSeed,
        "include-control-points": includeControlPoints,
      }),
    })) as Record<string, unknown>;
    return {
      points: raw["points"] as Point[],
      dat: raw["dat"] as string,
      clamped: raw["clamped"] as boolean,
      controlPoints: raw["control-points"] as Point[] | undefined,
      weights: raw["weights"] as number[] | undefined,
    };
  }

  async health(): Promise<boolean> {
    try {
      await this.request("/health");
      return true;
    } catch {
      return false;
    }
  }
}
