/** Headless explorer core: owns state, debounces generate calls with
 * latest-wins delivery, and notifies a render callback.  DOM wiring lives in
 * main.ts so this logic is fully testable. */

import { ApiClient, GenerateResponse, ModelInfo } from "./api.js";
import { LatestWins, DEBOUNCE_MS } from "./scheduler.js";
import {
  ExplorerState,
  initialState,
  pushTrail,
  stateFromQuery,
  withNoiseSeed,
  withSlider,
} from "./state.js";

export interface RenderEvent {
  state: ExplorerState;
  response: GenerateResponse;
}

interface GenArgs {
  latent: number[];
  noiseSeed: number;
  includeControlPoints: boolean;
}

export class ExplorerCore {
  model: ModelInfo | null = null;
  state: ExplorerState = initialState(0);
  lastResponse: GenerateResponse | null = null;

  private renderCb: (ev: RenderEvent) => void = () => undefined;
  private errorCb: (err: unknown) => void = () => undefined;
  private scheduler: LatestWins<GenArgs, GenerateResponse>;

  constructor(private readonly api: ApiClient, debounceMs: number = DEBOUNCE_MS) {
    this.scheduler = new LatestWins<GenArgs, GenerateResponse>(
      (args) => this.api.generate(args.latent, args.noiseSeed, args.includeControlPoints),
      (response) => this.applyResponse(response),
      (err) => this.errorCb(err),
      debounceMs,
    );
  }

  onRender(cb: (ev: RenderEvent) => void): void {
    this.renderCb = cb;
  }

  onError(cb: (err: unknown) => void): void {
    this.errorCb = cb;
  }

  /** Fetch the model descriptor, build sliders at 0.5 (or from the query
   * string), and request the initial curve. */
  async init(query: string = ""): Promise<ModelInfo> {
    this.model = await this.api.getModel();
    this.state = query
      ? stateFromQuery(query, this.model.latentDim)
      : initialState(this.model.latentDim);
    this.scheduler.requestNow(this.currentArgs());
    return this.model;
  }

  setSlider(dim: number, value: number): void {
    this.state = withSlider(this.state, dim, value);
    this.scheduler.request(this.currentArgs());
  }

  setShowControlPoints(show: boolean): void {
    this.state = { ...this.state, showControlPoints: show };
    this.scheduler.requestNow(this.currentArgs());
  }

  reseedNoise(seed?: number): void {
    const next = seed ?? this.state.noiseSeed + 1;
    this.state = withNoiseSeed(this.state, next);
    this.scheduler.requestNow(this.currentArgs());
  }

  private currentArgs(): GenArgs {
    return {
      latent: this.state.latent.slice(),
      noiseSeed: this.state.noiseSeed,
      includeControlPoints: true,
    };
  }

  private applyResponse(response: GenerateResponse): void {
    if (this.lastResponse !== null) {
      this.state = pushTrail(this.state, this.lastResponse.points);
    }
    this.lastResponse = response;
    this.renderCb({ state: this.state, response });
  }
}
