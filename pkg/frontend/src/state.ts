/** Explorer state: slider positions, noise seed, trail, URL round-tripping. */

import type { Point } from "./api.js";

export const TRAIL_LENGTH = 3;

export interface ExplorerState {
  latent: number[];
  noiseSeed: number;
  showControlPoints: boolean;
  trail: Point[][];
}

export function initialState(latentDim: number): ExplorerState {
  return {
    latent: new Array(latentDim).fill(0.5),
    noiseSeed: 0,
    showControlPoints: false,
    trail: [],
  };
}

export function clamp01(value: number): number {
  return Math.min(1, Math.max(0, value));
}

export function withSlider(state: ExplorerState, dim: number, value: number): ExplorerState {
  const latent = state.latent.slice();
  latent[dim] = clamp01(value);
  return { ...state, latent };
}

export function withNoiseSeed(state: ExplorerState, seed: number): ExplorerState {
  return { ...state, noiseSeed: seed };
}

/** Keep the last few curves so the previous shape can be ghosted. */
export function pushTrail(state: ExplorerState, curve: Point[]): ExplorerState {
  const trail = [curve, ...state.trail].slice(0, TRAIL_LENGTH);
  return { ...state, trail };
}

/** Serialize slider state into a query string so views are shareable. */
export function stateToQuery(state: ExplorerState): string {
  const params = new URLSearchParams();
  params.set("latent", state.latent.map((v) => String(v)).join(","));
  params.set("seed", String(state.noiseSeed));
  params.set("cp", state.showControlPoints ? "1" : "0");
  return params.toString();
}

export function stateFromQuery(query: string, latentDim: number): ExplorerState {
  const params = new URLSearchParams(query);
  const state = initialState(latentDim);
  const latentRaw = params.get("latent");
  if (latentRaw) {
    const parsed = latentRaw.split(",").map(Number);
    if (parsed.length === latentDim && parsed.every((v) => Number.isFinite(v))) {
      state.latent = parsed.map(clamp01);
    }
  }
  const seedRaw = params.get("seed");
  if (seedRaw !== null && Number.isFinite(Number(seedRaw))) {
    state.noiseSeed = Math.trunc(Number(seedRaw));
  }
  state.showControlPoints = params.get("cp") === "1";
  return state;
}
