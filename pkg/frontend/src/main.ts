/** DOM wiring: sliders per latent dimension, noise reseed, control-point
 * toggle, error banner with retry, and URL state sync. */

import { ApiClient } from "./api.js";
import { ExplorerCore } from "./explorer.js";
import { renderScene } from "./render.js";
import { stateToQuery } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "http://127.0.0.1:8321";
}

async function boot(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("curve-canvas");
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    throw new Error("2d canvas unsupported");
  }
  const sliders = el<HTMLDivElement>("sliders");
  const banner = el<HTMLDivElement>("banner");
  const retry = el<HTMLButtonElement>("retry");
  const reseed = el<HTMLButtonElement>("reseed");
  const cpToggle = el<HTMLInputElement>("show-cp");
  const seedLabel = el<HTMLSpanElement>("seed-label");

  const core = new ExplorerCore(new ApiClient(apiBase()));

  core.onRender(({ state, response }) => {
    renderScene(ctx, {
      response,
      trail: state.trail,
      showControlPoints: state.showControlPoints,
      width: canvas.width,
      height: canvas.height,
    });
    seedLabel.textContent = `noise seed ${state.noiseSeed}`;
    const query = stateToQuery(state);
    window.history.replaceState(null, "", `${window.location.pathname}?api=${apiBase()}&${query}`);
  });

  core.onError((err) => {
    banner.textContent = `service error: ${String(err)}`;
    banner.hidden = false;
  });

  const start = async () => {
    banner.hidden = true;
    try {
      const model = await core.init(window.location.search.replace(/^\?/, ""));
      sliders.replaceChildren();
      core.state.latent.forEach((value, dim) => {
        const wrap = document.createElement("label");
        wrap.className = "slider-row";
        wrap.textContent = `c${dim} `;
        const input = document.createElement("input");
        input.type = "range";
        input.min = "0";
        input.max = "1";
        input.step = "0.001";
        input.value = String(value);
        input.addEventListener("input", () => core.setSlider(dim, Number(input.value)));
        wrap.appendChild(input);
        sliders.appendChild(wrap);
      });
      cpToggle.checked = core.state.showControlPoints;
      document.title = `curve explorer (${model.latentDim}-d latent)`;
    } catch (err) {
      banner.textContent = `service unreachable: ${String(err)}`;
      banner.hidden = false;
    }
  };

  retry.addEventListener("click", () => void start());
  reseed.addEventListener("click", () => core.reseedNoise());
  cpToggle.addEventListener("change", () => core.setShowControlPoints(cpToggle.checked));
  await start();
}

void boot();
