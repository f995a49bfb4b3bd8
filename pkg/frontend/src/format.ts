/** Canonical point-list serialization matching the service/CLI .dat format. */

import type { Point } from "./api.js";

export function fmt6(value: number): string {
  return value.toFixed(6);
}

export function formatPointsDat(points: Point[]): string {
  return points.map(([x, y]) => `${fmt6(x)} ${fmt6(y)}\n`).join("");
}
