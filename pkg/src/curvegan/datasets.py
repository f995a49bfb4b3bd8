"""Curve dataset construction: superformula families, a synthetic waterline
family, B-spline resampling to a fixed 64-point representation, and loaders
for .dat / .csv point-sequence files with a JSON manifest."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import interpolate

CURVE_POINTS = 64


class DatasetError(Exception):
    pass


class ParseError(DatasetError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


@dataclass
class SuperformulaParams:
    s1: float
    s2: float
    m_lobes: int

    def __post_init__(self):
        if not (1.0 <= self.s1 <= 10.0 and 1.0 <= self.s2 <= 10.0):
            raise DatasetError("s1 and s2 must lie in [1, 10]")
        if self.m_lobes < 1:
            raise DatasetError("m_lobes must be positive")


@dataclass
class CurveDataset:
    samples: np.ndarray  # [count, 64, 2]
    name: str
    provenance: str  # synthetic-superformula | synthetic-waterline | file-loaded
    normalization: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 3 or self.samples.shape[1:] != (CURVE_POINTS, 2):
            raise DatasetError(
                f"samples must be [count, {CURVE_POINTS}, 2], got {self.samples.shape}"
            )

    def __len__(self):
        return self.samples.shape[0]


# ---------------------------------------------------------------------------
# Superformula


def superformula_radius(theta, p: SuperformulaParams):
    n1 = p.s1
    n2 = n3 = p.s1 + p.s2
    base = np.abs(np.cos(p.m_lobes * theta / 4.0)) ** n2 + np.abs(np.sin(p.m_lobes * theta / 4.0)) ** n3
    return base ** (-1.0 / n1)


def superformula_curve(p: SuperformulaParams, num_points: int = CURVE_POINTS) -> np.ndarray:
    """Sample the superformula at evenly spaced theta in [0, 2*pi)."""
    theta = 2.0 * np.pi * np.arange(num_points) / num_points
    r = superformula_radius(theta, p)
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def generate_superformula_dataset(count: int, s1_range=(1.0, 10.0), s2_range=(1.0, 10.0),
                                  m_lobes: int = 3, seed: int = 0) -> CurveDataset:
    if count < 1:
        raise DatasetError("count must be at least 1")
    rng = np.random.default_rng(seed)
    curves = np.empty((count, CURVE_POINTS, 2))
    for i in range(count):
        params = SuperformulaParams(
            s1=float(rng.uniform(*s1_range)),
            s2=float(rng.uniform(*s2_range)),
            m_lobes=m_lobes,
        )
        curves[i] = superformula_curve(params)
    return CurveDataset(curves, name=f"superformula-m{m_lobes}", provenance="synthetic-superformula")


# ---------------------------------------------------------------------------
# Synthetic waterline family (stands in for externally generated hull data)


def waterline_curve(flat_fraction: float, body_width: float, tail_width: float,
                    num_points: int = CURVE_POINTS) -> np.ndarray:
    """Upper half of a hull waterline from stern (0, tail) to bow (1, 0).

    A flat midsection of the requested fraction is blended into smooth
    stern/bow arcs; the curve is later mirrored about the centerline by the
    symmetry machinery when a full outline is needed.
    """
    if not 0.0 <= flat_fraction <= 0.8:
        raise DatasetError("flat_fraction must lie in [0, 0.8]")
    x = np.linspace(0.0, 1.0, num_points)
    half = (1.0 - flat_fraction) / 2.0
    bow_start = 1.0 - half
    y = np.full(num_points, body_width)
    stern = x < half
    y[stern] = tail_width + (body_width - tail_width) * np.sin(np.pi / 2 * x[stern] / half)
    bow = x > bow_start
    y[bow] = body_width * np.cos(np.pi / 2 * (x[bow] - bow_start) / half)
    return np.column_stack([x, y])


def generate_waterline_dataset(count: int, seed: int = 0) -> CurveDataset:
    if count < 1:
        raise DatasetError("count must be at least 1")
    rng = np.random.default_rng(seed)
    curves = np.empty((count, CURVE_POINTS, 2))
    for i in range(count):
        curves[i] = waterline_curve(
            flat_fraction=float(rng.uniform(0.1, 0.7)),
            body_width=float(rng.uniform(0.08, 0.2)),
            tail_width=float(rng.uniform(0.0, 0.12)),
        )
    return CurveDataset(curves, name="waterline", provenance="synthetic-waterline")


# ---------------------------------------------------------------------------
# B-spline resampling


def resample_curve(points, target: int = CURVE_POINTS, curvature_weight: float = 0.0) -> np.ndarray:
    """Refit a point sequence with an interpolating cubic B-spline and place
    ``target`` points with density proportional to 1 + curvature_weight*|kappa|
    along arc length.  Weight 0 gives uniform arc-length spacing."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DatasetError(f"expected a sequence of 2-D points, got shape {pts.shape}")
    if pts.shape[0] < 4:
        raise DatasetError("need at least 4 points for cubic spline resampling")
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    if np.any(seg == 0):
        raise DatasetError("consecutive duplicate points are not allowed")
    if curvature_weight < 0:
        raise DatasetError("curvature_weight must be nonnegative")

    k = min(3, pts.shape[0] - 1)
    tck, _ = interpolate.splprep([pts[:, 0], pts[:, 1]], s=0, k=k)

    # Dense evaluation for arc length and curvature estimates.
    dense_t = np.linspace(0.0, 1.0, max(40 * target, 1024))
    dx, dy = interpolate.splev(dense_t, tck, der=1)
    ddx, ddy = interpolate.splev(dense_t, tck, der=2)
    speed = np.hypot(dx, dy)
    speed = np.maximum(speed, 1e-12)
    kappa = np.abs(dx * ddy - dy * ddx) / speed**3

    density = (1.0 + curvature_weight * kappa) * speed
    cdf = np.concatenate([[0.0], np.cumsum((density[1:] + density[:-1]) / 2 * np.diff(dense_t))])
    cdf /= cdf[-1]
    quantiles = np.linspace(0.0, 1.0, target)
    t_samples = np.interp(quantiles, cdf, dense_t)
    x, y = interpolate.splev(t_samples, tck)
    return np.column_stack([x, y])


# ---------------------------------------------------------------------------
# File loading


def _parse_dat(path: Path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if line_no == 1:
                # A non-numeric first line is a title header.
                try:
                    float(tokens[0])
                except ValueError:
                    continue
            if len(tokens) < 2:
                raise ParseError(path, line_no, f"expected 'x y', got {line.strip()!r}")
            try:
                rows.append((float(tokens[0]), float(tokens[1])))
            except ValueError:
                raise ParseError(path, line_no, f"malformed numeric token in {line.strip()!r}") from None
    if not rows:
        raise ParseError(path, 1, "no coordinate rows found")
    return np.asarray(rows)


def _parse_csv(path: Path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for line_no, record in enumerate(reader, start=1):
            if line_no == 1:
                continue  # header
            if not record:
                continue
            if len(record) < 2:
                raise ParseError(path, line_no, "expected two columns")
            try:
                rows.append((float(record[0]), float(record[1])))
            except ValueError:
                raise ParseError(path, line_no, f"malformed numeric token in {record!r}") from None
    if not rows:
        raise ParseError(path, 1, "no coordinate rows found")
    return np.asarray(rows)


def normalize_chord(points: np.ndarray):
    """Scale/translate so x spans [0, 1]; returns (points, record of applied map)."""
    x0, x1 = points[:, 0].min(), points[:, 0].max()
    span = x1 - x0
    if span <= 0:
        raise DatasetError("degenerate input: zero x extent")
    out = (points - [x0, 0.0]) / span
    return out, {"x_offset": float(x0), "scale": float(span)}


def load_point_sequences(paths, fmt: str = "dat", target: int = CURVE_POINTS,
                         curvature_weight: float = 0.0, normalize: bool = True,
                         name: str = "loaded") -> CurveDataset:
    """Parse one raw sequence per file, resample each to the fixed length."""
    if fmt not in ("dat", "csv"):
        raise DatasetError(f"format must be 'dat' or 'csv', got {fmt!r}")
    parser = _parse_dat if fmt == "dat" else _parse_csv
    curves, records = [], {}
    for p in map(Path, paths):
        raw = parser(p)
        if normalize:
            raw, rec = normalize_chord(raw)
            records[p.name] = rec
        curves.append(resample_curve(raw, target=target, curvature_weight=curvature_weight))
    return CurveDataset(
        np.stack(curves), name=name, provenance="file-loaded", normalization=records
    )


# ---------------------------------------------------------------------------
# On-disk dataset directory: per-curve .dat files plus a JSON manifest


def save_dataset(dataset: CurveDataset, directory) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for i, curve in enumerate(dataset.samples):
        fname = f"curve_{i:05d}.dat"
        with open(directory / fname, "w", encoding="utf-8") as fh:
            for x, y in curve:
                fh.write(f"{x:.6f} {y:.6f}\n")
        files.append(fname)
    manifest = {
        "name": dataset.name,
        "provenance": dataset.provenance,
        "points_per_curve": CURVE_POINTS,
        "files": files,
        "normalization": dataset.normalization,
    }
    manifest_path = directory / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path


def load_dataset(directory) -> CurveDataset:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise DatasetError(f"no manifest.json in {directory}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    curves = [_parse_dat(directory / fname) for fname in manifest["files"]]
    return CurveDataset(
        np.stack(curves),
        name=manifest["name"],
        provenance=manifest["provenance"],
        normalization=manifest.get("normalization", {}),
    )
