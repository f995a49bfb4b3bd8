"""Quantitative evaluation: kernel-density mean log likelihood, relative
variance-of-difference smoothness, and a latent-space-consistency proxy.

The consistency score is a documented proxy (the original measure lives in
external work): along random latent-space line segments it reports the mean
absolute Pearson correlation between latent distances and generated-curve
distances, which is 1.0 for a perfectly linear latent-to-curve map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from . import networks as nn


class MetricError(Exception):
    pass


@dataclass
class EvalConfig:
    runs: int = 10
    samples_per_run: int = 1000
    bandwidth: float | None = None  # None selects by held-out likelihood
    test_samples: int = 500
    lsc_lines: int = 20
    lsc_points_per_line: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.runs < 1:
            raise MetricError("runs must be at least 1")


@dataclass
class MetricReport:
    mll: float
    mll_std: float
    rvod: float
    rvod_std: float
    lsc: float
    lsc_std: float
    runs: int
    seeds: list
    bandwidth: float
    samples_per_run: int
    lsc_skipped_lines: int = 0

    def as_key_values(self) -> str:
        pairs = [
            ("mll", self.mll), ("mll_std", self.mll_std),
            ("rvod", self.rvod), ("rvod_std", self.rvod_std),
            ("lsc", self.lsc), ("lsc_std", self.lsc_std),
            ("runs", self.runs), ("bandwidth", self.bandwidth),
            ("samples_per_run", self.samples_per_run),
            ("lsc_skipped_lines", self.lsc_skipped_lines),
            ("seeds", ";".join(str(s) for s in self.seeds)),
        ]
        return "\n".join(f"{k}={v}" for k, v in pairs) + "\n"


def export_report(report: MetricReport, kv_path, csv_path, example: str, model: str,
                  train_minutes: float) -> None:
    Path(kv_path).write_text(report.as_key_values(), encoding="utf-8")
    header = "example,model,MLL,RVOD,LSC,train-minutes"
    row = ",".join([
        example, model,
        f"{report.mll:.4g} ± {report.mll_std:.2g}",
        f"{report.rvod:.4g} ± {report.rvod_std:.2g}",
        f"{report.lsc:.4g} ± {report.lsc_std:.2g}",
        f"{train_minutes:.2f}",
    ])
    Path(csv_path).write_text(header + "\n" + row + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Mean log likelihood (Gaussian KDE, log-sum-exp)


def _flatten(curves) -> np.ndarray:
    curves = np.asarray(curves, dtype=np.float64)
    if curves.ndim != 3:
        raise MetricError(f"expected [count, points, 2] curves, got {curves.shape}")
    return curves.reshape(curves.shape[0], -1)


def mll(generated, test, bandwidth: float) -> float:
    """Mean log-density of test curves under an isotropic Gaussian KDE fit on
    the generated curves."""
    if bandwidth <= 0:
        raise MetricError("bandwidth must be positive")
    gen = _flatten(generated)
    tst = _flatten(test)
    if len(gen) == 0 or len(tst) == 0:
        raise MetricError("both curve sets must be nonempty")
    d = gen.shape[1]
    sq = ((tst[:, None, :] - gen[None, :, :]) ** 2).sum(axis=2)
    log_kernel = -sq / (2.0 * bandwidth**2)
    log_density = (
        logsumexp(log_kernel, axis=1)
        - math.log(len(gen))
        - 0.5 * d * math.log(2.0 * math.pi * bandwidth**2)
    )
    return float(log_density.mean())


def select_bandwidth(generated, validation, grid=None) -> float:
    """Pick the KDE bandwidth maximizing the likelihood of held-out validation
    curves under the generated-sample KDE (the usual Parzen-window protocol)."""
    curves = np.asarray(generated, dtype=np.float64)
    validation = np.asarray(validation, dtype=np.float64)
    if len(curves) < 2 or len(validation) < 2:
        raise MetricError("need generated and validation samples to select a bandwidth")
    if grid is None:
        grid = np.geomspace(0.01, 1.0, 20)
    scores = [mll(curves, validation, float(s)) for s in grid]
    return float(grid[int(np.argmax(scores))])


# ---------------------------------------------------------------------------
# Smoothness


def vod(x) -> float:
    """Mean over consecutive point differences of the per-difference variance
    across the two coordinates."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 3:
        raise MetricError("need a curve with at least 3 points")
    diffs = np.diff(x, axis=0)
    return float(diffs.var(axis=1).mean())


def _mean_vod(curves) -> float:
    return float(np.mean([vod(c) for c in np.asarray(curves, dtype=np.float64)]))


def rvod(data, generated) -> float:
    """Ratio of mean data VOD to mean generated VOD; 1 means equally smooth."""
    data = np.asarray(data, dtype=np.float64)
    generated = np.asarray(generated, dtype=np.float64)
    if len(data) == 0 or len(generated) == 0:
        raise MetricError("both curve sets must be nonempty")
    gen_vod = _mean_vod(generated)
    if gen_vod < 1e-15:
        raise MetricError("generated curves are degenerate (zero variance of differences)")
    return _mean_vod(data) / gen_vod


# ---------------------------------------------------------------------------
# Latent space consistency proxy


def _as_sampler(gen, latent_dim=None, noise_dim=None):
    if isinstance(gen, nn.GeneratorModel):
        def sampler(C, Z):
            return nn.generator_forward_batch(gen, C, Z)["curve"]

        return sampler, gen.config.latent_dim, gen.config.noise_dim
    if callable(gen):
        if latent_dim is None:
            raise MetricError("latent_dim is required for callable generators")
        return gen, latent_dim, (noise_dim if noise_dim is not None else 0)
    raise MetricError(f"cannot evaluate generator of type {type(gen)!r}")


def lsc_proxy(gen, n_lines: int = 20, points_per_line: int = 10, seed: int = 0,
              latent_dim: int | None = None, noise_dim: int | None = None,
              return_details: bool = False):
    """Mean |Pearson correlation| between latent and curve distances along
    random latent lines (noise held fixed per line); in [0, 1]."""
    if n_lines < 10:
        raise MetricError("need at least 10 lines for a stable estimate")
    if points_per_line < 3:
        raise MetricError("need at least 3 points per line")
    sampler, latent_dim, noise_dim = _as_sampler(gen, latent_dim, noise_dim)
    rng = np.random.default_rng(seed)
    ts = np.linspace(0.0, 1.0, points_per_line)
    iu = np.triu_indices(points_per_line, k=1)
    correlations = []
    skipped = 0
    for _ in range(n_lines):
        a = rng.uniform(size=latent_dim)
        b = rng.uniform(size=latent_dim)
        z = rng.standard_normal(size=noise_dim)
        C = a[None, :] + ts[:, None] * (b - a)[None, :]
        Z = np.tile(z, (points_per_line, 1))
        curves = _flatten(sampler(C, Z))
        latent_d = np.linalg.norm(C[iu[0]] - C[iu[1]], axis=1)
        curve_d = np.linalg.norm(curves[iu[0]] - curves[iu[1]], axis=1)
        if curve_d.std() < 1e-12 or latent_d.std() < 1e-12:
            skipped += 1
            continue
        corr = np.corrcoef(latent_d, curve_d)[0, 1]
        correlations.append(abs(corr))
    if not correlations:
        raise MetricError(f"all {n_lines} latent lines were degenerate (constant output)")
    score = float(np.mean(correlations))
    if return_details:
        return score, {"skipped": skipped, "lines_used": len(correlations)}
    return score


# ---------------------------------------------------------------------------
# Full evaluation


def evaluate(gen, dataset, cfg: EvalConfig, latent_dim: int | None = None,
             noise_dim: int | None = None) -> MetricReport:
    """Run every metric over cfg.runs seeds; report mean and sample std."""
    sampler, latent_dim, noise_dim = _as_sampler(gen, latent_dim, noise_dim)
    data = np.asarray(dataset.samples if hasattr(dataset, "samples") else dataset,
                      dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(len(data))
    test = data[perm[: cfg.test_samples]]
    # Disjoint validation split used only for bandwidth selection.
    val_count = max(2, min(len(data) - len(test), cfg.test_samples) // 2)
    validation = data[perm[len(test): len(test) + val_count]]
    if len(validation) < 2:
        validation = test

    seeds = [cfg.seed + 1 + r for r in range(cfg.runs)]
    mlls, rvods, lscs = [], [], []
    skipped_total = 0
    bandwidth = cfg.bandwidth
    for run_seed in seeds:
        run_rng = np.random.default_rng(run_seed)
        C = run_rng.uniform(size=(cfg.samples_per_run, latent_dim))
        Z = run_rng.standard_normal(size=(cfg.samples_per_run, noise_dim))
        generated = np.asarray(sampler(C, Z), dtype=np.float64)
        if bandwidth is None:
            bandwidth = select_bandwidth(generated, validation)
        mlls.append(mll(generated, test, bandwidth))
        rvods.append(rvod(test, generated))
        score, details = lsc_proxy(
            sampler, n_lines=cfg.lsc_lines, points_per_line=cfg.lsc_points_per_line,
            seed=run_seed, latent_dim=latent_dim, noise_dim=noise_dim, return_details=True,
        )
        lscs.append(score)
        skipped_total += details["skipped"]

    def stats(vals):
        arr = np.asarray(vals)
        return float(arr.mean()), float(arr.std(ddof=1)) if len(arr) > 1 else 0.0

    mll_m, mll_s = stats(mlls)
    rvod_m, rvod_s = stats(rvods)
    lsc_m, lsc_s = stats(lscs)
    return MetricReport(
        mll=mll_m, mll_std=mll_s, rvod=rvod_m, rvod_std=rvod_s, lsc=lsc_m, lsc_std=lsc_s,
        runs=cfg.runs, seeds=seeds, bandwidth=float(bandwidth),
        samples_per_run=cfg.samples_per_run, lsc_skipped_lines=skipped_total,
    )
