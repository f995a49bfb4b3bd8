"""Dataset construction checks: superformula values against mpmath, resampling
statistics, file parsing, and manifest round trips."""

import math

import mpmath
import numpy as np
import pytest

from curvegan import datasets as ds


class TestSuperformula:
    def test_theta_zero_gives_unit_point(self):
        rng = np.random.default_rng(71)
        for _ in range(20):
            p = ds.SuperformulaParams(
                s1=float(rng.uniform(1, 10)), s2=float(rng.uniform(1, 10)),
                m_lobes=int(rng.choice([3, 4])),
            )
            np.testing.assert_allclose(superpoint(p, 0.0), (1.0, 0.0), atol=1e-12)

    def test_m4_theta_half_pi(self):
        p = ds.SuperformulaParams(s1=2.0, s2=3.0, m_lobes=4)
        np.testing.assert_allclose(superpoint(p, math.pi / 2), (0.0, 1.0), atol=1e-12)

    def test_radius_matches_mpmath(self):
        p = ds.SuperformulaParams(s1=2.0, s2=3.0, m_lobes=3)
        theta = math.pi / 3
        ours = float(ds.superformula_radius(np.asarray(theta), p))
        with mpmath.workdps(50):
            n1 = mpmath.mpf(2)
            n23 = mpmath.mpf(5)
            t = mpmath.mpf(theta)
            base = abs(mpmath.cos(3 * t / 4)) ** n23 + abs(mpmath.sin(3 * t / 4)) ** n23
            exact = float(base ** (-1 / n1))
        assert abs(ours - exact) < 1e-12

    def test_curve_periodicity(self):
        p = ds.SuperformulaParams(s1=3.0, s2=2.0, m_lobes=3)
        start = superpoint(p, 0.0)
        wrapped = superpoint(p, 2 * math.pi)
        np.testing.assert_allclose(start, wrapped, atol=1e-9)

    def test_m4_four_fold_symmetry(self):
        p = ds.SuperformulaParams(s1=4.0, s2=2.0, m_lobes=4)
        curve = ds.superformula_curve(p)
        rot = np.array([[0.0, 1.0], [-1.0, 0.0]])  # rotate by pi/2 (row points)
        rotated = curve @ rot
        dists = np.linalg.norm(rotated[:, None] - curve[None], axis=2).min(axis=1)
        assert dists.max() < 1e-9

    def test_dataset_determinism_and_bounds(self):
        a = ds.generate_superformula_dataset(10, seed=5)
        b = ds.generate_superformula_dataset(10, seed=5)
        np.testing.assert_array_equal(a.samples, b.samples)
        assert a.samples.shape == (10, 64, 2)
        np.testing.assert_allclose(a.samples[:, 0, :], [[1.0, 0.0]] * 10, atol=1e-12)

    def test_dataset_range_sampling(self):
        data = ds.generate_superformula_dataset(50, s1_range=(2, 3), s2_range=(4, 5), seed=1)
        # Radius at theta=0 is 1 for every member; spot-check shapes differ.
        assert len(np.unique(data.samples.round(9), axis=0)) == 50

    def test_param_validation(self):
        with pytest.raises(ds.DatasetError):
            ds.SuperformulaParams(s1=0.5, s2=2.0, m_lobes=3)


def superpoint(p, theta):
    r = float(ds.superformula_radius(np.asarray(theta), p))
    return np.array([r * math.cos(theta), r * math.sin(theta)])


class TestResampling:
    def test_straight_segment_uniform(self):
        x = np.linspace(0, 1, 10)
        pts = np.column_stack([x, np.zeros(10)])
        out = ds.resample_curve(pts, target=64, curvature_weight=3.0)
        assert out.shape == (64, 2)
        np.testing.assert_allclose(out[:, 1], 0.0, atol=1e-6)
        np.testing.assert_allclose(out[:, 0], np.linspace(0, 1, 64), atol=1e-6)

    def test_circle_radius_preserved(self):
        theta = np.linspace(0, 2 * np.pi, 33)[:32]
        circle = np.column_stack([np.cos(theta), np.sin(theta)])
        out = ds.resample_curve(circle, target=64, curvature_weight=0.0)
        np.testing.assert_allclose(np.hypot(out[:, 0], out[:, 1]), 1.0, atol=1e-3)

    def test_circle_spacing_uniform_any_weight(self):
        theta = np.linspace(0, 2 * np.pi, 33)[:32]
        circle = np.column_stack([np.cos(theta), np.sin(theta)])
        for weight in (0.0, 2.0, 10.0):
            out = ds.resample_curve(circle, target=64, curvature_weight=weight)
            gaps = np.linalg.norm(np.diff(out, axis=0), axis=1)
            assert gaps.std() / gaps.mean() < 0.05

    def test_curvature_weight_concentrates_points(self):
        # An L-shaped polyline: higher weight pulls samples toward the corner.
        a = np.column_stack([np.linspace(0, 1, 20), np.zeros(20)])
        b = np.column_stack([np.ones(19), np.linspace(0.05, 1, 19)])
        pts = np.vstack([a, b])
        flat = ds.resample_curve(pts, target=64, curvature_weight=0.0)
        bent = ds.resample_curve(pts, target=64, curvature_weight=50.0)
        corner = np.array([1.0, 0.0])
        near_flat = (np.linalg.norm(flat - corner, axis=1) < 0.2).sum()
        near_bent = (np.linalg.norm(bent - corner, axis=1) < 0.2).sum()
        assert near_bent > near_flat

    def test_idempotent_at_fixed_target(self):
        p = ds.SuperformulaParams(s1=2.5, s2=2.0, m_lobes=3)
        base = ds.superformula_curve(p)
        once = ds.resample_curve(base, target=64)
        twice = ds.resample_curve(once, target=64)
        hausdorff = max(
            np.linalg.norm(once[:, None] - twice[None], axis=2).min(axis=1).max(),
            np.linalg.norm(twice[:, None] - once[None], axis=2).min(axis=1).max(),
        )
        assert hausdorff < 1e-4

    def test_too_few_points(self):
        with pytest.raises(ds.DatasetError):
            ds.resample_curve([(0, 0), (1, 0), (2, 0)])

    def test_duplicate_points_rejected(self):
        with pytest.raises(ds.DatasetError):
            ds.resample_curve([(0, 0), (0, 0), (1, 0), (2, 0), (3, 0)])


class TestFileLoading:
    def test_dat_round_trip(self, tmp_path):
        f = tmp_path / "a.dat"
        pts = np.column_stack([np.linspace(0, 1, 12), np.sin(np.linspace(0, 1, 12))])
        f.write_text("\n".join(f"{x:.6f} {y:.6f}" for x, y in pts) + "\n")
        data = ds.load_point_sequences([f], fmt="dat")
        assert data.samples.shape == (1, 64, 2)
        assert data.provenance == "file-loaded"

    def test_dat_header_skipped(self, tmp_path):
        f = tmp_path / "b.dat"
        body = "\n".join(f"{x:.4f} {x * x:.4f}" for x in np.linspace(0, 1, 10))
        f.write_text("My Airfoil Name\n" + body + "\n")
        data = ds.load_point_sequences([f], fmt="dat")
        assert len(data) == 1

    def test_malformed_token_cites_line(self, tmp_path):
        f = tmp_path / "c.dat"
        lines = [f"{x:.4f} 0.0" for x in np.linspace(0, 1, 10)]
        lines[6] = "0.55 oops"
        f.write_text("\n".join(lines) + "\n")
        with pytest.raises(ds.ParseError, match=":7:"):
            ds.load_point_sequences([f], fmt="dat")

    def test_csv_with_header(self, tmp_path):
        f = tmp_path / "d.csv"
        rows = ["x,y"] + [f"{x:.4f},{math.sin(x):.4f}" for x in np.linspace(0, 2, 15)]
        f.write_text("\n".join(rows) + "\n")
        data = ds.load_point_sequences([f], fmt="csv")
        assert data.samples.shape == (1, 64, 2)

    def test_normalization_chord_to_unit(self, tmp_path):
        f = tmp_path / "e.dat"
        x = np.linspace(2.0, 6.0, 20)
        f.write_text("\n".join(f"{xi:.4f} {math.sin(xi):.4f}" for xi in x) + "\n")
        data = ds.load_point_sequences([f], fmt="dat", normalize=True)
        assert abs(data.samples[0][:, 0].min()) < 1e-6
        assert abs(data.samples[0][:, 0].max() - 1.0) < 1e-6
        assert data.normalization["e.dat"]["scale"] == pytest.approx(4.0)


class TestManifestRoundTrip:
    def test_save_and_load(self, tmp_path):
        data = ds.generate_superformula_dataset(5, seed=3)
        ds.save_dataset(data, tmp_path / "out")
        loaded = ds.load_dataset(tmp_path / "out")
        assert loaded.name == data.name
        assert loaded.provenance == data.provenance
        np.testing.assert_allclose(loaded.samples, data.samples, atol=1e-6)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ds.DatasetError, match="manifest"):
            ds.load_dataset(tmp_path)


class TestWaterline:
    def test_endpoints(self):
        curve = ds.waterline_curve(flat_fraction=0.4, body_width=0.15, tail_width=0.05)
        np.testing.assert_allclose(curve[-1], [1.0, 0.0], atol=1e-9)
        assert curve[0][0] == 0.0
        assert curve[0][1] == pytest.approx(0.05)

    def test_dataset_shape_and_determinism(self):
        a = ds.generate_waterline_dataset(8, seed=2)
        b = ds.generate_waterline_dataset(8, seed=2)
        np.testing.assert_array_equal(a.samples, b.samples)
        assert a.provenance == "synthetic-waterline"
