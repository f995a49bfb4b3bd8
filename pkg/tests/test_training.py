"""Loss oracles, Adam reference checks, training loop determinism, and
checkpoint round trips."""

import numpy as np
import pytest

from curvegan import autodiff as ad
from curvegan import datasets as ds
from curvegan import networks as nn
from curvegan import training as tr

from helpers import finite_difference


def tiny_models(seed=0, constraint="open", steps_points=64):
    gcfg = nn.GeneratorConfig(latent_dim=2, noise_dim=3, degree=5, kumaraswamy_terms=2,
                              hidden=12, deconv_channels=(8, 6, 4), constraint=constraint,
                              total_points=steps_points)
    dcfg = nn.DiscriminatorConfig(latent_dim=2, input_points=steps_points,
                                  conv_depths=(4, 6), hidden=12)
    return nn.build_generator(gcfg, seed=seed), nn.build_discriminator(dcfg, seed=seed + 1)


def toy_dataset(count=8, seed=0):
    return ds.generate_superformula_dataset(count, seed=seed)


class TestGanLosses:
    def test_zero_logits(self):
        l_d, l_g = tr.gan_losses(np.zeros(4), np.zeros(4))
        assert l_d == pytest.approx(-2 * np.log(0.5), rel=1e-12)
        assert l_g == pytest.approx(-np.log(0.5), rel=1e-12)

    def test_perfect_discriminator_limit(self):
        l_d, _ = tr.gan_losses(np.full(4, 50.0), np.full(4, -50.0))
        assert l_d == pytest.approx(0.0, abs=1e-12)

    def test_matches_naive_formula(self):
        rng = np.random.default_rng(81)
        r = rng.normal(size=16) * 3
        f = rng.normal(size=16) * 3
        l_d, l_g = tr.gan_losses(r, f)
        sig = lambda x: 1 / (1 + np.exp(-x))
        naive_ld = -np.mean(np.log(sig(r))) - np.mean(np.log(1 - sig(f)))
        naive_lg = -np.mean(np.log(sig(f)))
        assert l_d == pytest.approx(naive_ld, abs=1e-9)
        assert l_g == pytest.approx(naive_lg, abs=1e-9)


class TestMutualInfo:
    def test_density_at_mean(self):
        c = np.array([[0.3, 0.6]])
        li = tr.mutual_info_lower_bound(c, np.zeros((1, 2)), c)
        assert li == pytest.approx(2 * (-0.5 * np.log(2 * np.pi)), rel=1e-12)

    def test_one_std_from_mean(self):
        mean = np.array([[0.5]])
        c = np.array([[1.5]])
        li = tr.mutual_info_lower_bound(mean, np.zeros((1, 1)), c)
        assert li == pytest.approx(-0.5 * np.log(2 * np.pi) - 0.5, rel=1e-12)

    def test_matches_density_oracle(self):
        rng = np.random.default_rng(82)
        means = rng.uniform(size=(8, 3))
        logvars = rng.uniform(-2, 1, size=(8, 3))
        c = rng.uniform(size=(8, 3))
        li = tr.mutual_info_lower_bound(means, logvars, c)
        var = np.exp(logvars)
        logpdf = -0.5 * np.log(2 * np.pi) - 0.5 * logvars - 0.5 * (c - means) ** 2 / var
        assert li == pytest.approx(logpdf.sum(axis=1).mean(), abs=1e-9)


class TestRegularizers:
    def test_collinear_uniform_spacing(self):
        P = np.array([[[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.5, 0.0]]])
        r1, r2, _, _ = tr.regularizers(P, np.ones((1, 4)), np.ones((1, 2)), np.ones((1, 2)))
        assert r1 == pytest.approx(0.5, abs=1e-9)
        assert r2 == pytest.approx(0.5, abs=1e-9)

    def test_unit_weights(self):
        P = np.zeros((2, 3, 2))
        P[:, :, 0] = [0, 1, 2]
        _, _, r3, _ = tr.regularizers(P, np.ones((2, 3)), np.ones((2, 2)), np.ones((2, 2)))
        assert r3 == pytest.approx(1.0)

    def test_identity_mixture_r4_zero(self):
        P = np.zeros((1, 3, 2))
        P[:, :, 0] = [0, 1, 2]
        _, _, _, r4 = tr.regularizers(P, np.ones((1, 3)), np.ones((1, 4)), np.ones((1, 4)))
        assert r4 == 0.0

    def test_r1_never_exceeds_r2(self):
        rng = np.random.default_rng(83)
        for _ in range(50):
            P = rng.normal(size=(6, 9, 2))
            r1, r2, _, _ = tr.regularizers(P, np.ones((6, 9)), np.ones((6, 2)), np.ones((6, 2)))
            assert r1 <= r2 + 1e-12

    def test_graph_matches_numeric(self):
        gen, _ = tiny_models(seed=84)
        rng = np.random.default_rng(85)
        C, Z = nn.sample_latent(4, 2, 3, rng)
        nodes = tr.build_regularizers(gen.graph, gen.config.degree + 1)
        vals = ad.evaluate_many(list(nodes), {**gen.params, "c": C, "z": Z})
        out = nn.generator_forward_batch(gen, C, Z)
        a = np.concatenate([t[0] for t in out["kumaraswamy"]], axis=1)
        b = np.concatenate([t[1] for t in out["kumaraswamy"]], axis=1)
        expected = tr.regularizers(out["control_points"], out["weights"], a, b)
        np.testing.assert_allclose([float(v) for v in vals], expected, atol=1e-9)


class TestCombinedObjective:
    def test_zero_lambdas(self):
        assert tr.combined_generator_objective(1.7, 5.0, 1, 2, 3, 4, (0, 0, 0, 0, 0)) == 1.7

    def test_arithmetic(self):
        assert tr.combined_generator_objective(1.0, 2.0, 0, 0, 0, 0, (1, 0, 0, 0, 0)) == -1.0

    def test_random_matches_recompute(self):
        rng = np.random.default_rng(86)
        vals = rng.normal(size=6)
        lams = rng.uniform(size=5)
        got = tr.combined_generator_objective(*vals, lams)
        expect = vals[0] - lams[0] * vals[1] + sum(lams[i] * vals[i + 1] for i in range(1, 5))
        assert got == pytest.approx(expect, rel=1e-12)


class TestAdam:
    def test_first_step_magnitude(self):
        params = {"p": np.array(1.0)}
        grads = {"p": np.array(0.1)}
        state = tr.AdamState.for_params(params)
        new, state2 = tr.adam_step(params, grads, state, lr=0.0002)
        assert float(params["p"] - new["p"]) == pytest.approx(0.0002, rel=1e-6)
        assert state2.t == 1

    def test_zero_gradient_no_change(self):
        params = {"p": np.arange(4.0)}
        state = tr.AdamState.for_params(params)
        new, _ = tr.adam_step(params, {"p": np.zeros(4)}, state, lr=0.1)
        np.testing.assert_array_equal(new["p"], params["p"])

    def test_two_steps_match_reference(self):
        lr, b1, b2, eps = 0.01, 0.5, 0.999, 1e-8
        p = np.array([1.0, -2.0])
        g = np.array([0.3, -0.7])
        params = {"p": p.copy()}
        state = tr.AdamState.for_params(params)
        for _ in range(2):
            params, state = tr.adam_step(params, {"p": g}, state, lr, b1, b2, eps)
        # Hand-rolled reference.
        m = np.zeros(2)
        v = np.zeros(2)
        ref = p.copy()
        for t in (1, 2):
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            ref -= lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
        np.testing.assert_allclose(params["p"], ref, atol=1e-12)


class TestTrainingLoop:
    def test_zero_steps_returns_initial_models(self):
        gen, disc = tiny_models(seed=90)
        g0 = {k: v.copy() for k, v in gen.params.items()}
        res = tr.train(toy_dataset(), gen, disc, tr.TrainConfig(steps=0, batch=4, seed=1))
        for k in g0:
            np.testing.assert_array_equal(res.generator.params[k], g0[k])
        assert len(res.history) == 0

    def test_smoke_200_steps_all_finite(self):
        gen, disc = tiny_models(seed=91)
        cfg = tr.TrainConfig(steps=200, batch=4, seed=2, eval_every=20)
        res = tr.train(toy_dataset(), gen, disc, cfg)
        assert len(res.history) == 10
        for rec in res.history.records:
            vals = [rec.l_d, rec.l_g, rec.l_i, rec.r1, rec.r2, rec.r3, rec.r4]
            assert np.all(np.isfinite(vals))

    def test_same_seed_bit_identical_history(self, tmp_path):
        data = toy_dataset()
        runs = []
        for _ in range(2):
            gen, disc = tiny_models(seed=92)
            cfg = tr.TrainConfig(steps=40, batch=4, seed=3, eval_every=10)
            runs.append(tr.train(data, gen, disc, cfg))
        a, b = runs
        for ra, rb in zip(a.history.records, b.history.records):
            assert (ra.step, ra.l_d, ra.l_g, ra.l_i) == (rb.step, rb.l_d, rb.l_g, rb.l_i)
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        tr.export_history(a.history, pa)
        tr.export_history(b.history, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_history_header_format(self, tmp_path):
        gen, disc = tiny_models(seed=93)
        res = tr.train(toy_dataset(), gen, disc, tr.TrainConfig(steps=10, batch=4, seed=4, eval_every=5))
        out = tmp_path / "h.csv"
        tr.export_history(res.history, out)
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "step,L_D,L_G,L_I,R1,R2,R3,R4,seconds"
        assert len(lines) == 3

    def test_nonempty_dataset_required(self):
        gen, disc = tiny_models(seed=94)
        with pytest.raises(tr.TrainingError):
            tr.train(np.zeros((0, 64, 2)), gen, disc, tr.TrainConfig(steps=1, batch=4))

    def test_spot_check_training_gradients(self):
        # FD comparison on a few parameters of both per-step objectives.
        gen, disc = tiny_models(seed=95)
        cfg = tr.TrainConfig(steps=1, batch=3, seed=5)
        graphs = tr._TrainGraphs(gen, disc, cfg)
        rng = np.random.default_rng(96)
        data = toy_dataset().samples[:3]
        C, Z = nn.sample_latent(3, 2, 3, rng)
        fake = ad.evaluate(graphs.g_curve, {**gen.params, "c": C, "z": Z})
        d_bind = {**disc.params, "x_real": data, "x_fake": fake, "c": C}
        d_grads = ad.gradient(graphs.d_total, d_bind, ["d.head.q.w", "d.conv0.k"])
        for name in ("d.head.q.w", "d.conv0.k"):
            fd = finite_difference(graphs.d_total, d_bind, name)
            np.testing.assert_allclose(d_grads[name], fd, rtol=1e-3, atol=1e-7)
        g_bind = {**gen.params, **disc.params, "c": C, "z": Z}
        g_grads = ad.gradient(graphs.g_total, g_bind, ["g.cp.out.k", "g.u.part0.a.w"])
        for name in ("g.cp.out.k", "g.u.part0.a.w"):
            fd = finite_difference(graphs.g_total, g_bind, name)
            np.testing.assert_allclose(g_grads[name], fd, rtol=1e-3, atol=1e-7)

    def test_r3_gradient_step_decreases_weight_magnitude(self):
        gen, _ = tiny_models(seed=97)
        rng = np.random.default_rng(98)
        C, Z = nn.sample_latent(4, 2, 3, rng)
        _, _, r3, _ = tr.build_regularizers(gen.graph, gen.config.degree + 1)
        bindings = {**gen.params, "c": C, "z": Z}
        wrt = [k for k in gen.params if k.startswith(("g.cp", "g.trunk"))]
        before, grads, _ = ad.value_and_grad(r3, bindings, wrt)
        stepped = {k: v - 1e-3 * grads.get(k, 0.0) for k, v in gen.params.items()}
        after = ad.evaluate(r3, {**stepped, "c": C, "z": Z})
        assert float(after) < float(before)


class TestCheckpoints:
    def test_round_trip_bit_exact(self, tmp_path):
        gen, disc = tiny_models(seed=100)
        cfg = tr.TrainConfig(steps=5, batch=4, seed=7)
        res = tr.train(toy_dataset(), gen, disc, cfg)
        path = tmp_path / "ck.npz"
        tr.save_checkpoint(path, res.generator, res.discriminator, cfg,
                           step=res.state.step, trainer_state=res.state)
        ck = tr.load_checkpoint(path)
        for k, v in res.generator.params.items():
            assert ck.generator.params[k].tobytes() == v.tobytes()
        for k, v in res.discriminator.params.items():
            assert ck.discriminator.params[k].tobytes() == v.tobytes()
        assert ck.step == 5
        assert ck.train_config == cfg

    def test_truncated_file_rejected(self, tmp_path):
        gen, disc = tiny_models(seed=101)
        path = tmp_path / "ck.npz"
        tr.save_checkpoint(path, gen, disc)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) // 2])
        with pytest.raises(tr.CheckpointError, match="corrupt"):
            tr.load_checkpoint(path)

    def test_version_mismatch_rejected(self, tmp_path):
        gen, disc = tiny_models(seed=102)
        path = tmp_path / "ck.npz"
        tr.save_checkpoint(path, gen, disc)
        import json

        import numpy as np2

        with np2.load(path, allow_pickle=False) as data:
            arrays = {k: data[k] for k in data.files}
        meta = json.loads(str(arrays["__meta__"]))
        meta["version"] = "other-version"
        arrays["__meta__"] = np2.asarray(json.dumps(meta))
        with open(path, "wb") as fh:
            np2.savez(fh, **arrays)
        with pytest.raises(tr.CheckpointError, match="version"):
            tr.load_checkpoint(path)

    def test_missing_checkpoint(self, tmp_path):
        with pytest.raises(tr.CheckpointError, match="no such"):
            tr.load_checkpoint(tmp_path / "absent.npz")

    def test_resume_equals_uninterrupted(self, tmp_path):
        data = toy_dataset()
        gen_a, disc_a = tiny_models(seed=103)
        full = tr.train(data, gen_a, disc_a, tr.TrainConfig(steps=15, batch=4, seed=9))

        gen_b, disc_b = tiny_models(seed=103)
        first = tr.train(data, gen_b, disc_b, tr.TrainConfig(steps=5, batch=4, seed=9))
        path = tmp_path / "mid.npz"
        tr.save_checkpoint(path, first.generator, first.discriminator,
                           tr.TrainConfig(steps=5, batch=4, seed=9),
                           step=first.state.step, trainer_state=first.state)
        ck = tr.load_checkpoint(path)
        resumed = tr.train(data, ck.generator, ck.discriminator,
                           tr.TrainConfig(steps=10, batch=4, seed=9),
                           resume_state=ck.trainer_state)
        for k, v in full.generator.params.items():
            assert resumed.generator.params[k].tobytes() == v.tobytes(), k
        for k, v in full.discriminator.params.items():
            assert resumed.discriminator.params[k].tobytes() == v.tobytes(), k
