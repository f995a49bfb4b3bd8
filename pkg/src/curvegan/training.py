"""Adversarial training: losses, Bezier-parameter regularizers, Adam, the
alternating update loop, history export, and checkpoint persistence.

The discriminator minimizes the stable log-sigmoid GAN loss minus the weighted
mutual-information bound (its latent-recovery head is trained on fake batches
with known codes).  The generator minimizes the non-saturating loss minus the
same bound plus four regularizers on control-point spread, weights, and
Kumaraswamy shape parameters.
"""

from __future__ import annotations

import json
import math
import time
import zipfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from . import networks as nn

CHECKPOINT_VERSION = "curvegan-checkpoint-1"
HISTORY_HEADER = "step,L_D,L_G,L_I,R1,R2,R3,R4,seconds"


class TrainingError(Exception):
    pass


class CheckpointError(Exception):
    pass


@dataclass
class TrainConfig:
    steps: int = 2000
    batch: int = 32
    lr_d: float = 0.00005
    lr_g: float = 0.0002
    beta1: float = 0.5
    beta2: float = 0.999
    lambda0: float = 1.0  # mutual information
    lambda1: float = 0.2  # mean adjacent control-point distance
    lambda2: float = 0.2  # max adjacent control-point distance
    lambda3: float = 1.0  # weight magnitude
    lambda4: float = 0.1  # Kumaraswamy shapes toward 1
    seed: int = 0
    eval_every: int = 100

    def __post_init__(self):
        if self.batch < 2:
            raise TrainingError("batch size must be at least 2")
        if min(self.lr_d, self.lr_g) < 0:
            raise TrainingError("learning rates must be nonnegative")
        for i in range(5):
            if getattr(self, f"lambda{i}") < 0:
                raise TrainingError("lambda weights must be nonnegative")
        if self.steps < 0:
            raise TrainingError("steps must be nonnegative")
        if self.eval_every < 1:
            raise TrainingError("eval_every must be positive")

    @property
    def lambdas(self):
        return tuple(getattr(self, f"lambda{i}") for i in range(5))


@dataclass
class HistoryRecord:
    step: int
    l_d: float
    l_g: float
    l_i: float
    r1: float
    r2: float
    r3: float
    r4: float
    seconds: float


@dataclass
class TrainHistory:
    records: list = field(default_factory=list)

    def append(self, rec: HistoryRecord):
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def total_seconds(self) -> float:
        return self.records[-1].seconds if self.records else 0.0


def export_history(history: TrainHistory, path, timing: bool = False) -> None:
    """Write the CSV export.  The seconds column is zeroed unless ``timing`` is
    set, keeping same-seed runs byte-identical (wall time is environmental)."""
    lines = [HISTORY_HEADER]
    for r in history.records:
        secs = repr(r.seconds) if timing else "0.000"
        vals = [str(r.step)] + [repr(v) for v in (r.l_d, r.l_g, r.l_i, r.r1, r.r2, r.r3, r.r4)]
        lines.append(",".join(vals + [secs]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Loss graph builders


def gan_loss_nodes(d_real_logits: ad.Node, d_fake_logits: ad.Node):
    """Stable log-sigmoid GAN losses: log sigmoid(x) == -softplus(-x)."""
    l_d = ad.mean(ad.softplus(-d_real_logits)) + ad.mean(ad.softplus(d_fake_logits))
    l_g = ad.mean(ad.softplus(-d_fake_logits))
    return l_d, l_g


def mutual_info_node(q_means: ad.Node, q_logvars: ad.Node, c_true: ad.Node) -> ad.Node:
    """Variational lower bound: mean Gaussian log-density of the true codes
    (the latent entropy term is constant and dropped)."""
    diff = ad.subtract(c_true, q_means)
    quad = ad.divide(ad.multiply(diff, diff), ad.exp(q_logvars))
    per_dim = ad.constant(-0.5 * math.log(2 * math.pi)) - ad.multiply(
        ad.constant(0.5), q_logvars
    ) - ad.multiply(ad.constant(0.5), quad)
    return ad.mean(ad.sum_(per_dim, axis=1))


def build_regularizers(gen_graph: nn.GeneratorGraph, n_control: int):
    """R1/R2 on adjacent control-point distances, R3 on weight magnitude,
    R4 pulling Kumaraswamy shape parameters toward 1."""
    if gen_graph.control_points is None:
        zero = ad.constant(0.0)
        return zero, zero, zero, zero
    P, w = gen_graph.control_points, gen_graph.weights
    head = ad.narrow(P, axis=1, start=0, length=n_control - 1)
    tail = ad.narrow(P, axis=1, start=1, length=n_control - 1)
    diff = ad.subtract(tail, head)
    dist = ad.sqrt(ad.sum_(ad.multiply(diff, diff), axis=2))  # [B, n]
    r1 = ad.mean(dist)
    r2 = ad.mean(ad.max_reduce(dist, axis=1))
    r3 = ad.mean(ad.absolute(w))
    shape_terms = []
    for a, b, _ in gen_graph.kumaraswamy:
        one = ad.constant(1.0)
        shape_terms.append(ad.absolute(ad.subtract(a, one)) + ad.absolute(ad.subtract(b, one)))
    r4 = ad.mean(ad.concatenate(shape_terms, axis=1)) if shape_terms else ad.constant(0.0)
    return r1, r2, r3, r4


def combined_objective_node(l_g, l_i, r1, r2, r3, r4, lambdas):
    l0, l1, l2, l3, l4 = lambdas
    out = l_g - ad.multiply(ad.constant(l0), l_i)
    for lam, reg in ((l1, r1), (l2, r2), (l3, r3), (l4, r4)):
        out = out + ad.multiply(ad.constant(lam), reg)
    return out


# Numeric wrappers evaluating the same graphs (the spec-level operation API).


def gan_losses(d_real_logits, d_fake_logits):
    r, f = ad.input_node("_real"), ad.input_node("_fake")
    ld, lg = gan_loss_nodes(r, f)
    vals = ad.evaluate_many([ld, lg], {"_real": d_real_logits, "_fake": d_fake_logits})
    return float(vals[0]), float(vals[1])


def mutual_info_lower_bound(q_means, q_logvars, c_true) -> float:
    m, lv, c = ad.input_node("_m"), ad.input_node("_lv"), ad.input_node("_c")
    node = mutual_info_node(m, lv, c)
    return float(ad.evaluate(node, {"_m": q_means, "_lv": q_logvars, "_c": c_true}))


def regularizers(P_batch, w_batch, a_batch, b_batch):
    """Numeric R1..R4 for batches of generator outputs."""
    P = np.asarray(P_batch, dtype=np.float64)
    w = np.asarray(w_batch, dtype=np.float64)
    a = np.asarray(a_batch, dtype=np.float64)
    b = np.asarray(b_batch, dtype=np.float64)
    dists = np.linalg.norm(np.diff(P, axis=1), axis=2)
    r1 = float(dists.mean())
    r2 = float(dists.max(axis=1).mean())
    r3 = float(np.abs(w).mean())
    r4 = float((np.abs(a - 1.0) + np.abs(b - 1.0)).mean())
    return r1, r2, r3, r4


def combined_generator_objective(l_g, l_i, r1, r2, r3, r4, lambdas) -> float:
    l0, l1, l2, l3, l4 = lambdas
    return float(l_g - l0 * l_i + l1 * r1 + l2 * r2 + l3 * r3 + l4 * r4)


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0

    @classmethod
    def for_params(cls, params: dict) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
            t=0,
        )


def adam_step(params: dict, grads: dict, state: AdamState, lr: float,
              beta1: float = 0.5, beta2: float = 0.999, eps: float = 1e-8):
    """One bias-corrected Adam update; returns (new params, new state)."""
    t = state.t + 1
    new_params, new_m, new_v = {}, {}, {}
    for key, p in params.items():
        g = grads[key]
        if g.shape != p.shape:
            raise TrainingError(f"gradient shape {g.shape} != param shape {p.shape} for {key}")
        m = beta1 * state.m[key] + (1 - beta1) * g
        v = beta2 * state.v[key] + (1 - beta2) * g * g
        m_hat = m / (1 - beta1**t)
        v_hat = v / (1 - beta2**t)
        new_params[key] = p - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[key], new_v[key] = m, v
    return new_params, AdamState(m=new_m, v=new_v, t=t)


# ---------------------------------------------------------------------------
# Training loop


@dataclass
class TrainerState:
    step: int
    adam_g: AdamState
    adam_d: AdamState
    rng_state: dict


@dataclass
class TrainResult:
    generator: nn.GeneratorModel
    discriminator: nn.DiscriminatorModel
    history: TrainHistory
    checkpoints: list
    state: TrainerState


class _TrainGraphs:
    """Static loss graphs shared across steps; bindings change per step."""

    def __init__(self, gen: nn.GeneratorModel, disc: nn.DiscriminatorModel, cfg: TrainConfig):
        d_cfg = disc.config
        d_real = nn._build_discriminator_graph(d_cfg, None, "x_real")
        d_fake = nn._build_discriminator_graph(d_cfg, None, "x_fake")
        c_in = ad.input_node("c")
        self.d_ld, _ = gan_loss_nodes(d_real.logits, d_fake.logits)
        self.d_li = mutual_info_node(d_fake.q_means, d_fake.q_logvars, c_in)
        self.d_total = self.d_ld - ad.multiply(ad.constant(cfg.lambda0), self.d_li)

        g_graph = gen.graph
        d_on_fake = nn.discriminator_on(d_cfg, g_graph.curve)
        _, self.g_lg = gan_loss_nodes(ad.constant(0.0), d_on_fake.logits)
        self.g_li = mutual_info_node(d_on_fake.q_means, d_on_fake.q_logvars, c_in)
        self.g_r = build_regularizers(g_graph, gen.config.degree + 1)
        self.g_total = combined_objective_node(self.g_lg, self.g_li, *self.g_r, cfg.lambdas)
        self.g_curve = g_graph.curve


def train(dataset, gen: nn.GeneratorModel, disc: nn.DiscriminatorModel, cfg: TrainConfig,
          *, resume_state: TrainerState | None = None, checkpoint_dir=None,
          checkpoint_every: int | None = None, clock=time.perf_counter) -> TrainResult:
    """Alternate one discriminator and one generator Adam step per iteration."""
    samples = np.asarray(dataset.samples if hasattr(dataset, "samples") else dataset,
                         dtype=np.float64)
    if samples.ndim != 3 or len(samples) == 0:
        raise TrainingError("dataset must be a nonempty [count, points, 2] array")

    graphs = _TrainGraphs(gen, disc, cfg)
    g_params, d_params = dict(gen.params), dict(disc.params)
    g_names, d_names = sorted(g_params), sorted(d_params)

    if resume_state is None:
        rng = np.random.default_rng(cfg.seed)
        adam_g = AdamState.for_params(g_params)
        adam_d = AdamState.for_params(d_params)
        start_step = 0
    else:
        rng = np.random.default_rng()
        rng.bit_generator.state = resume_state.rng_state
        adam_g, adam_d = resume_state.adam_g, resume_state.adam_d
        start_step = resume_state.step

    history = TrainHistory()
    checkpoints = []
    t0 = clock()
    latent_dim, noise_dim = gen.config.latent_dim, gen.config.noise_dim

    for step in range(start_step, start_step + cfg.steps):
        idx = rng.integers(0, len(samples), size=cfg.batch)
        x_real = samples[idx]
        c_d, z_d = nn.sample_latent(cfg.batch, latent_dim, noise_dim, rng)
        x_fake = ad.evaluate(graphs.g_curve, {**g_params, "c": c_d, "z": z_d})

        d_bind = {**d_params, "x_real": x_real, "x_fake": x_fake, "c": c_d}
        d_val, d_grads, (d_ld,) = ad.value_and_grad(
            graphs.d_total, d_bind, d_names, aux=[graphs.d_ld]
        )
        d_params, adam_d = adam_step(d_params, d_grads, adam_d, cfg.lr_d, cfg.beta1, cfg.beta2)

        c_g, z_g = nn.sample_latent(cfg.batch, latent_dim, noise_dim, rng)
        g_bind = {**g_params, **d_params, "c": c_g, "z": z_g}
        aux_nodes = [graphs.g_lg, graphs.g_li, *graphs.g_r]
        g_val, g_grads, aux = ad.value_and_grad(graphs.g_total, g_bind, g_names, aux=aux_nodes)
        g_params, adam_g = adam_step(g_params, g_grads, adam_g, cfg.lr_g, cfg.beta1, cfg.beta2)

        l_g, l_i, r1, r2, r3, r4 = (float(v) for v in aux)
        values = (float(d_ld), l_g, l_i, r1, r2, r3, r4)
        if not all(np.isfinite(values)):
            raise TrainingError(f"non-finite loss at step {step}: {values}")

        if (step + 1) % cfg.eval_every == 0:
            history.append(HistoryRecord(step + 1, *values, seconds=clock() - t0))
        if checkpoint_dir is not None and checkpoint_every and (step + 1) % checkpoint_every == 0:
            state = TrainerState(step + 1, adam_g, adam_d, rng.bit_generator.state)
            path = Path(checkpoint_dir) / f"checkpoint_{step + 1:06d}.npz"
            _write_checkpoint(path, gen.config, g_params, disc.config, d_params, None, step + 1, state)
            checkpoints.append(path)

    gen = nn.GeneratorModel(config=gen.config, params=g_params, graph=gen.graph)
    disc = nn.DiscriminatorModel(config=disc.config, params=d_params, graph=disc.graph)
    final_state = TrainerState(start_step + cfg.steps, adam_g, adam_d, rng.bit_generator.state)
    return TrainResult(gen, disc, history, checkpoints, final_state)


# ---------------------------------------------------------------------------
# Checkpoints


def _encode_meta(gen_cfg, disc_cfg, train_cfg, step, trainer_state):
    meta = {
        "version": CHECKPOINT_VERSION,
        "step": step,
        "generator": asdict(gen_cfg),
        "discriminator": asdict(disc_cfg),
        "train": asdict(train_cfg) if train_cfg is not None else None,
        "rng_state": None,
        "adam_t": None,
    }
    if trainer_state is not None:
        meta["rng_state"] = json.loads(json.dumps(trainer_state.rng_state, default=int))
        meta["adam_t"] = {"g": trainer_state.adam_g.t, "d": trainer_state.adam_d.t}
    return json.dumps(meta)


def _write_checkpoint(path, gen_cfg, g_params, disc_cfg, d_params, train_cfg, step, trainer_state):
    arrays = {"__meta__": np.asarray(_encode_meta(gen_cfg, disc_cfg, train_cfg, step, trainer_state))}
    for k, v in g_params.items():
        arrays[f"param/{k}"] = v
    for k, v in d_params.items():
        arrays[f"param/{k}"] = v
    if trainer_state is not None:
        for tag, st in (("g", trainer_state.adam_g), ("d", trainer_state.adam_d)):
            for k, v in st.m.items():
                arrays[f"adam/{tag}/m/{k}"] = v
            for k, v in st.v.items():
                arrays[f"adam/{tag}/v/{k}"] = v
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def save_checkpoint(path, gen: nn.GeneratorModel, disc: nn.DiscriminatorModel,
                    train_cfg: TrainConfig | None = None, step: int = 0,
                    trainer_state: TrainerState | None = None) -> Path:
    """Self-describing container: version tag, config echo, named float64 arrays."""
    _write_checkpoint(Path(path), gen.config, gen.params, disc.config, disc.params,
                      train_cfg, step, trainer_state)
    return Path(path)


@dataclass
class Checkpoint:
    generator: nn.GeneratorModel
    discriminator: nn.DiscriminatorModel
    train_config: TrainConfig | None
    step: int
    trainer_state: TrainerState | None


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"no such checkpoint: {path}")
    try:
        with np.load(path, allow_pickle=False) as data:
            if "__meta__" not in data:
                raise CheckpointError(f"{path}: missing metadata (not a checkpoint?)")
            meta = json.loads(str(data["__meta__"]))
            arrays = {k: data[k] for k in data.files if k != "__meta__"}
    except (zipfile.BadZipFile, ValueError, OSError, KeyError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint ({exc})") from None
    if meta.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"{path}: version {meta.get('version')!r} unsupported (need {CHECKPOINT_VERSION})"
        )

    gen_cfg = _generator_config_from(meta["generator"])
    disc_cfg = nn.DiscriminatorConfig(**{**meta["discriminator"],
                                         "conv_depths": tuple(meta["discriminator"]["conv_depths"])})
    g_params = {k[len("param/"):]: arrays[k] for k in arrays if k.startswith("param/g.")}
    d_params = {k[len("param/"):]: arrays[k] for k in arrays if k.startswith("param/d.")}
    gen = nn.GeneratorModel(config=gen_cfg, params=g_params)
    disc = nn.DiscriminatorModel(config=disc_cfg, params=d_params)
    _verify_params(gen_cfg, g_params, disc_cfg, d_params, path)

    train_cfg = TrainConfig(**meta["train"]) if meta.get("train") else None
    trainer_state = None
    if meta.get("rng_state") is not None:
        adam = {}
        for tag, names in (("g", g_params), ("d", d_params)):
            m = {k: arrays[f"adam/{tag}/m/{k}"] for k in names}
            v = {k: arrays[f"adam/{tag}/v/{k}"] for k in names}
            adam[tag] = AdamState(m=m, v=v, t=meta["adam_t"][tag])
        rng_state = meta["rng_state"]
        trainer_state = TrainerState(meta["step"], adam["g"], adam["d"], rng_state)
    return Checkpoint(gen, disc, train_cfg, meta["step"], trainer_state)


def _generator_config_from(raw: dict) -> nn.GeneratorConfig:
    raw = dict(raw)
    raw["pinned_point"] = tuple(raw["pinned_point"])
    raw["deconv_channels"] = tuple(raw["deconv_channels"])
    return nn.GeneratorConfig(**raw)


def _verify_params(gen_cfg, g_params, disc_cfg, d_params, path):
    expected_g = set(nn.build_generator(gen_cfg, seed=0).params)
    expected_d = set(nn.build_discriminator(disc_cfg, seed=0).params)
    missing = (expected_g - set(g_params)) | (expected_d - set(d_params))
    if missing:
        raise CheckpointError(f"{path}: missing tensors: {sorted(missing)[:4]}")
