"""Generator and discriminator models.

The generator maps (latent code, noise) through two paths: fully connected
plus transposed-convolution layers emit control points and weights, while
fully connected heads emit Kumaraswamy mixture parameters that warp uniform
sampling locations.  A rational Bezier layer turns both into a fixed-length
point sequence, honoring closed / pinned-endpoint / symmetry constraints
inside the graph so they hold exactly for every sample.

The discriminator applies strided 1-D convolutions (kernel 5, stride 2) and
shares its trunk between the real/fake logit head and the latent-code
recovery head.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import bezier as bz

LEAKY_ALPHA = 0.2
# Keeps generated weights clear of the rational denominator threshold even if
# training drives the softplus argument far negative.
WEIGHT_FLOOR = 1e-6
# Shift so the Kumaraswamy shape parameters equal exactly 1 at raw == 0.
_KUMARASWAMY_SHIFT = 1.0 - math.log(2.0)


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    latent_dim: int = 2
    noise_dim: int = 10
    degree: int = 15
    kumaraswamy_terms: int = 4  # number of CDFs in the mixture (M+1)
    symmetry_mode: str = "none"  # none | axis-x | axis-y | rotational
    symmetry_parts: int = 1
    constraint: str = "open"  # open | closed | pinned-last
    pinned_point: tuple = (1.0, 0.0)
    total_points: int = 64
    hidden: int = 128
    deconv_channels: tuple = (32, 16, 8)
    kernel_size: int = 5
    family: str = "bezier"  # bezier | direct (matched-size ablation baseline)

    def __post_init__(self):
        if self.constraint not in ("open", "closed", "pinned-last"):
            raise ModelError(f"unknown constraint {self.constraint!r}")
        if self.family not in ("bezier", "direct"):
            raise ModelError(f"unknown generator family {self.family!r}")
        if self.symmetry_mode != "none":
            if self.constraint != "open":
                raise ModelError("symmetry modes define their own endpoint handling; use constraint='open'")
            if self.family != "bezier":
                raise ModelError("symmetry requires the bezier family")
            if self.degree < 2:
                raise ModelError("symmetric assembly needs degree >= 2")
        if self.family == "bezier" and not 1 <= self.degree <= bz.MAX_DEGREE:
            raise ModelError(f"degree must be in [1, {bz.MAX_DEGREE}]")

    def symmetry(self) -> bz.SymmetrySpec:
        if self.symmetry_mode == "none":
            return bz.SymmetrySpec()
        if self.symmetry_mode in ("axis-x", "axis-y"):
            return bz.SymmetrySpec.axis(self.symmetry_mode[-1])
        return bz.SymmetrySpec.rotational(self.symmetry_parts)


@dataclass(frozen=True)
class DiscriminatorConfig:
    latent_dim: int = 2
    input_points: int = 64
    conv_depths: tuple = (16, 32)
    kernel_size: int = 5  # fixed by the data representation contract
    stride: int = 2
    hidden: int = 128
    logvar_min: float = -7.0
    logvar_max: float = 2.0


# ---------------------------------------------------------------------------
# Parameter creation + graph building helpers


class _ParamBank:
    """Creates named parameters with layer-input scaling graphs.

    Inputs to each linear map are scaled by 1/sqrt(fan_in) against unit-normal
    weights; this replaces batch normalization at desk scale.
    """

    def __init__(self, rng: np.random.Generator, prefix: str):
        self.rng = rng
        self.prefix = prefix
        self.params: dict[str, np.ndarray] = {}

    def _make(self, name, shape, zero=False):
        full = f"{self.prefix}.{name}"
        self.params[full] = np.zeros(shape) if zero else self.rng.standard_normal(shape)
        return ad.input_node(full)

    def dense(self, x, name, fin, fout, zero=False):
        w = self._make(f"{name}.w", (fin, fout), zero=zero)
        b = self._make(f"{name}.b", (fout,), zero=True)
        scaled = ad.multiply(x, ad.constant(1.0 / math.sqrt(fin)))
        return ad.matmul(scaled, w) + b

    def conv(self, x, name, ksize, cin, cout, stride):
        k = self._make(f"{name}.k", (ksize, cin, cout))
        scaled = ad.multiply(x, ad.constant(1.0 / math.sqrt(ksize * cin)))
        return ad.conv1d(scaled, k, stride=stride)

    def deconv(self, x, name, ksize, cin, cout, stride):
        k = self._make(f"{name}.k", (ksize, cin, cout))
        scaled = ad.multiply(x, ad.constant(1.0 / math.sqrt(ksize * cin)))
        return ad.conv1d_transpose(scaled, k, stride=stride)


def _lrelu(x):
    return ad.leaky_relu(x, alpha=LEAKY_ALPHA)


# ---------------------------------------------------------------------------
# Generator


@dataclass
class GeneratorGraph:
    curve: ad.Node  # [B, total_points, 2]
    control_points: ad.Node | None  # constrained prim P, [B, n+1, 2]
    weights: ad.Node | None  # [B, n+1]
    u_parts: list  # per-part u nodes, each [B, m_p+1]
    kumaraswamy: list  # per-part (a, b, c) node triples


@dataclass
class GeneratorModel:
    config: GeneratorConfig
    params: dict[str, np.ndarray]
    graph: GeneratorGraph = field(repr=False, default=None)

    def __post_init__(self):
        if self.graph is None:
            self.graph = _build_generator_graph(self.config)

    @property
    def param_names(self):
        return sorted(self.params)


def build_generator(config: GeneratorConfig, seed: int = 0) -> GeneratorModel:
    rng = np.random.default_rng(seed)
    bank = _ParamBank(rng, "g")
    graph = _build_generator_graph(config, bank)
    return GeneratorModel(config=config, params=bank.params, graph=graph)


def _build_generator_graph(config: GeneratorConfig, bank: _ParamBank | None = None) -> GeneratorGraph:
    # Building without a bank reuses existing parameter names (checkpoint load).
    if bank is None:
        bank = _ParamBank(np.random.default_rng(0), "g")
        graph = _build_generator_graph(config, bank)
        return graph

    c = ad.input_node("c")
    z = ad.input_node("z")
    h = _lrelu(bank.dense(ad.concatenate([c, z], axis=1), "trunk",
                          config.latent_dim + config.noise_dim, config.hidden))

    if config.family == "direct":
        return _build_direct_path(config, bank, h)

    n_cp = config.degree + 1
    c0, c1, c2 = config.deconv_channels
    l0 = -(-n_cp // 4)  # two stride-2 deconvolutions upsample by 4

    # Control point / weight path.
    hp = _lrelu(bank.dense(h, "cp.fc1", config.hidden, config.hidden))
    hp = _lrelu(bank.dense(hp, "cp.fc2", config.hidden, l0 * c0))
    grid = ad.reshape(hp, (-1, l0, c0))
    grid = _lrelu(bank.deconv(grid, "cp.deconv1", config.kernel_size, c0, c1, 2))
    grid = _lrelu(bank.deconv(grid, "cp.deconv2", config.kernel_size, c1, c2, 2))
    grid = bank.conv(grid, "cp.out", config.kernel_size, c2, 3, 1)
    grid = ad.narrow(grid, axis=1, start=0, length=n_cp)
    p_raw = ad.narrow(grid, axis=2, start=0, length=2)
    w_raw = ad.reshape(ad.narrow(grid, axis=2, start=2, length=1), (-1, n_cp))
    weights = ad.softplus(w_raw) + ad.constant(WEIGHT_FLOOR)

    control_points = _apply_endpoint_constraints(p_raw, config)

    # Parameter variable path: one Kumaraswamy head per curve part.  In axis
    # modes the mirrored part reuses the prim's locations reflected through
    # u -> 1-u so that point i and point (count-1-i) mirror exactly.
    spec = config.symmetry()
    counts = bz.split_point_counts(config.total_points, spec.parts)
    mirrored = spec.mode in ("axis-x", "axis-y")
    hu = _lrelu(bank.dense(h, "u.fc", config.hidden, config.hidden))
    u_parts, mixes = [], []
    for part, count in enumerate(counts):
        if mirrored and part == 1:
            flip = ad.constant(np.eye(counts[0])[::-1].copy())
            rev = ad.reshape(ad.matmul(flip, ad.reshape(u_parts[0], (-1, counts[0], 1))),
                             (-1, counts[0]))
            u_parts.append(ad.constant(1.0) - rev)
            continue
        terms = config.kumaraswamy_terms
        raw_a = bank.dense(hu, f"u.part{part}.a", config.hidden, terms)
        raw_b = bank.dense(hu, f"u.part{part}.b", config.hidden, terms)
        raw_c = bank.dense(hu, f"u.part{part}.c", config.hidden, terms)
        a = ad.softplus(raw_a) + ad.constant(_KUMARASWAMY_SHIFT)
        b = ad.softplus(raw_b) + ad.constant(_KUMARASWAMY_SHIFT)
        cmix = ad.softmax(raw_c, axis=-1)
        u = bz.kumaraswamy_node(a, b, cmix, bz.uniform_grid(count))
        u_parts.append(u)
        mixes.append((a, b, cmix))

    curve = _assemble_curve_node(control_points, weights, u_parts, spec, config)
    return GeneratorGraph(curve=curve, control_points=control_points,
                          weights=weights, u_parts=u_parts, kumaraswamy=mixes)


def _build_direct_path(config: GeneratorConfig, bank: _ParamBank, h: ad.Node) -> GeneratorGraph:
    """Matched-size baseline that emits the 64 points directly (no Bezier layer)."""
    c0, c1, c2 = config.deconv_channels
    l0 = config.total_points // 4
    hp = _lrelu(bank.dense(h, "cp.fc1", config.hidden, config.hidden))
    hp = _lrelu(bank.dense(hp, "cp.fc2", config.hidden, l0 * c0))
    grid = ad.reshape(hp, (-1, l0, c0))
    grid = _lrelu(bank.deconv(grid, "cp.deconv1", config.kernel_size, c0, c1, 2))
    grid = _lrelu(bank.deconv(grid, "cp.deconv2", config.kernel_size, c1, c2, 2))
    curve = bank.conv(grid, "cp.out", config.kernel_size, c2, 2, 1)
    return GeneratorGraph(curve=curve, control_points=None, weights=None,
                          u_parts=[], kumaraswamy=[])


def _apply_endpoint_constraints(p_raw: ad.Node, config: GeneratorConfig) -> ad.Node:
    n_cp = config.degree + 1
    head = ad.narrow(p_raw, axis=1, start=0, length=n_cp - 1)
    first = ad.narrow(p_raw, axis=1, start=0, length=1)
    last = ad.narrow(p_raw, axis=1, start=n_cp - 1, length=1)

    if config.symmetry_mode in ("axis-x", "axis-y"):
        # Both prim endpoints are projected onto the axis so the mirrored part
        # joins C0-exactly and the assembled outline closes.
        mask = ad.constant([1.0, 0.0] if config.symmetry_mode == "axis-x" else [0.0, 1.0])
        middle = ad.narrow(p_raw, axis=1, start=1, length=n_cp - 2)
        return ad.concatenate([ad.multiply(first, mask), middle, ad.multiply(last, mask)], axis=1)
    if config.symmetry_mode == "rotational":
        # Tying the last control point to the rotated first makes every joint
        # between consecutive parts exact and closes the full figure.
        rot = ad.constant(bz.rotation_matrix(config.symmetry().theta))
        return ad.concatenate([head, ad.matmul(first, rot)], axis=1)
    if config.constraint == "closed":
        return ad.concatenate([head, first], axis=1)
    if config.constraint == "pinned-last":
        pinned = ad.multiply(last, ad.constant(0.0)) + ad.constant(np.asarray(config.pinned_point))
        return ad.concatenate([head, pinned], axis=1)
    return p_raw


def _assemble_curve_node(P: ad.Node, w: ad.Node, u_parts, spec: bz.SymmetrySpec,
                         config: GeneratorConfig) -> ad.Node:
    if spec.mode == "none":
        return bz.bezier_sample_node(P, w, u_parts[0])
    n_cp = config.degree + 1
    pieces = []
    if spec.mode in ("axis-x", "axis-y"):
        q = ad.constant(np.eye(n_cp)[::-1].copy())
        s = ad.constant(bz.mirror_matrix(spec.mode[-1]))
        p2 = ad.matmul(ad.matmul(q, P), s)
        w2 = ad.reshape(ad.matmul(q, ad.reshape(w, (-1, n_cp, 1))), (-1, n_cp))
        pieces = [bz.bezier_sample_node(P, w, u_parts[0]),
                  bz.bezier_sample_node(p2, w2, u_parts[1])]
    else:
        for part in range(spec.parts):
            rot = ad.constant(bz.rotation_matrix(part * spec.theta))
            pieces.append(bz.bezier_sample_node(ad.matmul(P, rot), w, u_parts[part]))
    return ad.concatenate(pieces, axis=1)


@dataclass
class GeneratorOutput:
    curve: np.ndarray  # [total_points, 2] (or [B, ...] for batches)
    params: bz.BezierParams | None
    mixtures: list  # KumaraswamyMixture per part
    part_u: list  # u vector per part


def generator_forward(model: GeneratorModel, c, z) -> GeneratorOutput:
    """Run the generator on one latent/noise pair."""
    c = np.atleast_2d(np.asarray(c, dtype=np.float64))
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    if c.shape[1] != model.config.latent_dim:
        raise ModelError(f"latent code must have {model.config.latent_dim} dimensions, got {c.shape[1]}")
    if z.shape[1] != model.config.noise_dim:
        raise ModelError(f"noise must have {model.config.noise_dim} dimensions, got {z.shape[1]}")
    out = generator_forward_batch(model, c, z)
    if model.config.family == "direct":
        return GeneratorOutput(curve=out["curve"][0], params=None, mixtures=[], part_u=[])
    mixes = [
        bz.KumaraswamyMixture(a=a[0], b=b[0], c=cm[0]) for a, b, cm in out["kumaraswamy"]
    ]
    params = bz.BezierParams(P=out["control_points"][0], w=out["weights"][0], u=out["u_parts"][0][0])
    return GeneratorOutput(
        curve=out["curve"][0], params=params, mixtures=mixes,
        part_u=[u[0] for u in out["u_parts"]],
    )


def generator_forward_batch(model: GeneratorModel, C, Z) -> dict:
    """Vectorized forward over a batch; returns raw arrays keyed by role."""
    bindings = {**model.params, "c": C, "z": Z}
    g = model.graph
    roots = [g.curve]
    if model.config.family == "bezier":
        roots += [g.control_points, g.weights, *g.u_parts]
        for a, b, cm in g.kumaraswamy:
            roots += [a, b, cm]
    values = ad.evaluate_many(roots, bindings)
    out = {"curve": values[0]}
    if model.config.family == "bezier":
        out["control_points"] = values[1]
        out["weights"] = values[2]
        k = 3 + len(g.u_parts)
        out["u_parts"] = values[3:k]
        out["kumaraswamy"] = [tuple(values[k + 3 * i:k + 3 * i + 3]) for i in range(len(g.kumaraswamy))]
    return out


# ---------------------------------------------------------------------------
# Discriminator


@dataclass
class DiscriminatorGraph:
    logits: ad.Node  # [B]
    q_means: ad.Node  # [B, latent_dim]
    q_logvars: ad.Node  # [B, latent_dim]
    x_name: str


@dataclass
class DiscriminatorModel:
    config: DiscriminatorConfig
    params: dict[str, np.ndarray]
    graph: DiscriminatorGraph = field(repr=False, default=None)

    def __post_init__(self):
        if self.graph is None:
            self.graph = _build_discriminator_graph(self.config)

    @property
    def param_names(self):
        return sorted(self.params)


def build_discriminator(config: DiscriminatorConfig, seed: int = 0) -> DiscriminatorModel:
    rng = np.random.default_rng(seed)
    bank = _ParamBank(rng, "d")
    graph = _build_discriminator_graph(config, bank, input_name="x")
    return DiscriminatorModel(config=config, params=bank.params, graph=graph)


def _build_discriminator_graph(config: DiscriminatorConfig, bank: _ParamBank | None = None,
                               input_name: str = "x") -> DiscriminatorGraph:
    graph = discriminator_on(config, ad.input_node(input_name), bank)
    graph.x_name = input_name
    return graph


def discriminator_on(config: DiscriminatorConfig, x: ad.Node,
                     bank: _ParamBank | None = None) -> DiscriminatorGraph:
    """Apply the discriminator (by parameter name) to an arbitrary graph node,
    e.g. directly to the generator's output for end-to-end training."""
    if bank is None:
        bank = _ParamBank(np.random.default_rng(0), "d")
    h = x
    length, cin = config.input_points, 2
    for i, depth in enumerate(config.conv_depths):
        h = _lrelu(bank.conv(h, f"conv{i}", config.kernel_size, cin, depth, config.stride))
        length = -(-length // config.stride)
        cin = depth
    flat = ad.reshape(h, (-1, length * cin))
    feat = _lrelu(bank.dense(flat, "fc", length * cin, config.hidden))
    logits = ad.reshape(bank.dense(feat, "head.src", config.hidden, 1), (-1,))
    q_raw = bank.dense(feat, "head.q", config.hidden, 2 * config.latent_dim)
    q_means = ad.sigmoid(ad.narrow(q_raw, axis=1, start=0, length=config.latent_dim))
    lv_raw = ad.narrow(q_raw, axis=1, start=config.latent_dim, length=config.latent_dim)
    span = config.logvar_max - config.logvar_min
    q_logvars = ad.constant(config.logvar_min) + ad.multiply(ad.sigmoid(lv_raw), ad.constant(span))
    return DiscriminatorGraph(logits=logits, q_means=q_means, q_logvars=q_logvars, x_name="")


def discriminator_forward(model: DiscriminatorModel, x) -> tuple:
    """Logits plus latent-recovery means/log-variances for a batch of curves."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    if x.shape[1:] != (model.config.input_points, 2):
        raise ModelError(
            f"expected curves of shape [{model.config.input_points}, 2], got {x.shape[1:]}"
        )
    bindings = {**model.params, model.graph.x_name: x}
    logits, means, logvars = ad.evaluate_many(
        [model.graph.logits, model.graph.q_means, model.graph.q_logvars], bindings
    )
    return logits, means, logvars


# ---------------------------------------------------------------------------
# Latent sampling


def sample_latent(batch: int, latent_dim: int, noise_dim: int, rng: np.random.Generator):
    """Uniform latent codes in [0,1] and standard normal noise."""
    C = rng.uniform(0.0, 1.0, size=(batch, latent_dim))
    Z = rng.standard_normal(size=(batch, noise_dim))
    return C, Z
