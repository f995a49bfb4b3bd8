"""Closed-form rational Bezier curve math and its differentiable layers.

Provides Bernstein bases stable up to degree 63, sampling of rational Bezier
curves (registered as an autodiff primitive with analytic adjoints for control
points, weights, and parameter locations), the Kumaraswamy CDF mixture that
warps uniform sampling locations, mirror/rotation operators for building
symmetric curves from a single prim segment, and an independent de Casteljau
evaluator used as a cross-check oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import autodiff as ad

MAX_DEGREE = 63
DENOMINATOR_EPS = 1e-12


class GeometryError(Exception):
    pass


class DegenerateWeightError(GeometryError):
    """Rational denominator fell below the representable threshold."""


class PointCountError(GeometryError):
    """Assembled curve length disagrees with the dataset representation."""


# ---------------------------------------------------------------------------
# Domain types


@dataclass
class BezierParams:
    """Control points P ((n+1)x2), positive weights w (n+1), locations u (m+1)."""

    P: np.ndarray
    w: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=np.float64)
        self.w = np.asarray(self.w, dtype=np.float64)
        self.u = np.asarray(self.u, dtype=np.float64)
        if self.P.ndim != 2 or self.P.shape[1] != 2:
            raise GeometryError(f"P must be (n+1)x2, got {self.P.shape}")
        if self.P.shape[0] - 1 > MAX_DEGREE:
            raise GeometryError(f"degree {self.P.shape[0] - 1} exceeds {MAX_DEGREE}")
        if self.w.shape != (self.P.shape[0],):
            raise GeometryError(f"w must have {self.P.shape[0]} entries, got {self.w.shape}")
        if np.any(self.w <= 0):
            raise GeometryError("weights must be strictly positive")
        if self.u.ndim != 1:
            raise GeometryError("u must be a vector")
        if abs(self.u[0]) > 1e-12 or abs(self.u[-1] - 1.0) > 1e-12:
            raise GeometryError("u must span [0, 1]")
        if np.any(np.diff(self.u) < 0):
            raise GeometryError("u must be nondecreasing")

    @property
    def degree(self) -> int:
        return self.P.shape[0] - 1


@dataclass
class KumaraswamyMixture:
    """Mixture of Kumaraswamy CDFs: shapes a, b > 0 and weights c summing to 1."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        self.c = np.asarray(self.c, dtype=np.float64)
        if not (self.a.shape == self.b.shape == self.c.shape) or self.a.ndim != 1:
            raise GeometryError("a, b, c must be vectors of equal length")
        if np.any(self.a <= 0) or np.any(self.b <= 0):
            raise GeometryError("a and b must be strictly positive")
        if np.any(self.c < 0) or abs(self.c.sum() - 1.0) > 1e-9:
            raise GeometryError("mixture weights must be nonnegative and sum to 1")


@dataclass
class SymmetrySpec:
    """Symmetry mode for assembling a full curve from one prim segment."""

    mode: str = "none"  # none | axis-x | axis-y | rotational
    parts: int = 1
    theta: float = 0.0

    def __post_init__(self):
        if self.mode not in ("none", "axis-x", "axis-y", "rotational"):
            raise GeometryError(f"unknown symmetry mode {self.mode!r}")
        if self.mode == "none" and self.parts != 1:
            raise GeometryError("mode 'none' has exactly one part")
        if self.mode in ("axis-x", "axis-y") and self.parts != 2:
            raise GeometryError("axis modes have exactly two parts")
        if self.mode == "rotational":
            if self.parts < 2:
                raise GeometryError("rotational mode needs at least two parts")
            if abs(self.parts * self.theta - 2 * math.pi) > 1e-9:
                raise GeometryError("rotational closure requires parts * theta == 2*pi")

    @classmethod
    def rotational(cls, parts: int) -> "SymmetrySpec":
        return cls(mode="rotational", parts=parts, theta=2 * math.pi / parts)

    @classmethod
    def axis(cls, which: str) -> "SymmetrySpec":
        return cls(mode=f"axis-{which}", parts=2)


# ---------------------------------------------------------------------------
# Bernstein basis


def _log_binomial(n: int) -> np.ndarray:
    i = np.arange(n + 1)
    return gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)


def bernstein_basis(n: int, u: float) -> np.ndarray:
    """All n+1 Bernstein polynomials of degree n at u; sums to 1."""
    if not 1 <= n <= MAX_DEGREE:
        raise GeometryError(f"degree must be in [1, {MAX_DEGREE}], got {n}")
    if not 0.0 <= u <= 1.0:
        raise GeometryError(f"u must lie in [0, 1], got {u}")
    return _bernstein_matrix(n, np.asarray([u], dtype=np.float64))[0]


def _bernstein_matrix(n: int, u: np.ndarray) -> np.ndarray:
    """Basis values for a vector (or batch) of locations: [..., len(u), n+1].

    Binomial coefficients come from accumulated log-gamma so degrees up to 63
    stay finite; powers of u and 1-u are taken directly, which keeps the
    endpoint rows exact ([1,0,...] and [...,0,1]).
    """
    i = np.arange(n + 1)
    binom = np.exp(_log_binomial(n))
    uu = u[..., None]
    return binom * np.power(uu, i) * np.power(1.0 - uu, n - i)


def _bernstein_derivative_matrix(n: int, u: np.ndarray) -> np.ndarray:
    """d/du of each basis polynomial via the degree-reduction identity."""
    lower = _bernstein_matrix(n - 1, u) if n >= 2 else np.ones(u.shape + (1,))
    left = np.concatenate([np.zeros(u.shape + (1,)), lower], axis=-1)
    right = np.concatenate([lower, np.zeros(u.shape + (1,))], axis=-1)
    return n * (left - right)


# ---------------------------------------------------------------------------
# Rational Bezier sampling (numeric core + autodiff primitive)


def _rational_sample_forward(P: np.ndarray, w: np.ndarray, u: np.ndarray):
    """Shared forward math; accepts unbatched or batched leading axis."""
    n = P.shape[-2] - 1
    basis = _bernstein_matrix(n, u)  # [..., m+1, n+1]
    bw = basis * w[..., None, :]
    denom = bw.sum(axis=-1)
    if np.any(denom < DENOMINATOR_EPS):
        raise DegenerateWeightError(
            f"rational denominator below {DENOMINATOR_EPS:g} (min {denom.min():.3e})"
        )
    points = np.matmul(bw, P) / denom[..., None]
    return points, basis, bw, denom


def rational_bezier_sample(params: BezierParams) -> np.ndarray:
    """Sample the rational Bezier curve at params.u; returns (m+1)x2 points."""
    points, _, _, _ = _rational_sample_forward(params.P, params.w, params.u)
    return points


def _bezier_fwd(node, xs):
    P, w, u = xs
    if P.shape[-1] != 2 or P.ndim not in (2, 3):
        raise ad.ShapeMismatchError(f"node {node.name}: P must be [..., n+1, 2], got {P.shape}")
    if w.shape != P.shape[:-1]:
        raise ad.ShapeMismatchError(f"node {node.name}: w shape {w.shape} != {P.shape[:-1]}")
    points, _, _, _ = _rational_sample_forward(P, w, u)
    return points


def _bezier_bwd(node, xs, y, g):
    P, w, u = xs
    n = P.shape[-2] - 1
    _, basis, bw, denom = _rational_sample_forward(P, w, u)
    inv_d = 1.0 / denom  # [..., m+1]
    g_over_d = g * inv_d[..., None]  # [..., m+1, 2]

    grad_P = np.einsum("...jc,...ji->...ic", g_over_d, bw)

    gp = np.einsum("...jc,...ic->...ji", g_over_d, P)  # per (j, i): g_j . P_i / D_j
    t = np.einsum("...jc,...jc->...j", g_over_d, y)  # g_j . X_j / D_j
    grad_w = np.einsum("...ji,...ji->...i", basis, gp) - np.einsum("...ji,...j->...i", basis, t)

    dbasis = _bernstein_derivative_matrix(n, u)
    dbw = dbasis * w[..., None, :]
    dnum = np.matmul(dbw, P)  # [..., m+1, 2]
    dden = dbw.sum(axis=-1)  # [..., m+1]
    dx_du = (dnum - y * dden[..., None]) * inv_d[..., None]
    grad_u = np.einsum("...jc,...jc->...j", g, dx_du)
    return [grad_P, grad_w, grad_u]


ad.register_primitive("bezier_sample", _bezier_fwd, _bezier_bwd)


def bezier_sample_node(P: ad.Node, w: ad.Node, u: ad.Node) -> ad.Node:
    """Graph node sampling a rational Bezier curve, differentiable in P, w, u."""
    return ad.Node("bezier_sample", (P, w, u))


# ---------------------------------------------------------------------------
# de Casteljau oracle


def decasteljau_eval(P: np.ndarray, u: float) -> np.ndarray:
    """Evaluate a polynomial Bezier curve by repeated linear interpolation."""
    if not 0.0 <= u <= 1.0:
        raise GeometryError(f"u must lie in [0, 1], got {u}")
    b = np.asarray(P, dtype=np.float64).copy()
    while len(b) > 1:
        b = (1.0 - u) * b[:-1] + u * b[1:]
    return b[0]


# ---------------------------------------------------------------------------
# Kumaraswamy mixture transform


def _kumaraswamy_forward(a, b, c, uprime):
    x = uprime.reshape((1,) * (a.ndim - 1) + (-1, 1))  # [..., m+1, 1]
    xa = np.power(x, a[..., None, :])
    inner = np.power(1.0 - xa, b[..., None, :])
    cdf = 1.0 - inner
    u = np.einsum("...ji,...i->...j", cdf, c)
    return u, x, xa, inner, cdf


def _kumaraswamy_fwd(node, xs):
    a, b, c, _ = xs[0], xs[1], xs[2], None
    uprime = node.attrs["uprime"]
    if not (a.shape == b.shape == c.shape):
        raise ad.ShapeMismatchError(f"node {node.name}: a, b, c shapes differ")
    u, *_ = _kumaraswamy_forward(a, b, c, uprime)
    return u


def _kumaraswamy_bwd(node, xs, y, g):
    a, b, c = xs
    uprime = node.attrs["uprime"]
    _, x, xa, inner, cdf = _kumaraswamy_forward(a, b, c, uprime)
    one_m_xa = 1.0 - xa
    interior = (x > 0.0) & (x < 1.0) & (one_m_xa > 0.0)
    logx = np.log(np.where(x > 0.0, x, 1.0))
    log1mxa = np.log(np.where(one_m_xa > 0.0, one_m_xa, 1.0))
    # dF/da = b (1-x^a)^(b-1) x^a ln x ; dF/db = -(1-x^a)^b ln(1-x^a).
    # Both vanish in the limit at the grid endpoints, where the masked
    # expressions would otherwise produce 0 * inf.
    pow_bm1 = np.where(interior, np.power(np.where(interior, one_m_xa, 1.0), b[..., None, :] - 1.0), 0.0)
    dF_da = b[..., None, :] * pow_bm1 * xa * logx
    dF_db = -inner * log1mxa
    gj = g[..., None]  # [..., m+1, 1]
    grad_a = (gj * c[..., None, :] * dF_da).sum(axis=-2)
    grad_b = (gj * c[..., None, :] * dF_db).sum(axis=-2)
    grad_c = (gj * cdf).sum(axis=-2)
    return [grad_a, grad_b, grad_c]


ad.register_primitive("kumaraswamy", _kumaraswamy_fwd, _kumaraswamy_bwd)


def kumaraswamy_node(a: ad.Node, b: ad.Node, c: ad.Node, uprime: np.ndarray) -> ad.Node:
    """Graph node mapping the fixed uniform grid through the CDF mixture."""
    return ad.Node("kumaraswamy", (a, b, c), uprime=np.asarray(uprime, dtype=np.float64))


def uniform_grid(num_points: int) -> np.ndarray:
    """The pinned uniform parameter grid [0, 1/m, ..., 1]."""
    if num_points < 2:
        raise GeometryError("need at least two sampling locations")
    return np.linspace(0.0, 1.0, num_points)


def kumaraswamy_transform(u_prime: np.ndarray, mix: KumaraswamyMixture) -> np.ndarray:
    """Warp uniform locations through the mixture of Kumaraswamy CDFs."""
    u_prime = np.asarray(u_prime, dtype=np.float64)
    u, *_ = _kumaraswamy_forward(mix.a, mix.b, mix.c, u_prime)
    return u


# ---------------------------------------------------------------------------
# Symmetry operators


_MIRROR = {"x": np.diag([1.0, -1.0]), "y": np.diag([-1.0, 1.0])}


def mirror_matrix(axis: str) -> np.ndarray:
    if axis not in _MIRROR:
        raise GeometryError(f"axis must be 'x' or 'y', got {axis!r}")
    return _MIRROR[axis]


def mirror_params(P: np.ndarray, w: np.ndarray, axis: str):
    """Reversed-order, axis-reflected copy of a control polygon and weights."""
    m = mirror_matrix(axis)
    P = np.asarray(P, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    return P[::-1] @ m, w[::-1]


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotate_params(P: np.ndarray, theta: float) -> np.ndarray:
    """Rigid rotation about the origin; points are rows, so P' = P R."""
    return np.asarray(P, dtype=np.float64) @ rotation_matrix(theta)


def split_point_counts(total: int, parts: int) -> list[int]:
    """Distribute a fixed point budget across parts, front-loading remainders."""
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def part_control_points(P: np.ndarray, w: np.ndarray, spec: SymmetrySpec):
    """Control points and weights for every part of a symmetric curve."""
    if spec.mode == "none":
        return [(P, w)]
    if spec.mode in ("axis-x", "axis-y"):
        axis = spec.mode[-1]
        return [(P, w), mirror_params(P, w, axis)]
    return [(rotate_params(P, i * spec.theta), w) for i in range(spec.parts)]


def assemble_full_curve(prim: BezierParams, spec: SymmetrySpec, per_part_u,
                        total_points: int = 64) -> np.ndarray:
    """Sample every part of a symmetric curve and concatenate in traversal order."""
    if len(per_part_u) != spec.parts:
        raise GeometryError(f"expected {spec.parts} u vectors, got {len(per_part_u)}")
    pieces = []
    for (P, w), u in zip(part_control_points(prim.P, prim.w, spec), per_part_u):
        part = BezierParams(P=P, w=w, u=np.asarray(u, dtype=np.float64))
        pieces.append(rational_bezier_sample(part))
    curve = np.concatenate(pieces, axis=0)
    if curve.shape[0] != total_points:
        raise PointCountError(
            f"assembled curve has {curve.shape[0]} points, dataset expects {total_points}"
        )
    return curve
