"""Shared test oracles: central finite differences against analytic gradients."""

import numpy as np

from curvegan import autodiff as ad

FD_STEP = 1e-5
REL_TOL = 1e-4
ABS_FLOOR = 1e-6


def finite_difference(graph, bindings, wrt_name, h=FD_STEP):
    """Central-difference gradient of a scalar graph w.r.t. one named input."""
    base = np.asarray(bindings[wrt_name], dtype=np.float64)
    grad = np.zeros_like(base)
    flat = grad.reshape(-1)
    for i in range(base.size):
        bumped = base.copy().reshape(-1)
        bumped[i] += h
        hi = ad.evaluate(graph, {**bindings, wrt_name: bumped.reshape(base.shape)})
        bumped[i] -= 2 * h
        lo = ad.evaluate(graph, {**bindings, wrt_name: bumped.reshape(base.shape)})
        flat[i] = (float(hi) - float(lo)) / (2 * h)
    return grad


def assert_gradients_match(graph, bindings, wrt, h=FD_STEP, rel=REL_TOL, floor=ABS_FLOOR):
    grads = ad.gradient(graph, bindings, wrt)
    for name in wrt:
        fd = finite_difference(graph, bindings, name, h=h)
        an = grads[name]
        assert an.shape == fd.shape, f"{name}: shape {an.shape} vs fd {fd.shape}"
        err = np.abs(an - fd)
        tol = np.maximum(rel * np.abs(fd), floor)
        worst = (err - tol).max()
        assert np.all(err <= tol), (
            f"gradient mismatch for {name}: max excess {worst:.3e}, "
            f"analytic {an.reshape(-1)[np.argmax(err - tol)]:.6e} vs "
            f"fd {fd.reshape(-1)[np.argmax(err - tol)]:.6e}"
        )
