# Reverse-mode autodiff in five minutes: build a graph out of named inputs,
# evaluate it against bindings, and ask for exact gradients.

import numpy as np

from curvegan import autodiff as ad

# A tiny expression: f(x, y) = mean(tanh(x @ W + y))
rng = np.random.default_rng(0)
W = ad.constant(rng.normal(size=(3, 4)))
x = ad.input_node("x")
y = ad.input_node("y")
f = ad.mean(ad.tanh(ad.matmul(x, W) + y))

bindings = {"x": rng.normal(size=(5, 3)), "y": rng.normal(size=4)}
print("f(x, y) =", float(ad.evaluate(f, bindings)))

grads = ad.gradient(f, bindings, ["x", "y"])
print("df/dy =", grads["y"])

# The same graph can be reused with new bindings; nothing is recompiled.
bindings2 = {"x": np.zeros((5, 3)), "y": np.zeros(4)}
print("f(0, 0) =", float(ad.evaluate(f, bindings2)))

# Sanity-check one entry against central finite differences.
h = 1e-5
bumped = {**bindings, "y": bindings["y"] + np.array([h, 0, 0, 0])}
dipped = {**bindings, "y": bindings["y"] - np.array([h, 0, 0, 0])}
fd = (float(ad.evaluate(f, bumped)) - float(ad.evaluate(f, dipped))) / (2 * h)
print(f"analytic {grads['y'][0]:.8f} vs finite-difference {fd:.8f}")

# Convolutions are first-class primitives, with exact adjoints.
signal = ad.input_node("signal")
kernel = ad.constant(np.array([0.25, 0.5, 0.25]).reshape(3, 1, 1))
smoothed = ad.conv1d(signal, kernel, stride=1)
out = ad.evaluate(smoothed, {"signal": rng.normal(size=(16, 1))})
print("smoothed signal shape:", out.shape)
