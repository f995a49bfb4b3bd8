# A miniature end-to-end run: train the adversarial model for a few hundred
# steps on a small superformula set, then sweep the 2-D latent box and render
# the resulting shape grid.  Expect ~30 seconds; the result is rough (real
# runs use 2000+ steps) but the latent organization is already visible.

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from curvegan import datasets as ds
from curvegan import networks as nn
from curvegan import service as sv
from curvegan import training as tr

data = ds.generate_superformula_dataset(300, m_lobes=3, seed=0)

gen = nn.build_generator(nn.GeneratorConfig(latent_dim=2, noise_dim=10, degree=15), seed=1)
disc = nn.build_discriminator(nn.DiscriminatorConfig(latent_dim=2), seed=2)
cfg = tr.TrainConfig(steps=400, batch=32, seed=3, eval_every=100)

result = tr.train(data, gen, disc, cfg)
for rec in result.history.records:
    print(f"step {rec.step:4d}  L_D {rec.l_d:.3f}  L_G {rec.l_g:.3f}  "
          f"L_I {rec.l_i:+.3f}  R1 {rec.r1:.3f}")

# Sweep a 5x5 grid over the latent box with fixed noise.
k = 5
z = sv.noise_from_seed(7, 10)
fig, axes = plt.subplots(k, k, figsize=(10, 10))
for i, c0 in enumerate(np.linspace(0, 1, k)):
    for j, c1 in enumerate(np.linspace(0, 1, k)):
        out = nn.generator_forward(result.generator, np.array([c0, c1]), z)
        ax = axes[k - 1 - j][i]
        ax.plot(out.curve[:, 0], out.curve[:, 1], lw=1)
        ax.set_aspect("equal")
        ax.set_xticks([])
        ax.set_yticks([])

path = pathlib.Path(__file__).with_name("latent_grid_demo.png")
fig.suptitle("generated shapes across the latent box (400-step demo model)")
fig.savefig(path, dpi=110)
print(f"wrote {path}")

# Checkpoints round-trip bit-exactly and carry the full config.
ck_path = pathlib.Path(__file__).with_name("demo_checkpoint.npz")
tr.save_checkpoint(ck_path, result.generator, result.discriminator, cfg,
                   step=result.state.step, trainer_state=result.state)
restored = tr.load_checkpoint(ck_path)
print("checkpoint restored at step", restored.step)
