# The three evaluation metrics, demonstrated on stand-ins so the script runs
# in seconds: kernel-density mean log likelihood (MLL), relative variance of
# difference (RVOD), and the latent-space consistency proxy (LSC).

import numpy as np

from curvegan import datasets as ds
from curvegan import metrics as mt

data = ds.generate_superformula_dataset(600, m_lobes=3, seed=0)
perm = np.random.default_rng(1).permutation(600)
test, validation, pool = (data.samples[perm[:200]], data.samples[perm[200:300]],
                          data.samples[perm[300:]])

# MLL: how likely is held-out data under a KDE of "generated" samples?  Using
# a disjoint slice of the real data as the generated set gives a strong score;
# uniform noise in the same bounding box gives a terrible one.
bw = mt.select_bandwidth(pool, validation)
print(f"selected bandwidth: {bw:.3f}")
print(f"MLL (real pool as generator):   {mt.mll(pool, test, bw):8.1f}")
noise = np.random.default_rng(2).uniform(data.samples.min(), data.samples.max(),
                                         size=(300, 64, 2))
bw_noise = mt.select_bandwidth(noise, validation)
print(f"MLL (uniform-noise generator):  {mt.mll(noise, test, bw_noise):8.1f}")

# RVOD: smoothness relative to the data; 1.0 means equally smooth, > 1 means
# the generated curves are smoother, << 1 means they are jagged.
print(f"RVOD (data vs itself):          {mt.rvod(test, pool):8.3f}")
jagged = pool + np.random.default_rng(3).normal(0, 0.3, size=pool.shape)
print(f"RVOD (data vs jagged copy):     {mt.rvod(test, jagged):8.3f}")

# LSC proxy: correlation between latent distances and curve distances along
# random latent lines.  A linear latent-to-curve map scores 1.0.
basis = np.random.default_rng(4).normal(size=(2, 128))


def linear_generator(C, Z):
    return (C @ basis).reshape(-1, 64, 2)


def scrambled_generator(C, Z):
    out = np.empty((len(C), 64, 2))
    for i, c in enumerate(C):
        key = hash(tuple(np.round(c, 5))) % (2**32)
        out[i] = np.random.default_rng(key).normal(size=(64, 2))
    return out


print(f"LSC (linear map):               "
      f"{mt.lsc_proxy(linear_generator, latent_dim=2, seed=5):8.3f}")
print(f"LSC (latent-scrambled map):     "
      f"{mt.lsc_proxy(scrambled_generator, latent_dim=2, seed=5):8.3f}")
