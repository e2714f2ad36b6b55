"""Walk through the core objects on a tiny instance: embed an image into
vector spins, build couplings, inspect the attention mask and energies, and
verify numerically that the update field descends each token's own energy.

Run: python demos/demo_dynamics.py
"""

import numpy as np

from spin_attention.dynamics import (
    DynamicsConfig,
    attention_scores,
    iterate,
    local_energy,
    total_energy,
    update_step,
)
from spin_attention.embedding import PatchGeometry, build_embedding, deembed_image, embed_image
from spin_attention.training import init_couplings

rng = np.random.default_rng(0)

geom = PatchGeometry(height=8, width=8, side=2)  # 16 tokens, d = 8
print(f"geometry: {geom.n_tokens} tokens of {geom.side}x{geom.side} pixels, d={geom.d}")

emb = build_embedding(seed=42, geom=geom)
img = rng.random((8, 8))
x = embed_image(img, emb, geom)
print("spin norms:", np.round(np.linalg.norm(x, axis=1), 6)[:4], "...")

back = deembed_image(x, emb, geom)
print("round-trip max pixel error:", np.abs(back - img).max())

coup = init_couplings(seed=0, n_tokens=geom.n_tokens, d=geom.d, lam=1.0)
alpha = attention_scores(x, coup)
print("attention rows sum to:", alpha.sum(axis=1)[:4])

print("token 0 energy:", local_energy(0, x, coup))
print("total energy:  ", total_energy(x, coup))

# the update field is minus the gradient of each token's own energy
cfg = DynamicsConfig()
field = coup.lam * np.einsum("ij,ijde,je->id", alpha, coup.j, x)
h = 1e-5
i = 0
fd = np.zeros(geom.d)
for k in range(geom.d):
    xp, xm = x.copy(), x.copy()
    xp[i, k] += h
    xm[i, k] -= h
    fd[k] = (local_energy(i, xp, coup) - local_energy(i, xm, coup)) / (2 * h)
print("field vs -grad e_0, max abs diff:", np.abs(field[i] + fd).max())

states = iterate(x, coup, cfg, n_steps=5)
print("energy along the trajectory:",
      [round(total_energy(s, coup), 4) for s in states])
assert np.allclose(update_step(x, coup, cfg), states[0])
