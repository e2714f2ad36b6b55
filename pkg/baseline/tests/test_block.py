import numpy as np
import pytest
import torch

from recycled_block.data import from_patches, mask_patches, to_patches
from recycled_block.model import RecycledBlock, sinusoidal_encoding
from recycled_block.train import RecyclerConfig, train_recycled


def test_patch_round_trip():
    rng = np.random.default_rng(0)
    imgs = rng.random((3, 8, 8))
    np.testing.assert_allclose(from_patches(to_patches(imgs, 4), 8, 8, 4), imgs)


def test_mask_patches_count():
    rng = np.random.default_rng(1)
    patches = np.ones((2, 16, 4))
    out = mask_patches(patches, 0.25, rng)
    for img in out:
        assert np.sum(np.all(img == 0.0, axis=1)) == 4


def test_block_identity_with_zeroed_outputs():
    # zero the attention and MLP output projections: both residual branches
    # vanish, so block_step is the identity
    model = RecycledBlock(patch_dim=4, n_tokens=4, d_model=8, n_heads=2)
    with torch.no_grad():
        model.attn.out_proj.weight.zero_()
        model.attn.out_proj.bias.zero_()
        model.mlp[-1].weight.zero_()
        model.mlp[-1].bias.zero_()
    x = torch.randn(2, 4, 8)
    torch.testing.assert_close(model.block_step(x), x)


def test_parameter_count_independent_of_tau():
    model = RecycledBlock(patch_dim=4, n_tokens=4)
    count = sum(p.numel() for p in model.parameters())
    x = torch.randn(1, 4, 4)
    for tau in (3, 7):
        model(x, tau)
        assert sum(p.numel() for p in model.parameters()) == count


def test_positional_round_trip_identity_block():
    # with an identity block the add/subtract of the positional encoding
    # cancels, so embed -> de-embed is the plain linear round trip
    model = RecycledBlock(patch_dim=4, n_tokens=4, d_model=8, n_heads=2)
    with torch.no_grad():
        model.attn.out_proj.weight.zero_()
        model.attn.out_proj.bias.zero_()
        model.mlp[-1].weight.zero_()
        model.mlp[-1].bias.zero_()
    p = torch.randn(2, 4, 4)
    out = model(p, tau=3)
    expect = model.deembed(model.embed(p))
    torch.testing.assert_close(out, expect, atol=1e-5, rtol=1e-5)


def test_sinusoidal_encoding_shape_and_range():
    enc = sinusoidal_encoding(16, 32)
    assert enc.shape == (16, 32)
    assert enc.abs().max() <= 1.0


def test_gradient_matches_finite_differences():
    # tiny block, double precision: backprop gradient vs central differences
    torch.manual_seed(0)
    model = RecycledBlock(patch_dim=4, n_tokens=4, d_model=4, n_heads=1).double()
    x = torch.randn(2, 4, 4, dtype=torch.float64)
    target = torch.randn(2, 4, 4, dtype=torch.float64)

    def loss_value():
        pos = model.pos.double()
        h = model.embed(x) + pos
        for _ in range(2):
            h = model.block_step(h)
        return torch.mean((model.deembed(h - pos) - target) ** 2)

    loss = loss_value()
    loss.backward()
    rng = np.random.default_rng(0)
    params = [p for p in model.parameters() if p.grad is not None]
    eps = 1e-6
    for p in params[:6]:
        flat = p.detach().view(-1)
        gflat = p.grad.view(-1)
        for _ in range(3):
            k = int(rng.integers(flat.numel()))
            orig = float(flat[k])
            with torch.no_grad():
                flat[k] = orig + eps
                lp = float(loss_value())
                flat[k] = orig - eps
                lm = float(loss_value())
                flat[k] = orig
            fd = (lp - lm) / (2 * eps)
            rel = abs(fd - float(gflat[k])) / max(abs(fd), abs(float(gflat[k])), 1e-8)
            assert rel < 1e-3


def test_training_smoke_reduces_loss():
    rng = np.random.default_rng(2)
    images = np.zeros((64, 8, 8))
    for img in images:
        r, c = rng.integers(0, 5, size=2)
        img[r : r + 4, c : c + 4] = rng.random()
    cfg = RecyclerConfig(side=4, d_model=16, n_heads=2, epochs=5, batch_size=32, seed=0)
    model, losses = train_recycled(images, "mask", cfg)
    assert losses[-1] < losses[0]


def test_training_unknown_task():
    with pytest.raises(ValueError):
        train_recycled(np.zeros((4, 8, 8)), "blur", RecyclerConfig(epochs=1))
