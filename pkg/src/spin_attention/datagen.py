"""Generate a desk-scale image corpus in the standard IDX layout.

The sandbox this project targets has no access to the canonical handwritten
digit download, so experiments run on rendered images: each one is a digit
glyph dropped at a random position into a scene of random bright shapes, and
the whole scene is made four-fold mirror symmetric. The files use the usual
four names so --data-dir works unchanged.

Why this design (rather than plain centered digits):

* The symmetrization gives every patch position three mirror positions whose
  content is always identical to it. A relational model can discover and
  exploit that redundancy, so masked patches are genuinely recoverable from
  context — the corpus has structure beyond its per-position mean.
* The shape scatter is re-drawn per image, so apart from the mirror symmetry
  images share little; iterating a trained model therefore visibly degrades
  the unmasked content toward the corpus-wide attractor instead of sitting
  still. Together the two properties produce the characteristic early minimum
  followed by a rise in corruption-recovery MSE curves.
* Every frame position is inked regularly across the corpus (no constant
  all-black border), which avoids training degeneracies where a few
  always-constant patch pairs absorb the entire coupling-norm budget.

The label records which digit glyph is hidden in the scene.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFilter, ImageFont

from .data import TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES, TRAIN_LABELS, write_idx


def _symmetrize(img: np.ndarray) -> np.ndarray:
    """Four-fold mirror symmetry: max over horizontal and vertical flips."""
    return np.maximum(np.maximum(img, img[:, ::-1]),
                      np.maximum(img[::-1], img[::-1, ::-1]))


def _scatter(rng: np.random.Generator, n_lo: int, n_hi: int, size: int) -> np.ndarray:
    """Random bright ellipses and line strokes on black, lightly blurred."""
    canvas = Image.new("L", (size, size), 0)
    draw = ImageDraw.Draw(canvas)
    for _ in range(int(rng.integers(n_lo, n_hi + 1))):
        x, y = rng.uniform(0, size, size=2)
        w, h = rng.uniform(3, 10, size=2)
        fill = int(rng.integers(128, 256))
        if rng.uniform() < 0.5:
            draw.ellipse([x - w / 2, y - h / 2, x + w / 2, y + h / 2], fill=fill)
        else:
            x2, y2 = x + rng.uniform(-12, 12), y + rng.uniform(-12, 12)
            draw.line([x, y, x2, y2], fill=fill, width=int(rng.integers(2, 5)))
    canvas = canvas.filter(ImageFilter.GaussianBlur(radius=0.8))
    return np.asarray(canvas, dtype=np.float64) / 255.0


def render_digit(rng: np.random.Generator, digit: int, size: int = 28) -> np.ndarray:
    """Render one symmetric scene hiding the given digit; returns uint8."""
    img = _scatter(rng, 4, 6, size)
    font = ImageFont.load_default(size=int(rng.integers(10, 15)))
    canvas = Image.new("L", (size * 2, size * 2), 0)
    draw = ImageDraw.Draw(canvas)
    draw.text((size, size), str(digit), fill=int(rng.integers(128, 256)),
              font=font, anchor="mm", stroke_width=int(rng.integers(1, 3)),
              stroke_fill=255)
    canvas = canvas.rotate(float(rng.uniform(-40, 40)), resample=Image.BILINEAR,
                           center=(size, size))
    canvas = canvas.filter(ImageFilter.GaussianBlur(radius=0.8))
    cx, cy = rng.integers(size // 4, 2 * size - 3 * size // 4, size=2)
    d = np.asarray(canvas.crop((cx, cy, cx + size, cy + size)), dtype=np.float64) / 255.0
    out = _symmetrize(np.maximum(img, d))
    return np.rint(out * 255.0).astype(np.uint8)


def make_corpus(
    out_dir, n_train: int = 12000, n_test: int = 2000, seed: int = 0, size: int = 28
) -> Path:
    """Render n_train + n_test images and write the four IDX files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    total = n_train + n_test
    labels = rng.integers(0, 10, size=total).astype(np.uint8)
    images = np.stack([render_digit(rng, int(lbl), size) for lbl in labels])
    write_idx(images[:n_train], labels[:n_train], out / TRAIN_IMAGES, out / TRAIN_LABELS)
    write_idx(images[n_train:], labels[n_train:], out / TEST_IMAGES, out / TEST_LABELS)
    return out


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description="render an image corpus in IDX format")
    p.add_argument("out_dir")
    p.add_argument("--n-train", type=int, default=12000)
    p.add_argument("--n-test", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    make_corpus(args.out_dir, args.n_train, args.n_test, args.seed)
    print(f"wrote {args.n_train}+{args.n_test} images to {args.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
