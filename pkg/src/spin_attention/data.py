"""IDX image corpus loading, train/test splitting, and PGM export."""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


class IdxError(Exception):
    """Base class for IDX container problems."""


class BadMagicError(IdxError):
    pass


class TruncatedFileError(IdxError):
    pass


class CountMismatchError(IdxError):
    pass


@dataclass(frozen=True)
class ImageCorpus:
    """Grayscale images with intensities in [0,1] plus integer labels.

    Labels are retained for reporting only; training never reads them.
    Immutable after load, safe for concurrent readers.
    """

    images: np.ndarray  # (n, H, W) float64 in [0,1]
    labels: np.ndarray  # (n,) int64

    def __len__(self) -> int:
        return self.images.shape[0]

    @property
    def height(self) -> int:
        return self.images.shape[1]

    @property
    def width(self) -> int:
        return self.images.shape[2]


def _read_bytes(path: Path) -> bytes:
    raw = path.read_bytes()
    if raw[:2] == b"\x1f\x8b":  # gzip transparently
        raw = gzip.decompress(raw)
    return raw


def load_idx(images_path, labels_path) -> ImageCorpus:
    """Load an IDX image/label file pair into an ImageCorpus.

    Pixel bytes are scaled by 1/255 into [0,1] as float64. Raises
    BadMagicError, TruncatedFileError or CountMismatchError on the
    corresponding defect.
    """
    images_path, labels_path = Path(images_path), Path(labels_path)
    img_raw = _read_bytes(images_path)
    if len(img_raw) < 16:
        raise TruncatedFileError(f"{images_path}: header shorter than 16 bytes")
    magic, n, h, w = struct.unpack(">IIII", img_raw[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise BadMagicError(
            f"{images_path}: bad image magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}"
        )
    if len(img_raw) - 16 < n * h * w:
        raise TruncatedFileError(
            f"{images_path}: payload holds {len(img_raw) - 16} bytes, header promises {n * h * w}"
        )

    lab_raw = _read_bytes(labels_path)
    if len(lab_raw) < 8:
        raise TruncatedFileError(f"{labels_path}: header shorter than 8 bytes")
    lmagic, ln = struct.unpack(">II", lab_raw[:8])
    if lmagic != IDX_LABEL_MAGIC:
        raise BadMagicError(
            f"{labels_path}: bad label magic 0x{lmagic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}"
        )
    if len(lab_raw) - 8 < ln:
        raise TruncatedFileError(
            f"{labels_path}: payload holds {len(lab_raw) - 8} labels, header promises {ln}"
        )
    if ln != n:
        raise CountMismatchError(f"{n} images but {ln} labels")

    pixels = np.frombuffer(img_raw, dtype=np.uint8, count=n * h * w, offset=16)
    images = pixels.reshape(n, h, w).astype(np.float64) / 255.0
    labels = np.frombuffer(lab_raw, dtype=np.uint8, count=n, offset=8).astype(np.int64)
    return ImageCorpus(images=images, labels=labels)


def split(corpus: ImageCorpus, n_train: int) -> tuple[ImageCorpus, ImageCorpus]:
    """Deterministic split: first n_train images train, remainder test."""
    if n_train > len(corpus):
        raise ValueError(f"n_train={n_train} exceeds corpus size {len(corpus)}")
    train = ImageCorpus(corpus.images[:n_train], corpus.labels[:n_train])
    test = ImageCorpus(corpus.images[n_train:], corpus.labels[n_train:])
    return train, test


def write_idx(images: np.ndarray, labels: np.ndarray, images_path, labels_path) -> None:
    """Write uint8 images (n,H,W) and labels (n,) as canonical IDX files."""
    images = np.ascontiguousarray(images, dtype=np.uint8)
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    n, h, w = images.shape
    if labels.shape[0] != n:
        raise CountMismatchError(f"{n} images but {labels.shape[0]} labels")
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGE_MAGIC, n, h, w))
        f.write(images.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABEL_MAGIC, n))
        f.write(labels.tobytes())


# Standard file names inside a --data-dir.
TRAIN_IMAGES = "train-images-idx3-ubyte"
TRAIN_LABELS = "train-labels-idx1-ubyte"
TEST_IMAGES = "t10k-images-idx3-ubyte"
TEST_LABELS = "t10k-labels-idx1-ubyte"


def load_data_dir(data_dir) -> tuple[ImageCorpus, ImageCorpus]:
    """Load the four standard files from a data directory."""
    d = Path(data_dir)
    train = load_idx(d / TRAIN_IMAGES, d / TRAIN_LABELS)
    test = load_idx(d / TEST_IMAGES, d / TEST_LABELS)
    return train, test


def write_pgm(path, image: np.ndarray) -> None:
    """Write an intensity image in [0,1] as binary PGM (P5, 8-bit)."""
    img = np.asarray(image, dtype=np.float64)
    data = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM written by write_pgm back to floats in [0,1]."""
    raw = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:  # magic, width, height, maxval
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    pos += 1  # single whitespace after maxval
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    data = np.frombuffer(raw, dtype=np.uint8, count=w * h, offset=pos)
    return data.reshape(h, w).astype(np.float64) / float(maxval)
