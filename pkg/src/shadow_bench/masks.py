"""Mask and image types, PNG decoding, thresholding and bilinear resizing."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DimensionMismatch

# ITU-R BT.601
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProbMask:
    """Continuous prediction map, values in [0, 1], shape (height, width)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"ProbMask needs a non-empty 2-D array, got shape {v.shape}")
        if not np.all((v >= 0.0) & (v <= 1.0)):
            raise ValueError("ProbMask values must lie in [0, 1]")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """{0, 1} mask stored as uint8, shape (height, width)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"BinaryMask needs a non-empty 2-D array, got shape {v.shape}")
        if v.dtype != np.bool_ and not np.all((v == 0) | (v == 1)):
            raise ValueError("BinaryMask values must be exactly 0 or 1")
        object.__setattr__(self, "values", _frozen(v.astype(np.uint8)))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def foreground(self) -> np.ndarray:
        return self.values.astype(bool)

    def as_prob(self) -> ProbMask:
        return ProbMask(self.values.astype(np.float64))


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit RGB image, shape (height, width, 3)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 3 or v.shape[2] != 3 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"RgbImage needs shape (H, W, 3), got {v.shape}")
        object.__setattr__(self, "values", _frozen(v.astype(np.uint8)))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[:2]


def as_array(m) -> np.ndarray:
    """Return the raw array behind a mask object (or the array itself)."""
    return np.asarray(getattr(m, "values", m))


def check_same_shape(a, b, what: str = "masks") -> None:
    sa, sb = as_array(a).shape[:2], as_array(b).shape[:2]
    if sa != sb:
        raise DimensionMismatch(f"{what} differ in size: {sa} vs {sb}")


def _open(path) -> Image.Image:
    try:
        img = Image.open(path)
        img.load()
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise DecodeError(path, str(exc)) from exc
    return img


def _to_luma8(img: Image.Image, path) -> np.ndarray:
    mode = img.mode
    if mode == "L":
        return np.asarray(img)
    if mode == "LA":
        return np.asarray(img.getchannel("L"))
    if mode == "1":
        return np.asarray(img.convert("L"))
    if mode.startswith("I"):
        # 16/32-bit grayscale, rescale to the 8-bit code range
        return np.asarray(img, dtype=np.float64) / 257.0
    try:
        rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise DecodeError(path, f"unsupported image mode {mode!r}") from exc
    return rgb @ np.asarray(LUMA_WEIGHTS)


def load_prob_mask(path) -> ProbMask:
    """Decode a raster file into a ProbMask, mapping 8-bit code u to u/255.

    Multi-channel files are reduced to luma with BT.601 weights first.
    """
    img = _open(path)
    codes = np.asarray(_to_luma8(img, path), dtype=np.float64)
    return ProbMask(np.clip(codes / 255.0, 0.0, 1.0))


def load_binary_mask(path, threshold: float = 0.5) -> BinaryMask:
    return binarize(load_prob_mask(path), threshold)


def load_rgb_image(path) -> RgbImage:
    img = _open(path)
    try:
        rgb = img.convert("RGB")
    except (OSError, ValueError) as exc:
        raise DecodeError(path, str(exc)) from exc
    return RgbImage(np.asarray(rgb, dtype=np.uint8))


def save_gray_png(values: np.ndarray, path) -> None:
    """Write a [0, 1] array as 8-bit grayscale PNG with code round(255 * v)."""
    codes = np.rint(np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0) * 255.0)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(codes.astype(np.uint8), mode="L").save(path, optimize=False)


def binarize(m, threshold: float = 0.5) -> BinaryMask:
    """Values below ``threshold`` become 0, everything else 1."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    return BinaryMask((as_array(m) >= threshold).astype(np.uint8))


def sample_coords(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Half-pixel-centred source taps for a 1-D bilinear resize.

    Returns (lo, hi, t) so that out[k] = (1 - t[k]) * in[lo[k]] + t[k] * in[hi[k]].
    """
    if n_in < 1 or n_out < 1:
        raise ValueError("sizes must be >= 1")
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    t = src - lo
    return lo, hi, t


def interp_matrix(n_in: int, n_out: int) -> np.ndarray:
    """Dense (n_out, n_in) matrix form of :func:`sample_coords`."""
    lo, hi, t = sample_coords(n_in, n_out)
    r = np.zeros((n_out, n_in))
    rows = np.arange(n_out)
    np.add.at(r, (rows, lo), 1.0 - t)
    np.add.at(r, (rows, hi), t)
    return r


def resize_array(a: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize over the first two axes of ``a``."""
    a = np.asarray(a, dtype=np.float64)
    h, w = a.shape[:2]
    if (h, w) == (out_h, out_w):
        return a.copy()
    y0, y1, ty = sample_coords(h, out_h)
    x0, x1, tx = sample_coords(w, out_w)
    extra = (1,) * (a.ndim - 2)
    ty = ty.reshape((-1, 1) + extra)
    rows = a[y0] * (1.0 - ty) + a[y1] * ty
    tx = tx.reshape((1, -1) + extra)
    return rows[:, x0] * (1.0 - tx) + rows[:, x1] * tx


def resize_bilinear(m, out_w: int, out_h: int) -> ProbMask:
    if out_w < 1 or out_h < 1:
        raise ValueError("output size must be >= 1")
    a = as_array(m)
    out = resize_array(a, out_h, out_w)
    # convex combinations can overshoot the input range by an ulp
    return ProbMask(np.clip(out, a.min(), a.max()))
