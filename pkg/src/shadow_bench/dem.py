"""Reference numerics for the detail enhancement gate.

Tensors are plain float64 arrays of shape (C, H, W). The forward pass is

    proj = W @ fd + b                  (1x1 convolution, per spatial site)
    up   = bilinear(proj) to fl's size
    gate = alpha * ln(1 + (fl - up)^2)
    fe   = gate * fl

and :func:`dem_gradients` back-propagates an upstream gradient of ``fe``
through the same steps by hand.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, ParseError
from .masks import interp_matrix


def as_tensor3(a, name: str = "tensor") -> np.ndarray:
    t = np.asarray(a, dtype=np.float64)
    if t.ndim != 3 or min(t.shape) < 1:
        raise DimensionMismatch(f"{name} must be a non-empty C x H x W array, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError(f"{name} contains non-finite values")
    return t


@dataclass(frozen=True, eq=False)
class DemParams:
    proj_weight: np.ndarray  # (C_L, C_D)
    proj_bias: np.ndarray  # (C_L,)
    alpha_gate: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.proj_weight, dtype=np.float64)
        b = np.asarray(self.proj_bias, dtype=np.float64)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise DimensionMismatch(f"weight {w.shape} and bias {b.shape} are inconsistent")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("projection parameters must be finite")
        object.__setattr__(self, "proj_weight", w)
        object.__setattr__(self, "proj_bias", b)
        object.__setattr__(self, "alpha_gate", float(self.alpha_gate))


@dataclass(frozen=True, eq=False)
class DemCache:
    fl: np.ndarray
    fd: np.ndarray
    params: DemParams
    ry: np.ndarray
    rx: np.ndarray
    diff: np.ndarray
    log_term: np.ndarray
    gate: np.ndarray


@dataclass(frozen=True, eq=False)
class DemGradients:
    fl: np.ndarray
    fd: np.ndarray
    proj_weight: np.ndarray
    proj_bias: np.ndarray
    alpha_gate: float

    def as_dict(self) -> dict[str, np.ndarray]:
        return {
            "fl": self.fl,
            "fd": self.fd,
            "proj_weight": self.proj_weight,
            "proj_bias": self.proj_bias,
            "alpha_gate": np.asarray([self.alpha_gate]),
        }


def project_1x1(fd, p: DemParams) -> np.ndarray:
    fd = as_tensor3(fd, "fd")
    if p.proj_weight.shape[1] != fd.shape[0]:
        raise DimensionMismatch(
            f"projection expects {p.proj_weight.shape[1]} input channels, fd has {fd.shape[0]}"
        )
    return np.einsum("ld,dhw->lhw", p.proj_weight, fd) + p.proj_bias[:, None, None]


def upsample_to(t, out_h: int, out_w: int) -> np.ndarray:
    """Per-channel bilinear resize, same sampling convention as mask resizing."""
    t = as_tensor3(t)
    ry = interp_matrix(t.shape[1], out_h)
    rx = interp_matrix(t.shape[2], out_w)
    return np.einsum("yh,chw,xw->cyx", ry, t, rx)


def gate_map(fl, fd_up, alpha_gate: float) -> np.ndarray:
    fl = np.asarray(fl, dtype=np.float64)
    fd_up = np.asarray(fd_up, dtype=np.float64)
    if fl.shape != fd_up.shape:
        raise DimensionMismatch(f"gate inputs differ in shape: {fl.shape} vs {fd_up.shape}")
    return alpha_gate * np.log1p((fl - fd_up) ** 2)


def dem_forward(fl, fd, p: DemParams) -> tuple[np.ndarray, DemCache]:
    fl = as_tensor3(fl, "fl")
    fd = as_tensor3(fd, "fd")
    proj = project_1x1(fd, p)
    if proj.shape[0] != fl.shape[0]:
        raise DimensionMismatch(
            f"projected channels {proj.shape[0]} do not match fl channels {fl.shape[0]}"
        )
    ry = interp_matrix(fd.shape[1], fl.shape[1])
    rx = interp_matrix(fd.shape[2], fl.shape[2])
    up = np.einsum("yh,chw,xw->cyx", ry, proj, rx)
    diff = fl - up
    log_term = np.log1p(diff * diff)
    gate = p.alpha_gate * log_term
    fe = gate * fl
    return fe, DemCache(fl, fd, p, ry, rx, diff, log_term, gate)


def dem_gradients(cache: DemCache, upstream) -> DemGradients:
    """Chain-rule gradients of sum(upstream * fe) w.r.t. every input and parameter."""
    g = np.asarray(upstream, dtype=np.float64)
    if g.shape != cache.fl.shape:
        raise DimensionMismatch(f"upstream shape {g.shape} != output shape {cache.fl.shape}")
    p = cache.params
    # d gate / d diff = alpha * 2 diff / (1 + diff^2)
    dgate_ddiff = p.alpha_gate * 2.0 * cache.diff / (1.0 + cache.diff**2)
    g_gate = g * cache.fl
    d_fl = g * cache.gate + g_gate * dgate_ddiff
    d_up = -g_gate * dgate_ddiff
    d_alpha = float(np.sum(g_gate * cache.log_term))
    d_proj = np.einsum("yh,cyx,xw->chw", cache.ry, d_up, cache.rx)
    d_weight = np.einsum("lhw,dhw->ld", d_proj, cache.fd)
    d_bias = d_proj.sum(axis=(1, 2))
    d_fd = np.einsum("ld,lhw->dhw", p.proj_weight, d_proj)
    return DemGradients(d_fl, d_fd, d_weight, d_bias, d_alpha)


def write_tensor_csv(t, path) -> None:
    """Three header lines ``C,<n>``, ``H,<n>``, ``W,<n>``, then one CSV row per (c, y)."""
    t = as_tensor3(t)
    c, h, w = t.shape
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(("C", c))
    out.writerow(("H", h))
    out.writerow(("W", w))
    for row in t.reshape(c * h, w):
        out.writerow([repr(float(v)) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_tensor_csv(path) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(Path(path).read_text(encoding="utf-8"))))
    try:
        dims = {}
        for key, row in zip("CHW", rows[:3]):
            if row[0].strip() != key:
                raise ParseError(f"{path}: expected header {key!r}, got {row[0]!r}")
            dims[key] = int(row[1])
        data = np.asarray([[float(v) for v in r] for r in rows[3:] if r], dtype=np.float64)
    except (IndexError, ValueError) as exc:
        raise ParseError(f"{path}: malformed tensor file: {exc}") from exc
    c, h, w = dims["C"], dims["H"], dims["W"]
    if data.shape != (c * h, w):
        raise ParseError(f"{path}: body shape {data.shape} does not match header {c}x{h}x{w}")
    return data.reshape(c, h, w)
