"""Finite-difference verification of the hand-written gate gradients."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .dem import DemGradients, DemParams, dem_forward, dem_gradients

STEP = 1e-5
REL_TOL = 1e-6
ABS_FLOOR = 1e-8
REPORT_HEADER = ("case", "parameter", "index", "analytic", "numeric", "relative_error", "passed")


@dataclass(frozen=True, eq=False)
class GradCase:
    fl: np.ndarray
    fd: np.ndarray
    params: DemParams
    upstream: np.ndarray


@dataclass(frozen=True)
class CheckRow:
    case: int
    parameter: str
    index: tuple[int, ...]
    analytic: float
    numeric: float
    relative_error: float
    passed: bool


def random_case(rng: np.random.Generator, alpha_gate: float = 1.0) -> GradCase:
    c_l = int(rng.integers(1, 4))
    c_d = int(rng.integers(1, 5))
    h_l, w_l = (int(x) for x in rng.integers(2, 7, size=2))
    h_d = int(rng.integers(1, h_l + 1))
    w_d = int(rng.integers(1, w_l + 1))
    params = DemParams(
        proj_weight=rng.normal(size=(c_l, c_d)),
        proj_bias=rng.normal(size=c_l),
        alpha_gate=alpha_gate,
    )
    return GradCase(
        fl=rng.normal(size=(c_l, h_l, w_l)),
        fd=rng.normal(size=(c_d, h_d, w_d)),
        params=params,
        upstream=rng.normal(size=(c_l, h_l, w_l)),
    )


def _loss(case: GradCase, fl, fd, params) -> float:
    fe, _ = dem_forward(fl, fd, params)
    return float(np.sum(case.upstream * fe))


def numeric_gradients(case: GradCase, h: float = STEP) -> dict[str, np.ndarray]:
    """Central differences of sum(upstream * fe) for every scalar input."""
    p = case.params
    base = {
        "fl": case.fl,
        "fd": case.fd,
        "proj_weight": p.proj_weight,
        "proj_bias": p.proj_bias,
        "alpha_gate": np.asarray([p.alpha_gate]),
    }

    def evaluate(name, arr):
        fl = arr if name == "fl" else case.fl
        fd = arr if name == "fd" else case.fd
        if name == "proj_weight":
            params = replace(p, proj_weight=arr)
        elif name == "proj_bias":
            params = replace(p, proj_bias=arr)
        elif name == "alpha_gate":
            params = replace(p, alpha_gate=float(arr[0]))
        else:
            params = p
        return _loss(case, fl, fd, params)

    grads = {}
    for name, value in base.items():
        g = np.zeros_like(value, dtype=np.float64)
        for idx in np.ndindex(value.shape):
            plus = value.astype(np.float64).copy()
            minus = plus.copy()
            plus[idx] += h
            minus[idx] -= h
            g[idx] = (evaluate(name, plus) - evaluate(name, minus)) / (2.0 * h)
        grads[name] = g
    return grads


def relative_error(analytic: float, numeric: float) -> float:
    scale = max(abs(analytic), abs(numeric))
    return 0.0 if scale == 0.0 else abs(analytic - numeric) / scale


def within_tolerance(analytic: float, numeric: float) -> bool:
    scale = max(abs(analytic), abs(numeric))
    return abs(analytic - numeric) <= max(REL_TOL * scale, ABS_FLOOR)


GradientFn = Callable[..., DemGradients]


def check_case(case: GradCase, case_id: int = 0, gradient_fn: GradientFn = dem_gradients) -> list[CheckRow]:
    """Compare analytic and numeric gradients; one row (the worst element) per parameter."""
    _, cache = dem_forward(case.fl, case.fd, case.params)
    analytic = gradient_fn(cache, case.upstream).as_dict()
    numeric = numeric_gradients(case)
    rows = []
    for name, num in numeric.items():
        ana = np.asarray(analytic[name], dtype=np.float64).reshape(num.shape)
        worst = None
        all_ok = True
        for idx in np.ndindex(num.shape):
            a, n = float(ana[idx]), float(num[idx])
            ok = within_tolerance(a, n)
            all_ok &= ok
            # rank by how far outside the allowed band each element sits
            excess = abs(a - n) / max(REL_TOL * max(abs(a), abs(n)), ABS_FLOOR)
            if worst is None or excess > worst[0]:
                worst = (excess, idx, a, n)
        _, idx, a, n = worst
        rows.append(CheckRow(case_id, name, tuple(int(i) for i in idx), a, n, relative_error(a, n), all_ok))
    return rows


def run_dem_check(seed: int = 0, cases: int = 100, gradient_fn: GradientFn = dem_gradients) -> tuple[list[CheckRow], bool]:
    rng = np.random.default_rng(seed)
    rows: list[CheckRow] = []
    for k in range(cases):
        rows.extend(check_case(random_case(rng), k, gradient_fn))
    return rows, all(r.passed for r in rows)


def format_report(rows: list[CheckRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in rows:
        w.writerow(
            (
                r.case,
                r.parameter,
                ":".join(str(i) for i in r.index),
                repr(r.analytic),
                repr(r.numeric),
                repr(r.relative_error),
                int(r.passed),
            )
        )
    return buf.getvalue()


def write_report(rows: list[CheckRow], path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(format_report(rows), encoding="utf-8")
