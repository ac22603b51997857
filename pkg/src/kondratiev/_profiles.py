"""C-infinity one-dimensional profiles built on ``exp(-1/t)``."""

from __future__ import annotations

from math import comb

import numpy as np

from ._jets import Jet

# below this argument exp(-1/t) is zero to double precision, with all derivatives
_TINY = 2e-3


def _flat_exp(t: Jet) -> Jet:
    """``exp(-1/t)`` for ``t > 0`` and ``0`` otherwise."""
    mask = t.value > _TINY
    safe = t.copy()
    safe.c[0] = np.where(mask, t.value, 1.0)
    return (-(safe.pow(-1.0))).exp().masked(mask)


def smooth_step(t: Jet) -> Jet:
    """0 for ``t <= 0``, 1 for ``t >= 1``, smooth and monotone in between."""
    lo = t.value <= 0.0
    hi = t.value >= 1.0
    mid = ~(lo | hi)
    out = Jet.constant(t.space, 0.0, t.npts)
    out.c[0] = np.where(hi, 1.0, 0.0)
    if mid.any():
        f0 = _flat_exp(t)
        f1 = _flat_exp(1.0 - t)
        den = f0 + f1
        den.c[0] = np.where(mid, den.value, 1.0)
        ratio = f0 / den
        out.c = np.where(mid[None, :], ratio.c, out.c)
    return out


def smooth_step_scalar(t: np.ndarray) -> np.ndarray:
    """Value-only version of :func:`smooth_step` for plain arrays."""
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 1.0, 1.0, 0.0)
    mid = (t > 0.0) & (t < 1.0)
    if np.any(mid):
        tm = t[mid]
        with np.errstate(divide="ignore", over="ignore"):
            f0 = np.where(tm > _TINY, np.exp(-1.0 / np.maximum(tm, _TINY)), 0.0)
            f1 = np.where(1 - tm > _TINY, np.exp(-1.0 / np.maximum(1 - tm, _TINY)), 0.0)
        out[mid] = f0 / (f0 + f1)
    return out


# regularized incomplete beta I_t(8, 8): degree 15, flat to order 7 at both ends
_STEP_DEGREE = 15


def _build_step() -> np.polynomial.Polynomial:
    t = np.polynomial.Polynomial([0.0, 1.0])
    one = np.polynomial.Polynomial([1.0])
    acc = np.polynomial.Polynomial([0.0])
    for k in range(8, _STEP_DEGREE + 1):
        acc = acc + comb(_STEP_DEGREE, k) * t**k * (one - t) ** (_STEP_DEGREE - k)
    return acc


_STEP = _build_step()
_STEP_DERIVS = [_STEP] + [_STEP.deriv(k) for k in range(1, _STEP_DEGREE + 1)]


def poly_step(t: Jet) -> Jet:
    """C^7 step: 0 for ``t <= 0``, 1 for ``t >= 1``, a degree-15 polynomial between."""
    lo = t.value <= 0.0
    hi = t.value >= 1.0
    mid = ~(lo | hi)
    out = Jet.constant(t.space, 0.0, t.npts)
    out.c[0] = np.where(hi, 1.0, 0.0)
    if mid.any():
        sub = Jet(t.space, t.c[:, mid])
        x = sub.value
        derivs = np.array([_STEP_DERIVS[k](x) for k in range(t.space.order + 1)])
        out.c[:, mid] = sub.compose(derivs).c
    return out
