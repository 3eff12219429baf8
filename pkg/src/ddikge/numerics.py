"""Numeric primitives shared by the model, sampler, and trainer code.

Thin validating wrappers over the kernel backend (see backend.py), plus
the Adagrad state record and a central-difference gradient oracle. All
reductions run in a pinned order inside the kernels, so results are
deterministic for a given seed and platform regardless of backend.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backend import kern
from .errors import DomainError, OracleError, ShapeError, TrainingError
from .rng import RngStream


def _c64(a, name: str, ndim: int) -> np.ndarray:
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise ShapeError(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    return arr


# ---------------------------------------------------------------------------
# linear algebra and convolution


def matmul(a, b) -> np.ndarray:
    """Matrix product a @ b with a pinned summation order."""
    a = _c64(a, "matmul a", 2)
    b = _c64(b, "matmul b", 2)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: {a.shape} @ {b.shape}")
    return kern.matmul(a, b)


def matvec(w, x) -> np.ndarray:
    """w @ x for a 2-d w and 1-d x."""
    w = _c64(w, "matvec w", 2)
    x = _c64(x, "matvec x", 1)
    if w.shape[1] != x.shape[0]:
        raise ShapeError(f"matvec: {w.shape} @ {x.shape}")
    return kern.matvec(w, x)


def matvec_t(w, v) -> np.ndarray:
    """w.T @ v without materializing the transpose."""
    w = _c64(w, "matvec_t w", 2)
    v = _c64(v, "matvec_t v", 1)
    if w.shape[0] != v.shape[0]:
        raise ShapeError(f"matvec_t: {w.shape}.T @ {v.shape}")
    return kern.matvec_t(w, v)


def sq_diff_sum(a, b) -> float:
    """Sum of squared elementwise differences."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"sq_diff_sum: {a.shape} vs {b.shape}")
    return float(kern.sq_diff_sum(a, b))


def conv2d(x, filters) -> np.ndarray:
    """2-d cross-correlation, valid padding, stride 1.

    x (rows, cols), filters (nf, kh, kw) -> (nf, rows-kh+1, cols-kw+1).
    """
    x = _c64(x, "conv2d x", 2)
    f = _c64(filters, "conv2d filters", 3)
    if f.shape[1] > x.shape[0] or f.shape[2] > x.shape[1]:
        raise ShapeError(f"conv2d: filters {f.shape} exceed input {x.shape}")
    return kern.conv2d_forward(x, f)


def conv2d_backward(x, filters, upstream):
    """Gradients of conv2d wrt x and filters."""
    x = _c64(x, "conv2d x", 2)
    f = _c64(filters, "conv2d filters", 3)
    up = _c64(upstream, "conv2d upstream", 3)
    m = x.shape[0] - f.shape[1] + 1
    n = x.shape[1] - f.shape[2] + 1
    if up.shape != (f.shape[0], m, n):
        raise ShapeError(f"conv2d upstream: got {up.shape}, want {(f.shape[0], m, n)}")
    return kern.conv2d_backward(x, f, up)


# ---------------------------------------------------------------------------
# softmax and Gumbel noise


def softmax(x, tau: float = 1.0) -> np.ndarray:
    """softmax(x / tau), computed with max-subtraction."""
    x = _c64(x, "softmax x", 1)
    if x.shape[0] == 0:
        raise ShapeError("softmax: empty input")
    if tau <= 0.0:
        raise DomainError(f"softmax temperature must be positive, got {tau}")
    if not np.isfinite(x).all():
        raise DomainError("softmax: non-finite logits")
    return kern.softmax_temp(x, float(tau))


def softmax_backward(probs, upstream, tau: float = 1.0) -> np.ndarray:
    """Gradient wrt logits of softmax(logits/tau), given its output."""
    probs = _c64(probs, "softmax probs", 1)
    upstream = _c64(upstream, "softmax upstream", 1)
    if probs.shape != upstream.shape:
        raise ShapeError(f"softmax_backward: {probs.shape} vs {upstream.shape}")
    if tau <= 0.0:
        raise DomainError(f"softmax temperature must be positive, got {tau}")
    return kern.softmax_temp_backward(probs, upstream, float(tau))


def gumbel_from_uniform(u) -> np.ndarray:
    """-log(-log(u)) with u clamped away from {0, 1}."""
    u = _c64(u, "gumbel u", 1)
    return kern.gumbel_from_uniform(u)


def gumbel_noise(n: int, rng: RngStream) -> np.ndarray:
    """n i.i.d. standard Gumbel draws from the stream."""
    if n <= 0:
        raise ShapeError(f"gumbel_noise: n must be positive, got {n}")
    return kern.gumbel_from_uniform(rng.uniform(n))


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class AdagradState:
    """Per-parameter squared-gradient accumulator, initialized to zero."""

    accumulator: np.ndarray
    epsilon: float = 1e-8

    @classmethod
    def zeros_like(cls, param: np.ndarray, epsilon: float = 1e-8) -> "AdagradState":
        return cls(np.zeros_like(param, dtype=np.float64), epsilon)


def adagrad_step(params, grads, state: AdagradState, lr: float, name: str = "params"):
    """One Adagrad update; returns new params, mutates the accumulator.

    acc += g^2; p -= lr * g / (sqrt(acc) + eps).
    """
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if params.shape != grads.shape or params.shape != state.accumulator.shape:
        raise ShapeError(
            f"adagrad_step {name}: params {params.shape}, grads {grads.shape}, "
            f"accumulator {state.accumulator.shape}"
        )
    if lr < 0.0:
        raise DomainError(f"learning rate must be non-negative, got {lr}")
    if not np.isfinite(grads).all():
        raise TrainingError(f"non-finite gradient for {name}")
    state.accumulator += grads * grads
    return params - lr * grads / (np.sqrt(state.accumulator) + state.epsilon)


def clip_params(params, c: float) -> np.ndarray:
    """Clamp every entry to [-c, c]; entries already inside are unchanged."""
    if c <= 0.0:
        raise DomainError(f"clip bound must be positive, got {c}")
    params = np.asarray(params, dtype=np.float64)
    return np.clip(params, -c, c)


# ---------------------------------------------------------------------------
# gradient oracle


def finite_difference_check(f, x0, analytic_grad, step: float = 1e-3) -> float:
    """Max relative error between central differences of f and analytic_grad.

    f maps a 1-d array to a scalar. Error at coordinate i is
    |fd_i - g_i| / max(1, |fd_i|, |g_i|). Non-finite f values raise
    OracleError: the probe point is outside f's domain.
    """
    x0 = _c64(x0, "finite_difference_check x0", 1)
    g = _c64(analytic_grad, "finite_difference_check grad", 1)
    if g.shape != x0.shape:
        raise ShapeError(f"finite_difference_check: x0 {x0.shape}, grad {g.shape}")
    if step <= 0.0:
        raise DomainError(f"step must be positive, got {step}")
    worst = 0.0
    for i in range(x0.shape[0]):
        x = x0.copy()
        x[i] = x0[i] + step
        fp = float(f(x))
        x[i] = x0[i] - step
        fm = float(f(x))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise OracleError(f"non-finite value of f near coordinate {i}")
        fd = (fp - fm) / (2.0 * step)
        gi = g[i]
        err = abs(fd - gi) / max(1.0, abs(fd), abs(gi))
        if err > worst:
            worst = err
    return worst
