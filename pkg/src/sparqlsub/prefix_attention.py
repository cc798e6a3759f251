"""Desk-scale prefix-tuned scaled dot-product attention with gradient checks.

A single attention block: ``softmax(Q K^T / sqrt(d)) V``, optionally with a
learned prefix of length C prepended to the keys and values.  The prefix
rows come from a two-layer MLP applied row-wise to a trainable embedding
matrix.  Everything is plain float64 numpy; softmax uses max subtraction so
finite-difference gradient checks sit on a low noise floor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np


class DimensionError(ValueError):
    """Raised when tensor shapes are inconsistent."""


ACTIVATIONS: dict[str, tuple[Callable, Callable]] = {
    "tanh": (np.tanh, lambda a: 1.0 - np.tanh(a) ** 2),
    "relu": (lambda a: np.maximum(a, 0.0), lambda a: (a > 0).astype(float)),
    "identity": (lambda a: a, lambda a: np.ones_like(a)),
}


def _as_matrix(name: str, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class AttentionInputs:
    Q: np.ndarray
    K: np.ndarray
    V: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "Q", _as_matrix("Q", self.Q))
        object.__setattr__(self, "K", _as_matrix("K", self.K))
        object.__setattr__(self, "V", _as_matrix("V", self.V))
        d = self.Q.shape[1]
        if self.K.shape[1] != d or self.V.shape[1] != d:
            raise DimensionError(
                f"Q, K, V must share the model dimension; got {self.Q.shape}, "
                f"{self.K.shape}, {self.V.shape}"
            )
        if self.K.shape[0] != self.V.shape[0]:
            raise DimensionError(
                f"K and V must have equal row counts, got {self.K.shape[0]} and {self.V.shape[0]}"
            )

    @property
    def d(self) -> int:
        return self.Q.shape[1]


_TENSOR_NAMES = ("W_K1", "b_K1", "W_K2", "b_K2", "W_V1", "b_V1", "W_V2", "b_V2", "E")


@dataclass(frozen=True)
class PrefixParams:
    """Trainable tensors of the prefix MLP: per branch W1, b1, W2, b2, plus E."""

    W_K1: np.ndarray
    b_K1: np.ndarray
    W_K2: np.ndarray
    b_K2: np.ndarray
    W_V1: np.ndarray
    b_V1: np.ndarray
    W_V2: np.ndarray
    b_V2: np.ndarray
    E: np.ndarray
    activation: str = "tanh"

    def __post_init__(self) -> None:
        for name in _TENSOR_NAMES:
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, arr)
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        d = self.W_K1.shape[0]
        for name in ("W_K1", "W_K2", "W_V1", "W_V2"):
            if getattr(self, name).shape != (d, d):
                raise DimensionError(f"{name} must be {d}x{d}, got {getattr(self, name).shape}")
        for name in ("b_K1", "b_K2", "b_V1", "b_V2"):
            if getattr(self, name).shape != (d,):
                raise DimensionError(f"{name} must have length {d}, got {getattr(self, name).shape}")
        if self.E.ndim != 2 or self.E.shape[1] != d:
            raise DimensionError(f"E must be Cx{d}, got {self.E.shape}")

    @property
    def d(self) -> int:
        return self.W_K1.shape[0]

    @property
    def C(self) -> int:
        return self.E.shape[0]

    @classmethod
    def zeros(cls, d: int, C: int, activation: str = "tanh") -> "PrefixParams":
        z = np.zeros((d, d))
        b = np.zeros(d)
        return cls(z, b, z.copy(), b.copy(), z.copy(), b.copy(), z.copy(), b.copy(),
                   np.zeros((C, d)), activation)

    @classmethod
    def random(cls, d: int, C: int, seed: int = 0, scale: float = 0.5,
               activation: str = "tanh") -> "PrefixParams":
        rng = np.random.default_rng(seed)
        def w():
            return rng.normal(0.0, scale, size=(d, d))
        def b():
            return rng.normal(0.0, scale, size=d)
        return cls(w(), b(), w(), b(), w(), b(), w(), b(),
                   rng.normal(0.0, scale, size=(C, d)), activation)

    def tensors(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in _TENSOR_NAMES}

    def to_json(self, path: str | Path) -> None:
        payload = {"d": self.d, "C": self.C, "activation": self.activation}
        payload.update({name: getattr(self, name).tolist() for name in _TENSOR_NAMES})
        Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path: str | Path) -> "PrefixParams":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        d, C = int(raw["d"]), int(raw["C"])
        arrays = {name: np.asarray(raw[name], dtype=float) for name in _TENSOR_NAMES}
        arrays["E"] = arrays["E"].reshape(C, d)
        params = cls(activation=raw.get("activation", "tanh"), **arrays)
        if params.d != d or params.C != C:
            raise DimensionError("shape header disagrees with stored tensors")
        return params


def softmax_rows(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def attention(inp: AttentionInputs) -> np.ndarray:
    """softmax(Q K^T / sqrt(d)) V with row-wise softmax."""
    scores = inp.Q @ inp.K.T / np.sqrt(inp.d)
    return softmax_rows(scores) @ inp.V


def prefix_vectors(params: PrefixParams) -> tuple[np.ndarray, np.ndarray]:
    """Key and value prefixes, each C x d, from the two-layer MLP over E."""
    f, _ = ACTIVATIONS[params.activation]
    h_K = f(params.E @ params.W_K1.T + params.b_K1) @ params.W_K2.T + params.b_K2
    h_V = f(params.E @ params.W_V1.T + params.b_V1) @ params.W_V2.T + params.b_V2
    if params.C == 0:
        h_K = h_K.reshape(0, params.d)
        h_V = h_V.reshape(0, params.d)
    return h_K, h_V


def prefixed_attention(inp: AttentionInputs, params: PrefixParams) -> np.ndarray:
    """Attention over K' = [h_K; K] and V' = [h_V; V]."""
    if params.d != inp.d:
        raise DimensionError(f"prefix dimension {params.d} != input dimension {inp.d}")
    h_K, h_V = prefix_vectors(params)
    K2 = np.vstack([h_K, inp.K])
    V2 = np.vstack([h_V, inp.V])
    return attention(AttentionInputs(Q=inp.Q, K=K2, V=V2))


def _forward(inp: AttentionInputs, params: PrefixParams) -> dict[str, np.ndarray]:
    f, _ = ACTIVATIONS[params.activation]
    A_K = params.E @ params.W_K1.T + params.b_K1
    Z_K = f(A_K)
    h_K = Z_K @ params.W_K2.T + params.b_K2
    A_V = params.E @ params.W_V1.T + params.b_V1
    Z_V = f(A_V)
    h_V = Z_V @ params.W_V2.T + params.b_V2
    K2 = np.vstack([h_K.reshape(params.C, params.d), inp.K])
    V2 = np.vstack([h_V.reshape(params.C, params.d), inp.V])
    S = inp.Q @ K2.T / np.sqrt(inp.d)
    P = softmax_rows(S)
    O = P @ V2
    return {"A_K": A_K, "Z_K": Z_K, "A_V": A_V, "Z_V": Z_V, "K2": K2, "V2": V2,
            "P": P, "O": O}


def prefixed_attention_grads(
    inp: AttentionInputs, params: PrefixParams, d_out: np.ndarray
) -> dict[str, np.ndarray]:
    """Analytic gradients of a scalar loss w.r.t. every prefix tensor.

    ``d_out`` is the loss gradient at the attention output (n x d).
    """
    ctx = _forward(inp, params)
    _, f_prime = ACTIVATIONS[params.activation]
    C = params.C
    P, V2 = ctx["P"], ctx["V2"]
    dV2 = P.T @ d_out
    dP = d_out @ V2.T
    dS = P * (dP - (dP * P).sum(axis=1, keepdims=True))
    dK2 = dS.T @ inp.Q / np.sqrt(inp.d)
    grads: dict[str, np.ndarray] = {}
    dE = np.zeros_like(params.E)
    for branch, dH in (("K", dK2[:C]), ("V", dV2[:C])):
        Z = ctx[f"Z_{branch}"]
        A = ctx[f"A_{branch}"]
        W1 = getattr(params, f"W_{branch}1")
        W2 = getattr(params, f"W_{branch}2")
        grads[f"b_{branch}2"] = dH.sum(axis=0)
        grads[f"W_{branch}2"] = dH.T @ Z
        dA = (dH @ W2) * f_prime(A)
        grads[f"b_{branch}1"] = dA.sum(axis=0)
        grads[f"W_{branch}1"] = dA.T @ params.E
        dE += dA @ W1
    grads["E"] = dE
    return grads


def quadratic_loss() -> tuple[Callable, Callable]:
    """loss = 0.5 * sum(O^2) with its analytic output gradient."""
    return (lambda out: 0.5 * float(np.sum(out * out)), lambda out: out)


def weighted_sum_loss(weights: np.ndarray) -> tuple[Callable, Callable]:
    """loss = sum(weights * O); weights must match the output shape."""
    w = np.asarray(weights, dtype=float)
    return (lambda out: float(np.sum(w * out)), lambda out: np.broadcast_to(w, out.shape).copy())


def constant_loss(value: float = 0.0) -> tuple[Callable, Callable]:
    return (lambda out: float(value), lambda out: np.zeros_like(out))


def gradient_check(
    params: PrefixParams,
    inp: AttentionInputs,
    loss: Callable[[np.ndarray], float] | None = None,
    loss_grad: Callable[[np.ndarray], np.ndarray] | None = None,
    step: float = 1e-5,
) -> float:
    """Max relative deviation of analytic vs central-difference gradients.

    The relative deviation per entry is ``|a - n| / max(1, |a|, |n|)``, so
    exactly-zero gradients compare at the absolute noise floor instead of
    blowing up the ratio.  The default loss is the quadratic one.
    """
    if loss is None and loss_grad is None:
        loss, loss_grad = quadratic_loss()
    if loss is None or loss_grad is None:
        raise ValueError("provide both loss and loss_grad, or neither")

    out = prefixed_attention(inp, params)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite values in attention output")
    analytic = prefixed_attention_grads(inp, params, np.asarray(loss_grad(out), dtype=float))

    worst = 0.0
    for name in _TENSOR_NAMES:
        base = getattr(params, name)
        numeric = np.zeros_like(base)
        flat = base.reshape(-1)
        num_flat = numeric.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + step
            up = loss(prefixed_attention(inp, params))
            flat[idx] = orig - step
            down = loss(prefixed_attention(inp, params))
            flat[idx] = orig
            num_flat[idx] = (up - down) / (2.0 * step)
        a = analytic[name]
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(numeric))):
            raise FloatingPointError(f"non-finite gradient for {name}")
        denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(numeric)))
        dev = np.abs(a - numeric) / denom
        if dev.size:
            worst = max(worst, float(dev.max()))
    return worst
