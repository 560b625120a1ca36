"""
opposd.nn.functional — Activations, output heads and policy entropy.

All functions take and return float64 arrays. Softmax is computed with a
max-shifted log-sum-exp and softplus with ``logaddexp`` so both stay finite
for logits of magnitude 1e3.
"""

from __future__ import annotations

import numpy as np
from scipy.special import entr, expit, logsumexp

HEADS = ("linear", "softmax", "softplus")


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_grad(x: np.ndarray) -> np.ndarray:
    """Subgradient of ReLU; 0 at the kink."""
    return (x > 0.0).astype(np.float64)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    return logits - logsumexp(logits, axis=-1, keepdims=True)


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def softplus(x: np.ndarray) -> np.ndarray:
    """log(1 + exp(x)) without overflow."""
    return np.logaddexp(0.0, x)


def apply_head(head: str, z: np.ndarray) -> np.ndarray:
    if head == "linear":
        return z
    if head == "softmax":
        return softmax(z)
    if head == "softplus":
        return softplus(z)
    raise ValueError(f"Unknown output head: '{head}'")


def head_backward(head: str, z: np.ndarray, out: np.ndarray,
                  upstream: np.ndarray) -> np.ndarray:
    """Pull a gradient w.r.t. head outputs back to the pre-head values."""
    if head == "linear":
        return upstream
    if head == "softmax":
        inner = np.sum(upstream * out, axis=-1, keepdims=True)
        return out * (upstream - inner)
    if head == "softplus":
        return upstream * expit(z)
    raise ValueError(f"Unknown output head: '{head}'")


def entropy_of_policy(action_probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Entropy per row and its gradient w.r.t. the softmax logits.

    H = -sum p log p, with 0 log 0 = 0. For p = softmax(z),
    dH/dz_j = -p_j (log p_j + H).

    Returns:
        (entropy of shape (B,), gradient of shape (B, A))
    """
    p = np.asarray(action_probs, dtype=np.float64)
    neg_plogp = entr(p)
    h = neg_plogp.sum(axis=-1)
    grad = neg_plogp - p * h[..., None]
    return h, grad
