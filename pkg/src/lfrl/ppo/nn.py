"""Small tanh MLP with hand-written backpropagation (float64)."""

from __future__ import annotations

import numpy as np


class MLP:
    """Fully connected network, tanh hidden layers, linear output.

    Parameters live in ``self.params`` as ``[W0, b0, W1, b1, ...]`` with
    ``W`` shaped ``(fan_in, fan_out)``.
    """

    def __init__(self, sizes, rng: np.random.Generator | None = None, out_scale: float = 1.0):
        self.sizes = tuple(int(s) for s in sizes)
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params = []
        n_layers = len(self.sizes) - 1
        for i, (fi, fo) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            scale = np.sqrt(1.0 / fi) * (out_scale if i == n_layers - 1 else 1.0)
            self.params.append(rng.normal(0.0, scale, size=(fi, fo)))
            self.params.append(np.zeros(fo))

    def forward(self, x: np.ndarray):
        """Return ``(output, cache)`` for a batch ``x`` of shape ``(N, in)``."""
        acts = [x]
        h = x
        last = len(self.params) // 2 - 1
        for i in range(0, len(self.params), 2):
            z = h @ self.params[i] + self.params[i + 1]
            h = z if i // 2 == last else np.tanh(z)
            acts.append(h)
        return h, acts

    def __call__(self, x: np.ndarray) -> np.ndarray:
        h = x
        last = len(self.params) - 2
        for i in range(0, len(self.params), 2):
            h = h @ self.params[i] + self.params[i + 1]
            if i != last:
                h = np.tanh(h)
        return h

    def backward(self, cache, dout: np.ndarray):
        """Gradients of ``sum(dout * output)`` w.r.t. params (same layout)."""
        grads = [None] * len(self.params)
        delta = dout
        n_layers = len(self.params) // 2
        for layer in reversed(range(n_layers)):
            h_in = cache[layer]
            grads[2 * layer] = h_in.T @ delta
            grads[2 * layer + 1] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.params[2 * layer].T) * (1.0 - h_in * h_in)
        return grads

    # flat views used by finite-difference checks and checkpoints

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, flat: np.ndarray) -> None:
        i = 0
        for p in self.params:
            n = p.size
            p[...] = np.asarray(flat[i:i + n]).reshape(p.shape)
            i += n
        if i != len(flat):
            raise ValueError(f"flat vector has {len(flat)} entries, network needs {i}")

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params)


def flatten(arrays) -> np.ndarray:
    return np.concatenate([np.ravel(a) for a in arrays])
