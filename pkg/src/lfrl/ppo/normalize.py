"""Running mean/variance observation normaliser."""

from __future__ import annotations

import numpy as np


class RunningNorm:
    """Standardises inputs with running statistics; frozen between updates."""

    def __init__(self, dim: int, clip: float = 10.0):
        self.mean = np.zeros(dim)
        self.var = np.ones(dim)
        self.count = 0.0
        self.clip = clip
        self._scale = np.ones(dim)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.clip((x - self.mean) * self._scale, -self.clip, self.clip)

    def update(self, batch: np.ndarray) -> None:
        """Merge a batch into the statistics (parallel Welford)."""
        batch = np.asarray(batch, dtype=float)
        n = batch.shape[0]
        if n == 0:
            return
        b_mean = batch.mean(axis=0)
        b_var = batch.var(axis=0)
        if self.count == 0:
            self.mean, self.var, self.count = b_mean, b_var, float(n)
        else:
            tot = self.count + n
            delta = b_mean - self.mean
            self.mean = self.mean + delta * n / tot
            m2 = self.var * self.count + b_var * n + delta * delta * self.count * n / tot
            self.var = m2 / tot
            self.count = tot
        self._scale = 1.0 / np.sqrt(self.var + 1e-8)

    def state(self) -> dict:
        return {"mean": self.mean.tolist(), "var": self.var.tolist(), "count": self.count, "clip": self.clip}

    @classmethod
    def from_state(cls, st: dict) -> "RunningNorm":
        rn = cls(len(st["mean"]), st.get("clip", 10.0))
        rn.mean = np.array(st["mean"], dtype=float)
        rn.var = np.array(st["var"], dtype=float)
        rn.count = float(st["count"])
        rn._scale = 1.0 / np.sqrt(rn.var + 1e-8)
        return rn
