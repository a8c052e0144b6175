"""Sampled paths with an interpolation convention."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

MODES = ("linear", "step", "recorded")


@dataclass(eq=False)
class Trajectory:
    """Time-ordered positions in R^n.

    ``mode`` fixes how the path is read between samples:

    * ``linear``  -- piecewise linear through the samples;
    * ``step``    -- right-continuous, constant between samples, jumps on a
      regular grid;
    * ``recorded`` -- right-continuous, jumps at the recorded (irregular)
      times, as produced by the continuous-time walk.

    For the two piecewise-constant modes the path is defined on
    ``[0, horizon]`` and the last sample time may be smaller than
    ``horizon``.  ``speed`` is the diffusion normalization of the scheme
    that produced the path (1 for generator ½Δ, 1/n for (1/2n)Δ).
    """

    times: np.ndarray
    positions: np.ndarray
    mode: str = "linear"
    horizon: float | None = None
    speed: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim == 1:
            pos = pos[:, None]
        self.positions = pos
        if self.mode not in MODES:
            raise ValueError(f"unknown interpolation mode {self.mode!r}")
        if len(self.times) == 0 or len(self.times) != len(pos):
            raise ValueError("times and positions must be nonempty and of equal length")
        if self.times[0] != 0.0:
            raise ValueError("trajectories start at time 0")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if self.horizon is None:
            self.horizon = float(self.times[-1])
        if self.horizon < self.times[-1]:
            raise ValueError("horizon precedes the last sample")

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def __len__(self) -> int:
        return len(self.times)

    def at(self, t) -> np.ndarray:
        """Position(s) at time(s) t; returns shape (n,) or (len(t), n)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < 0) or np.any(t_arr > self.horizon):
            raise ValueError("evaluation time outside [0, horizon]")
        if self.mode == "linear":
            out = np.column_stack([np.interp(t_arr, self.times, self.positions[:, i]) for i in range(self.dim)])
        else:
            idx = np.searchsorted(self.times, t_arr, side="right") - 1
            out = self.positions[idx]
        return out[0] if np.ndim(t) == 0 else out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(self.dim)])
        for t, x in zip(self.times.tolist(), self.positions.tolist()):
            w.writerow([repr(t)] + [repr(v) for v in x])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, mode: str = "linear", **kw) -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array([[float(v) for v in r] for r in rows[1:]])
        return cls(data[:, 0], data[:, 1:], mode=mode, **kw)
