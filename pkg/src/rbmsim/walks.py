"""Lattice random walks: the discrete-time chain and the continuous-time walk.

The discrete chain jumps every 2^{-2k} time units to a uniformly chosen
neighbor.  Paths are vectorized over an ensemble; every random word is
addressed by (step, path index) so results do not depend on batching.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .lattice import Lattice
from .rng import Stream
from .trajectory import Trajectory

STEP_BLOCK = 64
PATH_CHUNK = 4096


class WalkError(ValueError):
    pass


def n_steps_for(horizon: float, k: int) -> int:
    """Number of full steps of length 2^{-2k} in [0, horizon]."""
    if horizon <= 0:
        raise WalkError("horizon must be positive")
    return int(np.floor(horizon * 4.0 ** k + 1e-9))


# ---------------------------------------------------------------------------
# starts


def sample_stationary_vertices(lattice: Lattice, count: int, seed: int, offset: int = 0) -> np.ndarray:
    """Vertex ids drawn with probability m_k(x) / sum m_k; sample i uses counter offset + i."""
    cdf = np.cumsum(lattice.measure)
    cdf /= cdf[-1]
    ids = np.arange(offset, offset + count, dtype=np.uint64)
    u = Stream(seed, "start").uniforms53(0, 0, 0, ids)[..., 0]
    return np.minimum(np.searchsorted(cdf, u, side="right"), lattice.size - 1)


def sample_stationary_vertex(lattice: Lattice, seed: int, index: int = 0) -> int:
    return int(sample_stationary_vertices(lattice, 1, seed, offset=index)[0])


def _start_ids(lattice: Lattice, start, count: int, seed: int, path_ids: np.ndarray) -> np.ndarray:
    if isinstance(start, str):
        if start != "stationary":
            raise WalkError(f"unknown start mode {start!r}")
        cdf = np.cumsum(lattice.measure)
        cdf /= cdf[-1]
        u = Stream(seed, "start").uniforms53(0, 0, 0, path_ids.astype(np.uint64))[..., 0]
        return np.minimum(np.searchsorted(cdf, u, side="right"), lattice.size - 1)
    s = np.asarray(start, dtype=np.int64)
    if s.ndim == 0:
        s = np.full(count, int(s))
    if len(s) != count or np.any(s < 0) or np.any(s >= lattice.size):
        raise WalkError("start vertex not in lattice")
    return s


# ---------------------------------------------------------------------------
# stepping engine


def _choice_bits(stream: Stream, first: int, count: int, path_ids: np.ndarray) -> np.ndarray:
    """32-bit words for steps first..first+count-1, shape (P, count); ``first`` is a multiple of 4."""
    g0 = first // 4
    groups = np.arange(g0, g0 + -(-count // 4), dtype=np.uint64)
    b = stream.bits(0, groups[None, :], 0, path_ids[:, None].astype(np.uint64))
    return b.reshape(len(path_ids), -1)[:, :count]


def walk_blocks(
    lattice: Lattice, start_ids: np.ndarray, n_steps: int | None, seed: int, path_ids: np.ndarray
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (first_step, states) blocks; ``states`` has shape (P, b + 1) and
    column 0 repeats the last state of the previous block."""
    stream = Stream(seed, "walk")
    width = lattice.neighbors.shape[1]
    flat = lattice.neighbors.ravel()
    deg = lattice.degree.astype(np.float64)
    cur = np.asarray(start_ids, dtype=np.int64).copy()
    step = 0
    while n_steps is None or step < n_steps:
        b = STEP_BLOCK if n_steps is None else min(STEP_BLOCK, n_steps - step)
        # u * deg is exact in double precision, so the slot equals (bits * deg) >> 32
        u = _choice_bits(stream, step, b, path_ids) * 2.0 ** -32
        block = np.empty((len(cur), b + 1), dtype=np.int64)
        block[:, 0] = cur
        for i in range(b):
            cur = flat[cur * width + (u[:, i] * deg[cur]).astype(np.int64)]
            block[:, i + 1] = cur
        yield step, block
        step += b


# ---------------------------------------------------------------------------
# path containers


@dataclass(eq=False)
class ChainPath:
    """Vertex sequence X_0, X_1, ..., X_J of one discrete chain (J = floor(T 4^k))."""

    lattice: Lattice
    vertices: np.ndarray
    horizon: float
    seed: int
    path_id: int = 0

    @property
    def level(self) -> int:
        return self.lattice.level

    @property
    def dt(self) -> float:
        return 4.0 ** -self.lattice.level

    @property
    def n_steps(self) -> int:
        return len(self.vertices) - 1

    @property
    def positions(self) -> np.ndarray:
        return self.lattice.positions[self.vertices]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "vertex_id"])
        w.writerows(enumerate(self.vertices.tolist()))
        return buf.getvalue()


@dataclass(eq=False)
class ChainEnsemble:
    """Vertex arrays for many chains; ``vertices`` has shape (P, J + 1)."""

    lattice: Lattice
    vertices: np.ndarray
    horizon: float
    seed: int
    path_ids: np.ndarray

    def __len__(self) -> int:
        return len(self.vertices)

    def path(self, i: int) -> ChainPath:
        return ChainPath(self.lattice, self.vertices[i], self.horizon, self.seed, int(self.path_ids[i]))


def simulate_discrete_walks(
    lattice: Lattice,
    start,
    horizon: float,
    seed: int,
    n_paths: int | None = None,
    path_ids: Sequence[int] | None = None,
    record: str = "full",
):
    """Simulate an ensemble of discrete chains.

    ``start`` is a vertex id, an array of ids, or ``"stationary"``.
    ``record="full"`` returns a :class:`ChainEnsemble`; ``record="final"``
    returns only the final vertex ids (for long horizons).
    """
    if path_ids is None:
        if n_paths is None or n_paths < 1:
            raise WalkError("need at least one path")
        path_ids = np.arange(n_paths)
    path_ids = np.asarray(path_ids, dtype=np.int64)
    J = n_steps_for(horizon, lattice.level)
    starts = _start_ids(lattice, start, len(path_ids), seed, path_ids)
    if record == "final":
        out = starts.copy()
        for lo in range(0, len(path_ids), PATH_CHUNK):
            sl = slice(lo, lo + PATH_CHUNK)
            for _, block in walk_blocks(lattice, starts[sl], J, seed, path_ids[sl]):
                out[sl] = block[:, -1]
        return out
    if record != "full":
        raise WalkError(f"unknown record option {record!r}")
    verts = np.empty((len(path_ids), J + 1), dtype=np.int64)
    verts[:, 0] = starts
    for first, block in walk_blocks(lattice, starts, J, seed, path_ids):
        verts[:, first + 1 : first + block.shape[1]] = block[:, 1:]
    return ChainEnsemble(lattice, verts, horizon, seed, path_ids)


def simulate_discrete_walk(lattice: Lattice, start, horizon: float, seed: int, path_id: int = 0) -> ChainPath:
    ens = simulate_discrete_walks(lattice, start, horizon, seed, path_ids=[path_id])
    return ens.path(0)


def interpolate(chain: ChainPath, mode: str = "linear") -> Trajectory:
    """Linear (X^k) or right-continuous step (Y^k) view of a chain."""
    if chain.n_steps < 0:
        raise WalkError("empty chain")
    times = np.arange(chain.n_steps + 1) * chain.dt
    speed = 1.0 / chain.lattice.dim
    if mode == "linear":
        return Trajectory(times, chain.positions, "linear", speed=speed)
    if mode == "step":
        return Trajectory(times, chain.positions, "step", horizon=chain.horizon, speed=speed)
    raise WalkError(f"unknown interpolation mode {mode!r}")


# ---------------------------------------------------------------------------
# continuous-time walk


def simulate_ctrw(lattice: Lattice, start, horizon: float, seed: int, path_id: int = 0) -> Trajectory:
    """Continuous-time walk: rate 2^{2k}/(2n) to each neighbor.

    The jump chain reuses the discrete-walk stream; holding times use an
    independent stream, exponential with mean 2^{-2k} 2n / v_k(x).
    """
    if horizon <= 0:
        raise WalkError("horizon must be positive")
    ids = np.array([path_id], dtype=np.int64)
    x0 = _start_ids(lattice, start, 1, seed, ids)
    scale = 4.0 ** -lattice.level * 2 * lattice.dim
    hold = Stream(seed, "hold")
    times, verts = [np.zeros(1)], [x0]
    clock = 0.0
    for first, block in walk_blocks(lattice, x0, None, seed, ids):
        states = block[0]
        b = len(states) - 1
        u = _choice_bits(hold, first, b, ids)[0].astype(np.float64)
        u = (u + 0.5) / 4294967296.0
        waits = -np.log(u) * scale / lattice.degree[states[:-1]]
        jump_times = clock + np.cumsum(waits)
        keep = jump_times <= horizon
        times.append(jump_times[keep])
        verts.append(states[1:][keep])
        if not keep.all():
            break
        clock = float(jump_times[-1])
    t = np.concatenate(times)
    v = np.concatenate(verts)
    return Trajectory(t, lattice.positions[v], "recorded", horizon=horizon, speed=1.0 / lattice.dim,
                      meta={"vertices": v})


# ---------------------------------------------------------------------------
# covariation


@dataclass
class CovariationReport:
    t: float
    matrix: np.ndarray
    target: np.ndarray
    stderr: np.ndarray
    n_paths: int
    compensated: bool = True
    per_path: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> str:
        return json.dumps({
            "t": self.t,
            "matrix": self.matrix.tolist(),
            "target": self.target.tolist(),
            "stderr": self.stderr.tolist(),
            "n_paths": self.n_paths,
        })

    def within(self, tol: float) -> bool:
        return bool(np.all(np.abs(self.matrix - self.target) <= tol))


def _path_covariations(lattice: Lattice, verts: np.ndarray, L: int, compensated: bool) -> np.ndarray:
    pos = lattice.positions
    drift = lattice.drift if compensated else np.zeros_like(pos)
    n = lattice.dim
    out = np.zeros((len(verts), n, n))
    for lo in range(0, len(verts), 256):
        v = verts[lo : lo + 256, : L + 1]
        inc = pos[v[:, 1:]] - pos[v[:, :-1]] - drift[v[:, :-1]]
        out[lo : lo + 256] = np.einsum("pli,plj->pij", inc, inc)
    return out


def covariation(chains, t: float, compensated: bool = True) -> CovariationReport:
    """Realized covariation of the compensated coordinate martingales at time t.

    Accepts a :class:`ChainPath`, a list of them, or a :class:`ChainEnsemble`.
    The target is δ_ij t/n.
    """
    if isinstance(chains, ChainPath):
        chains = [chains]
    if isinstance(chains, ChainEnsemble):
        lattice, verts, horizon = chains.lattice, chains.vertices, chains.horizon
    else:
        if not chains:
            raise WalkError("no chains supplied")
        lattice = chains[0].lattice
        horizon = min(c.horizon for c in chains)
        J = min(c.n_steps for c in chains)
        verts = np.stack([c.vertices[: J + 1] for c in chains])
    if t > horizon + 1e-12:
        raise WalkError(f"t={t} exceeds chain horizon {horizon}")
    L = n_steps_for(t, lattice.level)
    if L > verts.shape[1] - 1:
        raise WalkError("t exceeds recorded chain length")
    per = _path_covariations(lattice, verts, L, compensated)
    P = len(per)
    mean = per.mean(axis=0)
    se = per.std(axis=0, ddof=1) / np.sqrt(P) if P > 1 else np.full_like(mean, np.nan)
    n = lattice.dim
    return CovariationReport(t, mean, np.eye(n) * t / n, se, P, compensated, per)
