"""Level-k grid graphs D_k, their kernels, generators and Dirichlet energy."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .domains import Domain

MAX_GRID_CELLS = 50_000_000


class LatticeError(ValueError):
    pass


def _directions(n: int) -> np.ndarray:
    """+e1, -e1, +e2, -e2, ... in integer coordinates."""
    d = np.zeros((2 * n, n), dtype=np.int64)
    for i in range(n):
        d[2 * i, i] = 1
        d[2 * i + 1, i] = -1
    return d


@dataclass(eq=False)
class Lattice:
    """Anchored component of the level-k grid graph inside a domain.

    ``coords`` are integer coordinates (position = coords * 2**-k) listed
    in BFS discovery order.  ``neighbors`` holds neighbor ids per vertex,
    valid entries first, padded with -1.
    """

    level: int
    coords: np.ndarray
    neighbors: np.ndarray
    degree: np.ndarray

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    @property
    def size(self) -> int:
        return len(self.coords)

    @property
    def spacing(self) -> float:
        return 2.0 ** -self.level

    @property
    def positions(self) -> np.ndarray:
        return self.coords * self.spacing

    @property
    def measure(self) -> np.ndarray:
        n = self.dim
        return self.degree / (2 * n) * 2.0 ** (-self.level * n)

    @property
    def interior(self) -> np.ndarray:
        return self.degree == 2 * self.dim

    @property
    def drift(self) -> np.ndarray:
        """Generator applied to the coordinate functions, per vertex, shape (N, n)."""
        pos = self.positions
        valid = self.neighbors >= 0
        nb = pos[np.where(valid, self.neighbors, 0)]
        disp = (nb - pos[:, None, :]) * valid[..., None]
        return disp.sum(axis=1) / self.degree[:, None]

    def edges(self) -> np.ndarray:
        """Undirected edges (a, b) with a < b, ordered by a then neighbor slot."""
        a = np.repeat(np.arange(self.size), self.neighbors.shape[1])
        b = self.neighbors.reshape(-1)
        keep = b > a
        return np.stack([a[keep], b[keep]], axis=1)

    def index_of(self, coord) -> int:
        key = tuple(int(c) for c in coord)
        if not hasattr(self, "_index"):
            self._index = {tuple(c): i for i, c in enumerate(self.coords.tolist())}
        if key not in self._index:
            raise LatticeError(f"vertex {key} is not in the lattice")
        return self._index[key]

    def nearest_vertex(self, point) -> int:
        return self.index_of(np.round(np.asarray(point, dtype=float) / self.spacing).astype(int))

    def evaluate(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Tabulate a function of positions (vectorized over rows) on the vertices."""
        return np.asarray(f(self.positions), dtype=float)

    def non_interior_mass(self) -> float:
        return float(self.measure[~self.interior].sum())

    # -- export -------------------------------------------------------
    def vertices_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex_id"] + [f"i{j + 1}" for j in range(self.dim)] + ["degree", "m_k"])
        for i, (c, d, m) in enumerate(zip(self.coords.tolist(), self.degree.tolist(), self.measure.tolist())):
            w.writerow([i, *c, d, repr(m)])
        return buf.getvalue()

    def edges_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex_id_a", "vertex_id_b"])
        w.writerows(self.edges().tolist())
        return buf.getvalue()

    def export(self, directory, prefix: str = "lattice") -> tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        vpath = directory / f"{prefix}_vertices.csv"
        epath = directory / f"{prefix}_edges.csv"
        vpath.write_text(self.vertices_csv())
        epath.write_text(self.edges_csv())
        return vpath, epath


def build_lattice(domain: Domain, k: int) -> Lattice:
    """Breadth-first exploration of the grid component containing the anchor's grid vertex."""
    if k < 1:
        raise LatticeError("level k must be >= 1")
    n = domain.dim
    h = 2.0 ** -k
    imin = np.floor(domain.lo / h).astype(np.int64)
    imax = np.ceil(domain.hi / h).astype(np.int64)
    shape = tuple((imax - imin + 1).tolist())
    if np.prod(shape, dtype=float) > MAX_GRID_CELLS:
        raise LatticeError(f"level {k} grid too large for this domain")
    index = np.full(shape, -1, dtype=np.int64)

    root = np.round(domain.anchor / h).astype(np.int64)
    if not domain.contains(root * h):
        raise LatticeError(f"anchor grid vertex {(root * h).tolist()} lies outside the domain")
    dirs = _directions(n)

    found = [root[None, :]]
    index[tuple(root - imin)] = 0
    count = 1
    frontier = root[None, :]
    while len(frontier):
        cand = (frontier[:, None, :] + dirs[None, :, :]).reshape(-1, n)
        src = np.repeat(frontier, 2 * n, axis=0)
        rel = cand - imin
        ok = np.all((rel >= 0) & (cand <= imax), axis=1)
        ok[ok] = index[tuple(rel[ok].T)] < 0
        if ok.any():
            sel = np.flatnonzero(ok)
            ok[sel] = domain.segments_inside(src[sel] * h, cand[sel] * h)
        new = cand[ok]
        if len(new) == 0:
            break
        _, first = np.unique(new, axis=0, return_index=True)
        new = new[np.sort(first)]
        index[tuple((new - imin).T)] = np.arange(count, count + len(new))
        count += len(new)
        found.append(new)
        frontier = new
    coords = np.concatenate(found, axis=0)
    if len(coords) < 2:
        raise LatticeError(f"level {k} too coarse: anchored component is a single vertex")

    # adjacency from the positive directions, mirrored
    N = len(coords)
    nbr = np.full((N, 2 * n), -1, dtype=np.int64)
    for axis in range(n):
        step = dirs[2 * axis]
        cand = coords + step
        rel = cand - imin
        ok = np.all(cand <= imax, axis=1)
        j = np.full(N, -1, dtype=np.int64)
        j[ok] = index[tuple(rel[ok].T)]
        has = j >= 0
        if has.any():
            sel = np.flatnonzero(has)
            has[sel] = domain.segments_inside(coords[sel] * h, cand[sel] * h)
        a = np.flatnonzero(has)
        nbr[a, 2 * axis] = j[a]
        nbr[j[a], 2 * axis + 1] = a
    # compact: valid neighbors first, direction order preserved
    order = np.argsort(nbr < 0, axis=1, kind="stable")
    nbr = np.take_along_axis(nbr, order, axis=1)
    degree = (nbr >= 0).sum(axis=1)
    return Lattice(level=k, coords=coords, neighbors=nbr, degree=degree)


def vertex_measure_total(lattice: Lattice) -> float:
    return float(lattice.measure.sum())


# ---------------------------------------------------------------------------
# kernels


@dataclass(eq=False)
class KernelMatrix:
    """Row-stochastic kernel with a reference measure.

    ``defect`` is the relative detailed-balance defect
    sum |m_i Q_ij - m_j Q_ji| / sum m_i Q_ij.
    """

    matrix: sp.csr_matrix
    measure: np.ndarray
    defect: float = 0.0
    counts: np.ndarray | None = None
    trials: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def apply(self, f: np.ndarray) -> np.ndarray:
        """(Qf)(x) = sum_y Q(x, y) f(y); ``f`` may carry extra trailing columns."""
        return self.matrix @ f

    def push(self, mu: np.ndarray) -> np.ndarray:
        """Measure transport mu Q."""
        return self.matrix.T @ mu

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).reshape(-1)

    def inner(self, g: np.ndarray, f: np.ndarray) -> np.ndarray:
        """(g, f) in L^2(m); column-wise for 2-D inputs."""
        m = self.measure if g.ndim == 1 else self.measure[:, None]
        return (m * g * f).sum(axis=0)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def balance_defect(matrix, measure) -> float:
    Q = sp.csr_matrix(matrix)
    F = sp.diags(measure) @ Q
    diff = abs(F - F.T).sum()
    return float(diff / F.sum())


def transition_matrix(lattice: Lattice) -> KernelMatrix:
    if np.any(lattice.degree < 1):
        raise LatticeError("isolated vertex in lattice")
    N = lattice.size
    rows = np.repeat(np.arange(N), lattice.neighbors.shape[1])
    cols = lattice.neighbors.reshape(-1)
    keep = cols >= 0
    vals = (1.0 / lattice.degree)[rows[keep]]
    Q = sp.csr_matrix((vals, (rows[keep], cols[keep])), shape=(N, N))
    km = KernelMatrix(Q, lattice.measure.copy())
    km.defect = balance_defect(Q, km.measure)
    if km.defect > 1e-12 or np.max(np.abs(km.row_sums() - 1)) > 1e-12:
        raise LatticeError("lattice kernel failed the stochastic / detailed balance certificate")
    return km


def generator(lattice: Lattice, f: np.ndarray) -> np.ndarray:
    """L_k f at every vertex: mean over neighbors of f(y) - f(x)."""
    f = np.asarray(f, dtype=float)
    valid = lattice.neighbors >= 0
    fy = f[np.where(valid, lattice.neighbors, 0)]
    return ((fy - f[:, None]) * valid).sum(axis=1) / lattice.degree


def generator_apply(lattice: Lattice, f: np.ndarray, x: int) -> float:
    f = np.asarray(f, dtype=float)
    nb = lattice.neighbors[x]
    nb = nb[nb >= 0]
    return float((f[nb] - f[x]).sum() / len(nb))


def dirichlet_energy(lattice: Lattice, f: np.ndarray) -> float:
    """(1/4n) sum over ordered neighbor pairs of 2^{-(n-2)k} (f(x) - f(y))^2."""
    f = np.asarray(f, dtype=float)
    n, k = lattice.dim, lattice.level
    e = lattice.edges()
    sq = ((f[e[:, 0]] - f[e[:, 1]]) ** 2).sum()
    return float(2 * sq * 2.0 ** (-(n - 2) * k) / (4 * n))
