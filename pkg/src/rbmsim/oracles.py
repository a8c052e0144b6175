"""Independent reference values: image-method densities, spectral survival
series, exact chain laws and a cell-discretized myopic kernel."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import ndtr

from .domains import Box, Domain
from .lattice import KernelMatrix, balance_defect
from .myopic import MyopicConfig, killed_segments
from .rng import Stream

DEFAULT_IMAGES = 10
DEFAULT_TERMS = 25
_TAIL = 40.0  # truncated terms are below exp(-_TAIL)


def _image_count(var: float, terms: int | None) -> int:
    """Images m = -M..M; enough that the Gaussian tail beyond them is negligible."""
    if terms is not None:
        return int(terms)
    return max(DEFAULT_IMAGES, int(np.ceil(np.sqrt(2 * _TAIL * var) / 2)) + 1)


def _mode_count(t: float, terms: int | None) -> int:
    """Odd modes j = 1..2N-1; enough that exp(-j^2 pi^2 t / 2) is negligible past them."""
    if terms is not None:
        return int(terms)
    return max(DEFAULT_TERMS, int(np.ceil((np.sqrt(2 * _TAIL / t) / np.pi + 1) / 2)))


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class DensityOracle:
    """Reflected heat kernel on [0, 1] or an axis box.

    ``speed`` is the variance rate per coordinate: 1 for generator ½Δ,
    1/n for the lattice normalization (1/2n)Δ.
    """

    lower: tuple = (0.0,)
    upper: tuple = (1.0,)
    speed: float = 1.0
    terms: int | None = None

    def density(self, t, x0, y):
        return reflected_density_box(t, x0, y, self.speed, self.terms, self.lower, self.upper)

    def cdf_1d(self, t, x0, y, axis: int = 0):
        lo, hi = self.lower[axis], self.upper[axis]
        w = hi - lo
        return reflected_cdf_1d(t / w ** 2, (x0 - lo) / w, (np.asarray(y) - lo) / w, self.speed, self.terms)


def _gauss(z, var):
    return np.exp(-z * z / (2 * var)) / np.sqrt(2 * np.pi * var)


def reflected_density_1d(t: float, x0: float, y, speed: float = 1.0, terms: int | None = None):
    """Transition density of reflected Brownian motion on [0, 1] by the method of images."""
    if t <= 0:
        raise OracleError("t must be positive")
    y = np.asarray(y, dtype=float)
    var = speed * t
    M = _image_count(var, terms)
    m = np.arange(-M, M + 1).reshape((-1,) + (1,) * y.ndim)
    return (_gauss(y - x0 + 2 * m, var) + _gauss(y + x0 + 2 * m, var)).sum(axis=0)


def reflected_cdf_1d(t: float, x0: float, y, speed: float = 1.0, terms: int | None = None):
    """Distribution function of the reflected position on [0, 1]; clipped outside."""
    if t <= 0:
        raise OracleError("t must be positive")
    y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    sd = np.sqrt(speed * t)
    M = _image_count(speed * t, terms)
    m = np.arange(-M, M + 1).reshape((-1,) + (1,) * y.ndim)
    val = (ndtr((y - x0 + 2 * m) / sd) - ndtr((-x0 + 2 * m) / sd)
           + ndtr((y + x0 + 2 * m) / sd) - ndtr((x0 + 2 * m) / sd)).sum(axis=0)
    return np.clip(val, 0.0, 1.0)


def reflected_density_box(t, x0, y, speed: float = 1.0, terms: int | None = None, lower=None, upper=None):
    """Product of 1-D reflected densities; ``y`` may be (n,) or (m, n)."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    y = np.asarray(y, dtype=float)
    n = len(x0)
    lower = np.zeros(n) if lower is None else np.broadcast_to(np.asarray(lower, float), (n,))
    upper = np.ones(n) if upper is None else np.broadcast_to(np.asarray(upper, float), (n,))
    out = 1.0
    for i in range(n):
        w = upper[i] - lower[i]
        yi = (y[..., i] - lower[i]) / w
        out = out * reflected_density_1d(t / w ** 2, (x0[i] - lower[i]) / w, yi, speed, terms) / w
    return out


def box_density_oracle(domain: Domain, speed: float = 1.0, terms: int | None = None) -> DensityOracle:
    if not isinstance(domain, Box):
        raise OracleError("reflected densities are only available for box domains")
    return DensityOracle(tuple(domain.lo), tuple(domain.hi), speed, terms)


def killed_survival_interval(t: float, x, terms: int | None = None):
    """P_x(Brownian motion stays in (0, 1) up to time t), spectral series over odd modes.

    ``terms`` counts odd modes j = 1, 3, ..., 2*terms - 1; by default it is
    chosen from ``t`` so the truncation error is negligible.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0) or np.any(x >= 1):
        raise OracleError("x must lie in (0, 1)")
    if t <= 0:
        raise OracleError("t must be positive")
    j = (2 * np.arange(_mode_count(t, terms)) + 1).reshape((-1,) + (1,) * x.ndim)
    return (4 / (j * np.pi) * np.sin(j * np.pi * x) * np.exp(-j ** 2 * np.pi ** 2 * t / 2)).sum(axis=0)


def killed_density_interval(t: float, x, y, terms: int = 200):
    """Sub-probability density of the killed motion on (0, 1)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    j = np.arange(1, terms + 1).reshape((-1,) + (1,) * np.broadcast(x, y).ndim)
    return 2 * (np.sin(j * np.pi * x) * np.sin(j * np.pi * y) * np.exp(-j ** 2 * np.pi ** 2 * t / 2)).sum(axis=0)


def chain_marginal(kernel: KernelMatrix, initial, steps: int) -> np.ndarray:
    """Law after ``steps`` transitions from the initial measure (row vector)."""
    mu = np.asarray(initial, dtype=float)
    if mu.shape != (kernel.size,):
        raise OracleError(f"initial measure has shape {mu.shape}, kernel size is {kernel.size}")
    if steps < 0:
        raise OracleError("steps must be nonnegative")
    for _ in range(steps):
        mu = kernel.push(mu)
    return mu


# ---------------------------------------------------------------------------
# discretized myopic kernel


def _interval_cells(domain: Domain, cells: int):
    if domain.dim != 1:
        raise OracleError("the discretized myopic kernel is implemented for intervals")
    lo, hi = float(domain.lo[0]), float(domain.hi[0])
    edges = np.linspace(lo, hi, cells + 1)
    return lo, hi, edges, 0.5 * (edges[:-1] + edges[1:])


def discretized_myopic_kernel(
    domain: Domain,
    cells: int = 64,
    dt: float = 0.1,
    budget: int = 4000,
    method: str = "mc",
    config: MyopicConfig | None = None,
    terms: int = 200,
) -> KernelMatrix:
    """Cell-to-cell kernel of one conditioned segment from each cell center.

    ``method="mc"``: ``budget`` killed segments per cell; surviving endpoints
    are binned, the reference measure is (survival fraction) x (cell length).
    ``counts`` and ``trials`` are kept for resampling-based error bars.
    ``method="quadrature"``: exact cell integrals of the spectral killed
    density on the interval.
    """
    lo, hi, edges, centers = _interval_cells(domain, cells)
    h = (hi - lo) / cells
    if method == "quadrature":
        u = (centers - lo) / (hi - lo)
        a, b = (edges[:-1] - lo) / (hi - lo), (edges[1:] - lo) / (hi - lo)
        tau = dt / (hi - lo) ** 2
        j = np.arange(1, terms + 1)[:, None]
        decay = np.exp(-j ** 2 * np.pi ** 2 * tau / 2)
        left = np.sin(j * np.pi * u) * decay  # (J, cells)
        right = (np.cos(j * np.pi * a) - np.cos(j * np.pi * b)) / (j * np.pi)
        mass = 2 * left.T @ right  # mass[i, c] = P(endpoint in cell c, survived)
        mass = np.clip(mass, 0.0, None)
        surv = mass.sum(axis=1)
        Q = mass / surv[:, None]
        measure = surv * h
        km = KernelMatrix(sp.csr_matrix(Q), measure)
        km.defect = balance_defect(Q, measure)
        return km
    if method != "mc":
        raise OracleError(f"unknown method {method!r}")
    config = config or MyopicConfig()
    stream = Stream(config.seed, "kernel")
    counts = np.zeros((cells, cells), dtype=np.int64)
    for i, c in enumerate(centers):
        ids = np.arange(budget, dtype=np.uint64)
        ok, end, _ = killed_segments(domain, np.full((budget, 1), c), dt, config.substeps, config.bridge,
                                     stream, i, 0, ids)
        cell = np.clip(((end[ok, 0] - lo) / h).astype(np.int64), 0, cells - 1)
        counts[i] = np.bincount(cell, minlength=cells)
    return kernel_from_counts(counts, budget, h)


def kernel_from_counts(counts: np.ndarray, trials, cell_volume: float) -> KernelMatrix:
    surv = counts.sum(axis=1)
    if np.any(surv == 0):
        raise OracleError("a cell had no surviving segment; increase the budget")
    trials = np.broadcast_to(np.asarray(trials), surv.shape)
    Q = counts / surv[:, None]
    measure = surv / trials * cell_volume
    km = KernelMatrix(sp.csr_matrix(Q), measure, counts=counts, trials=np.asarray(trials))
    km.defect = balance_defect(Q, measure)
    return km


def oracle_csv(t_values, x_values, func) -> str:
    """Tabulate ``func(t, x)`` as CSV rows (t, x, value)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "value"])
    for t in t_values:
        for x in x_values:
            w.writerow([repr(float(t)), repr(float(x)), repr(float(func(t, x)))])
    return buf.getvalue()
