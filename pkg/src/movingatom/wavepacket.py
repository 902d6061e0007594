"""Center-of-mass momentum distributions and averages over them.

Only the modulus squared of the momentum-space wavepacket enters any
observable computed by this package, so a distribution here is exactly
that: a probability density over the dimensionless velocity beta = p/(Mc).
No phase information is stored -- line shapes produced by averaging are
Doppler statistics, not interference.

Three variants cover the use cases:

* PointMass(beta):       a single velocity (the "cold atom" reference);
* GaussianPacket(mean, covariance):  full 3D Gaussian in beta;
* TabulatedProjection(delta, weights, direction):  an already-projected 1D
  distribution of Doppler shifts delta = n . beta for one fixed direction,
  e.g. read from a measured table.

Because the perpendicular-geometry kernels depend on beta only through
delta, the 1D projection of a distribution onto the emission direction is
the workhorse object; `project` produces it exactly for the analytic
variants.

Averages use tensorized Gauss-Hermite quadrature for Gaussians (exact for
polynomial integrands, spectrally accurate for smooth kernels) with an
error estimate obtained by doubling the order. The reduction is always
`weighted_sum`, i.e. np.sum(weights * values): a mixture of point-mass
results over the same nodes with the same weights is therefore *bitwise*
equal to the expectation -- pure-state averaging and mixed-state averaging
coincide identically, not just approximately.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .geometry import check_unit
from .quadrature import NumericalError

_WEIGHT_TOL = 1e-10


def weighted_sum(weights: np.ndarray, values: np.ndarray) -> float:
    """The one reduction used for every discrete average in this package.

    Kept as a named function so that "average over nodes" is the identical
    floating-point operation everywhere it occurs (see module docstring).
    """
    return float(np.sum(weights * values))


@dataclass(frozen=True, eq=False)
class PointMass:
    beta: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.beta, dtype=float)
        if arr.shape != (3,) or not np.all(np.isfinite(arr)):
            raise ValueError("PointMass.beta must be a finite 3-vector")
        object.__setattr__(self, "beta", arr)


@dataclass(frozen=True, eq=False)
class GaussianPacket:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if mean.shape != (3,):
            raise ValueError("GaussianPacket.mean must be a 3-vector")
        if cov.shape != (3, 3):
            raise ValueError("GaussianPacket.covariance must be 3x3")
        if not np.allclose(cov, cov.T, atol=1e-14, rtol=1e-10):
            raise ValueError("covariance must be symmetric")
        eigvals = np.linalg.eigvalsh(0.5 * (cov + cov.T))
        floor = -1e-12 * max(1.0, float(np.max(np.abs(eigvals))))
        if np.any(eigvals < floor):
            raise ValueError(f"covariance is not positive semidefinite (eigenvalues {eigvals})")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", 0.5 * (cov + cov.T))

    @classmethod
    def isotropic(cls, mean, sigma: float) -> "GaussianPacket":
        return cls(mean=np.asarray(mean, dtype=float), covariance=(sigma**2) * np.eye(3))

    @classmethod
    def along_direction(cls, mean, sigma: float, direction) -> "GaussianPacket":
        """Rank-one packet: spread sigma along `direction` only."""
        d = check_unit(direction, "direction")
        return cls(mean=np.asarray(mean, dtype=float),
                   covariance=(sigma**2) * np.outer(d, d))


@dataclass(frozen=True, eq=False)
class TabulatedProjection:
    delta: np.ndarray
    weights: np.ndarray
    direction: np.ndarray

    def __post_init__(self) -> None:
        delta = np.asarray(self.delta, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        direction = check_unit(self.direction, "direction")
        if delta.ndim != 1 or delta.size == 0 or weights.shape != delta.shape:
            raise ValueError("delta and weights must be matching nonempty 1D arrays")
        if np.any(weights < 0):
            raise ValueError("tabulated weights must be non-negative")
        total = float(np.sum(weights))
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"tabulated weights must sum to 1 within {_WEIGHT_TOL:g}; got {total!r}")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "direction", direction)


MomentumDistribution = Union[PointMass, GaussianPacket, TabulatedProjection]


@dataclass(frozen=True, eq=False)
class ProjectedDistribution:
    """1D distribution of the Doppler projection delta = n . beta.

    nodes/weights form a quadrature for averaging functions of delta
    (weights sum to 1); `density` is the analytic pdf when one exists
    (Gaussian case), used by adaptive line-shape integration. sigma = 0
    marks a point mass.
    """

    kind: str
    mean: float
    sigma: float
    nodes: np.ndarray
    weights: np.ndarray
    density: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        total = float(np.sum(self.weights))
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"projected weights must sum to 1 within {_WEIGHT_TOL:g}; got {total!r}")


def _hermite_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    return np.polynomial.hermite.hermgauss(order)


def project(dist: MomentumDistribution, n, order: int = 40) -> ProjectedDistribution:
    """Exact 1D marginal of `dist` along the unit vector n."""
    n = check_unit(n, "n")
    if isinstance(dist, PointMass):
        mean = float(np.dot(n, dist.beta))
        return ProjectedDistribution(kind="point", mean=mean, sigma=0.0,
                                     nodes=np.array([mean]), weights=np.array([1.0]))
    if isinstance(dist, GaussianPacket):
        mean = float(np.dot(n, dist.mean))
        var = float(n @ dist.covariance @ n)
        var = max(var, 0.0)
        sigma = np.sqrt(var)
        if sigma == 0.0:
            return ProjectedDistribution(kind="point", mean=mean, sigma=0.0,
                                         nodes=np.array([mean]), weights=np.array([1.0]))
        t, w = _hermite_rule(order)
        nodes = mean + np.sqrt(2.0) * sigma * t
        weights = w / np.sqrt(np.pi)

        def density(delta, _mean=mean, _sigma=sigma):
            z = (np.asarray(delta, dtype=float) - _mean) / _sigma
            return np.exp(-0.5 * z * z) / (_sigma * np.sqrt(2.0 * np.pi))

        return ProjectedDistribution(kind="gaussian", mean=mean, sigma=sigma,
                                     nodes=nodes, weights=weights, density=density)
    if isinstance(dist, TabulatedProjection):
        if not np.allclose(dist.direction, n, atol=1e-12, rtol=0.0):
            raise ValueError("tabulated distribution was measured along a different direction")
        mean = weighted_sum(dist.weights, dist.delta)
        var = weighted_sum(dist.weights, (dist.delta - mean) ** 2)
        return ProjectedDistribution(kind="tabulated", mean=mean, sigma=float(np.sqrt(max(var, 0.0))),
                                     nodes=dist.delta, weights=dist.weights)
    raise TypeError(f"unknown distribution type {type(dist).__name__}")


def gaussian_nodes(dist: GaussianPacket, order: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Hermite nodes (N, 3) and weights (N,) for a 3D Gaussian.

    Degenerate covariance directions (zero eigenvalue) are dropped from the
    tensor product, so a rank-one packet costs `order` nodes, not order^3.
    Node order is deterministic.
    """
    if not isinstance(dist, GaussianPacket):
        raise TypeError("gaussian_nodes needs a GaussianPacket")
    eigvals, eigvecs = np.linalg.eigh(dist.covariance)
    eigvals = np.clip(eigvals, 0.0, None)
    scale = float(np.max(eigvals))
    active = eigvals > (scale * 1e-13 if scale > 0 else np.inf)
    if not np.any(active):
        return dist.mean[None, :].copy(), np.array([1.0])
    idx = np.nonzero(active)[0]
    t, w = _hermite_rule(order)
    grids = np.meshgrid(*([t] * idx.size), indexing="ij")
    tpts = np.stack([g.ravel() for g in grids], axis=-1)  # (N, d)
    wgrids = np.meshgrid(*([w] * idx.size), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    weights = weights / np.pi ** (idx.size / 2.0)
    axes = eigvecs[:, idx] * np.sqrt(2.0 * eigvals[idx])  # (3, d)
    nodes = dist.mean + tpts @ axes.T
    return nodes, weights


@dataclass(frozen=True)
class ExpectationResult:
    value: float
    error: float


def _checked_eval(f, nodes: np.ndarray) -> np.ndarray:
    values = np.asarray(f(nodes), dtype=float)
    if values.shape != nodes.shape[:-1] and values.shape != (nodes.shape[0],):
        raise ValueError("integrand must map (N, 3) velocity nodes to (N,) values")
    if not np.all(np.isfinite(values)):
        bad = nodes[~np.isfinite(values)][0]
        raise NumericalError(f"integrand not finite at velocity node {bad.tolist()}")
    return values


def expectation(dist: MomentumDistribution, f, order: int = 40,
                with_error: bool = True) -> ExpectationResult:
    """E[f(beta)] over the distribution, with an order-doubling error bar.

    f must be vectorized over velocity nodes: f((N, 3) array) -> (N,).
    For PointMass the value is exact; for TabulatedProjection it is the
    weighted sum over the table (also exact given the table).
    """
    if isinstance(dist, PointMass):
        value = float(np.asarray(f(dist.beta[None, :]))[0])
        if not np.isfinite(value):
            raise NumericalError(f"integrand not finite at velocity {dist.beta.tolist()}")
        return ExpectationResult(value=value, error=0.0)
    if isinstance(dist, TabulatedProjection):
        nodes = dist.delta[:, None] * dist.direction
        values = _checked_eval(f, nodes)
        return ExpectationResult(value=weighted_sum(dist.weights, values), error=0.0)
    if isinstance(dist, GaussianPacket):
        nodes, weights = gaussian_nodes(dist, order)
        values = _checked_eval(f, nodes)
        value = weighted_sum(weights, values)
        error = 0.0
        if with_error:
            nodes2, weights2 = gaussian_nodes(dist, 2 * order)
            values2 = _checked_eval(f, nodes2)
            error = abs(weighted_sum(weights2, values2) - value)
        return ExpectationResult(value=value, error=error)
    raise TypeError(f"unknown distribution type {type(dist).__name__}")
