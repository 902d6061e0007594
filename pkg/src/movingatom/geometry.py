"""Emission directions, polarization bases, and the dipole axis.

Conventions: all vectors are plain float64 numpy arrays of shape (3,).
A polarization basis is a right-handed orthonormal triad (e1, e2, n) with
n the propagation direction; both polarization vectors are real (linear
polarizations suffice for the dipole coupling used here).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_UNIT_TOL = 1e-12


def as_unit(v) -> np.ndarray:
    """Return v normalized to unit length as a float64 array of shape (3,)."""
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {arr.shape}")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return arr / norm


def check_unit(v: np.ndarray, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if abs(float(np.linalg.norm(arr)) - 1.0) > _UNIT_TOL:
        raise ValueError(f"{name} is not a unit vector (|{name}| - 1 exceeds {_UNIT_TOL:g})")
    return arr


@dataclass(frozen=True, eq=False)
class PolarizationBasis:
    """Right-handed orthonormal triad: e1 x e2 = n, both e's transverse."""

    e1: np.ndarray
    e2: np.ndarray
    n: np.ndarray

    def __post_init__(self) -> None:
        for name in ("e1", "e2", "n"):
            check_unit(getattr(self, name), name)
        pairs = (("e1", "e2"), ("e1", "n"), ("e2", "n"))
        for a, b in pairs:
            if abs(float(np.dot(getattr(self, a), getattr(self, b)))) > _UNIT_TOL:
                raise ValueError(f"{a} . {b} exceeds {_UNIT_TOL:g}: basis not orthogonal")
        if float(np.dot(np.cross(self.e1, self.e2), self.n)) < 0.0:
            raise ValueError("basis is left-handed (e1 x e2 . n < 0)")


def polarization_basis(n, preferred=None) -> PolarizationBasis:
    """Build a transverse basis for propagation direction n.

    If `preferred` is given, e1 is its transverse part; a `preferred` that is
    already a unit vector perpendicular to n is used as e1 unchanged, so
    callers can pin the gauge exactly. `preferred` parallel to n is rejected.
    """
    n = check_unit(n, "n")
    if preferred is not None:
        p = np.asarray(preferred, dtype=float)
        dot = float(np.dot(p, n))
        transverse = p - dot * n
        if float(np.linalg.norm(transverse)) < 1e-10:
            raise ValueError("preferred direction is (nearly) parallel to n")
        if abs(dot) < _UNIT_TOL and abs(float(np.linalg.norm(p)) - 1.0) < _UNIT_TOL:
            e1 = p  # exact passthrough: the caller's gauge choice survives bit-for-bit
        else:
            e1 = transverse / float(np.linalg.norm(transverse))
    else:
        # Start from the coordinate axis least aligned with n; for axis-aligned
        # n this yields the canonical companion axes.
        k = int(np.argmin(np.abs(n)))
        h = np.zeros(3)
        h[k] = 1.0
        transverse = h - float(np.dot(h, n)) * n
        e1 = transverse / float(np.linalg.norm(transverse))
    e2 = np.cross(n, e1)
    return PolarizationBasis(e1=e1, e2=e2, n=n)


def rotate_basis(basis: PolarizationBasis, angle: float) -> PolarizationBasis:
    """Rotate the transverse pair about n by `angle` (radians).

    This is the gauge freedom of the polarization sum: physical results may
    not depend on it.
    """
    c, s = np.cos(angle), np.sin(angle)
    e1 = c * basis.e1 + s * basis.e2
    e2 = -s * basis.e1 + c * basis.e2
    # Renormalize against rounding drift so invariants hold for any chain of rotations.
    e1 = e1 / float(np.linalg.norm(e1))
    e2 = e2 - float(np.dot(e2, e1)) * e1
    e2 = e2 / float(np.linalg.norm(e2))
    return PolarizationBasis(e1=e1, e2=e2, n=basis.n)


def direction_from_angles(theta: float, phi: float, axis=None) -> np.ndarray:
    """Unit vector at polar angle theta from `axis` (default z), azimuth phi.

    The azimuth is measured in the plane transverse to `axis`, with phi = 0
    along the deterministic companion axis produced by polarization_basis.
    """
    if axis is None:
        axis = np.array([0.0, 0.0, 1.0])
    axis = check_unit(axis, "axis")
    frame = polarization_basis(axis)
    st = np.sin(theta)
    return np.cos(theta) * axis + st * (np.cos(phi) * frame.e1 + np.sin(phi) * frame.e2)
