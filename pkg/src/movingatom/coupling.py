"""Reduced atom-field coupling of a moving two-level emitter.

The interaction of a moving dipole with a field mode (direction n, reduced
frequency x, linear polarization e_lambda) is, after dividing out the
per-photon field strength and the dipole matrix element, the dimensionless
scalar

    G = (e_d . e_lambda) * [1 - n.beta + eps*x]  +  (e_d . n)(e_lambda . beta)

for the velocity-dependent (Roentgen-corrected) model, and simply
G = e_d . e_lambda for the velocity-independent ("standard dipole") model.
The bracket collects the Doppler term -n.beta and the recoil term +eps*x;
the last product is the Roentgen cross term, nonzero only when the dipole
has a component along the propagation direction.

The emission amplitude evaluates this coupling at the post-emission momentum,
i.e. with beta shifted by the photon recoil:

    beta -> beta + 2*eps*x * n        (momentum shift)

Since the shift is along n, it is invisible to the transverse polarization
vectors (the cross term is shift-invariant), while the bracket obeys the
exact algebra

    1 - n.beta_shifted + eps*x = 1 - n.beta - eps*x

-- the recoil contribution reappears doubled and with opposite sign. That
sign flip is what the divergence comparison downstream hinges on.

Shapes: `beta` is (3,) or (..., 3); `x` is a scalar or an array whose shape
broadcasts against the leading beta dimensions. Dot products are written
componentwise so identical scalar arithmetic is performed regardless of the
array layout (this makes mixture/average equivalences exact, not just close).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PolarizationBasis, check_unit, polarization_basis

_KINDS = ("standard_dipole", "roentgen")


@dataclass(frozen=True)
class CouplingModel:
    """Which coupling is in force, and how it is evaluated.

    kind: "roentgen" (velocity-dependent) or "standard_dipole".
    include_recoil_term: keep the +eps*x piece of the bracket. Dropping it
        while keeping the momentum shift reproduces the observation that
        setting the explicit recoil term to zero does not remove the recoil
        physics -- the shift reintroduces it through the Doppler term.
    apply_momentum_shift: evaluate the coupling at the recoil-shifted
        momentum (the emission-amplitude convention) rather than at the
        pre-emission momentum.

    The standard-dipole model has no velocity structure at all, so both
    flags are forced off there; this keeps model comparisons honest.
    """

    kind: str = "roentgen"
    include_recoil_term: bool = True
    apply_momentum_shift: bool = True

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown coupling kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "standard_dipole":
            object.__setattr__(self, "include_recoil_term", False)
            object.__setattr__(self, "apply_momentum_shift", False)

    @classmethod
    def roentgen(cls) -> "CouplingModel":
        return cls(kind="roentgen", include_recoil_term=True, apply_momentum_shift=True)

    @classmethod
    def standard(cls) -> "CouplingModel":
        return cls(kind="standard_dipole")

    @property
    def label(self) -> str:
        if self.kind == "standard_dipole":
            return "standard"
        tags = []
        if not self.include_recoil_term:
            tags.append("no_recoil_term")
        if not self.apply_momentum_shift:
            tags.append("no_shift")
        return "roentgen" + ("" if not tags else "_" + "_".join(tags))


def _dot3(a, b):
    """Componentwise 3-vector dot; identical arithmetic for every layout."""
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def _as_beta(beta) -> np.ndarray:
    arr = np.asarray(beta, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != 3:
        raise ValueError(f"beta must have a trailing axis of length 3, got shape {arr.shape}")
    return arr


def shifted_velocity(beta, x, n, epsilon):
    """beta + 2*eps*x*n: the photon recoil in velocity units.

    hbar*k/(M*c) = (hbar*omega0/(2*M*c^2)) * 2x = 2*eps*x, directed along n.
    """
    beta = _as_beta(beta)
    x = np.asarray(x, dtype=float)
    shift = (2.0 * epsilon * x)[..., None] * np.asarray(n, dtype=float)
    return beta + shift


def _effective_velocity(model: CouplingModel, beta, x, n, epsilon):
    # Skipping the no-op shift keeps "shift off" and "epsilon = 0" bitwise identical.
    if model.apply_momentum_shift and epsilon != 0.0:
        return shifted_velocity(beta, x, n, epsilon)
    return _as_beta(beta)


def _bracket(model: CouplingModel, beta_eff, x, n, epsilon):
    """Doppler-plus-recoil factor multiplying e_d . e_lambda (roentgen only)."""
    doppler = _dot3(beta_eff, np.broadcast_to(np.asarray(n, dtype=float), beta_eff.shape))
    if model.include_recoil_term:
        return 1.0 - doppler + epsilon * np.asarray(x, dtype=float)
    return 1.0 - doppler


def reduced_coupling(model: CouplingModel, beta, x, n, e_lambda, e_d, epsilon):
    """The dimensionless coupling scalar G for one polarization vector."""
    n = check_unit(n, "n")
    e_lambda = np.asarray(e_lambda, dtype=float)
    e_d = check_unit(e_d, "e_d")
    beta = _as_beta(beta)
    ed_dot_el = float(np.dot(e_d, e_lambda))
    if model.kind == "standard_dipole":
        shape = np.broadcast(beta[..., 0], np.asarray(x, dtype=float)).shape
        return np.full(shape, ed_dot_el) if shape else np.float64(ed_dot_el)
    beta_eff = _effective_velocity(model, beta, x, n, epsilon)
    bracket = _bracket(model, beta_eff, x, n, epsilon)
    cross = float(np.dot(e_d, n)) * _dot3(beta_eff, np.broadcast_to(e_lambda, beta_eff.shape))
    return ed_dot_el * bracket + cross


def polarization_sum(model: CouplingModel, beta, x, n, e_d, epsilon,
                     method: str = "closed_form",
                     basis: PolarizationBasis | None = None):
    """Sum of G^2 over the two transverse polarizations.

    Two independent evaluation routes are kept on purpose:

    * "closed_form": G_lambda = e_lambda . v with
      v = bracket * e_d + (e_d . n) * beta_eff, so the transverse sum is
      |v|^2 - (n . v)^2. No polarization basis is ever constructed.
    * "basis_sum": explicit G_1^2 + G_2^2 over a (possibly caller-supplied,
      arbitrarily rotated) transverse basis.

    Agreement of the two routes is a structural test of the coupling algebra;
    the closed form is the fast path used by the spectral kernels.
    """
    n = check_unit(n, "n")
    e_d = check_unit(e_d, "e_d")
    if method == "basis_sum":
        if basis is None:
            basis = polarization_basis(n)
        g1 = reduced_coupling(model, beta, x, n, basis.e1, e_d, epsilon)
        g2 = reduced_coupling(model, beta, x, n, basis.e2, e_d, epsilon)
        return g1 * g1 + g2 * g2
    if method != "closed_form":
        raise ValueError(f"unknown polarization_sum method {method!r}")

    beta = _as_beta(beta)
    if model.kind == "standard_dipole":
        ed_n = float(np.dot(e_d, n))
        value = 1.0 - ed_n * ed_n
        shape = np.broadcast(beta[..., 0], np.asarray(x, dtype=float)).shape
        return np.full(shape, value) if shape else np.float64(value)
    beta_eff = _effective_velocity(model, beta, x, n, epsilon)
    bracket = _bracket(model, beta_eff, x, n, epsilon)
    ed_n = float(np.dot(e_d, n))
    v = np.asarray(bracket)[..., None] * e_d + ed_n * beta_eff
    nb = np.broadcast_to(np.asarray(n, dtype=float), v.shape)
    nv = _dot3(nb, v)
    return _dot3(v, v) - nv * nv
