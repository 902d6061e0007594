"""Physical inputs and the internal dimensionless parameterization.

Everything downstream of this module is dimensionless:

    x      = omega / omega0          emitted frequency in units of the transition
    beta   = p / (M c)               atomic velocity (vector)
    delta  = n . beta                Doppler projection on the emission direction
    epsilon= hbar omega0 / (2 M c^2) recoil parameter (photon recoil energy over
                                     transition energy); epsilon = 0 is the
                                     infinite-mass limit
    gamma_tilde = gamma0 / omega0    natural linewidth in units of omega0

Physical units exist only at the CLI boundary; converting early keeps the
kernel a three-parameter family and makes property tests exact.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

# CODATA 2018 exact / recommended values.
HBAR = 1.054571817e-34  # J s
C_LIGHT = 299792458.0  # m / s (exact)
EPSILON_0 = 8.8541878128e-12  # F / m


class ParameterError(ValueError):
    """A physical or dimensionless parameter failed validation."""


@dataclass(frozen=True)
class PhysicalInput:
    """Laboratory-unit description of the emitter.

    dipole_moment is optional; it is only needed for the absolute
    normalization constant (see :func:`absolute_normalization`).
    Set ``infinite_mass=True`` to request the recoil-free limit explicitly
    (the stored mass is then ignored for the recoil parameter).
    """

    mass: float  # kg
    omega0: float  # rad/s
    gamma0: float  # rad/s
    dipole_moment: float | None = None  # C m
    infinite_mass: bool = False

    def __post_init__(self) -> None:
        for name in ("mass", "omega0", "gamma0"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ParameterError(f"PhysicalInput.{name} must be a positive finite number, got {value!r}")
        if self.dipole_moment is not None and not (math.isfinite(self.dipole_moment) and self.dipole_moment > 0):
            raise ParameterError(f"PhysicalInput.dipole_moment must be positive if given, got {self.dipole_moment!r}")
        if self.gamma0 >= self.omega0:
            # Not fatal -- the formulas stay meaningful -- but every narrow-line
            # approximation made downstream is suspect in this regime.
            warnings.warn(
                f"gamma0 = {self.gamma0:g} >= omega0 = {self.omega0:g}: "
                "outside the narrow-line regime; spectral results are formal only",
                stacklevel=2,
            )


@dataclass(frozen=True)
class DimensionlessParams:
    """The two dimensionless atom parameters every kernel needs."""

    epsilon: float
    gamma_tilde: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ParameterError(f"epsilon must be >= 0, got {self.epsilon!r}")
        if not (math.isfinite(self.gamma_tilde) and self.gamma_tilde > 0):
            raise ParameterError(f"gamma_tilde must be > 0, got {self.gamma_tilde!r}")


def to_dimensionless(inp: PhysicalInput) -> DimensionlessParams:
    """Reduce a :class:`PhysicalInput` to (epsilon, gamma_tilde)."""
    if inp.infinite_mass:
        eps = 0.0
    else:
        eps = HBAR * inp.omega0 / (2.0 * inp.mass * C_LIGHT**2)
    return DimensionlessParams(epsilon=eps, gamma_tilde=inp.gamma0 / inp.omega0)


def from_dimensionless(params: DimensionlessParams, omega0: float,
                       dipole_moment: float | None = None) -> PhysicalInput:
    """Invert :func:`to_dimensionless` given the frequency scale omega0.

    epsilon = 0 maps to the explicit infinite-mass flag (the mass field is
    then a placeholder and must not be used).
    """
    if not (math.isfinite(omega0) and omega0 > 0):
        raise ParameterError(f"omega0 must be positive, got {omega0!r}")
    if params.epsilon == 0.0:
        return PhysicalInput(mass=1.0, omega0=omega0, gamma0=params.gamma_tilde * omega0,
                             dipole_moment=dipole_moment, infinite_mass=True)
    mass = HBAR * omega0 / (2.0 * params.epsilon * C_LIGHT**2)
    return PhysicalInput(mass=mass, omega0=omega0,
                         gamma0=params.gamma_tilde * omega0,
                         dipole_moment=dipole_moment)


@dataclass(frozen=True)
class Normalization:
    """Multiplicative constant attached to spectral outputs.

    The dimensionless directional emission density is

        dP/(dOmega dx) = kappa * w(x),    w(x) = x^2 <rho(x)>,

    where rho is the spectral kernel (amplitudes module) and the mode-density
    factor V omega^2/(2 pi c)^3 has been folded in; the quantization volume V
    cancels between the per-mode probability and the mode count.

    Two conventions are offered:

    * reference(params): kappa = 3 gamma_tilde / (16 pi^2). In this scale the
      rest-atom, infinite-mass, velocity-independent-coupling case integrates
      to total emission probability 1 over frequency and the full sphere
      (narrow-line evaluation of the frequency integral).
    * absolute(physical): kappa = d^2 omega0^2 / (16 pi^3 eps0 hbar c^3),
      the literal prefactor in SI units. When gamma0 equals the standard
      rest-atom rate d^2 omega0^3/(3 pi eps0 hbar c^3) the two agree.
    """

    kappa: float
    convention: str

    @classmethod
    def reference(cls, params: DimensionlessParams) -> "Normalization":
        return cls(kappa=3.0 * params.gamma_tilde / (16.0 * math.pi**2), convention="reference")

    @classmethod
    def absolute(cls, inp: PhysicalInput) -> "Normalization":
        if inp.dipole_moment is None:
            raise ParameterError("absolute normalization requires dipole_moment")
        kappa = inp.dipole_moment**2 * inp.omega0**2 / (
            16.0 * math.pi**3 * EPSILON_0 * HBAR * C_LIGHT**3)
        return cls(kappa=kappa, convention="absolute")


def rest_frame_decay_rate(dipole_moment: float, omega0: float) -> float:
    """Standard rest-atom spontaneous rate d^2 w0^3 / (3 pi eps0 hbar c^3).

    Provided for cross-checks only; the engine never derives gamma0 itself
    (the linewidth of the moving, finite-mass atom is an input).
    """
    return dipole_moment**2 * omega0**3 / (3.0 * math.pi * EPSILON_0 * HBAR * C_LIGHT**3)
