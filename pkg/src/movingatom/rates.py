"""Golden-rule emission rates and the order-of-limits demonstration.

The per-direction golden-rule rate inserts the energy-conserving frequency
x* -- the positive root of the pole-detuning condition

    eps*x^2 + (1 - delta)*x - 1 = 0

-- into the squared coupling, weighted by the mode density and the Jacobian
of the energy delta-function:

    dGamma/dOmega  propto  x*^3 * sum_lambda G_lambda(beta_eff, x*)^2
                           / (1 - delta + 2*eps*x*).

(The x*^3 collects the per-photon field strength, proportional to x, and the
x^2 mode density; the denominator is |d/dx| of the delta-function argument.)

Two variants differ only in where the coupling is evaluated:

* "unshifted": at the pre-emission velocity beta -- the textbook insertion;
* "shifted":   at beta + 2*eps*x* n, the recoil-shifted velocity that the
  solved emission amplitude actually contains.

They coincide exactly at eps = 0 and differ at relative order eps otherwise;
which one is "right" is precisely the question the order-of-limits table
answers: evaluating the energy constraint first (either variant) always
yields a finite rate that converges as eps -> 0, while summing over modes
first at fixed eps > 0 produces a cutoff-dependent quantity growing like
Lambda^2 -- the infinite-mass limit and the mode sum do not commute.

Rates are reported in normalized units where the reference configuration
(beta = 0, eps = 0, emission perpendicular to the dipole) has rate 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .amplitudes import perpendicular_kernel
from .coupling import CouplingModel, polarization_sum, shifted_velocity
from .geometry import check_unit
from .units import DimensionlessParams, Normalization

VARIANTS = ("unshifted", "shifted")


@dataclass(frozen=True)
class ResonanceRoot:
    """Energy-conserving emission frequency and its back-substitution residual."""

    x_star: float
    residual: float

    def __post_init__(self) -> None:
        if not (self.x_star > 0 and math.isfinite(self.x_star)):
            raise ValueError(f"resonance root must be positive and finite, got {self.x_star!r}")


def resonance_frequency(delta: float, epsilon: float) -> ResonanceRoot:
    """Positive root of eps*x^2 + (1 - delta)*x - 1 = 0.

    Uses the cancellation-free form x* = 2 / ((1-delta) + sqrt((1-delta)^2
    + 4 eps)), which is exact in the eps -> 0 limit (x* = 1/(1-delta)) and
    loses no significance for small eps. Requires either eps > 0 or a
    sub-luminal projection delta < 1.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    om = 1.0 - delta
    disc = om * om + 4.0 * epsilon
    root = om + math.sqrt(disc)
    if root <= 0.0:
        raise ValueError(f"no positive emission frequency for delta={delta!r}, eps={epsilon!r}")
    x_star = 2.0 / root
    residual = abs(x_star * (om + epsilon * x_star) - 1.0)
    return ResonanceRoot(x_star=x_star, residual=residual)


@dataclass(frozen=True)
class RateResult:
    variant: str
    value: float
    x_star: float
    delta: float
    model_label: str


def golden_rule_rates(variant: str, beta, n, e_d, params: DimensionlessParams,
                      model: CouplingModel | None = None) -> np.ndarray:
    """Vectorized normalized rate over a batch of velocities, shape (..., 3).

    The workhorse behind `golden_rule_rate` and the angular-pattern average;
    the resonance root, shift, coupling, and Jacobian are all evaluated
    elementwise with the same stable formulas as the scalar path.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if model is None:
        model = CouplingModel.roentgen()
    n = check_unit(n, "n")
    e_d = check_unit(e_d, "e_d")
    beta = np.asarray(beta, dtype=float)
    if beta.shape[-1] != 3:
        raise ValueError("beta must have 3 components along the trailing axis")
    delta = beta[..., 0] * n[0] + beta[..., 1] * n[1] + beta[..., 2] * n[2]
    om = 1.0 - delta
    root = om + np.sqrt(om * om + 4.0 * params.epsilon)
    if np.any(root <= 0.0):
        raise ValueError("no positive emission frequency for some velocity node")
    x_star = 2.0 / root

    beta_eff = beta
    if variant == "shifted" and params.epsilon != 0.0:
        beta_eff = shifted_velocity(beta, x_star, n, params.epsilon)
    eval_model = CouplingModel(kind=model.kind,
                               include_recoil_term=model.include_recoil_term,
                               apply_momentum_shift=False)
    gsq = polarization_sum(eval_model, beta_eff, x_star, n, e_d, params.epsilon)
    jacobian = om + 2.0 * params.epsilon * x_star
    if np.any(jacobian <= 0.0):
        raise ValueError("vanishing delta-function Jacobian; no isolated emission frequency")
    return x_star**3 * gsq / jacobian


def golden_rule_rate(variant: str, beta, n, e_d, params: DimensionlessParams,
                     model: CouplingModel | None = None) -> RateResult:
    """Normalized per-direction decay rate for one atomic velocity.

    `model` controls the coupling structure (velocity-dependent or not, and
    whether the explicit recoil term is kept); its own momentum-shift flag is
    ignored here because the `variant` argument decides where the coupling
    is evaluated -- that is the entire point of having both variants.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (3,):
        raise ValueError("golden_rule_rate takes a single velocity; use golden_rule_rates for batches")
    if model is None:
        model = CouplingModel.roentgen()
    n = check_unit(n, "n")
    value = float(golden_rule_rates(variant, beta[None, :], n, e_d, params, model)[0])
    delta = beta[0] * n[0] + beta[1] * n[1] + beta[2] * n[2]
    root = resonance_frequency(delta, params.epsilon)
    return RateResult(variant=variant, value=value, x_star=root.x_star, delta=delta,
                      model_label=model.label)


def sphere_pattern_value(rate: float) -> float:
    """Convert a normalized rate into the angular-pattern density (3/8pi) rate,
    whose sphere integral is 1 in the reference configuration."""
    return 3.0 / (8.0 * math.pi) * rate


@dataclass(frozen=True)
class LimitOrderingRow:
    epsilon: float
    x_star: float
    rate_unshifted: float
    rate_shifted: float
    rel_difference: float
    window_lambdas: np.ndarray
    window_cumulative: np.ndarray
    growth_exponent: float | None
    growth_kind: str
    fixed_cumulative: np.ndarray


@dataclass(frozen=True)
class LimitOrderingTable:
    rows: list[LimitOrderingRow]
    fixed_cutoffs: np.ndarray
    rate_eps0: float
    notes: dict = field(default_factory=dict)


def limit_ordering_demo(epsilons, params_template: DimensionlessParams | None = None,
                        *, gamma_tilde: float = 0.01,
                        window: tuple[float, float] = (30.0, 100.0),
                        window_points: int = 6,
                        fixed_cutoffs=(1e2, 1e3, 1e4),
                        tol: float = 1e-9,
                        max_panels: int = 4096) -> LimitOrderingTable:
    """Finite-rate column vs divergent mode-sum column, per epsilon.

    For each eps in `epsilons` (decreasing, positive), at rest and with the
    emission direction perpendicular to the dipole:

    * column (i): both golden-rule variants -- the energy constraint applied
      before the mode sum. Finite, and converging to the eps = 0 value.
    * column (ii): the frequency-integrated emission probability with no
      formfactor -- the mode sum taken first -- on a cutoff ladder spanning
      `window` in units of 1/eps (the integrand turns over at x ~ 1/eps, so
      a fixed window in eps*x probes the true asymptotic growth at every
      eps; growth exponent fitted per ladder). Cumulative values at the
      `fixed_cutoffs` are also tabulated for reference.

    The normalization of column (ii) is the reference emission-probability
    scale (kappa = 3*gamma_tilde/16 pi^2 per steradian); column (i) is in
    rate units normalized to 1 at the reference point. The comparison is
    finite-versus-growing, not a like-for-like subtraction.
    """
    eps_list = [float(e) for e in epsilons]
    if not eps_list or any(e <= 0 for e in eps_list):
        raise ValueError("epsilons must be positive")
    if any(later >= earlier for earlier, later in zip(eps_list, eps_list[1:])):
        raise ValueError("epsilons must be strictly decreasing")
    if params_template is not None:
        gamma_tilde = params_template.gamma_tilde
    if window_points < 5:
        raise ValueError("window_points must be >= 5 for the growth-law fit")

    n = np.array([1.0, 0.0, 0.0])
    e_d = np.array([0.0, 0.0, 1.0])
    beta0 = np.zeros(3)
    model = CouplingModel.roentgen()
    fixed = np.asarray(sorted(float(c) for c in fixed_cutoffs))

    rate_eps0 = golden_rule_rate("shifted", beta0, n, e_d,
                                 DimensionlessParams(0.0, gamma_tilde), model).value

    rows: list[LimitOrderingRow] = []
    for eps in eps_list:
        params = DimensionlessParams(epsilon=eps, gamma_tilde=gamma_tilde)
        r_unshifted = golden_rule_rate("unshifted", beta0, n, e_d, params, model)
        r_shifted = golden_rule_rate("shifted", beta0, n, e_d, params, model)
        rel = abs(r_shifted.value - r_unshifted.value) / r_unshifted.value

        kappa = Normalization.reference(params).kappa

        def integrand(x, _params=params, _kappa=kappa):
            return _kappa * x * x * perpendicular_kernel(x, 0.0, _params)

        x_star = r_shifted.x_star
        feats = (x_star, x_star - 5.0 * gamma_tilde, x_star + 5.0 * gamma_tilde)

        lam_window = np.geomspace(window[0] / eps, window[1] / eps, window_points)
        scan = quadrature.cutoff_scan(integrand, lam_window, tol=tol, features=feats,
                                      max_panels=max_panels)
        cls = quadrature.classify_tail(scan, fit_points=min(window_points, scan.lambdas.size))

        fixed_scan = quadrature.cutoff_scan(integrand, fixed, tol=tol, features=feats,
                                            max_panels=max_panels)

        rows.append(LimitOrderingRow(
            epsilon=eps,
            x_star=x_star,
            rate_unshifted=r_unshifted.value,
            rate_shifted=r_shifted.value,
            rel_difference=rel,
            window_lambdas=scan.lambdas,
            window_cumulative=scan.values,
            growth_exponent=cls.exponent,
            growth_kind=cls.kind,
            fixed_cumulative=fixed_scan.values,
        ))

    return LimitOrderingTable(
        rows=rows, fixed_cutoffs=fixed, rate_eps0=rate_eps0,
        notes={
            "window_in_inverse_eps": list(window),
            "rate_normalization": "reference perpendicular rate = 1",
            "mode_sum_normalization": "kappa = 3*gamma_tilde/(16*pi^2) per steradian",
        },
    )
