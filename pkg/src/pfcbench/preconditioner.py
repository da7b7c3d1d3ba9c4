"""Constant-coefficient preconditioner mimicking the objective's curvature.

The second variation of the step objective has the shape

    beta_m2 * invlap + beta0 + beta2 * (-lap) + beta4 * lap^2

with beta0 (and for the mixture model beta2) varying in space.  Freezing the
variable coefficients at the absolute value of their domain average gives a
constant-coefficient operator that is diagonal in Fourier space:

    sigma(k^2) = beta_m2 / k^2 + beta0 + beta2 * k^2 + beta4 * k^4.

The constants are built once per time step from the solver's initial guess
and kept fixed for the whole nonlinear solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import FchParams, PfcParams
from .schemes import SchemeKind
from .spectral import NonZeroMeanError, PeriodicField, SpectralOps

__all__ = ["AveragedNewton", "build_preconditioner", "identity_preconditioner", "IndefinitePreconditionerError"]


class IndefinitePreconditionerError(RuntimeError):
    """Raised when the frozen-coefficient symbol is not positive on every mode."""


@dataclass
class AveragedNewton:
    """Frozen-coefficient symbol with diagonal spectral apply/solve."""

    ops: SpectralOps
    beta_m2: float
    beta_0: float
    beta_2: float
    beta_4: float

    def __post_init__(self) -> None:
        k2 = self.ops.k2
        nonzero = k2 > 0.0
        sigma = np.ones_like(k2)  # zero mode is never used; placeholder 1
        kk = k2[nonzero]
        sigma[nonzero] = self.beta_m2 / kk + self.beta_0 + self.beta_2 * kk + self.beta_4 * kk * kk
        worst = sigma[nonzero].min()
        if worst <= 0.0:
            k2_bad = kk[np.argmin(sigma[nonzero])]
            raise IndefinitePreconditionerError(
                f"symbol is {worst:.3e} at k^2 = {k2_bad:.6g}; "
                f"betas = ({self.beta_m2:.4g}, {self.beta_0:.4g}, {self.beta_2:.4g}, {self.beta_4:.4g})"
            )
        self.sigma = sigma
        self.min_sigma = float(worst)

    def apply_inverse(self, r: PeriodicField) -> PeriodicField:
        """Solve symbol * d = r mode by mode; r must be mean-zero."""
        self._require_mean_zero(r)
        w = self.ops.dft(r)
        w.coeffs /= self.sigma
        w.coeffs[0, 0] = 0.0
        return self.ops.idft(w)

    def apply(self, v: PeriodicField) -> PeriodicField:
        """Forward operator; the zero mode (outside its domain) is dropped."""
        w = self.ops.dft(v)
        w.coeffs *= self.sigma
        w.coeffs[0, 0] = 0.0
        return self.ops.idft(w)

    def _require_mean_zero(self, r: PeriodicField) -> None:
        scale = self.ops.norm_inf(r)
        if scale > 0.0 and abs(self.ops.mean(r)) > 1e-10 * scale:
            raise NonZeroMeanError(
                f"preconditioner input has mean {self.ops.mean(r):.3e} "
                f"(max magnitude {scale:.3e})"
            )


def build_preconditioner(ctx, v0: PeriodicField) -> AveragedNewton:
    """Freeze curvature coefficients at the solve's starting point.

    Under the midpoint scheme the curvature acts through the midpoint, so
    averages are taken at ``(v0 + u_n)/2``; otherwise at ``v0``.
    """
    ops: SpectralOps = ctx.ops
    model = ctx.model
    if ctx.scheme is SchemeKind.MP:
        w = (v0 + ctx.u_n) * 0.5
    else:
        w = v0
    beta_m2 = ctx.a / model.mobility
    if isinstance(model, PfcParams):
        beta_0 = abs(float(np.mean(3.0 * w.values**2 + 1.0 - model.epsilon)))
        beta_2 = -2.0
        beta_4 = 1.0
    elif isinstance(model, FchParams):
        F = model.well
        vals = w.values
        fp = F(vals, 1)
        fpp = F(vals, 2)
        fppp = F(vals, 3)
        # small eps^2-weighted curvature terms are dropped from the average
        beta_0 = abs(float(np.mean(fpp**2 - model.eta2 * fpp + fppp * fp)))
        beta_2 = abs(float(np.mean(model.epsilon**2 * fpp - model.epsilon**2 * model.eta1)))
        beta_4 = model.epsilon**4
    else:
        raise TypeError(f"unknown model {type(model).__name__}")
    return AveragedNewton(ops, beta_m2, beta_0, beta_2, beta_4)


def identity_preconditioner(ops: SpectralOps) -> AveragedNewton:
    """Degenerate symbol == 1: the solvers reduce to plain projected descent."""
    return AveragedNewton(ops, 0.0, 1.0, 0.0, 0.0)
