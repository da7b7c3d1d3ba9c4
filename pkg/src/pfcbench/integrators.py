"""One time step of the fully implicit and linear-implicit schemes.

The fully implicit steppers reformulate each step as a critical-point
problem and hand it to the preconditioned descent solvers; the semi-implicit
steppers treat the stiff linear part implicitly, which makes the update a
single diagonal solve in Fourier space, with the remaining terms
extrapolated from history.

Two-step schemes fall back to their single-step variant at the very first
step (no second history value exists yet); midpoint-family schemes work from
step zero with the artificial history ``u_nm1 := u_0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import models
from .objective import StepContext, StepObjective
from .preconditioner import build_preconditioner
from .schemes import SchemeKind, step_coeffs
from .solvers import SolveOutcome, SolverConfig, pagd, pgd
from .spectral import PeriodicField, SpectralField, SpectralOps

logger = logging.getLogger(__name__)

__all__ = [
    "SchemeKind",
    "step_coeffs",
    "ImplicitStepper",
    "SemiImplicitStepper",
    "make_stepper",
    "StepDiagnostics",
]


@dataclass
class StepDiagnostics:
    iterations: int
    converged: bool
    dnorm: float = 0.0


class ImplicitStepper:
    """Advances MP or BDF2 by minimizing the per-step objective."""

    def __init__(self, ops: SpectralOps, model, kind: SchemeKind,
                 solver_cfg: SolverConfig, algorithm: str = "pagd") -> None:
        if not kind.implicit or kind is SchemeKind.LBE:
            raise ValueError(f"{kind} is not a fully implicit scheme")
        if algorithm not in ("pagd", "pgd"):
            raise ValueError(f"algorithm must be 'pagd' or 'pgd', got {algorithm!r}")
        self.ops = ops
        self.model = model
        self.kind = kind
        self.solver_cfg = solver_cfg
        self.algorithm = algorithm

    def step(self, u_n: PeriodicField, u_nm1: PeriodicField | None,
             dt_np1: float, dt_n: float | None, step_index: int
             ) -> tuple[PeriodicField, StepDiagnostics]:
        kind = self.kind
        if kind is SchemeKind.BDF2 and step_index == 0:
            kind = SchemeKind.BE
        if u_nm1 is None:
            u_nm1 = u_n
        a, b, c = step_coeffs(kind, dt_np1, dt_n)
        ctx = StepContext(self.ops, self.model, kind, a, b, c, u_n, u_nm1, dt_np1, dt_n or dt_np1)
        if step_index == 0 or dt_n is None:
            x0 = u_n
        else:
            rho = dt_np1 / dt_n
            x0 = u_n + (u_n - u_nm1) * rho
            x0 = x0 + (self.ops.mean(u_n) - self.ops.mean(x0))  # keep the mass exact
        precond = build_preconditioner(ctx, x0)
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(
                "step %d dt=%.4g betas=(%.4g, %.4g, %.4g, %.4g) min_sigma=%.4g",
                step_index, dt_np1, precond.beta_m2, precond.beta_0,
                precond.beta_2, precond.beta_4, precond.min_sigma)
        objective = StepObjective(ctx)
        solve = pagd if self.algorithm == "pagd" else pgd
        outcome: SolveOutcome = solve(objective.gradient, precond, x0, self.solver_cfg)
        diag = StepDiagnostics(outcome.iterations, outcome.converged, outcome.final_dnorm)
        return outcome.solution, diag


class SemiImplicitStepper:
    """Advances LMP or LBDF2 with a single FFT-diagonal linear solve."""

    def __init__(self, ops: SpectralOps, model, kind: SchemeKind) -> None:
        if kind not in (SchemeKind.LMP, SchemeKind.LBDF2):
            raise ValueError(f"{kind} is not a semi-implicit scheme")
        self.ops = ops
        self.model = model
        self.kind = kind
        self._den_cache: tuple[tuple[float, float], np.ndarray] | None = None

    def step(self, u_n: PeriodicField, u_nm1: PeriodicField | None,
             dt_np1: float, dt_n: float | None, step_index: int
             ) -> tuple[PeriodicField, StepDiagnostics]:
        ops, model = self.ops, self.model
        kind = self.kind
        if kind is SchemeKind.LBDF2 and step_index == 0:
            coeff_kind = SchemeKind.LBE
        else:
            coeff_kind = kind
        a, b, c = step_coeffs(coeff_kind, dt_np1, dt_n)
        theta = 0.5 if kind is SchemeKind.LMP else 1.0
        rho = 1.0 if (step_index == 0 or not dt_n) else dt_np1 / dt_n
        # extrapolation weights for the explicitly treated terms
        if kind is SchemeKind.LMP:
            alpha, beta = 0.5 * (2.0 + rho), -0.5 * rho
        else:
            alpha, beta = 1.0 + rho, -rho

        first = step_index == 0 or u_nm1 is None
        u_hat_n = ops.dft(u_n)
        u_hat_nm1 = u_hat_n if first else ops.dft(u_nm1)
        if first:
            u_nm1 = u_n
        breve_hat = alpha * u_hat_n.coeffs + beta * u_hat_nm1.coeffs
        breve = u_n * alpha + u_nm1 * beta

        m = model.mobility
        k2 = ops.k2
        sigma = models.imex_sigma(model, k2)
        nhat = self._nonlinear_hat(breve, breve_hat)

        numerator = -b * u_hat_n.coeffs - c * u_hat_nm1.coeffs - m * k2 * nhat
        if kind is SchemeKind.LMP:
            numerator -= theta * m * k2 * sigma * u_hat_n.coeffs
        den = self._denominator(a, theta, m, k2, sigma)
        u_new = ops.idft(SpectralField(ops.grid, numerator / den))
        return u_new, StepDiagnostics(iterations=0, converged=True)

    def _nonlinear_hat(self, breve: PeriodicField, breve_hat: np.ndarray) -> np.ndarray:
        ops, model = self.ops, self.model
        if isinstance(model, models.PfcParams):
            cubic_hat = ops.dft(breve**3)
            return cubic_hat.coeffs - model.epsilon * breve_hat
        F = model.well
        e2 = model.epsilon**2
        vals = breve.values
        fp = F(vals, 1)
        fpp = F(vals, 2)
        lap_breve = ops.idft(SpectralField(ops.grid, -ops.k2 * breve_hat))
        mixed = -(e2 * (fpp - model.eta1) - model.kappa2) * lap_breve.values \
            + (fpp - model.eta2) * fp
        fp_hat = ops.dft(PeriodicField(ops.grid, fp))
        mixed_hat = ops.dft(PeriodicField(ops.grid, mixed))
        return -model.kappa0 * breve_hat + e2 * ops.k2 * fp_hat.coeffs + mixed_hat.coeffs

    def _denominator(self, a: float, theta: float, m: float,
                     k2: np.ndarray, sigma: np.ndarray) -> np.ndarray:
        key = (a, theta)
        if self._den_cache is not None and self._den_cache[0] == key:
            return self._den_cache[1]
        den = a + theta * m * k2 * sigma
        if den.min() <= 0.0:
            bad = k2.flat[int(np.argmin(den))]
            raise ArithmeticError(
                f"semi-implicit denominator vanishes at k^2 = {bad:.6g} "
                f"(a = {a:.4g}); linear symbol must be nonnegative"
            )
        self._den_cache = (key, den)
        return den


def make_stepper(ops: SpectralOps, model, kind: SchemeKind,
                 solver_cfg: SolverConfig | None = None, algorithm: str = "pagd"):
    """Build the right stepper for a scheme name."""
    if kind.implicit:
        return ImplicitStepper(ops, model, kind, solver_cfg or SolverConfig(), algorithm)
    return SemiImplicitStepper(ops, model, kind)
