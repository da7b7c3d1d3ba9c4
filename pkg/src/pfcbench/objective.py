"""Per-step minimization objective for the fully implicit schemes.

A single implicit time step

    a*u + b*u_n + c*u_nm1 = M * lap(mu(breve(u)))

is the critical-point equation of

    G(v) = ||a*v + b*u_n + c*u_nm1||_{-1}^2 / (2*M*a) + Etilde(v)

where ``Etilde(v)`` is the free energy at v (two-level schemes) or twice the
free energy at the midpoint ``(v + u_n)/2`` (midpoint scheme).  The gradient
used by the iterative solvers is mean-zero projected on both terms so that
iterates conserve the mean exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import models
from .schemes import SchemeKind
from .spectral import PeriodicField, SpectralOps

__all__ = ["StepContext", "StepObjective"]


@dataclass
class StepContext:
    """Everything that defines one implicit step's objective."""

    ops: SpectralOps
    model: models.ModelParams
    scheme: SchemeKind
    a: float
    b: float
    c: float
    u_n: PeriodicField
    u_nm1: PeriodicField
    dt_np1: float
    dt_n: float

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError(f"leading step coefficient must be positive, got {self.a}")
        resid = abs(self.a + self.b + self.c)
        scale = max(abs(self.a), abs(self.b), abs(self.c))
        if resid > 1e-10 * scale:
            raise ValueError(
                f"step coefficients must sum to zero, got residual {resid:.3e}"
            )


class StepObjective:
    """Objective value and projected gradient for one step context."""

    def __init__(self, ctx: StepContext) -> None:
        self.ctx = ctx
        self._mean_ref = ctx.ops.mean(ctx.u_n)
        self._mean_tol = 1e-10 * max(1.0, ctx.ops.norm_inf(ctx.u_n))

    def breve(self, v: PeriodicField) -> PeriodicField:
        """Argument at which the energy is evaluated: v, or the midpoint."""
        if self.ctx.scheme is SchemeKind.MP:
            return (v + self.ctx.u_n) * 0.5
        return v

    def value(self, v: PeriodicField) -> float:
        ctx = self.ctx
        self._check_admissible(v)
        r = ctx.ops.mean_zero(v * ctx.a + ctx.u_n * ctx.b + ctx.u_nm1 * ctx.c)
        m = models._mobility(ctx.model)
        quad = ctx.ops.neg_norm(r) ** 2 / (2.0 * m * ctx.a)
        if ctx.scheme is SchemeKind.MP:
            return quad + 2.0 * models.energy(ctx.ops, self.breve(v), ctx.model)
        return quad + models.energy(ctx.ops, v, ctx.model)

    def gradient(self, v: PeriodicField) -> PeriodicField:
        """Mean-zero projected gradient of :meth:`value`.

        The chain rule makes the energy term equal mu at ``breve(v)`` for
        both scheme shapes (the midpoint's outer factor 2 cancels the inner
        1/2).
        """
        ctx = self.ctx
        self._check_admissible(v)
        r = ctx.ops.mean_zero(v * ctx.a + ctx.u_n * ctx.b + ctx.u_nm1 * ctx.c)
        m = models._mobility(ctx.model)
        g1 = ctx.ops.frac_laplacian(r, -1) * (1.0 / m)
        g2 = ctx.ops.mean_zero(models.mu(ctx.ops, self.breve(v), ctx.model))
        # final projection keeps the round-off mean small relative to the
        # gradient itself, which shrinks by many orders during a solve
        return ctx.ops.mean_zero(g1 + g2)

    def residual_inf(self, v: PeriodicField) -> float:
        """Max-norm residual of the time-step equation itself (diagnostic)."""
        ctx = self.ctx
        lhs = v * ctx.a + ctx.u_n * ctx.b + ctx.u_nm1 * ctx.c
        flow = models.rhs(ctx.ops, self.breve(v), ctx.model)
        return ctx.ops.norm_inf(lhs - flow)

    def _check_admissible(self, v: PeriodicField) -> None:
        drift = abs(self.ctx.ops.mean(v) - self._mean_ref)
        if drift > self._mean_tol:
            raise ValueError(
                f"trial field mean drifted {drift:.3e} from the step history mean"
            )
