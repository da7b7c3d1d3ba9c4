"""Objective value/gradient consistency and critical-point equivalence."""

import numpy as np
import pytest

from conftest import random_field
from pfcbench import models
from pfcbench.integrators import ImplicitStepper
from pfcbench.models import FchParams, PfcParams
from pfcbench.objective import StepContext, StepObjective
from pfcbench.preconditioner import build_preconditioner
from pfcbench.schemes import SchemeKind, step_coeffs
from pfcbench.solvers import SolverConfig
from pfcbench.spectral import Grid2D, SpectralOps

PFC = PfcParams(epsilon=0.7)
FCH = FchParams(epsilon=0.25, eta1=0.3, eta2=0.4, tau=0.125)


@pytest.fixture
def ops():
    return SpectralOps(Grid2D(L=2 * np.pi, N=32))


def make_ctx(ops, rng, scheme=SchemeKind.BDF2, model=PFC, dt=0.05, dt_prev=0.04):
    u_nm1 = random_field(ops, rng, amp=0.3)
    u_n = u_nm1 + random_field(ops, rng, amp=0.01)
    u_n = u_n - (ops.mean(u_n) - ops.mean(u_nm1))  # align means
    if scheme.two_step:
        a, b, c = step_coeffs(scheme, dt, dt_prev)
    else:
        a, b, c = step_coeffs(scheme, dt)
    return StepContext(ops, model, scheme, a, b, c, u_n, u_nm1, dt, dt_prev)


class TestStepContext:
    def test_rejects_bad_coefficient_sum(self, ops, rng):
        u = random_field(ops, rng)
        with pytest.raises(ValueError, match="sum to zero"):
            StepContext(ops, PFC, SchemeKind.BDF2, 1.0, -0.5, 0.0, u, u, 0.1, 0.1)

    def test_rejects_nonpositive_leading(self, ops, rng):
        u = random_field(ops, rng)
        with pytest.raises(ValueError, match="positive"):
            StepContext(ops, PFC, SchemeKind.BDF2, -1.0, 1.0, 0.0, u, u, 0.1, 0.1)


class TestBreve:
    def test_identity_for_two_level(self, ops, rng):
        ctx = make_ctx(ops, rng, SchemeKind.BDF2)
        obj = StepObjective(ctx)
        v = random_field(ops, rng)
        assert obj.breve(v) is v

    def test_midpoint_at_history(self, ops, rng):
        ctx = make_ctx(ops, rng, SchemeKind.MP)
        obj = StepObjective(ctx)
        out = obj.breve(ctx.u_n)
        assert np.abs(out.values - ctx.u_n.values).max() < 1e-15

    def test_midpoint_mean_linearity(self, ops, rng):
        ctx = make_ctx(ops, rng, SchemeKind.MP)
        obj = StepObjective(ctx)
        v = random_field(ops, rng, amp=0.2)
        v = v - (ops.mean(v) - ops.mean(ctx.u_n))
        assert ops.mean(obj.breve(v)) == pytest.approx(
            0.5 * (ops.mean(v) + ops.mean(ctx.u_n)), abs=1e-14)


class TestValue:
    def test_midpoint_at_history_reduces_to_energy(self, ops, rng):
        # c = 0 and v = u_n: the time-difference term drops, leaving 2*E(u_n)
        ctx = make_ctx(ops, rng, SchemeKind.MP)
        obj = StepObjective(ctx)
        expect = 2.0 * models.energy(ops, ctx.u_n, PFC)
        assert obj.value(ctx.u_n) == pytest.approx(expect, rel=1e-12)

    def test_bootstrap_at_history_is_plain_energy(self, ops, rng):
        ctx = make_ctx(ops, rng, SchemeKind.BE, dt=0.05, dt_prev=0.05)
        obj = StepObjective(ctx)
        expect = models.energy(ops, ctx.u_n, PFC)
        assert obj.value(ctx.u_n) == pytest.approx(expect, rel=1e-12)

    def test_mean_mismatch_rejected(self, ops, rng):
        ctx = make_ctx(ops, rng)
        obj = StepObjective(ctx)
        with pytest.raises(ValueError, match="mean"):
            obj.value(ctx.u_n + 0.1)


class TestGradient:
    @pytest.mark.parametrize("scheme", [SchemeKind.BDF2, SchemeKind.MP], ids=["bdf2", "mp"])
    @pytest.mark.parametrize("model", [PFC, FCH], ids=["pfc", "fch"])
    def test_gradient_is_mean_free(self, ops, rng, scheme, model):
        ctx = make_ctx(ops, rng, scheme, model)
        obj = StepObjective(ctx)
        g = obj.gradient(ctx.u_n)
        assert abs(ops.mean(g)) < 1e-13 * max(ops.norm_inf(g), 1.0)

    @pytest.mark.parametrize("scheme", [SchemeKind.BDF2, SchemeKind.MP], ids=["bdf2", "mp"])
    @pytest.mark.parametrize("model", [PFC, FCH], ids=["pfc", "fch"])
    def test_matches_finite_difference_of_value(self, ops, rng, scheme, model):
        ctx = make_ctx(ops, rng, scheme, model)
        obj = StepObjective(ctx)
        v = ctx.u_n + random_field(ops, rng, amp=0.02) * 1.0
        v = v - (ops.mean(v) - ops.mean(ctx.u_n))
        d = ops.mean_zero(random_field(ops, rng))
        d = d * (1.0 / ops.norm_l2(d))
        t = 1e-5
        fd = (obj.value(v + d * t) - obj.value(v - d * t)) / (2 * t)
        assert ops.inner(obj.gradient(v), d) == pytest.approx(fd, abs=1e-5)

    def test_descent_direction_decreases_value(self, ops, rng):
        ctx = make_ctx(ops, rng, SchemeKind.BDF2)
        obj = StepObjective(ctx)
        precond = build_preconditioner(ctx, ctx.u_n)
        v = ctx.u_n
        d = precond.apply_inverse(-obj.gradient(v))
        small = 1e-3
        assert obj.value(v + d * small) < obj.value(v)


class TestCriticalPointEquivalence:
    @pytest.mark.parametrize("model", [PFC, FCH], ids=["pfc", "fch"])
    def test_residual_equals_flow_of_gradient(self, ops, rng, model):
        # the time-step equation's residual is exactly -M * lap(gradient)
        ctx = make_ctx(ops, rng, SchemeKind.BDF2, model)
        obj = StepObjective(ctx)
        v = ctx.u_n
        lhs = v * ctx.a + ctx.u_n * ctx.b + ctx.u_nm1 * ctx.c
        resid = ops.mean_zero(lhs - models.rhs(ops, obj.breve(v), model))
        via_gradient = ops.laplacian(obj.gradient(v)) * (-model.mobility)
        scale = ops.norm_inf(resid)
        assert np.abs(via_gradient.values - resid.values).max() < 1e-9 * scale

    def test_solved_fch_step_satisfies_time_step_equation(self):
        # mixture model on a desk-scale state: the stopping tolerance
        # transfers to a tiny equation residual (quartic weight is eps^4)
        from pfcbench import benchmarks

        spec = benchmarks.preset("fch1-desk")
        ops = SpectralOps(spec.grid())
        u_n = benchmarks.make_ic(spec, spec.grid())
        stepper = ImplicitStepper(ops, spec.params, SchemeKind.BDF2,
                                  SolverConfig(s=0.4, tol_iter=1e-10))
        dt = 1e-3
        u1, diag = stepper.step(u_n, None, dt, None, 0)
        assert diag.converged
        a, b, _ = step_coeffs(SchemeKind.BE, dt)
        lhs = u1 * a + u_n * b
        flow = models.rhs(ops, u1, spec.params)
        resid = ops.mean_zero(lhs - flow)
        assert ops.neg_norm(resid) < 1e-7

    def test_mass_invariant_along_updates(self, ops, rng):
        ctx = make_ctx(ops, rng, SchemeKind.BDF2)
        obj = StepObjective(ctx)
        precond = build_preconditioner(ctx, ctx.u_n)
        v = ctx.u_n
        m0 = ops.mean(v)
        for _ in range(5):
            d = precond.apply_inverse(-obj.gradient(v))
            v = v + d * 0.5
            assert abs(ops.mean(v) - m0) < 1e-12
