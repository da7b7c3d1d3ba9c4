"""Adaptive step-size control and the simulation driver loop.

Each attempted step produces a tentative solution plus a cheap higher-order
prediction; their normalized gap is the error indicator ERR.  A step is
accepted when ERR is within tolerance or the step size is already at the
floor.  Whether accepted or rejected, the next tentative step size is

    dt_new = clamp(safety * (TOL/ERR)^(1/3) * dt_used, dt_min, dt_max)

(the cube root reflects the second-order accuracy of all schemes driven
here).  Two predictors are available:

* ``am3``    -- explicit third-order multistep prediction built from the
  flow right-hand side at the tentative solution and two history states.
* ``midab2`` -- quadratic extrapolation through the three newest history
  states, with a variable-step correction factor; activates once three
  accepted states exist (the first two steps fall back to ``am3``).

The driver lands exactly on requested snapshot times and on the final time
by truncating the step size, so reported times compare bit-exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from . import models
from .integrators import StepDiagnostics
from .spectral import PeriodicField, SpectralOps

__all__ = [
    "AdaptiveConfig",
    "StepRecord",
    "RunReport",
    "RunAbortedError",
    "am3_predict",
    "am3_err",
    "midab2_predict",
    "midab2_err",
    "propose_dt",
    "run_adaptive",
    "run_fixed_dt",
    "REPORT_COLUMNS",
]

REPORT_COLUMNS = ("step", "t", "dt", "ERR", "accepted", "iterations",
                  "fft_cumulative", "energy", "mass")


@dataclass(frozen=True)
class AdaptiveConfig:
    dt_min: float
    dt_max: float
    tol: float
    safety: float = 0.9
    estimator: str = "am3"

    def __post_init__(self) -> None:
        if not 0 < self.dt_min <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_max")
        if self.tol <= 0:
            raise ValueError("stepping tolerance must be positive")
        if self.estimator not in ("am3", "midab2"):
            raise ValueError(f"estimator must be 'am3' or 'midab2', got {self.estimator!r}")


@dataclass
class StepRecord:
    step: int           # 1-based index of the step this attempt targets
    t: float            # tentative new time of the attempt
    dt: float
    err: float
    accepted: bool
    iterations: int
    fft_cumulative: int
    energy: float
    mass: float
    estimator: str


@dataclass
class RunReport:
    records: list[StepRecord] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    masses: list[float] = field(default_factory=list)
    snapshots: dict[float, PeriodicField] = field(default_factory=dict)
    final: PeriodicField | None = None
    final_time: float = 0.0
    fft_total: int = 0
    wall_seconds: float = 0.0
    cpu_seconds: float = 0.0

    @property
    def fft_reported(self) -> float:
        """Cost metric: forward + inverse transform tally divided by two."""
        return self.fft_total / 2.0

    @property
    def accepted_count(self) -> int:
        return sum(1 for r in self.records if r.accepted)

    @property
    def rejected_count(self) -> int:
        return sum(1 for r in self.records if not r.accepted)

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(",".join(REPORT_COLUMNS) + "\n")
            for r in self.records:
                fh.write(
                    f"{r.step},{r.t:.17g},{r.dt:.17g},{r.err:.17g},"
                    f"{int(r.accepted)},{r.iterations},{r.fft_cumulative},"
                    f"{r.energy:.17g},{r.mass:.17g}\n"
                )


class RunAbortedError(RuntimeError):
    """The nonlinear solve failed to converge and the run cannot continue."""

    def __init__(self, t: float, dt: float, diagnostics: StepDiagnostics, report: RunReport):
        super().__init__(
            f"solver did not converge at t = {t:.6g}, dt = {dt:.3g} "
            f"(final direction norm {diagnostics.dnorm:.3e} after "
            f"{diagnostics.iterations} iterations)"
        )
        self.t = t
        self.dt = dt
        self.diagnostics = diagnostics
        self.report = report


# -- error estimators ----------------------------------------------------


def am3_predict(u_tilde: PeriodicField, u_n: PeriodicField, u_nm1: PeriodicField,
                dt_tilde: float, dt_n: float, rhs_fn) -> PeriodicField:
    """Explicit third-order prediction from the flow at (u_tilde, u_n, u_nm1).

    ``rhs_fn`` evaluates the evolution right-hand side.  The weights depend
    on the step ratio rho = dt_tilde / dt_n; for uniform steps they reduce
    to dt/12 * (5, 8, -1).
    """
    rho = dt_tilde / dt_n
    w_tilde = (3.0 + 2.0 * rho) / (1.0 + rho)
    w_n = 3.0 + rho
    w_nm1 = rho * rho / (1.0 + rho)
    bracket = rhs_fn(u_tilde) * w_tilde + rhs_fn(u_n) * w_n - rhs_fn(u_nm1) * w_nm1
    return u_n + bracket * (dt_tilde / 6.0)


def am3_err(ops: SpectralOps, u_tilde: PeriodicField, u_hat: PeriodicField) -> float:
    """Relative L2 gap between the scheme solution and the prediction."""
    denom = ops.norm_l2(u_hat)
    if denom == 0.0:
        raise ZeroDivisionError("prediction is identically zero; error indicator undefined")
    return ops.norm_l2(u_tilde - u_hat) / denom


def midab2_predict(u_n: PeriodicField, u_nm1: PeriodicField, u_nm2: PeriodicField,
                   dt_tilde: float, dt_n: float, dt_nm1: float) -> PeriodicField:
    """Quadratic extrapolation through the three newest accepted states."""
    A, B, C = dt_tilde, dt_n, dt_nm1
    w_n = (A + B) * (A + B + C) / (B * (B + C))
    w_nm1 = A * (A + B + C) / (B * C)
    w_nm2 = A * (A + B) / (C * (B + C))
    return u_n * w_n - u_nm1 * w_nm1 + u_nm2 * w_nm2


def midab2_correction(dt_tilde: float, dt_n: float, dt_nm1: float) -> float:
    """1 / (1 - 1/(24 R)) with R the variable-step error-ratio constant."""
    q_n = dt_n / dt_tilde
    r = 1.0 / 24.0 + 0.125 * (1.0 + q_n) * (1.0 + 2.0 * q_n + dt_nm1 / dt_tilde)
    return 1.0 / (1.0 - 1.0 / (24.0 * r))


def midab2_err(ops: SpectralOps, u_tilde: PeriodicField, u_hat: PeriodicField,
               dt_tilde: float, dt_n: float, dt_nm1: float) -> float:
    denom = ops.norm_l2(u_hat)
    if denom == 0.0:
        raise ZeroDivisionError("prediction is identically zero; error indicator undefined")
    gap = ops.norm_l2(u_tilde - u_hat) / denom
    return gap * midab2_correction(dt_tilde, dt_n, dt_nm1)


def propose_dt(err: float, dt_used: float, cfg: AdaptiveConfig) -> float:
    """Next tentative step size from the indicator of the step just tried."""
    if err <= 0.0:
        return cfg.dt_max
    dt_bar = cfg.safety * (cfg.tol / err) ** (1.0 / 3.0) * dt_used
    return max(cfg.dt_min, min(dt_bar, cfg.dt_max))


# -- drivers ---------------------------------------------------------------


def run_adaptive(stepper, ops: SpectralOps, model, u0: PeriodicField, T: float,
                 cfg: AdaptiveConfig, snapshot_times: tuple[float, ...] = (),
                 max_steps: int | None = None, track_energy: bool = True) -> RunReport:
    """Drive a stepper from t = 0 to t = T with adaptive step control.

    Raises :class:`RunAbortedError` if the nonlinear solve fails; partial
    telemetry is attached to the exception.
    """
    report = RunReport()
    wall0, cpu0 = time.perf_counter(), time.process_time()

    targets = sorted({float(s) for s in snapshot_times if 0.0 < s <= T} | {float(T)})
    snap_wanted = {float(s) for s in snapshot_times}

    rhs_fn = lambda v: models.rhs(ops, v, model)  # noqa: E731

    t = 0.0
    n = 0                      # accepted steps so far
    u_n = u0
    u_nm1: PeriodicField | None = None
    u_nm2: PeriodicField | None = None
    dt_n: float | None = None    # last accepted step size
    dt_nm1: float | None = None
    dt_tentative = cfg.dt_min

    def log_state(u, when):
        if track_energy:
            with ops.fft_counter.paused():
                e = models.energy(ops, u, model)
        else:
            e = math.nan
        report.times.append(when)
        report.energies.append(e)
        report.masses.append(ops.mean(u))

    log_state(u0, 0.0)
    if 0.0 in snap_wanted:
        report.snapshots[0.0] = u0.copy()

    while t < T - 1e-12 * max(1.0, T):
        if max_steps is not None and n >= max_steps:
            break
        target = next(s for s in targets if s > t + 1e-12 * max(1.0, T))
        remaining = target - t
        dt_used = dt_tentative
        if dt_used >= remaining * (1.0 - 1e-12):
            dt_used = remaining          # land exactly on the target
        elif remaining - dt_used < cfg.dt_min:
            dt_used = remaining / 2.0    # avoid leaving an unsteppable sliver

        u_tilde, diag = stepper.step(u_n, u_nm1, dt_used, dt_n, n)
        if not diag.converged:
            report.fft_total = ops.fft_counter.count
            report.wall_seconds = time.perf_counter() - wall0
            report.cpu_seconds = time.process_time() - cpu0
            raise RunAbortedError(t, dt_used, diag, report)

        use_midab2 = cfg.estimator == "midab2" and n >= 2
        if use_midab2:
            u_hat = midab2_predict(u_n, u_nm1, u_nm2, dt_used, dt_n, dt_nm1)
            err = midab2_err(ops, u_tilde, u_hat, dt_used, dt_n, dt_nm1)
        else:
            prev = u_nm1 if u_nm1 is not None else u_n
            dt_prev = dt_n if dt_n is not None else dt_used
            u_hat = am3_predict(u_tilde, u_n, prev, dt_used, dt_prev, rhs_fn)
            err = am3_err(ops, u_tilde, u_hat)

        accepted = err <= cfg.tol or dt_used <= cfg.dt_min
        if track_energy:
            with ops.fft_counter.paused():
                e_tilde = models.energy(ops, u_tilde, model)
        else:
            e_tilde = math.nan
        report.records.append(StepRecord(
            step=n + 1, t=t + dt_used, dt=dt_used, err=err, accepted=accepted,
            iterations=diag.iterations, fft_cumulative=ops.fft_counter.count,
            energy=e_tilde, mass=ops.mean(u_tilde),
            estimator="midab2" if use_midab2 else "am3",
        ))

        if accepted:
            new_t = target if dt_used == remaining else t + dt_used
            t = new_t
            u_nm2, u_nm1, u_n = u_nm1, u_n, u_tilde
            dt_nm1, dt_n = dt_n, dt_used
            n += 1
            report.times.append(t)
            report.energies.append(e_tilde)
            report.masses.append(ops.mean(u_tilde))
            if t in snap_wanted:
                report.snapshots[t] = u_tilde.copy()

        dt_tentative = propose_dt(err, dt_used, cfg)

    report.final = u_n
    report.final_time = t
    report.fft_total = ops.fft_counter.count
    report.wall_seconds = time.perf_counter() - wall0
    report.cpu_seconds = time.process_time() - cpu0
    return report


def run_fixed_dt(stepper, ops: SpectralOps, model, u0: PeriodicField, T: float,
                 dt: float, track_energy: bool = False) -> RunReport:
    """Constant-step drive to T, landing exactly.

    If dt does not divide T the last step is shortened to the remainder.
    """
    if dt <= 0 or T <= 0:
        raise ValueError("dt and T must be positive")
    n_full = int(math.floor(T / dt * (1.0 + 1e-12)))
    remainder = T - n_full * dt
    sizes = [dt] * n_full
    if remainder > 1e-12 * max(T, 1.0):
        sizes.append(remainder)
    report = RunReport()
    wall0, cpu0 = time.perf_counter(), time.process_time()
    u_n = u0
    u_nm1: PeriodicField | None = None
    dt_prev: float | None = None
    t = 0.0
    if track_energy:
        with ops.fft_counter.paused():
            report.energies.append(models.energy(ops, u0, model))
        report.times.append(0.0)
        report.masses.append(ops.mean(u0))
    for i, dt_i in enumerate(sizes):
        u_new, diag = stepper.step(u_n, u_nm1, dt_i, dt_prev, i)
        if not diag.converged:
            report.fft_total = ops.fft_counter.count
            raise RunAbortedError(t, dt_i, diag, report)
        u_nm1, u_n = u_n, u_new
        dt_prev = dt_i
        t = T if i == len(sizes) - 1 else t + dt_i
        if track_energy:
            with ops.fft_counter.paused():
                report.energies.append(models.energy(ops, u_n, model))
            report.times.append(t)
            report.masses.append(ops.mean(u_n))
    report.final = u_n
    report.final_time = T
    report.fft_total = ops.fft_counter.count
    report.wall_seconds = time.perf_counter() - wall0
    report.cpu_seconds = time.process_time() - cpu0
    return report
