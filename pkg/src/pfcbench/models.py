"""Crystal-density and amphiphilic-mixture free energies and their gradients.

Two sixth-order mass-conserving models are provided:

* ``PfcParams`` -- crystal-density model with energy density
  ``u^4/4 + (1-eps)/2 u^2 - |grad u|^2 + (lap u)^2 / 2``.
* ``FchParams`` -- mixture model built on a tunable quartic double well,
  energy density ``(eps^2 lap u - F'(u))^2 / 2 - eps^2/2 eta1 |grad u|^2
  - eta2 F(u)``.

Both evolve by ``u_t = M * lap(mu(u))`` where ``mu`` is the variational
derivative of the energy.  ``imex_sigma``/``imex_nonlinear`` expose the
linear/nonlinear splitting used by the semi-implicit integrators: the linear
part is diagonal in Fourier space with symbol ``sigma(k^2)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .spectral import PeriodicField, SpectralOps

logger = logging.getLogger(__name__)

__all__ = [
    "DoubleWell",
    "PfcParams",
    "FchParams",
    "energy",
    "mu",
    "imex_sigma",
    "imex_linear",
    "imex_nonlinear",
    "rhs",
]


@dataclass(frozen=True)
class DoubleWell:
    """Quartic double well ``(z+1)^2 ((z-1)^2/2 + 2 tau (z-2)/3) / 2``.

    ``tau`` skews the two wells: F(-1) = 0 for every tau while
    F(1) = -4 tau / 3.  Coefficients are expanded once so repeated
    evaluation in hot loops is a single polyval.
    """

    tau: float

    def coefficients(self, order: int) -> np.ndarray:
        """Monomial coefficients (highest power first) of the order-th derivative."""
        t = self.tau
        coeffs = np.array([0.25, t / 3.0, -0.5, -t, 0.25 - 2.0 * t / 3.0])
        for _ in range(order):
            coeffs = np.polyder(coeffs)
        return coeffs

    def __call__(self, zeta, order: int = 0):
        """Evaluate F (order 0) or one of its first three derivatives."""
        if not 0 <= order <= 3:
            raise ValueError(f"order must be in 0..3, got {order}")
        return np.polyval(self.coefficients(order), zeta)


@dataclass(frozen=True)
class PfcParams:
    """Crystal-density model parameters: undercooling ``epsilon``, mobility M."""

    epsilon: float
    mobility: float = 1.0

    def __post_init__(self) -> None:
        if self.mobility <= 0:
            raise ValueError("mobility must be positive")


@dataclass(frozen=True)
class FchParams:
    """Mixture model parameters.

    ``kappa0``/``kappa2`` are the constants added and subtracted to form the
    linear implicit part of the splitting.  ``kappa0`` defaults to
    ``1 - 2*tau^2 + eta2`` (the linear coefficient of the quintic zeroth-order
    term); ``kappa2`` defaults to 1.  Both may be overridden.
    """

    epsilon: float
    eta1: float
    eta2: float
    tau: float = 0.0
    mobility: float = 1.0
    kappa0: float | None = None
    kappa2: float = 1.0

    def __post_init__(self) -> None:
        if self.mobility <= 0:
            raise ValueError("mobility must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        default_kappa0 = 1.0 - 2.0 * self.tau**2 + self.eta2
        if self.kappa0 is None:
            object.__setattr__(self, "kappa0", default_kappa0)
        elif self.kappa0 != default_kappa0:
            logger.info("kappa0 overridden: %g (default %g)", self.kappa0, default_kappa0)
        if self.kappa2 != 1.0:
            logger.info("kappa2 overridden: %g (default 1)", self.kappa2)

    @property
    def well(self) -> DoubleWell:
        return DoubleWell(self.tau)


ModelParams = PfcParams | FchParams


# -- energies ----------------------------------------------------------


def pfc_energy(ops: SpectralOps, u: PeriodicField, p: PfcParams) -> float:
    lap = ops.laplacian(u)
    v = u.values
    density = 0.25 * v**4 + 0.5 * (1.0 - p.epsilon) * v**2 + 0.5 * lap.values**2
    return ops.integral(PeriodicField(u.grid, density)) - ops.gradient_sq_integral(u)


def fch_energy(ops: SpectralOps, u: PeriodicField, p: FchParams) -> float:
    F = p.well
    lap = ops.laplacian(u)
    v = u.values
    w = p.epsilon**2 * lap.values - F(v, 1)
    density = 0.5 * w**2 - p.eta2 * F(v, 0)
    return ops.integral(PeriodicField(u.grid, density)) \
        - 0.5 * p.epsilon**2 * p.eta1 * ops.gradient_sq_integral(u)


def energy(ops: SpectralOps, u: PeriodicField, model: ModelParams) -> float:
    if isinstance(model, PfcParams):
        return pfc_energy(ops, u, model)
    if isinstance(model, FchParams):
        return fch_energy(ops, u, model)
    raise TypeError(f"unknown model {type(model).__name__}")


# -- chemical potentials -------------------------------------------------


def pfc_mu(ops: SpectralOps, u: PeriodicField, p: PfcParams) -> PeriodicField:
    """u^3 + (1-eps) u + 2 lap u + lap^2 u."""
    lap = ops.laplacian(u)
    bih = ops.biharmonic(u)
    v = u.values
    return PeriodicField(u.grid, v**3 + (1.0 - p.epsilon) * v + 2.0 * lap.values + bih.values)


def fch_mu(ops: SpectralOps, u: PeriodicField, p: FchParams) -> PeriodicField:
    """(eps^2 lap - F''(u) + eta1) applied to omega, plus (eta1-eta2) F'(u).

    omega = eps^2 lap u - F'(u).
    """
    F = p.well
    e2 = p.epsilon**2
    lap_u = ops.laplacian(u)
    v = u.values
    omega = e2 * lap_u.values - F(v, 1)
    lap_omega = ops.laplacian(PeriodicField(u.grid, omega))
    out = (
        e2 * lap_omega.values
        - F(v, 2) * omega
        + p.eta1 * omega
        + (p.eta1 - p.eta2) * F(v, 1)
    )
    return PeriodicField(u.grid, out)


def mu(ops: SpectralOps, u: PeriodicField, model: ModelParams) -> PeriodicField:
    if isinstance(model, PfcParams):
        return pfc_mu(ops, u, model)
    if isinstance(model, FchParams):
        return fch_mu(ops, u, model)
    raise TypeError(f"unknown model {type(model).__name__}")


# -- linear/nonlinear splitting ------------------------------------------


def imex_sigma(model: ModelParams, k2: np.ndarray) -> np.ndarray:
    """Spectral symbol of the linear implicit part, as a function of k^2.

    The symbol is defined so the linear operator applied to u has Fourier
    coefficients ``sigma(k^2) * uhat``.
    """
    if isinstance(model, PfcParams):
        return (1.0 - k2) ** 2
    if isinstance(model, FchParams):
        return model.epsilon**4 * k2**2 + model.kappa2 * k2 + model.kappa0
    raise TypeError(f"unknown model {type(model).__name__}")


def imex_linear(ops: SpectralOps, u: PeriodicField, model: ModelParams) -> PeriodicField:
    w = ops.dft(u)
    w.coeffs *= imex_sigma(model, ops.k2)
    return ops.idft(w)


def imex_nonlinear(ops: SpectralOps, u: PeriodicField, model: ModelParams) -> PeriodicField:
    """Everything the splitting treats explicitly: mu(u) minus the linear part."""
    v = u.values
    if isinstance(model, PfcParams):
        return PeriodicField(u.grid, v**3 - model.epsilon * v)
    if isinstance(model, FchParams):
        F = model.well
        e2 = model.epsilon**2
        fp = F(v, 1)
        fpp = F(v, 2)
        lap_u = ops.laplacian(u)
        lap_fp = ops.laplacian(PeriodicField(u.grid, fp))
        out = (
            -model.kappa0 * v
            - e2 * lap_fp.values
            - (e2 * (fpp - model.eta1) - model.kappa2) * lap_u.values
            + (fpp - model.eta2) * fp
        )
        return PeriodicField(u.grid, out)
    raise TypeError(f"unknown model {type(model).__name__}")


def rhs(ops: SpectralOps, u: PeriodicField, model: ModelParams) -> PeriodicField:
    """Evolution right-hand side M * lap(mu(u)); mean-free by construction."""
    return ops.laplacian(mu(ops, u, model)) * _mobility(model)


def _mobility(model: ModelParams) -> float:
    return model.mobility
