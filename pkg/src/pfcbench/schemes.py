"""Time-scheme identities and their variable-step coefficients.

Every scheme advances ``a*u_new + b*u_n + c*u_nm1 = <flow terms>``.  The
coefficients always sum to zero, which keeps the combination mean-free when
the history fields share a mean.
"""

from __future__ import annotations

from enum import Enum

__all__ = ["SchemeKind", "step_coeffs"]


class SchemeKind(Enum):
    MP = "mp"
    BDF2 = "bdf2"
    LMP = "lmp"
    LBDF2 = "lbdf2"
    BE = "be"      # single-step bootstrap used by BDF2 at the first step
    LBE = "lbe"    # its semi-implicit counterpart

    @property
    def implicit(self) -> bool:
        return self in (SchemeKind.MP, SchemeKind.BDF2, SchemeKind.BE)

    @property
    def two_step(self) -> bool:
        """True if the scheme genuinely uses u_nm1 in its coefficients."""
        return self in (SchemeKind.BDF2, SchemeKind.LBDF2)

    @classmethod
    def parse(cls, name: str) -> "SchemeKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown scheme {name!r}; expected one of: {valid}") from None


def step_coeffs(kind: SchemeKind, dt_np1: float, dt_n: float | None = None) -> tuple[float, float, float]:
    """Coefficients (a, b, c) of the time-difference stencil.

    Two-step schemes need the previous step size ``dt_n``; all others ignore
    it.  For uniform steps the two-step formula reduces to
    ``(3/(2 dt), -2/dt, 1/(2 dt))``.
    """
    if dt_np1 <= 0:
        raise ValueError(f"step size must be positive, got {dt_np1}")
    if kind.two_step:
        if dt_n is None or dt_n <= 0:
            raise ValueError(f"{kind.value} needs a positive previous step size, got {dt_n}")
        a = 1.0 / dt_np1 + 1.0 / (dt_np1 + dt_n)
        b = -1.0 / dt_np1 - 1.0 / dt_n
        c = 1.0 / dt_n - 1.0 / (dt_np1 + dt_n)
        return a, b, c
    a = 1.0 / dt_np1
    return a, -a, 0.0
