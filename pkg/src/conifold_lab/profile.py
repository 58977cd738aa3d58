"""The scalar radial profile of the symmetric metric family.

Every metric in the family is determined by one convex function u(rho) of
the log fibre radius.  Vanishing Ricci curvature reduces, after integrating
the underlying ODE twice, to the cubic

    2 (u')^3 + 3 t (u')^2 - 3 e^{2 rho} = 0,

whose unique positive root gives u'(rho, t); differentiating once more gives
the pointwise identity (t + u') u' u'' = e^{2 rho}, which is how u'' is
evaluated here.  Only u' and u'' are ever needed downstream, so u itself is
never integrated.

Numerics: the root is found on the rescaled variable q = e^{-rho} u', which
satisfies 2 e^{rho} q^3 + 3 t q^2 - 3 = 0.  This keeps every intermediate
quantity O(1) even when e^{2 rho} spans hundreds of orders of magnitude; the
solver is a bracketed Newton iteration with bisection fallback on the
monotone rescaled cubic, started from the upper end of a bracket derived
from the two asymptotic regimes (u' ~ t^{-1/2} e^rho deep in the fibre,
u' ~ (3/2)^{1/3} e^{2 rho/3} near the cone).  The closed-form cubic formula
is deliberately not used: it cancels catastrophically for small e^{2 rho}.

The t = 0 member has the closed-form solution

    u' = (3/2)^{1/3} e^{2 rho/3},   u'' = (2/3)^{2/3} e^{2 rho/3},

exposed separately as ``cone_profile``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import EmptySamples, NonFinite, RangeClampedWarning

#: rho is clamped here before exponentiation to keep e^rho inside float range.
RHO_CLAMP = (-700.0, 300.0)

CONE_UPRIME_COEFF = (3.0 / 2.0) ** (1.0 / 3.0)
CONE_USECOND_COEFF = (2.0 / 3.0) ** (2.0 / 3.0)


@dataclass(frozen=True)
class ProfileParams:
    """Kaehler class parameter: the coefficient t >= 0 of the base form."""

    t: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and 0.0 <= self.t <= 1.0):
            raise ValueError("t must lie in [0, 1]")


@dataclass(frozen=True)
class ProfileEval:
    """u' and u'' at a given (t, rho); both are strictly positive."""

    rho: float
    uprime: float
    usecond: float


def _clamp_rho(rho: float) -> float:
    if not math.isfinite(rho):
        raise NonFinite("rho must be finite")
    lo, hi = RHO_CLAMP
    if rho < lo or rho > hi:
        warnings.warn(
            f"rho={rho} clamped into [{lo}, {hi}]", RangeClampedWarning, stacklevel=3
        )
        return min(max(rho, lo), hi)
    return rho


def _solve_q(t: float, erho: float) -> float:
    """Positive root of f(q) = 2*erho*q^3 + 3*t*q^2 - 3 (monotone on q > 0).

    Both cubic terms are positive, so the root is bounded above by the
    smaller of the two single-regime roots m = min((3/(2 e^rho))^{1/3},
    t^{-1/2}), and f(0.45 m) < 0 always; Newton started at m stays inside
    this bracket and converges in a handful of steps at any rho.
    """
    hi = (1.5 / erho) ** (1.0 / 3.0)
    if t > 0.0:
        hi = min(hi, 1.0 / math.sqrt(t))
    hi *= 1.0 + 1e-12
    lo = 0.45 * hi

    def f(q):
        return (2.0 * erho * q + 3.0 * t) * q * q - 3.0

    q = hi
    fq = f(q)
    for _ in range(200):
        df = q * (6.0 * erho * q + 6.0 * t)
        if df > 0.0:
            step = fq / df
            q_new = q - step
        else:
            q_new = 0.5 * (lo + hi)
        if not (lo < q_new < hi):
            q_new = 0.5 * (lo + hi)
        f_new = f(q_new)
        if f_new > 0.0:
            hi = q_new
        else:
            lo = q_new
        if f_new == 0.0 or abs(q_new - q) <= 4.0 * math.ulp(q_new):
            return q_new
        q, fq = q_new, f_new
    return q


def solve_uprime(params: ProfileParams, rho: float) -> float:
    """The unique positive root u'(rho, t) of the profile cubic."""
    rho = _clamp_rho(rho)
    if params.t == 0.0:
        return CONE_UPRIME_COEFF * math.exp(2.0 * rho / 3.0)
    erho = math.exp(rho)
    return erho * _solve_q(params.t, erho)


def eval_profile(params: ProfileParams, rho: float) -> ProfileEval:
    """u' from the cubic and u'' from (t + u') u' u'' = e^{2 rho}."""
    rho = _clamp_rho(rho)
    if params.t == 0.0:
        return cone_profile(rho)
    up = solve_uprime(params, rho)
    erho = math.exp(rho)
    # Factored so neither e^{2 rho} nor e^{-2 rho} is ever formed.
    us = (erho / (params.t + up)) * (erho / up)
    return ProfileEval(rho=rho, uprime=up, usecond=us)


def cone_profile(rho: float) -> ProfileEval:
    """Closed-form t = 0 profile; no root-finding."""
    rho = _clamp_rho(rho)
    g = math.exp(2.0 * rho / 3.0)
    return ProfileEval(rho=rho, uprime=CONE_UPRIME_COEFF * g, usecond=CONE_USECOND_COEFF * g)


@dataclass(frozen=True)
class KahlerReport:
    """Positivity conditions for the symmetric form to be Kaehler on E."""

    a_positive: bool
    min_uprime: float
    min_usecond: float

    @property
    def uprime_positive(self) -> bool:
        return self.min_uprime > 0.0

    @property
    def usecond_positive(self) -> bool:
        return self.min_usecond > 0.0

    @property
    def passed(self) -> bool:
        return self.a_positive and self.uprime_positive and self.usecond_positive


def kahler_criterion(params: ProfileParams, rho_samples: list[float]) -> KahlerReport:
    """Check a > 0, u' > 0, u'' > 0 over the samples (a = t).

    At t = 0 the first condition fails, flagging the degenerate cone limit.
    """
    if not rho_samples:
        raise EmptySamples("rho_samples must be nonempty")
    evals = [eval_profile(params, r) for r in rho_samples]
    return KahlerReport(
        a_positive=params.t > 0.0,
        min_uprime=min(e.uprime for e in evals),
        min_usecond=min(e.usecond for e in evals),
    )


def cubic_residual(params: ProfileParams, rho: float, uprime: float) -> float:
    """Residual of the profile cubic at a claimed root (diagnostic)."""
    e2 = math.exp(2.0 * _clamp_rho(rho))
    return 2.0 * uprime**3 + 3.0 * params.t * uprime**2 - 3.0 * e2
