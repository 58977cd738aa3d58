"""Local coordinates on the resolved conifold.

The total space E of O(-1)+O(-1) over the projective line is covered by two
trivializing charts; everything here works in the canonical affine chart
(z, xi1, xi2), with z the inhomogeneous base coordinate.  The log fibre
radius is

    rho = log((1 + |z|^2) (|xi1|^2 + |xi2|^2)),

finite exactly off the zero section P0 = {xi = 0}, where rho = -inf
(the float sentinel, kept exact so zero-section logic never depends on a
tolerance).  The module also provides the flop coordinate change to the
mirror chart (w, eta1, eta2), the contraction into C^4 whose image is the
quadric cone {y1 y4 = y2 y3}, and membership tests for the model domains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import IndeterminateFlop, OnZeroSection

NEG_INFINITY = float("-inf")

#: Sentinel for the fibre coordinate of points with xi1 = 0 (the fibre "L_inf").
POINT_AT_INFINITY = complex(float("inf"), 0.0)


@dataclass(frozen=True)
class ResolvedPoint:
    """A point of E: base coordinate z and fibre coordinates (xi1, xi2)."""

    z: complex
    xi1: complex
    xi2: complex

    def on_zero_section(self) -> bool:
        return self.xi1 == 0 and self.xi2 == 0


@dataclass(frozen=True)
class FlopPoint:
    """A point of the flopped bundle E' in its trivialization (w, eta1, eta2)."""

    w: complex
    eta1: complex
    eta2: complex


@dataclass(frozen=True)
class ConePoint:
    """Image of a point of E under the contraction to C^4."""

    y: tuple[complex, complex, complex, complex]


@dataclass(frozen=True)
class DomainSpec:
    """Either Omega = {rho < 0} or OmegaR = {e^rho <= r^2}."""

    kind: str
    r: float = 0.0

    def __post_init__(self):
        if self.kind not in ("Omega", "OmegaR"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "OmegaR" and not self.r > 0:
            raise ValueError("OmegaR requires r > 0")

    def rho_max(self) -> float:
        """Supremum of rho over the domain (0 for Omega, 2 log r for OmegaR)."""
        if self.kind == "Omega":
            return 0.0
        return 2.0 * math.log(self.r)


OMEGA = DomainSpec("Omega")


def omega_r(r: float) -> DomainSpec:
    return DomainSpec("OmegaR", r)


def rho(p: ResolvedPoint) -> float:
    """Log fibre radius; -inf on the zero section."""
    s = math.hypot(abs(p.xi1), abs(p.xi2))
    if s == 0.0:
        return NEG_INFINITY
    return math.log1p(abs(p.z) ** 2) + 2.0 * math.log(s)


def rho_alpha(p: ResolvedPoint, alpha: int) -> float:
    """Log radius of the alpha-th line-bundle factor, alpha in {1, 2}."""
    if alpha not in (1, 2):
        raise ValueError("alpha must be 1 or 2")
    xi = p.xi1 if alpha == 1 else p.xi2
    if xi == 0:
        return NEG_INFINITY
    return math.log1p(abs(p.z) ** 2) + 2.0 * math.log(abs(xi))


def nu_coords(p: ResolvedPoint) -> tuple[complex, complex]:
    """Flat coordinates (nu1, nu2) = (z*xi1, xi1); |nu|^2 = e^{rho_1}."""
    return (p.z * p.xi1, p.xi1)


def flop_forward(p: ResolvedPoint) -> FlopPoint:
    """Coordinate change to the flopped chart: (w, eta) = (xi2/xi1, xi1, z*xi1)."""
    if p.xi1 == 0:
        raise IndeterminateFlop("flop undefined where xi1 = 0")
    return FlopPoint(w=p.xi2 / p.xi1, eta1=p.xi1, eta2=p.z * p.xi1)


def flop_backward(q: FlopPoint) -> ResolvedPoint:
    """Inverse coordinate change: (z, xi) = (eta2/eta1, eta1, w*eta1)."""
    if q.eta1 == 0:
        raise IndeterminateFlop("inverse flop undefined where eta1 = 0")
    return ResolvedPoint(z=q.eta2 / q.eta1, xi1=q.eta1, xi2=q.w * q.eta1)


def contract(p: ResolvedPoint) -> ConePoint:
    """Contraction of E to the quadric cone in C^4, (xi1, xi2, z*xi1, z*xi2).

    The whole zero section maps to the cone tip y = 0, and the image
    satisfies y1*y4 = y2*y3.
    """
    return ConePoint((p.xi1, p.xi2, p.z * p.xi1, p.z * p.xi2))


def in_domain(p: ResolvedPoint, d: DomainSpec) -> bool:
    """Membership by the rho threshold; zero-section points belong to every domain."""
    r = rho(p)
    if d.kind == "Omega":
        return r < 0.0
    return r <= d.rho_max()


def fibre_coordinate(p: ResolvedPoint) -> complex:
    """The w with p in L_w = {xi2 = w*xi1}; inf sentinel when xi1 = 0."""
    if p.on_zero_section():
        raise OnZeroSection("every fibre passes through the zero section")
    if p.xi1 == 0:
        return POINT_AT_INFINITY
    return p.xi2 / p.xi1


def second_chart(p: ResolvedPoint) -> ResolvedPoint:
    """Transition to the chart covering z = inf: (1/z, z*xi1, z*xi2).

    Involutive on its domain and preserves e^rho; only used when sampling
    near the far pole of the base.
    """
    if p.z == 0:
        raise ValueError("second chart undefined at z = 0")
    return ResolvedPoint(z=1.0 / p.z, xi1=p.z * p.xi1, xi2=p.z * p.xi2)
