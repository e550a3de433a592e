"""Discrete conserved functionals and the crest-split stability machinery.

Two functionals are conserved by the flow: the H1 energy E and a higher
density F of degree 2n+2 whose coefficients come from the exact table.  The
stability argument splits the line at the crest location xi and works with

    g = u - u_x (left of xi), u + u_x (right),
    h = u^(2n) + sum_k e_k u^(2n-k) u_x^k + lead u_x^(2n),

with e_k = c_k left and d_k right.  Two integral identities tie them to the
functionals for any split point (not only the maximum):

    int g^2      = E(u)  - 2 u(xi)^2
    int h g^2    = F(u)  - (2 - c_1)/(n+1) u(xi)^(2n+2)

and a pointwise bound h <= (2 - c_1)/2 u^(2n) holds wherever u > 0 and
u +- u_x >= 0.  Together they give the polynomial inequality

    n(2-c_1)/(n+1) M^(2n+2) - (2-c_1)/2 M^(2n) E + F <= 0,

which the peakon saturates exactly.  The split integrals are evaluated by
spectral antiderivatives so the identities hold to spectral accuracy; a
plain sum over the piecewise field would lose O(dx) at the split cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientTable, f_integrand_coefficients
from .grid import GridFunction, partial_integral, quadrature
from .profiles import PeakonParams, h1_distance_via_crest_identity


class SignConditionError(Exception):
    """The pointwise hypotheses u > 0, u +- u_x >= 0 fail on the grid."""


@dataclass(frozen=True)
class StabilityCheck:
    """Raw ingredients of the polynomial inequality at one instant."""

    lhs: float
    M: float
    xi: float
    E: float
    F: float


@dataclass(frozen=True)
class PeakDeviation:
    """Gap of the crest-deviation bound and the sup-bound flag."""

    gap: float
    sup_bound_ok: bool


def energy_E(u: GridFunction) -> float:
    """H1 energy: integral of u^2 + u_x^2."""
    du = u.du
    return quadrature(u.spec, u.samples * u.samples + du * du)


def functional_F(u: GridFunction, table: CoefficientTable) -> float:
    """Higher conserved density of degree 2n+2, exact coefficients."""
    n = table.n
    mids, lead = f_integrand_coefficients(n)
    uu = u.samples
    du = u.du
    acc = uu ** (2 * n + 2)
    for k, coef in enumerate(mids, start=1):
        acc = acc + float(coef) * uu ** (2 * n - 2 * k + 2) * du ** (2 * k)
    acc = acc + float(lead) * du ** (2 * n + 2)
    return quadrature(u.spec, acc)


def hamiltonian_H(u: GridFunction, table: CoefficientTable) -> float:
    """Hamiltonian density 1/(2(n+1)) * integral of u (u^2 - u_x^2)^n y."""
    n = table.n
    du = u.du
    integrand = u.samples * (u.samples**2 - du**2) ** n * u.y
    return quadrature(u.spec, integrand) / (2 * (n + 1))


def h1_distance_to_peakon(u: GridFunction, params: PeakonParams, xi: float) -> float:
    """H1 distance to the translated peakon via the crest identity.

    Requires xi at least ~10 e-foldings inside the domain so tail truncation
    stays under the budget.
    """
    if u.spec.half_length - abs(xi) < 10:
        raise ValueError("xi too close to the domain edge for the tail budget")
    return h1_distance_via_crest_identity(u, params, xi)


def max_and_location(u: GridFunction) -> tuple[float, float]:
    """Grid argmax refined by a local parabola through three samples.

    Ties break to the smallest x (the first grid maximum).  Returns (M, xi).
    """
    s = u.samples
    if np.all(s == s[0]):
        raise ValueError("field is constant; maximum location undefined")
    i = int(np.argmax(s))
    n = u.spec.point_count
    um, u0, up = s[(i - 1) % n], s[i], s[(i + 1) % n]
    denom = um - 2 * u0 + up
    if denom >= 0 or denom == 0:  # flat or degenerate: keep the node
        return float(u0), float(u.spec.x[i])
    shift = 0.5 * (um - up) / denom
    M = u0 - 0.25 * (um - up) * shift
    return float(M), float(u.spec.x[i] + shift * u.spec.dx)


def _side_masks(u: GridFunction, xi: float) -> np.ndarray:
    """True where the sample lies left of the split (x < xi)."""
    return u.spec.x < xi


def g_function(u: GridFunction, xi: float) -> GridFunction:
    """Crest-split field g: u - u_x left of xi, u + u_x at and right of xi."""
    du = u.du
    left = _side_masks(u, xi)
    out = np.where(left, u.samples - du, u.samples + du)
    return GridFunction(u.spec, out)


def h_function(u: GridFunction, xi: float, table: CoefficientTable) -> GridFunction:
    """Crest-split density h with the c-side left of xi and d-side right."""
    n = table.n
    uu, du = u.samples, u.du
    sides = []
    for side in ("left", "right"):
        coeffs = table.h_coefficients(side)
        acc = np.zeros_like(uu)
        for k, coef in enumerate(coeffs):
            acc = acc + float(coef) * uu ** (2 * n - k) * du**k
        sides.append(acc)
    left = _side_masks(u, xi)
    return GridFunction(u.spec, np.where(left, sides[0], sides[1]))


def g_square_integral(u: GridFunction, xi: float) -> float:
    """integral of g^2 with the split evaluated by spectral antiderivatives."""
    du = u.du
    gm2 = (u.samples - du) ** 2
    gp2 = (u.samples + du) ** 2
    left = partial_integral(u.spec, gm2, xi)
    right = quadrature(u.spec, gp2) - partial_integral(u.spec, gp2, xi)
    return left + right


def hg_square_integral(u: GridFunction, xi: float, table: CoefficientTable) -> float:
    """integral of h g^2 with the split evaluated by spectral antiderivatives."""
    n = table.n
    uu, du = u.samples, u.du
    out = 0.0
    for side, gsq_sign in (("left", -1.0), ("right", 1.0)):
        coeffs = table.h_coefficients(side)
        h_side = np.zeros_like(uu)
        for k, coef in enumerate(coeffs):
            h_side = h_side + float(coef) * uu ** (2 * n - k) * du**k
        integrand = h_side * (uu + gsq_sign * du) ** 2
        if side == "left":
            out += partial_integral(u.spec, integrand, xi)
        else:
            out += quadrature(u.spec, integrand) - partial_integral(u.spec, integrand, xi)
    return out


def check_pointwise_h_bound(u: GridFunction, xi: float,
                            table: CoefficientTable, sign_tol: float = -1e-10) -> float:
    """Worst margin of (2 - c_1)/2 u^(2n) - h over the grid.

    The claim needs u > 0 and u +- u_x >= 0 pointwise; those are verified
    first and a violation raises SignConditionError rather than polluting
    the bound's margin.
    """
    uu, du = u.samples, u.du
    if float(np.min(uu)) < sign_tol:
        raise SignConditionError(f"min u = {np.min(uu):.3e} below tolerance")
    if float(np.min(uu - du)) < sign_tol or float(np.min(uu + du)) < sign_tol:
        raise SignConditionError("u +- u_x dips below tolerance")
    n = table.n
    h = h_function(u, xi, table).samples
    bound = float(table.two_minus_c1) / 2 * uu ** (2 * n)
    return float(np.min(bound - h))


def stability_lhs(E: float, F: float, M: float, table: CoefficientTable) -> float:
    """Left side of the polynomial inequality at given invariants and crest."""
    n = table.n
    tmc = float(table.two_minus_c1)
    return n * tmc / (n + 1) * M ** (2 * n + 2) - tmc / 2 * M ** (2 * n) * E + F


def stability_inequality(u: GridFunction, table: CoefficientTable) -> StabilityCheck:
    """Evaluate the polynomial inequality on a grid field; the caller applies
    the tolerance (the sign hypothesis is the caller's responsibility too)."""
    E = energy_E(u)
    F = functional_F(u, table)
    M, xi = max_and_location(u)
    return StabilityCheck(lhs=stability_lhs(E, F, M, table), M=M, xi=xi, E=E, F=F)


def peak_deviation_bound(E: float, F: float, M: float, params: PeakonParams,
                         table: CoefficientTable) -> PeakDeviation:
    """Gap of the crest-deviation inequality

        a^(2n) (M - a)^2 <= (n+1)/2 M^(2n) (E - E_peak) - (n+1)/(2-c_1) (F - F_peak),

    nonnegative when the inequality holds, along with the sup-bound check
    0 < M^2 <= E/2.
    """
    if M <= 0:
        raise ValueError("M must be positive")
    n, a = params.n, params.a
    E_peak = 2 * a**2
    F_peak = a ** (2 * n + 2) * float(table.two_minus_c1) / (n + 1)
    rhs = (n + 1) / 2 * M ** (2 * n) * (E - E_peak) - (n + 1) / float(
        table.two_minus_c1
    ) * (F - F_peak)
    gap = rhs - a ** (2 * n) * (M - a) ** 2
    sup_ok = M**2 <= E / 2 * (1 + 1e-10)
    return PeakDeviation(gap=gap, sup_bound_ok=sup_ok)


def sup_norm_bound_margin(u: GridFunction) -> float:
    """Margin of sup|u| <= sqrt(E/2): positive means the bound holds."""
    E = energy_E(u)
    return math.sqrt(max(E, 0.0) / 2) * (1 + 1e-10) - float(np.max(np.abs(u.samples)))
