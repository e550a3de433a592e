"""Exact rational combinatorics for the gmCH crest-split energy density.

The order-n equation's higher conserved density factors, around the crest of
a positive solution, into a quadratic form g^2 weighted by a degree-2n
polynomial h in (u, u_x).  This module builds the constants of that
polynomial (one set per side of the crest) in exact arithmetic and certifies
every algebraic fact the stability argument rests on:

* the closed forms of the split coefficients c_k, d_k and the three-term
  recurrences they must satisfy;
* the family of alternating binomial identities behind the peakon speed law;
* non-positivity on [-1, 1] of the even polynomial phi built from the odd
  coefficients, including the sharp bound phi(z) <= -B/(1+z)^2;
* the double-root factorization of the crest polynomial P0.

Everything here is `fractions.Fraction` arithmetic; a check passes only when
its residual is exactly zero (or, for the interval certificate, when a
rigorous remainder bound closes the gap between grid samples).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

# Exact rational scalar used throughout the certificates.
Rational = Fraction

# ---------------------------------------------------------------------------
# elementary exact constants


def double_factorial_ratio(n: int) -> Rational:
    """(2n)!!/(2n+1)!! as an exact rational (equals 1 for n = 0)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    r = Rational(1)
    for k in range(1, n + 1):
        r *= Rational(2 * k, 2 * k + 1)
    return r


def double_factorial_sum(n: int) -> Rational:
    """B(n) = sum_{k=1}^{n} (2k)!!/(2k+1)!!; the crest constant c_1 equals -B."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = Rational(0)
    term = Rational(1)
    for k in range(1, n + 1):
        term *= Rational(2 * k, 2 * k + 1)
        total += term
    return total


def odd_reciprocal_sum_up(n: int) -> Rational:
    """S1(n) = sum_{k=1}^{n} (-1)^{k+1}/(2k+1) C(n,k)."""
    return sum(
        (Rational((-1) ** (k + 1), 2 * k + 1) * comb(n, k) for k in range(1, n + 1)),
        Rational(0),
    )


def odd_reciprocal_sum_down(n: int) -> Rational:
    """S2(n) = sum_{k=1}^{n} (-1)^{k-1}/(2k-1) C(n,k)."""
    return sum(
        (Rational((-1) ** (k - 1), 2 * k - 1) * comb(n, k) for k in range(1, n + 1)),
        Rational(0),
    )


def speed_factor(n: int) -> Rational:
    """kappa_n = 1 - S1(n): the wave speed is kappa_n * a^(2n).

    Equals (2n)!!/(2n+1)!! by the alternating binomial identity certified in
    :func:`verify_identities`.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1 - odd_reciprocal_sum_up(n)


def f_integrand_coefficients(n: int) -> tuple[list[Rational], Rational]:
    """Coefficients of the higher conserved density F.

    F(u) integrates u^(2n+2) + sum_k mid[k-1] u^(2n-2k+2) u_x^(2k)
    + lead * u_x^(2n+2); returns (mid list for k = 1..n, lead).
    """
    mids = [Rational((-1) ** (k + 1), 2 * k - 1) * comb(n + 1, k) for k in range(1, n + 1)]
    lead = Rational((-1) ** n, 2 * n + 1)
    return mids, lead


def nonlocal_form_coefficients(n: int) -> dict[str, object]:
    """Exact constants of the evolution equation's nonlocal form.

    local:      u_t gains -(u^(2n) - sum s1_k u^(2n-2k) u_x^(2k)) u_x
    conv_grad:  -d/dx p * (grad0 u^(2n+1) + sum s2_k u^(2n-2k+1) u_x^(2k))
    conv_plain: -p * (sum s1_k u^(2n-2k) u_x^(2k+1))
    """
    s1 = [Rational((-1) ** (k + 1), 2 * k + 1) * comb(n, k) for k in range(1, n + 1)]
    s2 = [Rational((-1) ** (k - 1), 2 * k - 1) * comb(n, k) for k in range(1, n + 1)]
    return {"s1": s1, "s2": s2, "grad0": Rational(2 * n, 2 * n + 1)}


# ---------------------------------------------------------------------------
# certificates


class CertificateFailure(Exception):
    """An exact identity or inequality check did not hold."""


@dataclass(frozen=True)
class Witness:
    n: int
    residual: str
    point: str | None = None


@dataclass(frozen=True)
class Certificate:
    """Outcome of one exact check over a range of orders n."""

    identity_id: str
    n_range: tuple[int, int]
    status: str  # "pass" | "fail"
    witness: Witness | None = None
    detail: str | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json_dict(self) -> dict:
        out: dict = {
            "identity_id": self.identity_id,
            "n_range": list(self.n_range),
            "status": self.status,
        }
        if self.witness is not None:
            out["witness"] = {
                "n": self.witness.n,
                "residual": self.witness.residual,
                **({"point": self.witness.point} if self.witness.point else {}),
            }
        if self.detail is not None:
            out["detail"] = self.detail
        return out


def _certificate(identity_id: str, n_lo: int, n_hi: int,
                 failures: list[Witness], detail: str | None = None) -> Certificate:
    if failures:
        return Certificate(identity_id, (n_lo, n_hi), "fail", failures[0], detail)
    return Certificate(identity_id, (n_lo, n_hi), "pass", None, detail)


# ---------------------------------------------------------------------------
# the coefficient table


@dataclass(frozen=True)
class CoefficientTable:
    """Crest-split coefficients c_k (left side), d_k (right side), k = 1..2n-1.

    Both sides share the boundary terms: u^(2n) with coefficient 1 and
    u_x^(2n) with coefficient ``leading`` = (-1)^n/(2n+1).  The parity
    structure d_k = (-1)^k c_k, the link c_1 = -B, and the positivity of
    2 - c_1 are verified at construction time.
    """

    n: int
    c: tuple[Rational, ...]
    d: tuple[Rational, ...]
    leading: Rational
    B: Rational
    two_minus_c1: Rational

    def c_at(self, k: int) -> Rational:
        """c_k for k = 0..2n: k = 0 and k = 2n give the shared boundary terms."""
        if k == 0:
            return Rational(1)
        if k == 2 * self.n:
            return self.leading
        return self.c[k - 1]

    def d_at(self, k: int) -> Rational:
        if k == 0:
            return Rational(1)
        if k == 2 * self.n:
            return self.leading
        return self.d[k - 1]

    def phi_coefficients(self) -> tuple[Rational, ...]:
        """Odd-slot coefficients (c_1, c_3, ..., c_{2n-1}) defining phi(z)."""
        return tuple(self.c[2 * k - 2] for k in range(1, self.n + 1))

    def h_coefficients(self, side: str) -> tuple[Rational, ...]:
        """Full coefficient vector (index k = 0..2n) for one side of the crest."""
        at = self.c_at if side == "left" else self.d_at
        return tuple(at(k) for k in range(0, 2 * self.n + 1))


def _closed_form_c(n: int) -> dict[int, Rational]:
    c: dict[int, Rational] = {}
    c[1] = Rational(1, 2) + sum(
        (Rational((-1) ** (j + 1) * (2 * j - 3), 2 * (2 * j - 1)) * comb(n + 1, j)
         for j in range(1, n + 2)),
        Rational(0),
    )
    for m in range(1, n):
        c[2 * m] = sum(
            (Rational((-1) ** (j + 1) * (2 * j - (2 * m + 1)), 2 * j - 1) * comb(n + 1, j)
             for j in range(m + 1, n + 2)),
            Rational(0),
        )
    for m in range(2, n + 1):
        c[2 * m - 1] = sum(
            (Rational((-1) ** (j + 1) * (2 * j - 2 * m), 2 * j - 1) * comb(n + 1, j)
             for j in range(m + 1, n + 2)),
            Rational(0),
        )
    return c


def recurrence_residuals(table: CoefficientTable, side: str) -> list[tuple[str, Rational]]:
    """Residuals of every three-term relation the side's coefficients satisfy.

    With the extended vector (1, e_1, ..., e_{2n-1}, leading) and s = -1 for
    the left side, s = +1 for the right side, the relations are

        e_k + 2 s e_{k-1} + e_{k-2} = rhs_k,   k = 2..2n+1,

    where rhs_k = (-1)^(j+1)/(2j-1) C(n+1, j) for even k = 2j, rhs_k = 0 for
    odd k, and e_{2n+1} = 0.  Odd relations force the total-derivative
    structure; even relations match the conserved-density coefficients.
    """
    n = table.n
    at = table.c_at if side == "left" else table.d_at
    s = -1 if side == "left" else 1
    mids, _lead = f_integrand_coefficients(n)
    residuals = []
    for k in range(2, 2 * n + 2):
        e_k = Rational(0) if k == 2 * n + 1 else at(k)
        lhs = e_k + 2 * s * at(k - 1) + at(k - 2)
        rhs = mids[k // 2 - 1] if k % 2 == 0 else Rational(0)
        residuals.append((f"{side}:k={k}", lhs - rhs))
    return residuals


def coefficient_table(n: int) -> CoefficientTable:
    """Build the crest-split table for order n from the closed forms.

    Self-verifies: recurrence residuals must vanish exactly, c_1 must equal
    -B(n), and 2 - c_1 must match its alternating-binomial expansion.
    Supported for every n >= 1 (n = 1 is the cubic-nonlinearity case).
    """
    if n < 1:
        raise ValueError("order n must be a positive integer")
    cmap = _closed_form_c(n)
    c = tuple(cmap[k] for k in range(1, 2 * n))
    d = tuple((v if k % 2 == 0 else -v) for k, v in zip(range(1, 2 * n), c))
    B = double_factorial_sum(n)
    table = CoefficientTable(
        n=n,
        c=c,
        d=d,
        leading=Rational((-1) ** n, 2 * n + 1),
        B=B,
        two_minus_c1=2 - c[0],
    )
    for side in ("left", "right"):
        for name, res in recurrence_residuals(table, side):
            if res != 0:
                raise CertificateFailure(f"recurrence {name} residual {res} at n={n}")
    if table.c[0] != -B:
        raise CertificateFailure(f"c_1 != -B at n={n}: {table.c[0]} vs {-B}")
    alt = 1 + sum(
        (Rational((-1) ** (k + 1), 2 * k - 1) * comb(n + 1, k) for k in range(1, n + 2)),
        Rational(0),
    )
    if table.two_minus_c1 != alt:
        raise CertificateFailure(f"2 - c_1 mismatch at n={n}")
    if table.two_minus_c1 <= 0:
        raise CertificateFailure(f"2 - c_1 not positive at n={n}")
    return table


def verify_recurrences(table: CoefficientTable) -> Certificate:
    """Check every three-term relation of both sides with exact arithmetic."""
    failures = []
    for ident, side in (("R4.3", "left"), ("R4.4", "right")):
        for name, res in recurrence_residuals(table, side):
            if res != 0:
                failures.append(Witness(table.n, str(res), point=name))
    detail = None
    if table.n == 1:
        detail = "n=1: interior relations are empty; only boundary relations apply"
    ident = "R4.3" if not failures or failures[0].point.startswith("left") else "R4.4"
    return _certificate(ident, table.n, table.n, failures, detail)


# ---------------------------------------------------------------------------
# identity family


def _identity_residuals(n: int) -> dict[str, tuple[Rational, str | None]]:
    """Residual (lhs - rhs) of each alternating-binomial identity at order n."""
    s1 = odd_reciprocal_sum_up(n)
    s2 = odd_reciprocal_sum_down(n)
    dfr = double_factorial_ratio(n)
    out: dict[str, tuple[Rational, str | None]] = {}

    comb_formula = sum(
        (Rational((-1) ** k, 2 * k + 1) * comb(n, k) for k in range(0, n + 1)),
        Rational(0),
    )
    out["COMBINATION_FORMULA"] = (comb_formula - dfr, None)

    lhs = Rational(1, 4 * n * (n + 1)) * ((2 * n + s1) + (2 * n + 1) * s2)
    out["E2.14"] = (lhs - (1 - s1), None)

    # Two readings of the aggregate identity: first sum to n-1 as printed,
    # or to n as its companions suggest.  Record which one is exact.
    partial = sum(
        (Rational((-1) ** (k + 1), 2 * k + 1) * comb(n, k) for k in range(1, n)),
        Rational(0),
    )
    rhs215 = Rational(2 * n + (-1) ** n)
    res_printed = (2 * n + 1) * partial + s2 - rhs215
    res_variant = (2 * n + 1) * s1 + s2 - rhs215
    if res_printed == 0:
        out["E2.15"] = (res_printed, "exact with first sum to n-1 (as printed)")
    elif res_variant == 0:
        out["E2.15"] = (res_variant, "exact with first sum extended to n")
    else:
        out["E2.15"] = (res_printed, "neither reading exact; printed residual shown")

    out["E2.16"] = (partial + (dfr - 1 - Rational((-1) ** n, 2 * n + 1)), None)

    # (2n)!!/(2n-1)!! = (2n+1) * (2n)!!/(2n+1)!!
    out["E2.17"] = (s2 - ((2 * n + 1) * dfr - 1), None)

    table = coefficient_table(n)
    alt33 = 1 + sum(
        (Rational((-1) ** (k + 1), 2 * k - 1) * comb(n + 1, k) for k in range(1, n + 2)),
        Rational(0),
    )
    out["E3.33"] = (table.two_minus_c1 - alt33, None)

    alt34 = sum(
        (Rational((-1) ** (k + 1)) * comb(n + 1, k) for k in range(1, n + 2)),
        Rational(0),
    )
    out["E3.34"] = (alt34 - 1, None)
    return out


_IDENTITY_IDS = (
    "COMBINATION_FORMULA",
    "E2.14",
    "E2.15",
    "E2.16",
    "E2.17",
    "E3.33",
    "E3.34",
)


def verify_identities(n_max: int) -> list[Certificate]:
    """Certify the whole alternating-binomial identity family for n = 1..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    failures: dict[str, list[Witness]] = {i: [] for i in _IDENTITY_IDS}
    details: dict[str, str | None] = {i: None for i in _IDENTITY_IDS}
    for n in range(1, n_max + 1):
        for ident, (res, note) in _identity_residuals(n).items():
            if res != 0:
                failures[ident].append(Witness(n, str(res)))
            if note is not None and details[ident] is None:
                details[ident] = note
    return [
        _certificate(ident, 1, n_max, failures[ident], details[ident])
        for ident in _IDENTITY_IDS
    ]


def check_speed_law_identity(n: int) -> Rational:
    """Residual of the kernel-split constant against kappa_n (zero iff exact)."""
    return _identity_residuals(n)["E2.14"][0]


# ---------------------------------------------------------------------------
# the even polynomial phi and the quadratic-weighted form f


def phi_value(table: CoefficientTable, z: Rational) -> Rational:
    """phi(z) = sum_{k=1}^{n} c_{2k-1} z^(2k-2), exact."""
    acc = Rational(0)
    w = z * z
    for coef in reversed(table.phi_coefficients()):
        acc = acc * w + coef
    return acc


def f_value(table: CoefficientTable, z: Rational) -> Rational:
    """f(z) = (c_{2n-1}/2) z^(2n) + sum_{k=1}^{2n-1} c_k z^k + c_1/2, exact."""
    n = table.n
    acc = table.c[2 * n - 2] / 2
    for k in range(2 * n - 1, 0, -1):
        acc = acc * z + table.c[k - 1]
    return acc * z + table.c[0] / 2


def verify_f_factorization(n: int, samples: Sequence[Rational]) -> Certificate:
    """Check f(z) = (1+z)^2/2 * phi(z) exactly at each sample point."""
    table = coefficient_table(n)
    failures = []
    for z in samples:
        z = Rational(z)
        res = f_value(table, z) - (1 + z) ** 2 / 2 * phi_value(table, z)
        if res != 0:
            failures.append(Witness(n, str(res), point=str(z)))
            break
    return _certificate("F_FACTORIZATION", n, n, failures)


def _poly_eval(coeffs: Sequence[Rational], z: Rational) -> Rational:
    acc = Rational(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _rigorous_max_abs(coeffs: Sequence[Rational], denom: int) -> Rational:
    """Upper bound for max |p| on [-1,1]: grid max plus a remainder that
    recursively bounds the derivative the same way.  Exact rationals."""
    deg = len(coeffs) - 1
    while deg > 0 and coeffs[deg] == 0:
        deg -= 1
    if deg <= 0:
        return abs(coeffs[0]) if coeffs else Rational(0)
    g = max(abs(_poly_eval(coeffs, Rational(j, denom))) for j in range(-denom, denom + 1))
    deriv = [coeffs[i] * i for i in range(1, deg + 1)]
    return g + Rational(1, 2 * denom) * _rigorous_max_abs(deriv, denom)


def certify_phi_nonpositive(n: int, denominator_bound: int = 4096) -> Certificate:
    """Certify phi <= 0 on all of [-1,1] and phi <= -B/(1+z)^2 at samples of [0,1).

    Grid samples z = j/denominator_bound are evaluated exactly; between
    samples the gap is closed by a rigorous bound on max |phi'| over [-1,1],
    obtained by the same grid-plus-remainder construction applied to the
    derivative chain (a plain coefficient-magnitude constant is far too loose
    once the split coefficients grow with n).  The sharp bound is checked at
    the sample points only.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if denominator_bound < 64:
        raise ValueError("denominator_bound must be >= 64")
    table = coefficient_table(n)
    D = denominator_bound
    odd = table.phi_coefficients()
    dense: list[Rational] = [Rational(0)] * (2 * n - 1)
    for k, q in enumerate(odd, start=1):
        dense[2 * k - 2] = q
    deriv = [dense[i] * i for i in range(1, len(dense))]
    # Coarse chain grid: still a valid upper bound, much cheaper.
    deriv_max = _rigorous_max_abs(deriv, min(D, 256)) if deriv else Rational(0)
    remainder = Rational(1, 2 * D) * deriv_max

    failures = []
    # phi is even: sample z = j/D for j = 0..D and use symmetry.
    for j in range(0, D + 1):
        z = Rational(j, D)
        val = phi_value(table, z)
        if val + remainder > 0:
            failures.append(Witness(n, str(val), point=f"z={z} (+remainder {remainder})"))
            break
        if j < D:  # sharp bound on [0, 1) at the sample points
            sharp = (1 + z) ** 2 * val + table.B
            if sharp > 0:
                failures.append(Witness(n, str(sharp), point=f"sharp bound at z={z}"))
                break
    detail = f"grid 1/{D}, derivative bound {float(deriv_max):.6g}"
    return _certificate("PHI_NONPOS", n, n, failures, detail)


# ---------------------------------------------------------------------------
# crest polynomial factorization


def _bivariate_expand_product(n: int) -> dict[tuple[int, int], int]:
    """(y-a)^2 * (n y^(2n) + sum_{k=1}^{2n-1} (2n+1-k) a^k y^(2n-k) + a^(2n))
    as {(deg_y, deg_a): integer coefficient}."""
    factor2: dict[tuple[int, int], int] = {(2 * n, 0): n, (0, 2 * n): 1}
    for k in range(1, 2 * n):
        factor2[(2 * n - k, k)] = 2 * n + 1 - k
    square = {(2, 0): 1, (1, 1): -2, (0, 2): 1}  # (y - a)^2
    out: dict[tuple[int, int], int] = {}
    for (py, pa), cv in factor2.items():
        for (qy, qa), sv in square.items():
            key = (py + qy, pa + qa)
            out[key] = out.get(key, 0) + cv * sv
    return {k: v for k, v in out.items() if v != 0}


def verify_P0_factorization(n: int) -> Certificate:
    """Expand the claimed double-root factorization of the crest polynomial
    and compare coefficient-wise with n y^(2n+2) - (n+1) a^2 y^(2n) + a^(2n+2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lhs = {(2 * n + 2, 0): n, (2 * n, 2): -(n + 1), (0, 2 * n + 2): 1}
    rhs = _bivariate_expand_product(n)
    failures = []
    for key in sorted(set(lhs) | set(rhs)):
        delta = lhs.get(key, 0) - rhs.get(key, 0)
        if delta != 0:
            failures.append(Witness(n, str(delta), point=f"monomial y^{key[0]} a^{key[1]}"))
            break
    return _certificate("E3.35", n, n, failures)
