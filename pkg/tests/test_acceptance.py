"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Criteria 1-8 and 10 are quantitative gates at pinned tolerances. Criterion 9
is the property-based stability experiment; its envelope and runtime parts
hold, while the crest-deviation exponent part asserts the stated window
[0.4, 0.6] and documents the measured value (the crest response of
grid-realizable data is floored by the mollification bias at this
resolution, so the window is not expected to be met; see the failure
message for the measured exponents).
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from gmchlab import coefficients as co
from gmchlab import evolution as ev
from gmchlab import functionals as fl
from gmchlab import profiles as pr
from gmchlab import weakform as wf
from gmchlab.experiment import ExperimentConfig, run_stability_sweep
from gmchlab.grid import GridFunction, GridSpec, quadrature

SPEC = GridSpec(20.0, 4096)  # N = 2^12 working grid


def _report(criterion: str, ok: bool, detail: str = ""):
    print(f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'}"
          + (f"  ({detail})" if detail else ""))


# ---------------------------------------------------------------------------
# shared runs (module scope: several criteria observe the same trajectories)


def _positive_momentum_data(spec=SPEC):
    y0 = np.exp(-(((spec.x + 1.0) / 1.6) ** 2)) + 0.6 * np.exp(
        -(((spec.x - 2.5) / 1.2) ** 2)
    )
    return GridFunction.from_momentum(spec, y0)


@pytest.fixture(scope="module")
def smooth_runs():
    """Positive-momentum smooth data evolved to t = 1 for n = 1, 2, 3."""
    u0 = _positive_momentum_data()
    out = {}
    for n in (1, 2, 3):
        cfg = ev.SolverConfig(n=n, grid=SPEC, cfl=0.25, t_end=1.0, observe_every=25)
        out[n] = ev.run(u0, cfg, co.coefficient_table(n))
    return out


@pytest.fixture(scope="module")
def wide_mollified_run():
    """Wide mollified peakon (resolved for the whole horizon) to t = 5."""
    p = pr.PeakonParams.from_amplitude(1, 1.0)
    u0, _ = pr.mollified_peakon(p, pr.MollifierSpec(width=2.0, mass=2.0), SPEC)
    cfg = ev.SolverConfig(n=1, grid=SPEC, cfl=0.25, t_end=5.0, observe_every=50)
    return ev.run(u0, cfg, co.coefficient_table(1))


@pytest.fixture(scope="module")
def transport_run():
    """Snapshot-dense positive-momentum run to t = 2 for characteristics."""
    u0 = _positive_momentum_data()
    cfg = ev.SolverConfig(n=1, grid=SPEC, cfl=0.25, t_end=2.0, observe_every=50)
    return ev.run(u0, cfg, co.coefficient_table(1), store_every=1)


@pytest.fixture(scope="module")
def stability_sweeps():
    delta = 4 * SPEC.dx
    reports = {}
    timings = {}
    for n, c in ((1, 2 / 3), (2, 8 / 15)):
        cfg = ExperimentConfig(
            n=n, c=c, delta=delta, eps_list=(1e-2, 1e-3, 1e-4),
            t_end=3.0, point_count=4096, half_length=20.0,
        )
        t0 = time.time()
        reports[n] = run_stability_sweep(cfg)
        timings[n] = time.time() - t0
    return reports, timings


# ---------------------------------------------------------------------------


def test_criterion_01_exact_certificates():
    """Identity family to n = 50; recurrences and crest factorization to
    n = 20; all in exact arithmetic within 60 seconds."""
    t0 = time.time()
    certs = co.verify_identities(50)
    ok = all(c.passed for c in certs)
    for n in range(1, 21):
        table = co.coefficient_table(n)
        ok &= co.verify_recurrences(table).passed
        ok &= co.verify_P0_factorization(n).passed
        ok &= co.verify_f_factorization(
            n, [Fraction(-1), Fraction(0), Fraction(1), Fraction(1, 3), Fraction(-3, 7)]
        ).passed
    elapsed = time.time() - t0
    ok &= elapsed <= 60.0
    _report("criterion 1 (exact certificates)", ok, f"{elapsed:.1f}s")
    assert ok


def test_criterion_02_phi_nonpositivity():
    """Interval certificate at denominator 4096 for n <= 20, sharp bound at
    the samples of [0, 1), and c_1 = -B exactly for n <= 30."""
    ok = all(co.certify_phi_nonpositive(n, 4096).passed for n in range(1, 21))
    for n in range(1, 31):
        t = co.coefficient_table(n)
        ok &= t.c[0] == -co.double_factorial_sum(n)
    _report("criterion 2 (phi non-positivity and c1 = -B)", ok)
    assert ok


def test_criterion_03_peakon_weak_solution():
    """Pointwise residual <= 1e-8 a^(2n+1) over the full fan; closed forms of
    the gradient convolution match quadrature to 1e-10 relative."""
    quad = wf.QuadratureSpec()
    worst_scaled = 0.0
    for n in (1, 2, 3):
        for a in (0.5, 1.0, 2.0):
            params = pr.PeakonParams.from_amplitude(n, a)
            scale = a ** (2 * n + 1)
            for t in (0.0, 1.0):
                ct = params.c * t
                for x in np.linspace(ct - 12, ct + 12, 100):
                    r = wf.peakon_pointwise_residual(params, t, float(x), quad)
                    worst_scaled = max(worst_scaled, abs(r) / scale)
    rng = np.random.default_rng(42)
    closed_ok = True
    for n, a in ((1, 1.0), (2, 0.5), (3, 2.0)):
        params = pr.PeakonParams.from_amplitude(n, a)
        for _ in range(20):
            t = rng.uniform(0, 2)
            for side in (+1, -1):
                x = params.c * t + side * rng.uniform(0.05, 10.0)
                got = wf.line_convolution(True, float(x), float(t), params, quad)
                want = wf.gradient_convolution_closed_form(float(x), float(t), params)
                closed_ok &= abs(got - want) <= 1e-10 * max(abs(want), 1e-6)
    ok = worst_scaled <= 1e-8 and closed_ok
    _report("criterion 3 (peakon weak solution)", ok,
            f"worst scaled residual {worst_scaled:.2e}")
    assert ok


def test_criterion_04_cubic_regression():
    """n = 1 reproduces a = sqrt(3c/2) to 1e-14 and the published crest
    density coefficients exactly."""
    ok = True
    for c in (0.5, 2 / 3, 1.5, 3.0):
        a = pr.amplitude_from_speed(1, c)
        ok &= abs(a - math.sqrt(3 * c / 2)) <= 1e-14 * math.sqrt(3 * c / 2)
    t = co.coefficient_table(1)
    ok &= t.c == (Fraction(-2, 3),)
    ok &= t.d == (Fraction(2, 3),)
    ok &= t.leading == Fraction(-1, 3)
    _report("criterion 4 (cubic-case regression)", ok)
    assert ok


def test_criterion_05_conservation(smooth_runs, wide_mollified_run):
    """Smooth-data drift <= 1e-8 for n in {1,2,3} over t in [0,1];
    mollified-peakon drift <= 1e-6 (E) and 1e-4 (F) over t in [0,5]."""
    ok = True
    details = []
    for n, res in smooth_runs.items():
        E0, F0 = res.records[0].E, res.records[0].F
        dE = max(abs(r.E - E0) for r in res.records) / abs(E0)
        dF = max(abs(r.F - F0) for r in res.records) / max(abs(F0), 1e-300)
        ok &= dE <= 1e-8 and dF <= 1e-8
        details.append(f"n={n}: dE={dE:.1e} dF={dF:.1e}")
    res = wide_mollified_run
    E0, F0 = res.records[0].E, res.records[0].F
    dE = max(abs(r.E - E0) for r in res.records) / abs(E0)
    dF = max(abs(r.F - F0) for r in res.records) / abs(F0)
    ok &= dE <= 1e-6 and dF <= 1e-4
    details.append(f"moll: dE={dE:.1e} dF={dF:.1e}")
    _report("criterion 5 (conservation)", ok, "; ".join(details))
    assert ok


def test_criterion_06_integral_identities():
    """Split identities on 50 random smooth decaying profiles per n in 1..4
    (1e-8 absolute for the quadratic one, 1e-6 relative for the weighted
    one) and the crest expansion identity within 1e-3."""
    spec = GridSpec(30.0, 8192)
    rng = np.random.default_rng(7)

    def profile():
        u = np.zeros(spec.point_count)
        for _ in range(4):
            c = rng.uniform(-6, 6)
            w = rng.uniform(0.8, 2.5)
            amp = rng.uniform(0.2, 1.0)
            u += amp * np.exp(-(((spec.x - c) / w) ** 2))
        return GridFunction(spec, u)

    ok = True
    worst_g = worst_h = 0.0
    for n in (1, 2, 3, 4):
        table = co.coefficient_table(n)
        for _ in range(50):
            u = profile()
            xi = float(rng.uniform(-5, 5))
            uxi = float(u.eval_at(xi))
            g_res = abs(fl.g_square_integral(u, xi) - (fl.energy_E(u) - 2 * uxi**2))
            rhs = fl.functional_F(u, table) - float(table.two_minus_c1) / (n + 1) * uxi ** (
                2 * n + 2
            )
            h_res = abs(fl.hg_square_integral(u, xi, table) - rhs) / max(abs(rhs), 1e-30)
            worst_g = max(worst_g, g_res)
            worst_h = max(worst_h, h_res)
    ok &= worst_g <= 1e-8 and worst_h <= 1e-6

    # crest expansion: E(u) - 2a^2 = ||u - phi(.-xi)||^2 + 4a(u(xi) - a),
    # direct norm quadrature with the peak profile's exact slope samples
    a = 1.0
    worst_c = 0.0
    for _ in range(50):
        u = profile()
        xi = float(rng.uniform(-5, 5))
        phi = a * np.exp(-np.abs(spec.x - xi))
        phix = -np.sign(spec.x - xi) * phi
        diff_sq = (u.samples - phi) ** 2 + (u.du - phix) ** 2
        direct = quadrature(spec, diff_sq)
        uxi = float(u.eval_at(xi))
        resid = fl.energy_E(u) - 2 * a * a - (direct + 4 * a * (uxi - a))
        worst_c = max(worst_c, abs(resid))
    ok &= worst_c <= 1e-3
    _report("criterion 6 (integral identities)", ok,
            f"g: {worst_g:.1e}, hg: {worst_h:.1e}, crest: {worst_c:.1e}")
    assert ok


def test_criterion_07_sign_and_flow(smooth_runs, wide_mollified_run, transport_run):
    """Nonnegative momentum keeps min y and min(u +- u_x) above -1e-8;
    transport error <= 1e-3 to t = 2; monotone fan of 16 characteristics."""
    ok = True
    for res in (*smooth_runs.values(), wide_mollified_run, transport_run):
        ok &= min(r.min_y for r in res.records) >= -1e-8
        ok &= min(r.min_u_pm_ux for r in res.records) >= -1e-8
    seeds = np.linspace(-4, 4, 16)
    err = ev.check_momentum_transport(SPEC, transport_run.snapshots, seeds, n=1)
    ok &= err <= 1e-3
    fans = ev.flow_map(SPEC, transport_run.snapshots, seeds, n=1)
    finals = [fan[-1].q for fan in fans]
    ok &= all(b > a for a, b in zip(finals, finals[1:]))
    ok &= all(fan[-1].q_x > 0 for fan in fans)
    _report("criterion 7 (sign and flow structure)", ok, f"transport err {err:.1e}")
    assert ok


def test_criterion_08_polynomial_inequality(smooth_runs, wide_mollified_run):
    """The polynomial inequality holds at every observation of every
    nonnegative-momentum run; exact peakon values cancel to 1e-12."""
    ok = True
    for res in (*smooth_runs.values(), wide_mollified_run):
        for r in res.records:
            ok &= r.lhs_stability <= 1e-6 * max(1.0, r.F)
    for n in (1, 2, 3, 5):
        table = co.coefficient_table(n)
        for a in (0.5, 1.0, 2.0):
            E = 2 * a**2
            F = a ** (2 * n + 2) * float(table.two_minus_c1) / (n + 1)
            ok &= abs(fl.stability_lhs(E, F, a, table)) <= 1e-12 * max(1.0, F)
    _report("criterion 8 (polynomial inequality)", ok)
    assert ok


def test_criterion_09a_stability_envelope(stability_sweeps):
    """Sup-in-time distance stays below 3 sqrt(3 a eps + 4 a sqrt(A_hat eps))
    at every observation, with one fitted A_hat per sweep."""
    reports, _ = stability_sweeps
    ok = True
    details = []
    for n, rep in reports.items():
        ok &= all(r.envelope_ok for r in rep.rows)
        details.append(f"n={n}: A_hat={rep.A_hat:.3f} floor={rep.floor_distance:.3f}")
    _report("criterion 9a (stability envelope)", ok, "; ".join(details))
    assert ok


def test_criterion_09b_crest_deviation_exponent(stability_sweeps):
    """Fitted exponent of sup |M - a| against eps in [0.4, 0.6].

    Lemma-style scaling sqrt(eps) is an upper bound; at N = 2^12 the
    measured crest deviation is floored by the mollification bias
    (~0.77 a delta with delta = 4 dx), which exceeds every admissible
    eps-induced crest response, so the measured exponent sits near zero.
    Saturating the bound needs bias^2 << eps, i.e. N >> 2^17 for this
    eps range.  The assertion states the criterion as written; the
    failure message carries the measured values.
    """
    reports, _ = stability_sweeps
    measured = {n: rep.crest_exponent for n, rep in reports.items()}
    ok = all(0.4 <= b <= 0.6 for b in measured.values())
    _report("criterion 9b (crest-deviation exponent)", ok,
            f"measured exponents {measured} vs window [0.4, 0.6]")
    assert ok, (
        f"measured crest-deviation exponents {measured} lie outside [0.4, 0.6]: "
        "the mollification crest bias (~0.77*a*4dx) floors sup|M-a| for every "
        "admissible eps at N=2^12, so the sqrt(eps) upper bound is satisfied "
        "but not saturated; see the stability report's floor and bias fields"
    )


def test_criterion_09c_sweep_runtime(stability_sweeps):
    """Each sweep completes within ten minutes at N = 2^12."""
    _, timings = stability_sweeps
    ok = all(t <= 600.0 for t in timings.values())
    _report("criterion 9c (sweep runtime)", ok,
            ", ".join(f"n={n}: {t:.0f}s" for n, t in timings.items()))
    assert ok


def test_criterion_10_spatial_convergence():
    """Error against the N = 2^13 reference drops at least 4x per grid
    doubling on smooth data."""
    finals = {}
    for N in (512, 1024, 2048, 8192):
        spec = GridSpec(20.0, N)
        y0 = np.exp(-(((spec.x + 1.0) / 1.6) ** 2))
        u0 = GridFunction.from_momentum(spec, y0)
        cfg = ev.SolverConfig(n=1, grid=spec, cfl=0.2, t_end=1.0, observe_every=10**9)
        finals[N] = ev.run(u0, cfg).final.u.samples
    errs = []
    for N in (512, 1024, 2048):
        stride = 8192 // N
        errs.append(float(np.max(np.abs(finals[N] - finals[8192][::stride]))))
    ok = all(errs[i] / errs[i + 1] >= 4.0 for i in range(2)) and errs[-1] > 1e-14
    _report("criterion 10 (spatial convergence)", ok,
            "errors " + ", ".join(f"{e:.2e}" for e in errs))
    assert ok
