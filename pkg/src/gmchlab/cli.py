"""Command-line interface: certify / simulate / stability / weakres.

Exit codes: 0 success, 1 usage or internal error, 2 certificate failure,
3 hypothesis violation, 4 blow-up abort.  Each subcommand accepts a
key = value config file (``--config``) whose entries are overridden by
command-line flags; all outputs are CSV or JSON with fixed formatting so
identical configurations produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CERTIFICATE = 2
EXIT_HYPOTHESIS = 3
EXIT_BLOWUP = 4


class _Parser(argparse.ArgumentParser):
    # keep exit code 2 reserved for certificate failures
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_INTERNAL)


def load_config_file(path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; '#' starts a comment."""
    out: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed config line: {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _merge(args: argparse.Namespace, filekeys: dict[str, str], casts: dict[str, type]):
    """Config-file values fill in flags the user did not pass."""
    for key, cast in casts.items():
        if getattr(args, key, None) is None and key in filekeys:
            raw = filekeys[key]
            if cast is bool:
                setattr(args, key, raw.lower() in ("1", "true", "yes", "on"))
            elif key == "eps_list":
                setattr(args, key, [float(v) for v in raw.split(",") if v.strip()])
            else:
                setattr(args, key, cast(raw))


# ---------------------------------------------------------------------------
# certify


def cmd_certify(args) -> int:
    from . import coefficients as co

    n_max = args.n_max
    bound = args.denominator_bound
    t0 = time.time()
    certs = []
    certs.extend(co.verify_identities(n_max))
    for n in range(1, n_max + 1):
        certs.append(co.verify_recurrences(co.coefficient_table(n)))
        certs.append(co.verify_P0_factorization(n))
        certs.append(
            co.verify_f_factorization(
                n, [co.Rational(-1), co.Rational(0), co.Rational(1),
                    co.Rational(1, 3), co.Rational(-3, 7)]
            )
        )
        certs.append(co.certify_phi_nonpositive(n, bound))
    elapsed = time.time() - t0
    bundle = {
        "n_max": n_max,
        "denominator_bound": bound,
        "elapsed_seconds": round(elapsed, 3),
        "all_pass": all(c.passed for c in certs),
        "certificates": [c.to_json_dict() for c in certs],
    }
    text = json.dumps(bundle, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for c in certs:
        if not c.passed:
            print(f"certificate failure: {c.identity_id} witness={c.witness}",
                  file=sys.stderr)
            return EXIT_CERTIFICATE
    print(f"all certificates pass (n <= {n_max}, {elapsed:.1f}s)", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    from .coefficients import coefficient_table
    from .evolution import (BlowUpError, SolverConfig, run, write_frames_binary,
                            write_frames_csv, write_observer_csv)
    from .grid import GridFunction, GridSpec
    from .profiles import MollifierSpec, PeakonParams, mollified_peakon

    spec = GridSpec(args.L, args.N)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.initial == "zero":
        u0 = GridFunction(spec, np.zeros(spec.point_count))
        params = None
    else:
        params = (PeakonParams.from_speed(args.n, args.c) if args.c
                  else PeakonParams.from_amplitude(args.n, args.a))
        moll = MollifierSpec(width=args.delta, mass=2 * params.a)
        u0, dist = mollified_peakon(params, moll, spec)
    config = SolverConfig(
        n=args.n, grid=spec, cfl=args.cfl, t_end=args.t_end,
        dealias=args.dealias, filter_strength=args.filter_strength,
        observe_every=args.observe_every,
    )
    table = coefficient_table(args.n)
    store = 1 if args.frames != "none" else None
    report: dict = {"n": args.n, "L": args.L, "N": args.N, "t_end": args.t_end}
    try:
        res = run(u0, config, table, store_every=store)
        records, final_t = res.records, res.final.t
        report["status"] = "ok"
    except BlowUpError as exc:
        records, final_t = exc.records, exc.state.t
        report["status"] = "blow_up"
        report["last_valid_t"] = final_t
        res = None
    write_observer_csv(records, outdir / "observers.csv")
    if res is not None and res.snapshots:
        if args.frames == "csv":
            write_frames_csv(spec, res.snapshots, outdir / "frames.csv")
        elif args.frames == "bin":
            write_frames_binary(spec, res.snapshots, outdir / "frames.bin")
    if params is not None and len(records) > 2:
        ts = np.array([r.t for r in records])
        xis = np.array([r.xi for r in records])
        slope = float(np.polyfit(ts, xis, 1)[0])
        from .coefficients import speed_factor

        report["crest_speed"] = slope
        report["ideal_speed"] = params.c
        report["amplitude_matched_speed"] = float(speed_factor(args.n)) * records[
            0
        ].M ** (2 * args.n)
    report["min_y"] = min(r.min_y for r in records)
    report["final_t"] = final_t
    (outdir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_BLOWUP if report["status"] == "blow_up" else EXIT_OK


# ---------------------------------------------------------------------------
# stability


def cmd_stability(args) -> int:
    from .experiment import ExperimentConfig, HypothesisViolation, run_stability_sweep, write_report

    config = ExperimentConfig(
        n=args.n,
        c=args.c,
        delta=args.delta,
        eps_list=tuple(args.eps_list),
        bump_center=args.bump_center,
        bump_width=args.bump_width,
        half_length=args.L,
        point_count=args.N,
        cfl=args.cfl,
        t_end=args.t_end,
        observe_every=args.observe_every,
        dealias=args.dealias,
        filter_strength=args.filter_strength,
        seed=args.seed,
    )
    try:
        report = run_stability_sweep(config)
    except HypothesisViolation as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    write_report(report, args.outdir)
    summary = report.to_json_dict()
    summary.pop("rows")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# weakres


def cmd_weakres(args) -> int:
    import csv

    from .weakform import QuadratureSpec, residual_table

    rows = residual_table(
        args.n_list, args.a_list, t_values=tuple(args.t_list),
        points_per_case=args.points,
        quadspec=QuadratureSpec(),
    )
    out = Path(args.out) if args.out else None
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["n", "a", "t", "x", "residual", "tolerance_achieved"])
        for n, a, t, x, r, tol in rows:
            w.writerow([n, f"{a:.17g}", f"{t:.17g}", f"{x:.17g}", f"{r:.17g}", f"{tol:.17g}"])
    finally:
        if out:
            fh.close()
    if rows:
        worst = max(abs(r[4]) for r in rows)
        print(f"{len(rows)} residuals, worst |residual| = {worst:.3e}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_common_grid_flags(p: argparse.ArgumentParser):
    p.add_argument("--L", type=float, default=None, help="domain half-length")
    p.add_argument("--N", type=int, default=None, help="grid points (power of two)")
    p.add_argument("--cfl", type=float, default=None)
    p.add_argument("--t-end", dest="t_end", type=float, default=None)
    p.add_argument("--observe-every", dest="observe_every", type=int, default=None)
    p.add_argument("--dealias", choices=["two_thirds", "padded", "none"], default=None)
    p.add_argument("--filter-strength", dest="filter_strength", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gmch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="run every exact certificate")
    c.add_argument("--n-max", dest="n_max", type=int, default=20)
    c.add_argument("--denominator-bound", dest="denominator_bound", type=int, default=4096)
    c.add_argument("--out", default=None, help="JSON bundle path (default stdout)")
    c.set_defaults(fn=cmd_certify)

    s = sub.add_parser("simulate", help="evolve mollified-peakon or zero data")
    s.add_argument("--config", default=None)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--a", type=float, default=None, help="peakon amplitude")
    s.add_argument("--c", type=float, default=None, help="wave speed (overrides --a)")
    s.add_argument("--delta", type=float, default=None, help="mollifier width")
    s.add_argument("--initial", choices=["mollified-peakon", "zero"], default=None)
    s.add_argument("--frames", choices=["none", "csv", "bin"], default=None)
    s.add_argument("--outdir", default=None)
    _add_common_grid_flags(s)
    s.set_defaults(fn=cmd_simulate)

    st = sub.add_parser("stability", help="perturbed-peakon stability sweep")
    st.add_argument("--config", default=None)
    st.add_argument("--n", type=int, default=None)
    st.add_argument("--c", type=float, default=None)
    st.add_argument("--delta", type=float, default=None)
    st.add_argument("--eps", dest="eps_list", type=float, nargs="+", default=None)
    st.add_argument("--bump-center", dest="bump_center", type=float, default=None)
    st.add_argument("--bump-width", dest="bump_width", type=float, default=None)
    st.add_argument("--seed", type=int, default=None)
    st.add_argument("--outdir", default=None)
    _add_common_grid_flags(st)
    st.set_defaults(fn=cmd_stability)

    w = sub.add_parser("weakres", help="pointwise weak-solution residual table")
    w.add_argument("--n", dest="n_list", type=int, nargs="*", default=[1, 2, 3])
    w.add_argument("--a", dest="a_list", type=float, nargs="*", default=[0.5, 1.0, 2.0])
    w.add_argument("--t", dest="t_list", type=float, nargs="*", default=[0.0, 1.0])
    w.add_argument("--points", type=int, default=100)
    w.add_argument("--out", default=None)
    w.set_defaults(fn=cmd_weakres)
    return parser


_SIM_DEFAULTS = dict(
    n=1, a=1.0, c=None, delta=0.1, initial="mollified-peakon", frames="none",
    outdir="out/simulate", L=20.0, N=4096, cfl=0.3, t_end=1.0,
    observe_every=10, dealias="two_thirds", filter_strength=0.0,
)
_SIM_CASTS = dict(
    n=int, a=float, c=float, delta=float, initial=str, frames=str, outdir=str,
    L=float, N=int, cfl=float, t_end=float, observe_every=int, dealias=str,
    filter_strength=float,
)
_STAB_DEFAULTS = dict(
    n=1, c=2 / 3, delta=None, eps_list=[1e-2, 1e-3, 1e-4], bump_center=2.0,
    bump_width=0.5, seed=0, outdir="out/stability", L=20.0, N=4096, cfl=0.3,
    t_end=5.0, observe_every=20, dealias="padded", filter_strength=0.0,
)
_STAB_CASTS = dict(
    n=int, c=float, delta=float, eps_list=list, bump_center=float,
    bump_width=float, seed=int, outdir=str, L=float, N=int, cfl=float,
    t_end=float, observe_every=int, dealias=str, filter_strength=float,
)


def _apply_defaults(args, defaults: dict, casts: dict):
    filekeys = load_config_file(args.config) if getattr(args, "config", None) else {}
    _merge(args, filekeys, casts)
    for key, val in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.fn is cmd_simulate:
            _apply_defaults(args, _SIM_DEFAULTS, _SIM_CASTS)
        elif args.fn is cmd_stability:
            _apply_defaults(args, _STAB_DEFAULTS, _STAB_CASTS)
            if args.delta is None:
                args.delta = 4 * (2 * args.L / args.N)
        return args.fn(args)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    except KeyboardInterrupt:
        return EXIT_INTERNAL
    except Exception as exc:  # internal error: anything not mapped above
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
