"""Command-line interface.

Subcommands: classify, solve, sweep, kernel, semiclassical, optimize,
verify, preset.  All data outputs are plot-ready CSV (or JSON with
--format json) with a leading comment line echoing the tool version and the
full configuration, and floats printed to 12 significant digits, so identical
configurations produce byte-identical files.

Exit codes: 0 success, 2 usage or input-schema errors, 3 numerical failures
(integrator blow-up or tolerance, singular linear system, failed verify
checks), 4 violated physics preconditions (degenerate channel threshold,
ansatz/device mismatch).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .imbedding import (
    IntegrationError,
    RiccatiBlowupError,
    ScatterJob,
    solve_both,
    sweep_velocity,
    write_sweep_csv,
)
from .nystrom import SingularSystemError, solve_ground
from .optimize import AnsatzError, DeviceTarget, optimize, profile_from_theta
from .potential import ChannelThresholdError, build_kernel, effective_params, write_kernel_csv
from .profiles import (
    GaussianTerm,
    ProfileSchemaError,
    RabiProfile,
    allowed_devices,
    classify_profile,
    classify_with_energy,
    load_profile,
    preset_profile,
    save_profile,
)
from .semiclassical import integrate_trajectory

_EXIT_USAGE = 2
_EXIT_NUMERICAL = 3
_EXIT_PHYSICS = 4

_DEFAULT_ANSATZ = {"ta": "VIII", "ra": "VI", "tra-half": "I"}


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _config_echo(args: argparse.Namespace, keys: list[str]) -> str:
    parts = [f"{k.replace('_', '-')}={getattr(args, k)}" for k in keys if getattr(args, k) is not None]
    return f"# asymscat {__version__} | {args.command} " + " ".join(parts)


def _require_positive_velocity(v: float) -> None:
    if v is None or v <= 0:
        raise UsageError(f"--v-over-vd must be positive, got {v}")


class UsageError(ValueError):
    pass


# -- subcommand handlers ------------------------------------------------------


def _cmd_classify(args) -> int:
    profile = load_profile(args.profile)
    if args.v_over_vd is not None:
        _require_positive_velocity(args.v_over_vd)
        params = effective_params(profile, args.v_over_vd)
        report = classify_with_energy(profile, params.kbar, params.mu, grid_n=args.grid)
        devices = sorted(report.devices)
    else:
        report = classify_profile(profile, grid_n=args.grid)
        # profile-level flags only; devices assume the non-Hermitian regime
        # (Re q != 0), where classes II, IV, V, VII are absent
        devices = sorted(allowed_devices(report))
    out = {
        "flags": report.flags,
        "phases": report.phases,
        "degenerate": report.degenerate,
        "devices": devices,
        "v_over_vd": args.v_over_vd,
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def _solve_summary(c: dict[str, float]) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in c.items())


def _cmd_solve(args) -> int:
    profile = load_profile(args.profile)
    _require_positive_velocity(args.v_over_vd)
    if args.method == "nystrom":
        # same coefficient schema as the imbedding route, for diff-testing
        left = solve_ground(profile, args.v_over_vd, n=args.grid, side="left")
        right = solve_ground(profile, args.v_over_vd, n=args.grid, side="right")
        t2l, r2l = abs(left.T) ** 2, abs(left.R) ** 2
        t2r, r2r = abs(right.T) ** 2, abs(right.R) ** 2
        c = {
            "T2l": t2l, "T2r": t2r, "R2l": r2l, "R2r": r2r,
            "absorb_l": 1.0 - t2l - r2l, "absorb_r": 1.0 - t2r - r2r,
        }
    else:
        job = ScatterJob.from_profile(profile, args.v_over_vd)
        cm = solve_both(job, rtol=args.tol)
        c = cm.ground_coefficients()
    print(f"v_over_vd={_fmt(args.v_over_vd)} " + _solve_summary(c))
    if args.out:
        if args.format == "json":
            Path(args.out).write_text(
                json.dumps({"v_over_vd": args.v_over_vd, **c}, indent=2, sort_keys=True) + "\n"
            )
        else:
            with open(args.out, "w") as fh:
                fh.write(_config_echo(args, ["profile", "v_over_vd", "tol", "method"]) + "\n")
                fh.write("v_over_vd,T2l,T2r,R2l,R2r,absorb_l,absorb_r\n")
                fh.write(
                    ",".join(
                        _fmt(v)
                        for v in (
                            args.v_over_vd,
                            c["T2l"], c["T2r"], c["R2l"], c["R2r"],
                            c["absorb_l"], c["absorb_r"],
                        )
                    )
                    + "\n"
                )
    return 0


def _cmd_sweep(args) -> int:
    profile = load_profile(args.profile)
    if args.v_min is None or args.v_max is None or args.v_steps is None:
        raise UsageError("sweep requires --v-min, --v-max and --v-steps")
    if args.v_min <= 0 or args.v_max < args.v_min or args.v_steps < 1:
        raise UsageError("sweep range must satisfy 0 < v-min <= v-max, v-steps >= 1")
    v_list = np.linspace(args.v_min, args.v_max, args.v_steps)
    result = sweep_velocity(profile, v_list, rtol=args.tol)
    header = _config_echo(args, ["profile", "v_min", "v_max", "v_steps", "tol"])
    if args.out:
        if args.format == "json":
            rows = [vars(p) for p in result.points]
            Path(args.out).write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
        else:
            write_sweep_csv(result, args.out, header=header)
    else:
        print(header)
        print("v_over_vd,T2l,T2r,R2l,R2r,absorb_l,absorb_r")
        for p in result.points:
            print(
                ",".join(
                    _fmt(v)
                    for v in (p.v_over_vd, p.T2l, p.T2r, p.R2l, p.R2r, p.absorb_l, p.absorb_r)
                )
            )
    for v, msg in result.failures:
        print(f"warning: v/v_d = {v:g} failed: {msg}", file=sys.stderr)
    return 0


def _cmd_kernel(args) -> int:
    profile = load_profile(args.profile)
    _require_positive_velocity(args.v_over_vd)
    kernel = build_kernel(profile, args.v_over_vd, n=args.grid)
    header = _config_echo(args, ["profile", "v_over_vd", "grid"])
    if args.out:
        write_kernel_csv(kernel, args.out, header=header)
        print(
            f"kernel {kernel.n}x{kernel.n} written to {args.out} "
            f"(mu={kernel.params.mu:.6g}, q*2d={kernel.params.kappa2:.6g})"
        )
    else:
        print(header)
        print(f"mu={kernel.params.mu} q2d={kernel.params.kappa2} max|V|/V0={np.max(np.abs(kernel.values_over_V0)):.6g}")
    return 0


def _cmd_semiclassical(args) -> int:
    profile = load_profile(args.profile)
    _require_positive_velocity(args.v_over_vd)
    directions = ["left", "right"] if args.direction == "both" else [args.direction]
    for direction in directions:
        run = integrate_trajectory(profile, args.v_over_vd, direction=direction, rtol=args.tol)
        pg, pe = run.final_populations
        print(f"{direction}: final pop_ground={_fmt(pg)} pop_excited={_fmt(pe)}")
        if args.out:
            path = Path(args.out)
            if len(directions) > 1:
                path = path.with_name(f"{path.stem}_{direction}{path.suffix or '.csv'}")
            with open(path, "w") as fh:
                fh.write(_config_echo(args, ["profile", "v_over_vd", "tol"]) + f" direction={direction}\n")
                fh.write("t_over_tau,pop_ground,pop_excited\n")
                for t, g, e in zip(run.t_over_tau, run.pop_ground, run.pop_excited):
                    fh.write(f"{_fmt(t)},{_fmt(g)},{_fmt(e)}\n")
    return 0


def _cmd_optimize(args) -> int:
    _require_positive_velocity(args.v_over_vd)
    ansatz = args.ansatz or _DEFAULT_ANSATZ[args.device]
    target = DeviceTarget(kind=args.device, v0_ratio=args.v_over_vd, ansatz=ansatz)
    if args.init == "file":
        if not args.init_file:
            raise UsageError("--init file requires --init-file PATH")
        try:
            raw = json.loads(Path(args.init_file).read_text())
            theta0 = np.asarray(raw["theta"], dtype=float)
        except (OSError, KeyError, ValueError, TypeError) as exc:
            raise ProfileSchemaError(f"cannot read theta from {args.init_file}: {exc}") from None
        state = optimize(target, init=theta0, budget=args.budget, rtol=args.tol,
                         robust=args.robust)
    else:
        state = optimize(target, init="auto", budget=args.budget, rtol=args.tol,
                         robust=args.robust)
    names = target.param_names
    theta_str = " ".join(f"{n}={_fmt(v)}" for n, v in zip(names, state.theta))
    print(
        f"device={args.device} ansatz={ansatz} J={_fmt(state.J)} evals={state.n_evals} "
        f"iterations={state.n_iterations} stalled={state.stalled} {theta_str}"
    )
    if args.out:
        save_profile(profile_from_theta(target, state.theta), args.out)
        log_path = Path(args.out).with_name(Path(args.out).stem + "_log.csv")
        with open(log_path, "w") as fh:
            fh.write(_config_echo(args, ["device", "v_over_vd", "budget", "tol"]) + "\n")
            fh.write("iteration,J," + ",".join(names) + "\n")
            for it, j, theta in state.trace:
                fh.write(f"{it},{_fmt(j)}," + ",".join(_fmt(t) for t in theta) + "\n")
    return 0


def _cmd_verify(args) -> int:
    if args.profile:
        profile = load_profile(args.profile)
    else:
        rng = np.random.default_rng(args.seed)
        terms = tuple(
            GaussianTerm(
                weight_tau=complex(rng.uniform(-30, 30), rng.uniform(-30, 30)),
                center_over_d=rng.uniform(-0.5, 0.5),
                width_over_d=rng.uniform(0.08, 0.3),
            )
            for _ in range(rng.integers(1, 4))
        )
        profile = RabiProfile(terms=terms, tau_delta=rng.uniform(-2, 30), tau_gamma=0.0)
    _require_positive_velocity(args.v_over_vd)

    job = ScatterJob.from_profile(profile, args.v_over_vd)
    cm = solve_both(job, rtol=args.tol)
    checks: list[tuple[str, bool, str]] = []

    if profile.tau_gamma == 0.0 and job.channel2_open:
        for side in ("left", "right"):
            flux = cm.outgoing_flux(side)
            ok = abs(flux - 1.0) <= 1e-6
            checks.append((f"flux_{side}", ok, f"total outgoing flux = {flux:.9f} (want 1 +- 1e-6)"))
        for name, margin in cm.unitarity_margins().items():
            ok = margin >= -1e-8
            checks.append((f"bound[{name}]", ok, f"margin = {margin:.3e} (want >= -1e-8)"))
    else:
        print("note: flux and unitarity checks skipped (decay > 0 or closed channel)")

    left = solve_ground(profile, args.v_over_vd, n=args.grid, side="left")
    right = solve_ground(profile, args.v_over_vd, n=args.grid, side="right")
    diffs = {
        "T_left": abs(left.T - cm.T_left),
        "R_left": abs(left.R - cm.R_left),
        "T_right": abs(right.T - cm.T_right),
        "R_right": abs(right.R - cm.R_right),
    }
    for name, diff in diffs.items():
        ok = diff <= 1e-3
        checks.append(
            (f"oracle[{name}]", ok, f"|imbedding - integral-equation| = {diff:.3e} (want <= 1e-3)")
        )

    all_ok = True
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        all_ok &= ok
    return 0 if all_ok else _EXIT_NUMERICAL


def _cmd_preset(args) -> int:
    profile, v0 = preset_profile(args.name)
    save_profile(profile, args.out)
    print(f"wrote {args.name} preset to {args.out} (design velocity v0/v_d = {v0:g})")
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asymscat",
        description="Asymmetric scattering devices from shaped laser couplings: "
        "solvers, symmetry classification, and design.",
    )
    parser.add_argument("--version", action="version", version=f"asymscat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, profile=True, velocity=False, grid=None, tol=None, out=False, fmt=False):
        if profile:
            p.add_argument("--profile", required=True, help="profile JSON file")
        if velocity:
            p.add_argument("--v-over-vd", type=float, help="incident velocity in units of v_d")
        if grid is not None:
            p.add_argument("--grid", type=int, default=grid, help="grid size")
        if tol is not None:
            p.add_argument("--tol", type=float, default=tol, help="relative tolerance")
        if out:
            p.add_argument("--out", help="output file path")
        if fmt:
            p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("classify", help="symmetry classes and allowed device types")
    add_common(p, velocity=True, grid=512)

    p = sub.add_parser("solve", help="scattering coefficients at one velocity")
    add_common(p, velocity=True, grid=801, tol=1e-9, out=True, fmt=True)
    p.add_argument(
        "--method", choices=["imbedding", "nystrom"], default="imbedding",
        help="solver route; 'nystrom' uses the integral-equation solver with "
        "--grid points (same output schema, useful for diff-testing)",
    )

    p = sub.add_parser("sweep", help="coefficients over a velocity range")
    add_common(p, tol=1e-9, out=True, fmt=True)
    p.add_argument("--v-min", type=float)
    p.add_argument("--v-max", type=float)
    p.add_argument("--v-steps", type=int)

    p = sub.add_parser("kernel", help="non-local kernel on a grid")
    add_common(p, velocity=True, grid=401, out=True)

    p = sub.add_parser("semiclassical", help="two-level dynamics along a classical trajectory")
    add_common(p, velocity=True, tol=1e-10, out=True)
    p.add_argument("--direction", choices=["left", "right", "both"], default="both")

    p = sub.add_parser("optimize", help="design a device by gradient ascent")
    add_common(p, profile=False, velocity=True, tol=1e-8, out=True)
    p.add_argument("--device", choices=["ta", "ra", "tra-half"], required=True)
    p.add_argument("--ansatz", choices=["VIII", "VI", "I"], default=None)
    p.add_argument("--init", choices=["auto", "file"], default="auto")
    p.add_argument("--init-file", help="JSON file with {\"theta\": [...]}")
    p.add_argument("--budget", type=int, default=500, help="max objective evaluations")
    p.add_argument(
        "--robust", action="store_true",
        help="average the objective over {0.9, 1.0, 1.1} * v0",
    )

    p = sub.add_parser("verify", help="flux, unitarity-bound and two-solver checks")
    p.add_argument("--profile", help="profile JSON file (random profile if omitted)")
    p.add_argument("--v-over-vd", type=float, required=True)
    p.add_argument("--grid", type=int, default=801, help="integral-equation grid size")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0, help="seed for the random profile")

    p = sub.add_parser("preset", help="write a reference device profile to a file")
    p.add_argument("name", choices=["ta", "ra", "tra-half"])
    p.add_argument("--out", required=True)

    return parser


_HANDLERS = {
    "classify": _cmd_classify,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "kernel": _cmd_kernel,
    "semiclassical": _cmd_semiclassical,
    "optimize": _cmd_optimize,
    "verify": _cmd_verify,
    "preset": _cmd_preset,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ProfileSchemaError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except (ChannelThresholdError, AnsatzError) as exc:
        print(f"physics precondition violated: {exc}", file=sys.stderr)
        return _EXIT_PHYSICS
    except (RiccatiBlowupError, IntegrationError, SingularSystemError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return _EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
