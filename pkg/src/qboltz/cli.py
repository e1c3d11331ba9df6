"""Command-line front end.

Subcommands:

* ``simulate``    -- integrate one ray (or a whole lattice ball split into
                     rays) and write trajectory CSVs plus a summary JSON.
* ``equilibrium`` -- solve the equilibrium family from conserved values.
* ``network``     -- export the compiled 1<->2 reaction network with its
                     siphon/semiflow persistence analysis.
* ``analyze``     -- linearize at the equilibrium and compare the spectral
                     rate with the fitted decay rate of a fresh run.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import equilibrium as eq
from .collision import c12_rhs, conserved
from .errors import InfeasibleError, NumericError
from .integrator import IntegratorOptions
from .kernels import Kernel
from .network import build_c12_network, mass_action_rhs, \
    persistence_certificate, check_p_semiflow, SIPHON_SPECIES_LIMIT
from .run import MODES, kernels_for_mode, random_positive_state, ray_seed, \
    run_lattice, run_simulation


def _parse_kernel(spec: str, arity: int) -> Kernel:
    if spec.startswith("const:"):
        return Kernel.constant(float(spec.split(":", 1)[1]), arity)
    if spec.startswith("table:"):
        return Kernel.from_json(spec.split(":", 1)[1], arity)
    raise ValueError(f"kernel spec {spec!r}: expected const:<v> or table:<path>")


def _parse_init(args, I: int) -> np.ndarray:
    if args.init == "random":
        return random_positive_state(I, args.seed, scale=args.scale)
    vals = np.array([float(x) for x in args.init.split(",")])
    if len(vals) != I:
        raise ValueError(f"--init has {len(vals)} entries but I={I}")
    return vals


def _mode_kernels(args) -> dict:
    named = {}
    for flag, name, arity in (("kernel_c12", "K12", 3), ("kernel_c22", "K22", 4),
                              ("kernel_c13", "K13", 4)):
        spec = getattr(args, flag, None) or args.kernel
        if spec:
            named[name] = _parse_kernel(spec, arity)
    return kernels_for_mode(args.mode, **named)


def _effective_config(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _write_json(path: str, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _opts_from_args(args) -> IntegratorOptions:
    return IntegratorOptions(method=args.method, h=args.h, t_max=args.t_max,
                             record_every=args.record_every,
                             stop_epsilon=args.stop_epsilon)


def _summarize_run(ray_label, ray_dict, result, out_dir, files):
    entry = {"ray": ray_dict, "frozen": result.frozen}
    if result.frozen:
        entry["note"] = "no active resonance; state is constant in time"
        return entry
    traj = result.trajectory
    csv_path = os.path.join(out_dir, f"traj_{ray_label}.csv")
    traj.to_csv(csv_path)
    files.append(csv_path)
    entry["trajectory_csv"] = os.path.basename(csv_path)
    cons0 = conserved(result.F0)
    entry["conserved"] = {"energy": cons0.energy, "mass": cons0.mass}
    entry["final_state"] = [float(x) for x in traj.states[-1]]
    if result.equilibrium is not None:
        sol = result.equilibrium
        entry["equilibrium"] = {
            "family": sol.family,
            "params": list(sol.params),
            "Fstar": [float(x) for x in sol.Fstar],
            "residuals": sol.residuals,
            "final_max_err": float(np.max(np.abs(traj.states[-1] - sol.Fstar))),
        }
    if result.fit is not None:
        entry["fitted_rate"] = {"slope": result.fit.slope,
                                "r_squared": result.fit.r_squared,
                                "prefactor_estimate": result.fit.prefactor_estimate}
    return entry


def cmd_simulate(args) -> int:
    kernels = _mode_kernels(args)
    opts = _opts_from_args(args)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    files = []
    rays_summary = []
    if args.lattice_R is not None:
        results = run_lattice(args.mode, args.lattice_R, seed=args.seed,
                              scale=args.scale, kernels=kernels, opts=opts,
                              analyze=True)
        for i, (ray, result) in enumerate(results):
            ray_dict = {"index": i, "P0": list(ray.P0), "I": ray.I,
                        "seed": ray_seed(args.seed, i)}
            rays_summary.append(_summarize_run(f"ray{i}", ray_dict, result,
                                               out_dir, files))
    else:
        I = args.I
        if args.mode == "c13" and I < 4:
            print(f"warning: c13 couples all modes only for I >= 4 (I={I})",
                  file=sys.stderr)
        if "c22" in args.mode and I < 3:
            print(f"warning: c22 exchange needs I >= 3 to act (I={I})",
                  file=sys.stderr)
        F0 = _parse_init(args, I)
        result = run_simulation(args.mode, F0, kernels=kernels, opts=opts,
                                analyze=True)
        rays_summary.append(_summarize_run(
            "ray0", {"index": 0, "I": I}, result, out_dir, files))
    summary = {
        "config": _effective_config(args, ("mode", "I", "lattice_R", "kernel",
                                           "kernel_c12", "kernel_c22",
                                           "kernel_c13", "init", "seed",
                                           "scale", "method", "h", "t_max",
                                           "record_every", "stop_epsilon",
                                           "out")),
        "rays": rays_summary,
    }
    if all(r["frozen"] for r in rays_summary):
        summary["note"] = "fully degenerate: every ray is frozen"
    path = os.path.join(out_dir, "summary.json")
    _write_json(path, summary)
    print(path)
    return 0


def cmd_equilibrium(args) -> int:
    if args.mode == "c22":
        if args.mass is None:
            raise ValueError("mode c22 requires --mass as well as --energy")
        sol = eq.c22_solution(args.mass, args.energy, args.I)
    else:
        sol = eq.bose_solution_from_energy(args.energy, args.I)
    payload = {
        "mode": args.mode,
        "family": sol.family,
        "params": list(sol.params),
        "Fstar": [float(x) for x in sol.Fstar],
        "residuals": sol.residuals,
    }
    print(json.dumps(payload, indent=2))
    if args.out:
        _write_json(args.out, payload)
    return 0


def cmd_network(args) -> int:
    kernel = _parse_kernel(args.kernel, 3) if args.kernel else Kernel.constant(1.0, 3)
    net = build_c12_network(args.I, kernel)
    payload = net.to_json_dict()
    rng = np.random.default_rng(args.seed)
    resid = 0.0
    for _ in range(100):
        F = rng.uniform(0.1, 2.0, size=args.I)
        resid = max(resid, float(np.max(np.abs(
            mass_action_rhs(net, F) - c12_rhs(F, kernel)))))
    payload["equivalence_max_residual"] = resid
    energy_w = np.arange(1, args.I + 1, dtype=float)
    payload["energy_semiflow_valid"] = check_p_semiflow(net, energy_w)
    if args.I <= SIPHON_SPECIES_LIMIT:
        report = persistence_certificate(net, [energy_w])
        payload["siphons"] = [sorted(s) for s in report.siphons]
        payload["persistent"] = report.certified
    else:
        print(f"warning: siphon enumeration skipped for I > "
              f"{SIPHON_SPECIES_LIMIT}; semiflow check only", file=sys.stderr)
        payload["siphons"] = None
        payload["persistent"] = None
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(args.out)
    else:
        print(text)
    return 0


def cmd_analyze(args) -> int:
    kernels = _mode_kernels(args)
    opts = _opts_from_args(args)
    F0 = _parse_init(args, args.I)
    result = run_simulation(args.mode, F0, kernels=kernels, opts=opts,
                            analyze=True)
    if result.frozen:
        payload = {"verdict": "frozen", "I": args.I, "mode": args.mode}
    else:
        report = result.spectral
        payload = report.to_json_dict()
        payload["mode"] = args.mode
        payload["equilibrium_params"] = list(result.equilibrium.params)
        if result.fit is not None:
            payload["fitted_rate"] = abs(result.fit.slope)
            payload["fit_r_squared"] = result.fit.r_squared
            if report.predicted_rate:
                payload["rate_relative_gap"] = abs(
                    abs(result.fit.slope) - report.predicted_rate
                ) / report.predicted_rate
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(args.out)
    else:
        print(text)
    return 0


def _add_sim_flags(p, with_init=True, record_every=10):
    p.add_argument("--mode", required=True, choices=sorted(MODES))
    p.add_argument("--I", type=int)
    p.add_argument("--kernel", help="const:<v> or table:<path> for all operators")
    p.add_argument("--kernel-c12", dest="kernel_c12")
    p.add_argument("--kernel-c22", dest="kernel_c22")
    p.add_argument("--kernel-c13", dest="kernel_c13")
    if with_init:
        p.add_argument("--init", default="random",
                       help='comma list "1,1,..." or "random"')
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--method", default="rk4_fixed",
                   choices=["rk4_fixed", "rk45_adaptive"])
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--t-max", dest="t_max", type=float, default=50.0)
    p.add_argument("--record-every", dest="record_every", type=int,
                   default=record_every)
    p.add_argument("--stop-epsilon", dest="stop_epsilon", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qboltz",
        description="Discrete quantum Boltzmann ray kinetics toolkit",
    )
    parser.add_argument("--config", help="JSON file of flag values (overridden "
                        "by explicit flags)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one ray or a lattice ball")
    _add_sim_flags(p)
    p.add_argument("--lattice-R", dest="lattice_R", type=float,
                   help="decompose the lattice ball of this radius into rays")
    p.add_argument("--out", default="qboltz_out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("equilibrium", help="solve equilibrium from conserved values")
    p.add_argument("--mode", required=True, choices=sorted(MODES))
    p.add_argument("--I", type=int, required=True)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--mass", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("network", help="export the 1<->2 reaction network")
    p.add_argument("--I", type=int, required=True)
    p.add_argument("--kernel", help="const:<v> or table:<path>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("analyze", help="spectral rate vs fitted decay rate")
    _add_sim_flags(p, record_every=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)
    return parser


def _option_map(parser, out=None):
    """dest -> option strings, collected across all subparsers."""
    if out is None:
        out = {}
    for a in parser._actions:
        if a.option_strings:
            out.setdefault(a.dest, set()).update(a.option_strings)
        if isinstance(a, argparse._SubParsersAction):
            for sp in a.choices.values():
                _option_map(sp, out)
    return out


def _apply_config_file(parser, argv):
    args = parser.parse_args(argv)
    if not args.config:
        return args
    with open(args.config) as fh:
        values = json.load(fh)
    opts = _option_map(parser)
    for key, val in values.items():
        if key not in opts:
            raise ValueError(f"config key {key!r} is not a recognized flag")
        # explicit command-line flags win over the config file
        explicit = any(
            arg == o or arg.startswith(o + "=")
            for o in opts[key] for arg in argv
        )
        if not explicit:
            setattr(args, key, val)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config_file(parser, sys.argv[1:] if argv is None else argv)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, InfeasibleError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
