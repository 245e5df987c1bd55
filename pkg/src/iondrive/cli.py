"""Command-line front end for the scripted experiments.

Subcommands:

* ``fidelity`` -- run one of the named panels (fig2..fig6) or a custom
  (Omega, delta) point; writes <name>.csv and <name>.report.json.
* ``wigner``   -- run the reconstruction rows for a motional state over a list
  of dephasing rates; writes one CSV per gamma plus a report.
* ``qfit``     -- single-point diagnostic: fitted Q_k against the exact
  populations and the resulting W(alpha).

Exit status: 0 all criteria pass, 1 criteria failure, 2 usage/config error.
All frequencies are dimensionless ratios to the trap frequency nu.
"""

from __future__ import annotations

import argparse
import os
import sys

from .bench import (ExperimentSpec, PANELS, builtin_fidelity_criteria,
                    builtin_wigner_criteria, evaluate, motional_state,
                    run_fidelity_panel, run_wigner_rows, write_report_json)
from .errors import IonDriveError
from .tomography import (Regime, ScanConfig, fit_q, protocol_grid, q_exact,
                         simulate_probability, wigner_point)

CONFIG_KEYS = ("omega", "delta", "eta", "gamma", "cutoff", "tmax", "samples", "kmax")


def _read_config(path: str) -> dict:
    """Flat key = value file; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (part.strip() for part in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = val
    return values


def _effective(args, config: dict, key: str, default, cast=float):
    """Flag > config file > built-in default."""
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in config:
        return cast(config[key])
    return default


def _parse_state(text: str):
    if ":" not in text:
        raise ValueError(f"state spec {text!r} must look like kind:param, e.g. cat:2")
    kind, param = text.split(":", 1)
    if kind not in ("coherent", "number", "cat"):
        raise ValueError(f"unknown state kind {kind!r}")
    return kind, (int(param) if kind == "number" else complex(param))


def _parse_gammas(text: str):
    gammas = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    if not gammas or any(g < 0 for g in gammas):
        raise ValueError(f"bad gamma list {text!r}")
    return gammas


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iondrive",
        description="Trapped-ion benchmarks: effective-model fidelities and "
                    "Wigner reconstruction under dephasing.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--eta", type=float, help="Lamb-Dicke parameter (default 0.05)")
        p.add_argument("--cutoff", type=int, help="Fock cutoff N (default 50)")
        p.add_argument("--samples", type=int, help="time samples")
        p.add_argument("--out", default="out", help="output directory (default ./out)")
        p.add_argument("--config", help="flat key=value config file")

    fid = sub.add_parser("fidelity", help="fidelity panel vs the full Hamiltonian")
    fid.add_argument("--panel", choices=sorted(PANELS), help="named working point")
    fid.add_argument("--omega", type=float, help="Rabi frequency / nu")
    fid.add_argument("--delta", type=float, help="detuning / nu")
    fid.add_argument("--tmax", type=float, help="total time in nu t (default 800)")
    common(fid)

    wig = sub.add_parser("wigner", help="Wigner reconstruction rows")
    wig.add_argument("--state", required=True, help="motional state, kind:param (e.g. cat:2)")
    wig.add_argument("--gamma", help="comma-separated dephasing rates / nu")
    wig.add_argument("--regime", choices=("slow", "fast", "both"), default="both")
    wig.add_argument("--slice", choices=("re", "im", "both"), default="both")
    wig.add_argument("--kmax", type=int, help="fit order (default 32)")
    wig.add_argument("--tmax", type=float, help="protocol duration in Omega t (default 800)")
    common(wig)

    qf = sub.add_parser("qfit", help="single-point Q_k fit diagnostic")
    qf.add_argument("--state", required=True, help="motional state, kind:param")
    qf.add_argument("--alpha", default="0", help="phase-space point (complex)")
    qf.add_argument("--gamma", help="dephasing rate / nu (default 0)")
    qf.add_argument("--regime", choices=("slow", "fast"), default="fast")
    qf.add_argument("--kmax", type=int, help="fit order (default 32)")
    qf.add_argument("--tmax", type=float, help="protocol duration in Omega t (default 800)")
    common(qf)
    return parser


def _cmd_fidelity(args, config) -> int:
    if args.panel is None and (args.omega is None and "omega" not in config):
        print("fidelity: need --panel or --omega/--delta", file=sys.stderr)
        return 2
    overrides = dict(
        eta=_effective(args, config, "eta", 0.05),
        cutoff=int(_effective(args, config, "cutoff", 50, int)),
        t_max=_effective(args, config, "tmax", 800.0),
        samples=int(_effective(args, config, "samples", 3201, int)),
        out_dir=args.out,
    )
    if args.panel:
        spec = ExperimentSpec.panel(args.panel, **overrides)
    else:
        spec = ExperimentSpec(
            name="custom",
            omega=_effective(args, config, "omega", 1.0),
            delta=_effective(args, config, "delta", 0.0),
            **overrides)
    report = run_fidelity_panel(spec)
    status, table, results = evaluate(report, builtin_fidelity_criteria(spec.name))
    write_report_json(os.path.join(spec.out_dir, f"{spec.name}.report.json"),
                      report, results)
    print(table)
    if not results:
        print(f"{spec.name}: no built-in criteria; run completed "
              f"in {report.duration_s:.1f} s")
    return status


def _cmd_wigner(args, config) -> int:
    state = _parse_state(args.state)
    gammas = _parse_gammas(args.gamma) if args.gamma is not None else \
        ([float(config["gamma"])] if "gamma" in config else [0.0])
    regimes = {"slow": (Regime.SLOW,), "fast": (Regime.FAST,),
               "both": (Regime.SLOW, Regime.FAST)}[args.regime]
    slices = {"re": ("re",), "im": ("im",), "both": ("re", "im")}[args.slice]
    spec = ExperimentSpec(
        name="wigner",
        eta=_effective(args, config, "eta", 0.05),
        cutoff=int(_effective(args, config, "cutoff", 50, int)),
        state=state,
        gammas=tuple(gammas),
        regimes=regimes,
        slices=slices,
        omega_t_max=_effective(args, config, "tmax", 800.0),
        scan_samples=int(_effective(args, config, "samples", 1600, int)),
        k_max=int(_effective(args, config, "kmax", 32, int)),
        out_dir=args.out,
    )
    report = run_wigner_rows(spec)
    status, table, results = evaluate(report, builtin_wigner_criteria(spec))
    write_report_json(os.path.join(spec.out_dir, "wigner.report.json"),
                      report, results)
    print(table)
    if not results:
        print(f"wigner: no applicable built-in criteria; run completed "
              f"in {report.duration_s:.1f} s")
    return status


def _cmd_qfit(args, config) -> int:
    kind, param = _parse_state(args.state)
    alpha = complex(args.alpha)
    gamma = float(args.gamma) if args.gamma is not None else \
        float(config.get("gamma", 0.0))
    regime = Regime(args.regime)
    cutoff = int(_effective(args, config, "cutoff", 50, int))
    cfg = ScanConfig(
        eta=_effective(args, config, "eta", 0.05),
        omega_t_max=_effective(args, config, "tmax", 800.0),
        samples=int(_effective(args, config, "samples", 1600, int)),
        k_max=int(_effective(args, config, "kmax", 32, int)))
    phi = motional_state(kind, param, cutoff)
    p = regime.model_params(eta=cfg.eta, cutoff=cutoff)
    series = simulate_probability(phi, alpha, regime, gamma,
                                  protocol_grid(regime, cfg), cfg)
    fitted = fit_q(series, p, cfg.k_max)
    exact = q_exact(phi, alpha, cfg.k_max)
    print(f"state {args.state}  alpha {alpha}  gamma {gamma:g}  regime {regime.value}")
    print(f"{'k':>3} {'Q_fit':>13} {'Q_exact':>13}")
    for k, (qf_, qe) in enumerate(zip(fitted.q, exact.q)):
        print(f"{k:>3} {qf_:>13.6f} {qe:>13.6f}")
    w_fit = wigner_point(fitted)
    w_exact = wigner_point(exact)
    print(f"W(alpha) fit {w_fit.w:.6f}   exact {w_exact.w:.6f}   "
          f"fit residual RMS {fitted.residual:.3e}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _read_config(args.config) if args.config else {}
        if args.command == "fidelity":
            return _cmd_fidelity(args, config)
        if args.command == "wigner":
            return _cmd_wigner(args, config)
        if args.command == "qfit":
            return _cmd_qfit(args, config)
        parser.error(f"unknown command {args.command!r}")
    except (IonDriveError, ValueError, OSError) as exc:
        print(f"iondrive: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
