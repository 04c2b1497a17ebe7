"""Command-line front end: ``phblowup <command> [--config PATH | --preset NAME] ...``.

Exit codes: 0 certified / passed, 2 falsified, 1 error or inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from pathlib import Path

import numpy as np

from .blowup_geom import WarpedMetricFamily
from .config import CONTROL_PRESETS, PRESETS, RunConfig, load_config, parse_config, preset_text
from .errors import BlowupError
from .systems import ConnectedSum, ModelSystem, Suspension
from .verifier import certify_flow_ph, certify_ph, certify_rates, estimate_splitting, ph_sample_points, seam_check
from .verifier.rates import sweep_epsilon
from .verifier.reports import write_csv, write_ph, write_rates, write_sweep

COMMANDS = ("lemma", "sweep", "certify", "flow", "gluecheck", "examples")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phblowup", description="Certify partial hyperbolicity of blown-up model systems.")
    p.add_argument("command", choices=COMMANDS)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="run configuration file")
    src.add_argument("--preset", metavar="NAME", help="shipped configuration: "
                     + ", ".join(list(PRESETS) + list(CONTROL_PRESETS)))
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
    p.add_argument("--summary", action="store_true", help="print the result table")
    return p


def _load(args) -> RunConfig:
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = parse_config(preset_text(args.preset))
    else:
        raise BlowupError("--config or --preset is required")
    if args.seed is not None:
        cfg.verify["seed"] = args.seed
    return cfg


def _out_dir(args, cfg) -> Path:
    return Path(args.out if args.out else cfg.output["dir"])


def _base_system(cfg) -> ModelSystem:
    obj = cfg.build()
    if isinstance(obj, ConnectedSum):
        return obj.sides[0]
    if isinstance(obj, Suspension):
        return obj.sys
    return obj


def _print_table(header, rows):
    rows = [[f"{v:.6g}" if isinstance(v, (float, np.floating)) else str(v) for v in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for r in rows:
        print("  ".join(v.ljust(w) for v, w in zip(r, widths)))


def cmd_lemma(args, cfg) -> int:
    sys = _base_system(cfg)
    v = cfg.verify
    eps = cfg.system["eps"]
    certs = [
        certify_rates(sys.A, WarpedMetricFamily(eps), region, v["n_max"], v["samples"], v["seed"])
        for region in v["regions"]
    ]
    write_rates(_out_dir(args, cfg) / "rates.csv", certs, cfg.hash, v["seed"])
    if args.summary:
        _print_table(("region", "eps", "n_max", "C_emp"), [(c.region, c.eps, c.n_max, c.C_emp) for c in certs])
    return 0


def cmd_sweep(args, cfg) -> int:
    sys = _base_system(cfg)
    v = cfg.verify
    report = sweep_epsilon(sys.A, v["eps_list"], v["n_max"], v["samples"], v["seed"])
    write_sweep(_out_dir(args, cfg) / "sweep.csv", report, cfg.hash, v["seed"])
    if args.summary:
        _print_table(("eps", "C_emp", "mean_return_time"), list(report.rows()))
        print(f"spread max/min = {report.spread:.4g}; uniform = {report.uniform}")
    return 0 if report.uniform else 2


def _write_witness(path, cert, cfg):
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"config_sha256": cfg.hash, "seed": cfg.seed, "verdict": cert.verdict,
               "delta_margin": float(cert.delta), "witness": cert.witness}
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _finish_ph(args, cfg, cert) -> int:
    out = _out_dir(args, cfg)
    write_ph(out / "ph.csv", cert, cfg.hash, cfg.seed)
    if cert.verdict == "falsified":
        _write_witness(out / "witness.json", cert, cfg)
    if args.summary:
        _print_table(("band", "exponent_low", "exponent_high", "delta_margin", "verdict"), list(cert.rows()))
    return cert.exit_code


def cmd_certify(args, cfg) -> int:
    obj = cfg.build()
    if not isinstance(obj, ModelSystem):
        raise BlowupError("certify needs a product, twisted or blownup system")
    v = cfg.verify
    points, idx, shells = ph_sample_points(obj, v["samples"], v["seed"])
    split = estimate_splitting(obj, points, iters=v["iters"], tol=v["tol"], seed=v["seed"],
                               shell_index=idx, shells=shells, n_ahead=v["n_max"])
    cert = certify_ph(obj, split, n_max=v["n_max"], samples=v["samples"], seed=v["seed"], iters=v["iters"])
    return _finish_ph(args, cfg, cert)


def cmd_flow(args, cfg) -> int:
    obj = cfg.build()
    susp = obj if isinstance(obj, Suspension) else Suspension(_base_system(cfg))
    v = cfg.verify
    cert = certify_flow_ph(susp, v["t_list"], samples=v["samples"], seed=v["seed"], iters=v["iters"])
    return _finish_ph(args, cfg, cert)


def cmd_gluecheck(args, cfg) -> int:
    obj = cfg.build()
    if not isinstance(obj, ConnectedSum):
        base = _base_system(cfg)
        if not base.blown:
            base = base.with_blowup(cfg.system["eps"])
        obj = ConnectedSum(base, base)
    v = cfg.verify
    report = seam_check(obj, v["samples"], v["seed"])
    rows = [("one_sided_gap", report.one_sided_gap), ("analytic_gap", report.analytic_gap)]
    if report.swap_gap is not None:
        rows.append(("swap_gap", report.swap_gap))
    write_csv(_out_dir(args, cfg) / "seam.csv", ("metric", "value"), rows, cfg.hash, v["seed"])
    if args.summary:
        _print_table(("metric", "value"), rows)
    return 0 if report.passed() else 2


def cmd_examples(args) -> int:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    for name, text in PRESETS.items():
        path = out / f"{name}.ini"
        if not path.exists() or path.read_text() != text:
            path.write_text(text)
        if args.summary:
            print(path)
    return 0


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        if args.command == "examples":
            return cmd_examples(args)
        cfg = _load(args)
        handler = {"lemma": cmd_lemma, "sweep": cmd_sweep, "certify": cmd_certify,
                   "flow": cmd_flow, "gluecheck": cmd_gluecheck}[args.command]
        return handler(args, cfg)
    except BlowupError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


def run_command(argv) -> int:
    return main(argv)


if __name__ == "__main__":
    raise SystemExit(main())
