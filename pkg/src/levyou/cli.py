"""Command-line driver.

    levyou SUBCOMMAND CONFIG.toml [--set key=value ...] [--output DIR] [--workers N]

Exit codes: 0 success, 1 configuration error, 2 assumption violation or other
module error, 3 verification failure. The output directory defaults to
``$LEVYOU_OUTPUT_DIR`` and then ``./levyou-out``.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import CalibrateCfg, ExperimentConfig, load_config
from .errors import AssumptionViolation, ConfigurationError, DomainError, LevyOUError
from .rng import RngStream

EXIT_OK, EXIT_CONFIG, EXIT_ASSUMPTION, EXIT_VERIFY = 0, 1, 2, 3
COMMANDS = ("simulate", "criteria", "verify-jumps", "verify-supbound", "verify-marginal",
            "stable-integral", "calibrate")
ENV_OUTPUT = "LEVYOU_OUTPUT_DIR"


class Outputs:
    """Collects output files; every file carries the config hash."""

    def __init__(self, digest: str):
        self.digest = digest
        self.files: dict[str, str] = {}
        self.verdicts: list[tuple[str, bool]] = []

    def json(self, name: str, payload: dict) -> None:
        body = _clean(dict(payload))
        body["manifest"] = self.digest
        self.files[name] = json.dumps(body, indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def table(self, name: str, columns: dict, meta: dict | None = None) -> None:
        buf = io.StringIO()
        buf.write(f"# manifest: {self.digest}\n")
        for k, v in (meta or {}).items():
            buf.write(f"# {k}: {v}\n")
        cols = list(columns)
        buf.write("\t".join(cols) + "\n")
        for row in zip(*(columns[c] for c in cols)):
            buf.write("\t".join(_fmt(v) for v in row) + "\n")
        self.files[name] = buf.getvalue()

    def text(self, name: str, body: str) -> None:
        self.files[name] = f"# manifest: {self.digest}\n" + body

    def report(self, stem: str, rep) -> None:
        self.json(f"{stem}.json", rep.as_dict())
        if rep.plot:
            self.files[f"{stem}.tsv"] = rep.plot_tsv({"manifest": self.digest, "check": rep.name})
        self.verdicts.append((stem, rep.passed))


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _require(cfg: ExperimentConfig, *sections: str):
    for s in sections:
        if getattr(cfg, s) is None:
            raise ConfigurationError(f"this command needs a [{s}] section")


def _clean(x):
    from .verify import _clean as c
    return c(x)


# -- subcommands --------------------------------------------------------------

def cmd_simulate(cfg, base, out: Outputs, workers):
    from .paths import path_ensemble, psi, psi_quadrature, truncation_deficit
    from .stats import ecf_check
    _require(cfg, "model", "simulate")
    sc = cfg.simulate
    model = cfg.model.build(base)
    grid = sc.grid.build()
    res = path_ensemble(model, sc.delta, sc.n_max, grid, sc.reps, RngStream(cfg.seed),
                        sc.epsilon, workers)
    if sc.write_paths:
        names = ["values"] + ([k for k in ("large", "martingale", "remainder")] if sc.epsilon else [])
        reps = np.repeat(np.arange(sc.reps), grid.size)
        cols = {"rep": reps, "time": np.tile(grid, sc.reps)}
        for k in names:
            cols["value" if k == "values" else k] = res[k].ravel()
        out.table("paths.tsv", cols, {"delta": sc.delta, "n_max": sc.n_max, "epsilon": sc.epsilon,
                                      "seed": cfg.seed})
    t_end = float(grid[-1])
    summary = {"reps": sc.reps, "t": t_end, "delta": sc.delta, "n_max": sc.n_max}
    if t_end > 0:
        if model.stable_alpha is not None:
            psis = [psi(model, th, t_end) for th in sc.ecf_thetas]
            summary["psi_provenance"] = "closed form"
            summary["deficit_theta1"] = truncation_deficit(model, sc.delta, sc.n_max, 1.0, t_end)
        else:
            psis = [psi_quadrature(model, th, t_end).value for th in sc.ecf_thetas]
            summary["psi_provenance"] = "quadrature"
        targets = [math.exp(-p) for p in psis]
        ecf = ecf_check(res["values"][:, -1], sc.ecf_thetas, targets)
        summary["psi"] = psis
        summary["ecf"] = [{"theta": e.theta, "real": e.real, "imag": e.imag, "se_real": e.se_real,
                           "target": e.target, "within_3se": e.passed} for e in ecf]
        out.table("ecf.tsv", {"theta": [e.theta for e in ecf], "ecf_real": [e.real for e in ecf],
                              "se": [e.se_real for e in ecf], "target": targets})
    out.json("summary.json", _clean(summary))


def cmd_criteria(cfg, base, out: Outputs, workers):
    from .criteria import classify
    _require(cfg, "model")
    eps = cfg.criteria.epsilon if cfg.criteria else 1.0
    rep = classify(cfg.model.build(base), eps)
    out.json("criteria.json", rep.as_dict())
    out.text("criteria.txt", rep.summary())


def cmd_verify_jumps(cfg, base, out: Outputs, workers):
    from .verify import large_jump_count_check, max_jump_cdf_check
    _require(cfg, "model", "verify_jumps")
    vj = cfg.verify_jumps
    if vj.max_jump is None and vj.large_count is None:
        raise ConfigurationError("[verify_jumps] needs max_jump and/or large_count")
    model = cfg.model.build(base)
    rng = RngStream(cfg.seed)
    if vj.max_jump is not None:
        mj = vj.max_jump
        spec = model.common_measure
        if spec is None:
            raise ConfigurationError("max_jump needs a common measure")
        out.report("max_jump", max_jump_cdf_check(spec, mj.b, mj.u_grid.build(), mj.reps, rng.child(1),
                                                  model.horizon, mj.delta, workers))
    if vj.large_count is not None:
        lc = vj.large_count
        out.report("large_count", large_jump_count_check(model, lc.epsilon, lc.n_max_grid, lc.reps,
                                                         rng.child(2), workers))


def cmd_verify_supbound(cfg, base, out: Outputs, workers):
    from .verify import default_sup_grid, frozen_constant, sup_bound_check
    _require(cfg, "model", "verify_supbound")
    vs = cfg.verify_supbound
    model = cfg.model.build(base)
    c_cal = vs.c_cal if vs.c_cal is not None else frozen_constant("sup_bound")
    grid = default_sup_grid(model.horizon, vs.grid_size)
    rows = {"k": [], "m": [], "ratio": [], "c_cal": []}
    for i, (k, m) in enumerate(vs.windows):
        rep = sup_bound_check(model, vs.epsilon, k, m, vs.reps, RngStream(cfg.seed).child(i),
                              c_cal, vs.delta, grid, workers=workers)
        out.report(f"sup_bound_{k}_{m}", rep)
        for key in rows:
            rows[key].append(rep.statistics[key] if key != "c_cal" else c_cal)
    out.table("sup_bound_ratios.tsv", rows)


def cmd_verify_marginal(cfg, base, out: Outputs, workers):
    from .verify import marginal_law_check
    _require(cfg, "verify_marginal")
    vm = cfg.verify_marginal
    for i, a in enumerate(vm.alphas):
        rep = marginal_law_check(a, vm.t, vm.delta, vm.reps, RngStream(cfg.seed).child(i),
                                 vm.small_jumps, workers)
        out.report(f"marginal_{a:g}", rep)


def _space(sc):
    from .integral import Discrete, Interval, PowerDensity, StableMeasureSpace
    d = sc.domain
    if d.kind == "discrete":
        dom = Discrete(tuple(d.points), tuple(d.weights))
    else:
        dens = None if d.density is None or d.density.k == 0 else PowerDensity(d.density.k)
        dom = Interval(d.lo, d.hi, dens)
    return StableMeasureSpace(dom, sc.alpha)


def cmd_stable_integral(cfg, base, out: Outputs, workers):
    from .integral import (integral_ensemble, integral_refinement_check, large_intensity,
                           levy_process_suite, make_kernel, scale_parameter, truncation_bound,
                           validate_kernel)
    from .stats import ecf_check
    from .verify import frozen_constant
    _require(cfg, "stable_integral")
    sc = cfg.stable_integral
    space = _space(sc)
    vk = validate_kernel(make_kernel(sc.kernel.name, **sc.kernel.params), space)
    grid = sc.grid.build()
    rng = RngStream(cfg.seed)
    x = integral_ensemble(space, vk, sc.delta, grid, sc.reps, rng.child(1), sc.subdomain,
                          sc.threshold, workers)
    if sc.write_paths:
        out.table("paths.tsv", {"rep": np.repeat(np.arange(sc.reps), grid.size),
                                "time": np.tile(grid, sc.reps), "value": x.ravel()},
                  {"delta": sc.delta, "kernel": sc.kernel.name, "seed": cfg.seed})
    t_end = float(grid[-1])
    scale = scale_parameter(space, vk, t_end)
    targets = [math.exp(-(scale * abs(th)) ** sc.alpha) for th in sc.ecf_thetas]
    ecf = ecf_check(x[:, -1], sc.ecf_thetas, targets)
    summary = {"kernel": vk.as_dict(), "scale_parameter": scale, "t": t_end,
               "truncation_bound": truncation_bound(space, vk, sc.delta, sc.threshold),
               "large_intensity": large_intensity(vk, sc.threshold),
               "ecf": [{"theta": e.theta, "real": e.real, "se_real": e.se_real, "target": e.target,
                        "within_3se": e.passed} for e in ecf]}
    out.json("summary.json", _clean(summary))
    if sc.levy_suite:
        out.report("levy_suite", levy_process_suite(sc.alpha, sc.reps, sc.delta, rng.child(2),
                                                    workers=workers))
    if sc.refinement:
        out.report("refinement", integral_refinement_check(
            space, vk, sc.delta, sc.reps, rng.child(3), frozen_constant("integral_refinement"),
            threshold=sc.threshold, workers=workers))


def cmd_calibrate(cfg, base, out: Outputs, workers):
    from .verify import calibrate
    cc = cfg.calibrate or CalibrateCfg()
    result = {k: calibrate(k, cfg.seed, cc.reps, cc.epsilon, workers) for k in cc.kinds}
    out.json("calibration.json", result)


HANDLERS = {"simulate": cmd_simulate, "criteria": cmd_criteria, "verify-jumps": cmd_verify_jumps,
            "verify-supbound": cmd_verify_supbound, "verify-marginal": cmd_verify_marginal,
            "stable-integral": cmd_stable_integral, "calibrate": cmd_calibrate}


def _versions() -> dict:
    return {"levyou": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def run(command: str, config_path, overrides=(), output=None, workers=None) -> int:
    """Run one subcommand; returns the exit status."""
    try:
        cfg = load_config(config_path, list(overrides))
        out_dir = Path(output or cfg.output_dir or os.environ.get(ENV_OUTPUT) or "levyou-out")
        digest = cfg.digest()
        out = Outputs(digest)
        HANDLERS[command](cfg, Path(config_path).resolve().parent, out, workers)
    except ConfigurationError as e:
        print(f"levyou: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as e:
        print(f"levyou: invalid parameter: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AssumptionViolation as e:
        print(f"levyou: assumption violated: {e}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except LevyOUError as e:
        print(f"levyou: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ASSUMPTION
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, body in out.files.items():
        (out_dir / name).write_text(body)
    manifest = {"schema_version": cfg.schema_version, "command": command, "seed": cfg.seed,
                "config": cfg.canonical(), "config_hash": digest, "versions": _versions(),
                "outputs": {n: hashlib.sha256(b.encode()).hexdigest() for n, b in sorted(out.files.items())},
                "verdicts": {n: ok for n, ok in out.verdicts}}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    for name, ok in out.verdicts:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"outputs written to {out_dir}")
    return EXIT_VERIFY if any(not ok for _, ok in out.verdicts) else EXIT_OK


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="levyou", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("config", help="TOML experiment file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, e.g. simulate.reps=100")
    p.add_argument("-o", "--output", help=f"output directory (default ${ENV_OUTPUT} or ./levyou-out)")
    p.add_argument("-w", "--workers", type=int, default=None,
                   help="worker processes (default $LEVYOU_WORKERS or 1)")
    args = p.parse_args(argv)
    return run(args.command, args.config, args.overrides, args.output, args.workers)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
