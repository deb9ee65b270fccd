"""Command-line surface: parameter derivation, master-equation runs, steady
states, phase-space grids, QFI evaluation, optimization, and scaling fits.

Every run resolves a flat key=value config (file keys overridden by flags),
validates it against the scenario's schema, and writes deterministic
artifacts into --out: a summary.json plus scenario-specific CSV files. Two
runs of the same config produce byte-identical CSV/JSON; wall-clock timing
goes to a run.log sidecar so it cannot break that guarantee. Exit codes
separate config errors (2), physics/validity rejections (3), truncation
guards (4), and numerical-contract failures (5).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from typing import Optional

import numpy as np

from . import fock, metrology, model, wigner
from .dynamics import Observer, evolve, steady_state
from .errors import (
    ConfigError,
    MultiplicityError,
    NumericalContractError,
    PhysicsError,
    StepSizeError,
    TruncationError,
    UndefinedStateError,
    ValidityError,
)
from .fock import CompositeSpace, ModeSpace, embed, ladder, parity_op, partial_trace
from .metrology import StateFamily, optimize_qfi, qfi_analytic, qfi_numeric

_BASE_KEYS = (
    "Delta_a",
    "g",
    "kappa_a",
    "kappa_b",
    "kappa_c",
    "Delta_c",
    "r_env",
    "phi_env",
)
_TARGET_KEYS = {"alpha": 2.0, "r": 1.1, "G": 0.1, "preset": "reference"}
_TIERS = ("reduced", "approx", "exact")

# key -> (type tag, default); base keys default to the preset values and are
# only forwarded when set explicitly
_SCHEMAS = {
    "derive": {
        **{k: ("float", None) for k in _BASE_KEYS},
        "alpha": ("float", 2.0),
        "r": ("float", 1.1),
        "G": ("float", 0.1),
        "preset": ("str", "reference"),
    },
    "simulate": {
        **{k: ("float", None) for k in _BASE_KEYS},
        "alpha": ("float", 2.0),
        "r": ("float", 1.1),
        "G": ("float", 0.1),
        "preset": ("str", "reference"),
        "tier": ("str", "reduced"),
        "t_final": ("float", 200.0),
        "n_samples": ("int", 201),
        "initial": ("str", "vacuum"),
        "dims": ("str", ""),
        "dt": ("float", None),
        "strict_rwa": ("bool", False),
        "rwa_threshold": ("float", 10.0),
    },
    "steady": {
        **{k: ("float", None) for k in _BASE_KEYS},
        "alpha": ("float", 2.0),
        "r": ("float", 1.1),
        "G": ("float", 0.1),
        "preset": ("str", "reference"),
        "tier": ("str", "reduced"),
        "dims": ("str", ""),
        "parity_hint": ("int", None),
        "method": ("str", "auto"),
        "strict_rwa": ("bool", False),
        "rwa_threshold": ("float", 10.0),
    },
    "wigner": {
        **{k: ("float", None) for k in _BASE_KEYS},
        "source": ("str", "analytic"),
        "alpha": ("float", 2.0),
        "r": ("float", 1.1),
        "G": ("float", 0.1),
        "preset": ("str", "reference"),
        "kind": ("str", "even"),
        "n_grid": ("int", 101),
        "half_width": ("float", 8.0),
        "dim": ("int", 0),
        "dims": ("str", ""),
        "frame": ("str", "lab"),
    },
    "qfi": {
        "family": ("str", "SECS"),
        "alpha": ("float", 2.0),
        "r": ("float", 1.1),
        "dim": ("int", 0),
    },
    "optimize": {
        "family": ("str", "SECS"),
        "N_target": ("float", 10.0),
    },
    "fit": {
        "family": ("str", "SECS"),
        "n_min": ("float", 4.0),
        "n_max": ("float", 100.0),
        "n_step": ("float", 2.0),
    },
}

_CHOICES = {
    "tier": _TIERS,
    "initial": ("vacuum", "one"),
    "source": ("analytic", "numeric", "steady"),
    "kind": ("even", "odd", "yurke_stoler"),
    "frame": ("lab", "squeezed"),
    "method": ("auto", "svd", "evolve"),
    "family": metrology.KINDS,
    "preset": model.PRESET_NAMES,
    "parity_hint": (0, 1),
}


# ---------------------------------------------------------------------------
# config resolution


def _parse_value(key: str, tag: str, text: str):
    try:
        if tag == "float":
            return float(text)
        if tag == "int":
            return int(text)
        if tag == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        return text
    except ValueError:
        raise ConfigError(f"key {key!r}: cannot parse {text!r} as {tag}") from None


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _resolve_config(scenario: str, args) -> tuple:
    """Returns (resolved config dict, set of explicitly-set keys)."""
    schema = _SCHEMAS[scenario]
    file_map = _load_config_file(args.config) if args.config else {}
    unknown = sorted(set(file_map) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config keys for {scenario}: {unknown}")
    cfg = {k: default for k, (_, default) in schema.items()}
    explicit = set()
    for key, text in file_map.items():
        cfg[key] = _parse_value(key, schema[key][0], text)
        explicit.add(key)
    for flag in ("tier", "dims"):
        value = getattr(args, flag, None)
        if value is not None:
            if flag not in schema:
                raise ConfigError(f"--{flag} is not accepted by {scenario}")
            cfg[flag] = value
            explicit.add(flag)
    if getattr(args, "strict_rwa", False):
        if "strict_rwa" not in schema:
            raise ConfigError(f"--strict-rwa is not accepted by {scenario}")
        cfg["strict_rwa"] = True
        explicit.add("strict_rwa")
    for key, choices in _CHOICES.items():
        if key in cfg and cfg[key] is not None and cfg[key] not in choices:
            raise ConfigError(f"key {key!r}: {cfg[key]!r} not in {choices}")
    return cfg, explicit


def _parse_dims(cfg: dict, tier: str) -> tuple:
    defaults = {"reduced": (30,), "approx": (20, 4), "exact": (20, 4, 3)}[tier]
    text = cfg.get("dims", "")
    if not text:
        return defaults
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ConfigError(f"dims: cannot parse {text!r} as comma-separated ints") from None
    if len(dims) != len(defaults) or any(d < 2 for d in dims):
        raise ConfigError(
            f"dims for tier {tier} needs {len(defaults)} entries >= 2, got {text!r}"
        )
    return dims


def _parameter_chain(cfg: dict, explicit: set):
    base = dict(model.preset_base(cfg["preset"]))
    for key in _BASE_KEYS:
        if key in explicit:
            base[key] = cfg[key]
    p = model.params_for_target(cfg["alpha"], cfg["r"], cfg["G"], base)
    return p, model.derive_params(p)


# ---------------------------------------------------------------------------
# deterministic serialization


def _fmt(x: float) -> str:
    return f"{x:.11e}"


def _quantize(obj):
    """12-significant-digit rounding so reruns serialize byte-identically."""
    if isinstance(obj, dict):
        return {str(k): _quantize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_quantize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_quantize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _quantize(complex(obj).real), "im": _quantize(complex(obj).imag)}
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
        return float(_fmt(x))
    return obj


def _echo_lines(cfg: dict, derived) -> list:
    items = [("config." + k, v) for k, v in cfg.items()]
    if derived is not None:
        items += [("derived." + k, v) for k, v in dataclasses.asdict(derived).items()]
    lines = []
    for key, value in sorted(items):
        if isinstance(value, complex):
            value = f"{_fmt(value.real)}{value.imag:+.11e}j"
        elif isinstance(value, float):
            value = _fmt(value)
        lines.append(f"# {key} = {value}")
    return lines


def _write_text(path: str, lines: list):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_csv(outdir, name, cfg, derived, header_lines, rows):
    lines = _echo_lines(cfg, derived)
    lines += header_lines
    lines += [",".join(_fmt(float(v)) for v in row) for row in rows]
    _write_text(os.path.join(outdir, name), lines)


def _write_summary(outdir, scenario, cfg, params, derived, results):
    payload = {
        "scenario": scenario,
        "config": _quantize(cfg),
        "params": _quantize(dataclasses.asdict(params)) if params is not None else None,
        "derived": _quantize(dataclasses.asdict(derived)) if derived is not None else None,
        "results": _quantize(results),
    }
    text = json.dumps(payload, sort_keys=True, indent=2)
    _write_text(os.path.join(outdir, "summary.json"), [text])


# ---------------------------------------------------------------------------
# scenarios


def _frame_target(space: ModeSpace, alpha: float, kind: str):
    return fock.cat_state(space, alpha, kind)


def _rwa_gate(cfg: dict, d, dims: tuple) -> dict:
    # evaluated at the typical physical occupations (the rwa_validity
    # defaults), not at the Fock cutoffs, which only bound the numerics
    report = model.rwa_validity(d, threshold=cfg["rwa_threshold"])
    if cfg["strict_rwa"] and not report.passed:
        raise ValidityError(
            f"rotating-frame validity failed: min ratio {report.min_ratio:.3g} "
            f"< threshold {report.threshold:.3g}"
        )
    return report.as_dict()


def _scenario_derive(cfg, explicit, outdir):
    p, d = _parameter_chain(cfg, explicit)
    results = {
        "Gamma_a": d.Gamma_a,
        "G": d.G,
        "J_eff": d.J_eff,
        "alpha": d.alpha,
        "r": d.r,
        "N_eff": d.N_eff,
        "M_eff": d.M_eff,
        "lifetime": model.lifetime(abs(d.alpha), d.kappa_a) if d.kappa_a > 0 else None,
    }
    return p, d, results


def _scenario_simulate(cfg, explicit, outdir):
    p, d = _parameter_chain(cfg, explicit)
    tier = cfg["tier"]
    dims = _parse_dims(cfg, tier)
    alpha = cfg["alpha"]
    results = {"tier": tier, "dims": list(dims)}

    if tier == "reduced":
        mdl = model.build_reduced_model(d, dim_a=dims[0])
        sp = mdl.space
        kind = "even" if cfg["initial"] == "vacuum" else "odd"
        target = _frame_target(sp, alpha, kind)
        rho0 = fock.vacuum(sp) if cfg["initial"] == "vacuum" else fock.fock_state(sp, 1)
        observers = [
            Observer("fidelity", target.projector(), "fidelity"),
            Observer("n", ladder(sp, "number")),
            Observer("parity", parity_op(sp)),
        ]
    else:
        results["rwa"] = _rwa_gate(cfg, d, dims)
        if tier == "approx":
            mdl = model.build_approx_model(d, dims=dims)
        else:
            mdl = model.build_exact_model(p, d, dims=dims)
        comp = mdl.space
        mode_a = comp.modes[0]
        kind = "even" if cfg["initial"] == "vacuum" else "odd"
        target = _frame_target(mode_a, alpha, kind)
        occ = (0,) * len(dims) if cfg["initial"] == "vacuum" else (1,) + (0,) * (len(dims) - 1)
        rho0 = fock.fock_state(comp, occ)
        observers = [
            Observer("n_a", embed(ladder(mode_a, "number"), comp, 0)),
            Observer("parity_a", embed(parity_op(mode_a), comp, 0)),
        ]

    traj = evolve(
        mdl,
        rho0.density(),
        cfg["t_final"],
        dt=cfg["dt"],
        observers=observers,
        n_samples=cfg["n_samples"],
        snapshot_times=[cfg["t_final"]],
    )
    names = [ob.name for ob in observers]
    rows = [
        [t] + [traj.observables[name][i].real for name in names]
        for i, t in enumerate(traj.times)
    ]
    _write_csv(outdir, "trajectory.csv", cfg, d, ["t," + ",".join(names)], rows)

    rho_final = traj.snapshots[-1][1]
    if tier == "reduced":
        final_fidelity = float(traj.observables["fidelity"][-1])
        peak_idx = int(np.argmax(traj.observables["fidelity"]))
        results["peak_fidelity"] = float(traj.observables["fidelity"][peak_idx])
        results["t_peak"] = float(traj.times[peak_idx])
    else:
        rho_final = partial_trace(rho_final, [0])
        final_fidelity = fock.fidelity(rho_final, target)
    results["final_fidelity"] = final_fidelity
    results["final_parity"] = float(traj.observables[names[-1]][-1].real)
    results["n_steps"] = traj.n_steps
    results["dt"] = traj.dt
    return p, d, results


def _scenario_steady(cfg, explicit, outdir):
    p, d = _parameter_chain(cfg, explicit)
    tier = cfg["tier"]
    if tier == "exact":
        raise ConfigError("steady: the exact tier is time-dependent; use reduced or approx")
    dims = _parse_dims(cfg, tier)
    alpha = cfg["alpha"]
    hint = cfg["parity_hint"]
    results = {"tier": tier, "dims": list(dims)}

    if tier == "reduced":
        mdl = model.build_reduced_model(d, dim_a=dims[0])
    else:
        results["rwa"] = _rwa_gate(cfg, d, dims)
        mdl = model.build_approx_model(d, dims=dims)
    rho = steady_state(mdl, parity_hint=hint, parity_mode=0, method=cfg["method"])
    rho_a = rho if tier == "reduced" else partial_trace(rho, [0])

    kind = "odd" if hint == 1 else "even"
    target = _frame_target(ModeSpace(dims[0]), alpha, kind)
    num = ladder(rho_a.space, "number")
    results["fidelity_to_cat"] = fock.fidelity(rho_a, target)
    results["purity"] = rho_a.purity()
    results["n_mean"] = float(fock.expectation(num, rho_a).real)
    results["parity"] = float(fock.expectation(parity_op(rho_a.space), rho_a).real)

    pops = np.real(np.diag(rho_a.matrix))
    rows = [[float(n), float(pop)] for n, pop in enumerate(pops)]
    _write_csv(outdir, "steady_populations.csv", cfg, d, ["n,population"], rows)
    return p, d, results


def _scenario_wigner(cfg, explicit, outdir):
    source = cfg["source"]
    alpha, r = cfg["alpha"], cfg["r"]
    q_values, p_values = wigner.default_grid(r, cfg["half_width"], cfg["n_grid"])
    p = d = None

    if source == "analytic":
        grid = wigner.wigner_analytic_secs(alpha, r, q_values, p_values)
    elif source == "numeric":
        dim = cfg["dim"] or 2 * fock.required_dim(alpha, r)
        psi = fock.squeezed_cat(ModeSpace(dim), alpha, r, cfg["kind"])
        grid = wigner.wigner_numeric(psi, q_values, p_values)
    else:
        p, d = _parameter_chain(cfg, explicit)
        dims = _parse_dims(cfg, "reduced")
        mdl = model.build_reduced_model(d, dim_a=dims[0])
        hint = 1 if cfg["kind"] == "odd" else 0
        rho = steady_state(mdl, parity_hint=hint)
        if cfg["frame"] == "lab":
            rho = model.to_lab_frame(rho, r, dim=cfg["dim"] or None)
        else:
            q_values, p_values = wigner.default_grid(0.0, cfg["half_width"], cfg["n_grid"])
        grid = wigner.wigner_numeric(rho, q_values, p_values)

    results = {
        "source": source,
        "normalization": grid.normalization(),
        "negativity_volume": wigner.negativity_volume(grid),
        "cell_area": grid.cell_area(),
        "q0": grid.q0,
        "p0": grid.p0,
    }
    header = [
        "q_values," + ",".join(_fmt(float(q)) for q in grid.q_values),
        "p_values," + ",".join(_fmt(float(v)) for v in grid.p_values),
    ]
    rows = [list(map(float, row)) for row in grid.values]
    _write_csv(outdir, "wigner.csv", cfg, d, header, rows)
    return p, d, results


def _scenario_qfi(cfg, explicit, outdir):
    fam = StateFamily(cfg["family"], cfg["alpha"], cfg["r"])
    ana = qfi_analytic(fam)
    dim = cfg["dim"] or 2 * fock.required_dim(fam.alpha, fam.r)
    num = qfi_numeric(fam, dim)
    rel = abs(num.F - ana.F) / abs(ana.F) if ana.F != 0.0 else abs(num.F - ana.F)
    results = {
        "family": fam.kind,
        "F": ana.F,
        "N": ana.N,
        "Q": ana.Q,
        "J_corr": ana.J_corr,
        "F_numeric": num.F,
        "N_numeric": num.N,
        "rel_err_F": rel,
        "dim": dim,
    }
    return None, None, results


def _scenario_optimize(cfg, explicit, outdir):
    kind = cfg["family"]
    r_star, alpha_star, f_star = optimize_qfi(kind, cfg["N_target"])
    results = {
        "family": kind,
        "N_target": cfg["N_target"],
        "r_star": r_star,
        "alpha_star": alpha_star,
        "F_star": f_star,
    }
    if alpha_star > 0.0 or kind not in ("OCS", "SOCS"):
        res = qfi_analytic(StateFamily(kind, alpha_star, r_star))
        results["N_check"] = res.N
        results["Q"] = res.Q
    return None, None, results


def _scenario_fit(cfg, explicit, outdir):
    kind = cfg["family"]
    if kind not in metrology.FIT_BASES:
        raise ConfigError(f"fit supports {sorted(metrology.FIT_BASES)}, got {kind!r}")
    if cfg["n_step"] <= 0.0 or cfg["n_max"] < cfg["n_min"]:
        raise ConfigError("fit needs n_min <= n_max and n_step > 0")
    samples = np.arange(cfg["n_min"], cfg["n_max"] + 1e-9, cfg["n_step"])
    rows = []
    for n_target in samples:
        r_star, alpha_star, f_star = optimize_qfi(kind, float(n_target))
        rows.append([float(n_target), f_star, r_star, alpha_star])
    coeffs, residual = metrology.fit_scaling(kind, samples)
    _write_csv(outdir, "fit_samples.csv", cfg, None, ["N,F_star,r_star,alpha_star"], rows)
    results = {
        "family": kind,
        "basis": list(metrology.FIT_BASES[kind]),
        "coefficients": [float(c) for c in coeffs],
        "residual": residual,
        "n_samples": len(rows),
    }
    return None, None, results


_SCENARIOS = {
    "derive": _scenario_derive,
    "simulate": _scenario_simulate,
    "steady": _scenario_steady,
    "wigner": _scenario_wigner,
    "qfi": _scenario_qfi,
    "optimize": _scenario_optimize,
    "fit": _scenario_fit,
}


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sqcat",
        description="Squeezed-cat preparation and phase-estimation toolkit",
    )
    sub = ap.add_subparsers(dest="scenario", required=True)
    helps = {
        "derive": "resolve the parameter chain and report derived couplings",
        "simulate": "integrate a model tier and record observable trajectories",
        "steady": "compute the stationary state of a time-independent tier",
        "wigner": "evaluate a phase-space distribution on a grid",
        "qfi": "closed-form vs Fock-moment QFI of a state family",
        "optimize": "maximize QFI at fixed total photon number",
        "fit": "fit the optimized QFI scaling law over a photon-number sweep",
    }
    for name, help_text in helps.items():
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", default=None, help="flat key=value file")
        s.add_argument("--out", default=".", help="output directory")
        if name in ("simulate", "steady"):
            s.add_argument("--tier", choices=_TIERS, default=None)
            s.add_argument("--dims", default=None, help="comma-separated mode cutoffs")
            s.add_argument("--strict-rwa", action="store_true", dest="strict_rwa")
    return ap


def _dispatch(args) -> None:
    scenario = args.scenario
    cfg, explicit = _resolve_config(scenario, args)
    os.makedirs(args.out, exist_ok=True)
    start = time.perf_counter()
    p, d, results = _SCENARIOS[scenario](cfg, explicit, args.out)
    elapsed = time.perf_counter() - start
    _write_summary(args.out, scenario, cfg, p, d, results)
    # wall clock is intentionally quarantined in the sidecar: summary.json and
    # the CSVs must be byte-identical across reruns of the same config
    _write_text(
        os.path.join(args.out, "run.log"),
        [f"scenario={scenario}", f"wall_clock_seconds={elapsed:.3f}"],
    )
    print(f"wrote {os.path.join(args.out, 'summary.json')}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _dispatch(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PhysicsError, ValidityError, UndefinedStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except TruncationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (NumericalContractError, StepSizeError, MultiplicityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
