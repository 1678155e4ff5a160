"""Command line interface.

    channel-spectra <command> [--config file] [--set key=value ...]
                              [--out dir] [--workers n]

Commands and their main artifacts (written into the output directory):

    bands        bands.csv (theta, band_1..band_k), band_intervals.csv,
                 bands.svg
    gaps         everything from bands plus gaps.csv (gap, lower, upper,
                 width)
    sweep-omega  sweep.csv (omega, alpha, gap, full/reference gap edges,
                 discrepancy), sweep_summary.json
    hill         hill_curves.csv, hill_intervals.csv, hill_gaps.csv for the
                 lowest-transverse-channel operator alpha + K0,
                 K0 = -d^2/dx^2 + W_0(x); optional finite-difference
                 cross-check (fd_check.json)
    classical    trajectory.csv (t, x, y, px, py, energy), guiding.csv
                 (t, sx, sy, px_sx), classical_summary.json
    mourre       certificate.json, excluded.csv, certified.csv; optional
                 scaling.csv when a scaling block is configured
    commutator   commutator.csv and verdict.txt; with --gen-nogo also
                 nogo.json describing the constraint chain
    diagnostics  diagnostics.json with self-check results

Configuration is JSON (a single object); --set flags override file keys and
use dots for nested paths, e.g. --set potential.kind=zero.  Unknown keys are
rejected.  Every artifact run writes manifest.json echoing the resolved
configuration.  Exit status: 0 on success (an inadmissible transport
certificate is a result, not an error), 1 on configuration errors, 2 on
numerical failure such as non-convergence.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence

from . import __version__
from .bands import compute_bands, detect_gaps, gap_persistence_sweep
from .channel import (
    ChannelParams,
    FourierXPotential,
    Potential,
    ZeroPotential,
    derive_params,
    potential_from_dict,
)
from .classical import ClassicalState, closed_form_trajectory, integrate, mourre_observable
from .fiber import EigensolverError, assemble_fiber, complex_theta_resolvent_bound, eigenvalues_fiber
from .hermite import project_potential
from .hill import fd_hill_richardson, h00_gaps, hill_bands, hill_spectrum
from .mourre import appendix_norm_checks, evaluate_certificate, scaling_sweep
from .output import write_band_svg, write_csv, write_json
from .quadratic import QuadraticObservable, commutator_iA, conjugate_observable, gen_nogo_scan, h0_observable

MANIFEST_SCHEMA_VERSION = 1

__all__ = ["ConfigError", "main", "resolve_config", "COMMANDS"]


class ConfigError(ValueError):
    """Raised for unknown keys, malformed values, or inconsistent settings."""


_TWO_COS = {"kind": "fourier_x", "coeffs": {"1": [1.0, 0.0], "-1": [1.0, 0.0]}}

# every knob has a documented default; None means "choose automatically"
_SCHEMAS: dict[str, dict] = {
    "bands": {
        "B": 3.0,
        "omega": 4.0,
        "potential": {"kind": "zero"},
        "theta_count": 33,
        "n_hermite": None,
        "m_max": None,
        "ceiling": None,
        "refine": True,
        "xtol": 1e-8,
        "cauchy_tol": 1e-7,
    },
    "gaps": {
        "B": 3.0,
        "omega": 4.0,
        "potential": _TWO_COS,
        "theta_count": 33,
        "n_hermite": None,
        "m_max": None,
        "ceiling": None,
        "refine": True,
        "xtol": 1e-8,
        "cauchy_tol": 1e-7,
        "gap_tolerance": None,
    },
    "sweep-omega": {
        "B": 3.0,
        "omega_list": [4.0, 10.0, 40.0],
        "potential": _TWO_COS,
        "theta_count": 17,
        "hill_m_max": 32,
        "target_gap_count": 1,
        "gap_tolerance": None,
        "n_hermite": None,
        "refine": True,
    },
    "hill": {
        "B": 3.0,
        "omega": 4.0,
        "potential": _TWO_COS,
        "m_max": 32,
        "theta_count": 17,
        "band_count": 8,
        "ceiling": None,
        "fd_check": False,
        "fd_points": 1024,
    },
    "classical": {
        "B": 3.0,
        "omega": 4.0,
        "potential": {"kind": "zero"},
        "x0": 0.0,
        "y0": 0.0,
        "px0": 1.0,
        "py0": 0.0,
        "t_end": 1.0,
        "dt": 1e-3,
    },
    "mourre": {
        "B": 3.0,
        "omega": 4.0,
        "potential": {"kind": "zero"},
        "E": 8.0,
        "delta": 1.0,
        "eps": 1.0,
        "scaling": None,
    },
    "commutator": {
        "B": 3.0,
        "omega": 4.0,
        "gen_nogo": False,
    },
    "diagnostics": {
        "B": 3.0,
        "omega": 4.0,
    },
}

COMMANDS = tuple(_SCHEMAS)


def _parse_set_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_set(config: dict, schema: dict, assignment: str) -> None:
    key, sep, raw = assignment.partition("=")
    if not sep:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    parts = key.split(".")
    if parts[0] not in schema:
        raise ConfigError(f"unknown config key {parts[0]!r}")
    value = _parse_set_value(raw)
    target = config
    for part in parts[:-1]:
        nxt = target.get(part)
        if nxt is None:
            nxt = {}
            target[part] = nxt
        if not isinstance(nxt, dict):
            raise ConfigError(f"cannot descend into non-object key {part!r}")
        target = nxt
    target[parts[-1]] = value


def _check_types(config: dict, schema: dict) -> None:
    for key, default in schema.items():
        value = config[key]
        if value is None or default is None:
            continue
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{key} must be a boolean")
        elif isinstance(default, (int, float)):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key} must be a number")
        elif isinstance(default, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{key} must be an object")
        elif isinstance(default, list):
            if not isinstance(value, list):
                raise ConfigError(f"{key} must be a list")


def resolve_config(command: str, config_path: str | None, sets: list[str]) -> dict:
    """Merge defaults, optional JSON file, then --set overrides; strict keys."""
    schema = _SCHEMAS[command]
    config = copy.deepcopy(schema)
    if config_path:
        try:
            with open(config_path) as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must contain a JSON object")
        unknown = sorted(set(file_cfg) - set(schema))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        config.update(copy.deepcopy(file_cfg))
    for assignment in sets:
        _apply_set(config, schema, assignment)
    _check_types(config, schema)
    return config


def _build_potential(spec_dict: dict) -> Potential:
    if not isinstance(spec_dict, dict) or "kind" not in spec_dict:
        raise ConfigError("potential must be an object with a 'kind' key")
    if spec_dict.get("kind") == "fourier_x" and "cosines" in spec_dict:
        return FourierXPotential.from_cosines(
            {int(k): float(v) for k, v in spec_dict["cosines"].items()}
        )
    try:
        return potential_from_dict(spec_dict)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad potential spec: {exc}") from exc


def _params(cfg: dict) -> ChannelParams:
    try:
        return derive_params(cfg["B"], cfg["omega"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


class _Artifacts:
    """Collects written files for the manifest, single-threaded and ordered."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.names: list[str] = []

    def csv(self, name: str, header, rows) -> Path:
        path = write_csv(self.out_dir / name, header, rows)
        self.names.append(name)
        return path

    def json(self, name: str, payload) -> Path:
        path = write_json(self.out_dir / name, payload)
        self.names.append(name)
        return path

    def svg(self, name: str, *args, **kwargs) -> Path:
        path = write_band_svg(self.out_dir / name, *args, **kwargs)
        self.names.append(name)
        return path


def _band_rows(bs):
    for i, theta in enumerate(bs.theta_grid):
        yield [theta] + [bs.bands[i, j] for j in range(bs.band_count)]


def _emit_bands(bs, art: _Artifacts, gaps=None):
    header = ["theta"] + [f"band_{j + 1}" for j in range(bs.band_count)]
    art.csv("bands.csv", header, _band_rows(bs))
    art.csv(
        "band_intervals.csv",
        ["band", "min", "max"],
        [[j + 1, lo, hi] for j, (lo, hi) in enumerate(bs.band_intervals)],
    )
    art.svg(
        "bands.svg",
        bs.theta_grid,
        bs.bands.T,
        ceiling=bs.energy_ceiling,
        gaps=gaps or (),
    )


def _cmd_bands(cfg: dict, art: _Artifacts, workers: int, with_gaps: bool) -> int:
    params = _params(cfg)
    spec = _build_potential(cfg["potential"])
    bs = compute_bands(
        params,
        spec,
        theta_count=int(cfg["theta_count"]),
        energy_ceiling=cfg["ceiling"],
        n_hermite=None if cfg["n_hermite"] is None else int(cfg["n_hermite"]),
        m_max=None if cfg["m_max"] is None else int(cfg["m_max"]),
        refine=bool(cfg["refine"]),
        xtol=float(cfg["xtol"]),
        cauchy_tol=float(cfg["cauchy_tol"]),
        workers=workers,
    )
    gap_pairs = ()
    if with_gaps:
        report = detect_gaps(bs, gap_tolerance=cfg["gap_tolerance"])
        gap_pairs = report.gaps
        art.csv(
            "gaps.csv",
            ["gap", "lower", "upper", "width"],
            [[j + 1, lo, hi, hi - lo] for j, (lo, hi) in enumerate(report.gaps)],
        )
    _emit_bands(bs, art, gaps=gap_pairs)
    art.json(
        "bands_summary.json",
        {
            "params": params,
            "band_count": bs.band_count,
            "spectrum_bottom": bs.spectrum_bottom,
            "energy_ceiling": bs.energy_ceiling,
            "n_hermite": bs.n_hermite,
            "m_max": bs.m_max,
            "converged": bs.converged,
            "notes": bs.notes,
        },
    )
    print(
        f"{bs.band_count} band(s) below ceiling {bs.energy_ceiling:.6g}; "
        f"spectrum bottom {bs.spectrum_bottom:.9g}"
    )
    if with_gaps:
        print(f"{len(gap_pairs)} gap(s) detected")
    if not bs.converged:
        print("warning: truncation probe did not converge", file=sys.stderr)
        return 2
    return 0


def _cmd_sweep(cfg: dict, art: _Artifacts, workers: int) -> int:
    spec = _build_potential(cfg["potential"])
    omegas = [float(w) for w in cfg["omega_list"]]
    if not omegas:
        raise ConfigError("omega_list must be non-empty")
    report = gap_persistence_sweep(
        float(cfg["B"]),
        omegas,
        spec,
        target_gap_count=int(cfg["target_gap_count"]),
        theta_count=int(cfg["theta_count"]),
        hill_m_max=int(cfg["hill_m_max"]),
        gap_tolerance=cfg["gap_tolerance"],
        n_hermite=None if cfg["n_hermite"] is None else int(cfg["n_hermite"]),
        refine=bool(cfg["refine"]),
        workers=workers,
    )
    rows = []
    full_rows = []
    for entry in report.entries:
        for j, disc in enumerate(entry.discrepancies):
            ref = entry.reference.gaps[j] if j < len(entry.reference.gaps) else (math.nan, math.nan)
            rows.append([entry.omega, entry.alpha, j + 1, ref[0], ref[1], disc])
        for j, (lo, hi) in enumerate(entry.full.gaps):
            full_rows.append([entry.omega, j + 1, lo, hi, hi - lo])
    art.csv(
        "sweep.csv",
        ["omega", "alpha", "gap", "reference_lower", "reference_upper", "discrepancy"],
        rows,
    )
    art.csv("full_gaps.csv", ["omega", "gap", "lower", "upper", "width"], full_rows)
    art.json("sweep_summary.json", report)
    trend = "decreasing" if report.discrepancies_decreasing else "not monotone"
    print(f"gap-edge discrepancy over omega list: {trend}")
    return 0


def _cmd_hill(cfg: dict, art: _Artifacts) -> int:
    params = _params(cfg)
    spec = _build_potential(cfg["potential"])
    if not spec.periodic_in_x:
        raise ConfigError("hill requires a potential that is periodic in x")
    m_max = int(cfg["m_max"])
    proj = project_potential(spec, params, nmax=0, mfourier=2 * m_max)
    coeffs = proj.diag_coeffs(0)
    hb = hill_bands(
        coeffs,
        m_max=m_max,
        theta_count=int(cfg["theta_count"]),
        band_count=int(cfg["band_count"]),
    )
    n_bands = hb.bands.shape[1]
    header = ["theta"] + [f"band_{j + 1}" for j in range(n_bands)]
    art.csv(
        "hill_curves.csv",
        header,
        (
            [theta] + [params.alpha + hb.bands[i, j] for j in range(n_bands)]
            for i, theta in enumerate(hb.theta_grid)
        ),
    )
    art.csv(
        "hill_intervals.csv",
        ["band", "min", "max"],
        [
            [j + 1, params.alpha + lo, params.alpha + hi]
            for j, (lo, hi) in enumerate(hb.band_intervals)
        ],
    )
    ceiling = 3.0 * params.alpha if cfg["ceiling"] is None else float(cfg["ceiling"])
    gaps = h00_gaps(params, spec, ceiling, m_max=m_max, theta_count=int(cfg["theta_count"]))
    art.csv(
        "hill_gaps.csv",
        ["gap", "lower", "upper", "width"],
        [[j + 1, lo, hi, hi - lo] for j, (lo, hi) in enumerate(gaps.gaps)],
    )
    print(f"{n_bands} band(s); {gaps.count} gap(s) below {ceiling:.6g}")
    if cfg["fd_check"]:
        coeff_map = {k - m_max * 2: coeffs[k] for k in range(coeffs.size)}

        def v_of_x(x):
            acc = np.zeros_like(np.asarray(x, dtype=float), dtype=complex)
            for k, c in coeff_map.items():
                acc = acc + c * np.exp(1j * k * np.asarray(x, dtype=float))
            return acc.real

        checks = []
        for theta in (0.0, 0.25, 0.5):
            fourier = hill_spectrum(coeffs, theta, m_max=m_max, count=5)
            fd = fd_hill_richardson(v_of_x, theta, count=5, n_points=int(cfg["fd_points"]))
            checks.append(
                {
                    "theta": theta,
                    "fourier": list(fourier),
                    "finite_difference": list(fd),
                    "max_abs_diff": float(np.max(np.abs(np.asarray(fourier) - np.asarray(fd)))),
                }
            )
        art.json("fd_check.json", {"checks": checks})
        worst = max(c["max_abs_diff"] for c in checks)
        print(f"finite-difference cross-check: max deviation {worst:.3e}")
    return 0


def _cmd_classical(cfg: dict, art: _Artifacts) -> int:
    params = _params(cfg)
    spec = _build_potential(cfg["potential"])
    initial = ClassicalState(
        t=0.0,
        x=float(cfg["x0"]),
        y=float(cfg["y0"]),
        px=float(cfg["px0"]),
        py=float(cfg["py0"]),
    )
    t_end, dt = float(cfg["t_end"]), float(cfg["dt"])
    traj = integrate(params, spec, initial, t_end, dt=dt)
    art.csv(
        "trajectory.csv",
        ["t", "x", "y", "px", "py", "energy"],
        zip(traj.times, traj.x, traj.y, traj.px, traj.py, traj.energies),
    )
    series = mourre_observable(traj)
    art.csv(
        "guiding.csv",
        ["t", "sx", "sy", "px_sx"],
        zip(traj.times, traj.guiding_center_x, traj.guiding_center_y, traj.px_sx),
    )
    summary = {
        "params": params,
        "aborted": traj.aborted,
        "energy_drift": traj.energy_drift,
        "px_sx_slope": series.slope,
        "expected_free_slope": 2.0 * params.beta * initial.px**2,
    }
    if isinstance(spec, ZeroPotential):
        exact = closed_form_trajectory(params, initial, t_end, dt)
        n = min(traj.times.size, exact.times.size)
        summary["closed_form_max_position_error"] = float(
            max(
                np.max(np.abs(traj.x[:n] - exact.x[:n])),
                np.max(np.abs(traj.y[:n] - exact.y[:n])),
            )
        )
    art.json("classical_summary.json", summary)
    print(
        f"integrated to t={traj.times[-1]:.6g}; energy drift {traj.energy_drift:.3e}; "
        f"px*sx slope {series.slope:.9g}"
    )
    if traj.aborted:
        print("trajectory aborted: state left the trusted range", file=sys.stderr)
        return 2
    return 0


def _cmd_mourre(cfg: dict, art: _Artifacts) -> int:
    params = _params(cfg)
    spec = _build_potential(cfg["potential"])
    report = evaluate_certificate(
        params, spec, float(cfg["E"]), float(cfg["delta"]), float(cfg["eps"])
    )
    art.json("certificate.json", report)
    art.csv(
        "excluded.csv",
        ["lower", "upper"],
        [[lo, hi] for lo, hi in report.excluded],
    )
    art.csv(
        "certified.csv",
        ["lower", "upper"],
        [[lo, hi] for lo, hi in report.certified_set],
    )
    print(f"certificate: {report.verdict}")
    for reason in report.reasons:
        print(f"  {reason}")
    scaling = cfg["scaling"]
    if scaling is not None:
        if not isinstance(scaling, dict):
            raise ConfigError("scaling must be an object")
        allowed = {"E0", "delta0", "eps0", "omega_list"}
        unknown = sorted(set(scaling) - allowed)
        if unknown:
            raise ConfigError(f"unknown scaling keys: {', '.join(unknown)}")
        missing = sorted(allowed - set(scaling))
        if missing:
            raise ConfigError(f"scaling block needs keys: {', '.join(missing)}")
        sweep = scaling_sweep(
            float(cfg["B"]),
            float(scaling["E0"]),
            float(scaling["delta0"]),
            float(scaling["eps0"]),
            spec,
            [float(w) for w in scaling["omega_list"]],
        )
        art.csv(
            "scaling.csv",
            [
                "omega",
                "alpha",
                "E",
                "delta",
                "eps",
                "condition_one_threshold",
                "condition_two_headroom",
                "admissible",
            ],
            [
                [
                    r.omega,
                    r.alpha,
                    r.E,
                    r.delta,
                    r.eps,
                    r.condition_one_threshold,
                    r.condition_two_headroom,
                    r.admissible,
                ]
                for r in sweep.rows
            ],
        )
        art.json("scaling_summary.json", sweep)
        if sweep.smallest_admissible_omega is None:
            print("scaling sweep: no admissible omega in the list")
        else:
            print(f"scaling sweep: admissible from omega={sweep.smallest_admissible_omega:g}")
    return 0


def _observable_rows(label: str, obs: QuadraticObservable):
    for key, value in obs.terms().items():
        yield [label, " ".join(key) if isinstance(key, tuple) else key, value]


def _cmd_commutator(cfg: dict, art: _Artifacts) -> int:
    params = _params(cfg)
    h0 = h0_observable(params)
    a = conjugate_observable(params)
    comm = commutator_iA(h0, a)
    rows = list(_observable_rows("H0", h0))
    rows += list(_observable_rows("A", a))
    rows += list(_observable_rows("[H0,iA]", comm))
    art.csv("commutator.csv", ["observable", "term", "coefficient"], rows)
    expected = QuadraticObservable.from_terms({("p1", "p1"): 2.0 * params.beta})
    clean = (comm - expected).max_abs() < 1e-12
    lines = [
        f"[H0, iA] = {2.0 * params.beta!r} * p1^2"
        + ("" if clean else "  (unexpected extra terms!)")
    ]
    if cfg["gen_nogo"]:
        report = gen_nogo_scan(params.B, params.alpha)
        art.json("nogo.json", report)
        lines.append(f"uniform-commutator scan verdict: {report.verdict}")
    (art.out_dir / "verdict.txt").write_text("\n".join(lines) + "\n")
    art.names.append("verdict.txt")
    for line in lines:
        print(line)
    return 0


def _cmd_diagnostics(cfg: dict, art: _Artifacts) -> int:
    params = _params(cfg)
    checks: dict[str, dict] = {}

    d = derive_params(3.0, 4.0)
    checks["derived_constants"] = {
        "passed": bool(
            abs(d.alpha - 5.0) < 1e-12 and abs(d.beta - 0.64) < 1e-12 and abs(d.mu - 0.12) < 1e-12
        ),
        "alpha": d.alpha,
        "beta": d.beta,
        "mu": d.mu,
    }

    proj = project_potential(ZeroPotential(), params, nmax=15, mfourier=16)
    theta = 0.3
    mat = assemble_fiber(params, proj, theta, n_hermite=16, m_max=4)
    computed = eigenvalues_fiber(mat)
    # only low-lying levels converge under Hermite truncation; match targets
    err = 0.0
    for n in range(4):
        for m in range(-3, 4):
            target = params.alpha * (2 * n + 1) + params.beta * (m + theta) ** 2
            err = max(err, float(np.min(np.abs(computed - target))))
    checks["free_fiber_spectrum"] = {"passed": err < 1e-8, "max_abs_error": err}

    res = []
    for b, w in ((3.0, 4.0), (0.0, 1.0)):
        p = derive_params(b, w)
        for theta2 in (1.0, 10.0, 100.0):
            res.append(complex_theta_resolvent_bound(p, theta2).passed)
    checks["complex_theta_resolvent_bound"] = {"passed": all(res)}

    two_cos = FourierXPotential.from_cosines({1: 2.0})
    hproj = project_potential(two_cos, params, nmax=0, mfourier=64)
    fourier = hill_spectrum(hproj.diag_coeffs(0), 0.25, m_max=32, count=5)
    fd = fd_hill_richardson(lambda x: 2.0 * np.cos(x), 0.25, count=5, n_points=1024)
    hill_err = float(np.max(np.abs(np.asarray(fourier) - np.asarray(fd))))
    checks["hill_oracle"] = {"passed": hill_err < 1e-5, "max_abs_error": hill_err}

    ax = appendix_norm_checks(params, n_hermite=40, m_range=8, theta_count=5)
    checks["resolvent_norm_bounds"] = {
        "passed": ax.all_passed,
        "estimates": ax.estimates,
        "bounds": ax.bounds,
    }

    initial = ClassicalState(t=0.0, x=0.0, y=0.0, px=1.0, py=0.0)
    rk4 = integrate(params, ZeroPotential(), initial, 0.5, dt=1e-3)
    exact_traj = closed_form_trajectory(params, initial, 0.5, 1e-3)
    pos_err = float(
        max(
            np.max(np.abs(rk4.x - exact_traj.x)),
            np.max(np.abs(rk4.y - exact_traj.y)),
        )
    )
    checks["classical_integrator"] = {"passed": pos_err < 1e-8, "max_position_error": pos_err}

    comm = commutator_iA(h0_observable(params), conjugate_observable(params))
    dev = (comm - QuadraticObservable.from_terms({("p1", "p1"): 2.0 * params.beta})).max_abs()
    checks["commutator_identity"] = {"passed": dev < 1e-12, "max_abs_deviation": dev}

    all_ok = all(c["passed"] for c in checks.values())
    art.json("diagnostics.json", {"all_passed": all_ok, "checks": checks})
    for name, result in checks.items():
        print(f"{'PASS' if result['passed'] else 'FAIL'}  {name}")
    return 0 if all_ok else 2


def _run(command: str, cfg: dict, out_dir: Path, workers: int) -> int:
    art = _Artifacts(out_dir)
    if command == "bands":
        code = _cmd_bands(cfg, art, workers, with_gaps=False)
    elif command == "gaps":
        code = _cmd_bands(cfg, art, workers, with_gaps=True)
    elif command == "sweep-omega":
        code = _cmd_sweep(cfg, art, workers)
    elif command == "hill":
        code = _cmd_hill(cfg, art)
    elif command == "classical":
        code = _cmd_classical(cfg, art)
    elif command == "mourre":
        code = _cmd_mourre(cfg, art)
    elif command == "commutator":
        code = _cmd_commutator(cfg, art)
    else:
        code = _cmd_diagnostics(cfg, art)
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "package_version": __version__,
        "command": command,
        "config": cfg,
        "workers": workers,
        "artifacts": art.names,
        "exit_status": code,
    }
    write_json(out_dir / "manifest.json", manifest)
    print(f"wrote {len(art.names) + 1} file(s) to {out_dir}")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="channel-spectra",
        description="Band structure, spectral gaps and transport certificates "
        "for a magnetic channel with parabolic confinement.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        p = sub.add_parser(command, help=f"run the {command} pipeline")
        p.add_argument("--config", help="JSON config file", default=None)
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (dots descend into nested objects)",
        )
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--workers", type=int, default=1, help="parallel workers for sweeps")
        if command == "commutator":
            p.add_argument(
                "--gen-nogo",
                action="store_true",
                help="scan all quadratic conjugates for a uniformly positive commutator",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, args.config, args.set)
        if getattr(args, "gen_nogo", False):
            cfg["gen_nogo"] = True
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return _run(args.command, cfg, out_dir, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (EigensolverError, ArpackNoConvergence, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
