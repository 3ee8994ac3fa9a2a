"""Scenario orchestration: config parsing, named experiments, persistence.

Config grammar: INI sections with flat keys, parsed strictly (unknown
sections or keys are fatal).  Example:

    [scenario]
    name = single_drain          ; single_drain | two_drain | critical_scan
                                 ; | scattering_scan | gamma_sweep
    [physics]
    gamma = 0.1                  ; gamma_list = ... for gamma_sweep
    drains = 0.0                 ; comma-separated drain positions (xi)
    n0_xi = 10
    [numerics]
    n_sites = 1024
    dx = 0.5
    dt = 0.01
    t_max = 200
    snapshots = 0,100,200        ; default "0,t_max"
    scheme = split_step_spectral
    boundary = periodic
    omega_min = 1e-3             ; scattering_scan only
    omega_max = 10
    n_omega = 40
    [ensemble]
    n_traj = 1000
    seed = 1
    noise = true
    batch_size = 256
    workers = 1
    [outputs]
    directory = runs/out
    formats = binary,csv
    correlations = false

Every run directory receives the resolved config, a manifest.json with the
config hash, seeds, versions, wall time and per-file hashes, and the
scenario datasets in the formats of persist.py.  Rerunning a manifest's
config with the same seed reproduces the binary outputs bit for bit.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, analytics
from .gpe_engine import DrainSpec, EngineConfig, EnsembleSpec, Scheme, run_ensemble
from .lattice import Boundary, make_grid
from .observables import (DensityReducer, G2Reducer, PairedFluctuationReducer,
                          PhaseReducer, count_solitons, density_profile,
                          fit_wedge_profile, flow_velocity, fluctuation_wedge,
                          g2_map)
from .persist import write_dataset, write_matrix_csv, write_table_csv
from .scattering import (INPUT_CHANNELS, OUTPUT_CHANNELS, build_smatrix_subcritical,
                         build_smatrix_supercritical, localized_intensity,
                         localized_norm, phonon_flux)

SCENARIOS = ("single_drain", "two_drain", "critical_scan", "scattering_scan",
             "gamma_sweep")

_SCHEMA = {
    "scenario": {"name"},
    "physics": {"gamma", "gamma_list", "drains", "n0_xi", "n_asym"},
    "numerics": {"n_sites", "dx", "dt", "t_max", "snapshots", "scheme", "boundary",
                 "omega_min", "omega_max", "n_omega"},
    "ensemble": {"n_traj", "seed", "noise", "batch_size", "workers"},
    "outputs": {"directory", "formats", "correlations"},
}

_DEFAULTS = {
    "physics": {"gamma": "0.1", "gamma_list": "", "drains": "0.0", "n0_xi": "10",
                "n_asym": ""},
    "numerics": {"n_sites": "1024", "dx": "0.5", "dt": "0.01", "t_max": "200",
                 "snapshots": "", "scheme": "split_step_spectral",
                 "boundary": "periodic", "omega_min": "1e-3", "omega_max": "10",
                 "n_omega": "40"},
    "ensemble": {"n_traj": "1", "seed": "1", "noise": "true", "batch_size": "256",
                 "workers": "1"},
    "outputs": {"directory": "runs/out", "formats": "binary,csv",
                "correlations": "false"},
}


@dataclass
class ScenarioConfig:
    scenario: str
    gamma: float
    gamma_list: tuple
    drains: tuple
    n0_xi: float
    n_asym: float | None
    n_sites: int
    dx: float
    dt: float
    t_max: float
    snapshots: tuple
    scheme: str
    boundary: str
    omega_min: float
    omega_max: float
    n_omega: int
    n_traj: int
    seed: int
    noise: bool
    batch_size: int
    workers: int
    directory: str
    formats: tuple
    correlations: bool

    def resolved_text(self) -> str:
        cp = configparser.ConfigParser()
        cp["scenario"] = {"name": self.scenario}
        cp["physics"] = {
            "gamma": repr(self.gamma),
            "gamma_list": ",".join(repr(g) for g in self.gamma_list),
            "drains": ",".join(repr(d) for d in self.drains),
            "n0_xi": repr(self.n0_xi),
            "n_asym": "" if self.n_asym is None else repr(self.n_asym),
        }
        cp["numerics"] = {
            "n_sites": str(self.n_sites), "dx": repr(self.dx), "dt": repr(self.dt),
            "t_max": repr(self.t_max),
            "snapshots": ",".join(repr(t) for t in self.snapshots),
            "scheme": self.scheme, "boundary": self.boundary,
            "omega_min": repr(self.omega_min), "omega_max": repr(self.omega_max),
            "n_omega": str(self.n_omega),
        }
        cp["ensemble"] = {
            "n_traj": str(self.n_traj), "seed": str(self.seed),
            "noise": str(self.noise).lower(), "batch_size": str(self.batch_size),
            "workers": str(self.workers),
        }
        cp["outputs"] = {
            "directory": self.directory, "formats": ",".join(self.formats),
            "correlations": str(self.correlations).lower(),
        }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.resolved_text().encode()).hexdigest()


def parse_config(text: str) -> ScenarioConfig:
    """Parse and resolve a config, applying defaults and validating bounds."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ValueError(f"malformed config: {e}") from None

    for section in cp.sections():
        if section not in _SCHEMA:
            raise ValueError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                raise ValueError(f"unknown key '{key}' in section [{section}]")
    if "scenario" not in cp or "name" not in cp["scenario"]:
        raise ValueError("config must set [scenario] name")
    name = cp["scenario"]["name"].strip()
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario '{name}'; choose from {SCENARIOS}")

    def get(section, key):
        if section in cp and key in cp[section]:
            return cp[section][key].strip()
        return _DEFAULTS[section][key]

    def floats(text_):
        return tuple(float(s) for s in text_.split(",") if s.strip())

    t_max = float(get("numerics", "t_max"))
    snaps = floats(get("numerics", "snapshots")) or (0.0, t_max)

    cfg = ScenarioConfig(
        scenario=name,
        gamma=float(get("physics", "gamma")),
        gamma_list=floats(get("physics", "gamma_list")),
        drains=floats(get("physics", "drains")),
        n0_xi=float(get("physics", "n0_xi")),
        n_asym=(float(get("physics", "n_asym")) if get("physics", "n_asym") else None),
        n_sites=int(get("numerics", "n_sites")),
        dx=float(get("numerics", "dx")),
        dt=float(get("numerics", "dt")),
        t_max=t_max,
        snapshots=snaps,
        scheme=get("numerics", "scheme"),
        boundary=get("numerics", "boundary"),
        omega_min=float(get("numerics", "omega_min")),
        omega_max=float(get("numerics", "omega_max")),
        n_omega=int(get("numerics", "n_omega")),
        n_traj=int(get("ensemble", "n_traj")),
        seed=int(get("ensemble", "seed")),
        noise=get("ensemble", "noise").lower() in ("true", "1", "yes"),
        batch_size=int(get("ensemble", "batch_size")),
        workers=int(get("ensemble", "workers")),
        directory=get("outputs", "directory"),
        formats=tuple(s.strip() for s in get("outputs", "formats").split(",") if s.strip()),
        correlations=get("outputs", "correlations").lower() in ("true", "1", "yes"),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: ScenarioConfig):
    grid = make_grid(cfg.n_sites, cfg.dx, Boundary(cfg.boundary))
    bound = 0.1 * min(cfg.dx**2, 1.0)
    if cfg.dt > bound * (1 + 1e-12):
        raise ValueError(
            f"dt = {cfg.dt} violates the stability bound dt <= 0.1*min(dx^2, 1) = {bound}"
        )
    if cfg.scenario not in ("scattering_scan",):
        if grid.length / 2 <= cfg.t_max and cfg.boundary == "periodic":
            raise ValueError(
                f"domain half-length {grid.length / 2} must exceed c0*t_max = {cfg.t_max} "
                "(causal cone must not reach the boundary)"
            )
        for d in cfg.drains:
            grid.index_of(d)
    for t in cfg.snapshots:
        if abs(t / cfg.dt - round(t / cfg.dt)) > 1e-6:
            raise ValueError(f"snapshot time {t} is not a multiple of dt = {cfg.dt}")
    if cfg.scenario == "gamma_sweep" and not cfg.gamma_list:
        raise ValueError("gamma_sweep requires physics.gamma_list")
    if cfg.gamma < 0:
        raise ValueError("gamma must be >= 0")
    if cfg.n0_xi <= 0:
        raise ValueError("n0_xi must be positive")
    unknown = set(cfg.formats) - {"binary", "csv"}
    if unknown:
        raise ValueError(f"unknown output formats {sorted(unknown)}")


# --------------------------------------------------------------------------
# measurement helpers shared by scenarios


def fit_plateau_velocity(phase: np.ndarray, grid, window=(8.0, 60.0)) -> float:
    """|dS/dx| fitted linearly on both sides of the drain, averaged."""
    x = grid.positions
    slopes = []
    for sgn in (+1, -1):
        sel = (sgn * x >= window[0]) & (sgn * x <= window[1])
        a = np.polyfit(x[sel], phase[sel], 1)[0]
        slopes.append(abs(a))
    return float(np.mean(slopes))


def _mean_density_window(dens: np.ndarray, grid, window=(8.0, 60.0)) -> float:
    x = np.abs(grid.positions)
    sel = (x >= window[0]) & (x <= window[1])
    return float(dens[sel].mean())


# --------------------------------------------------------------------------
# scenario implementations


def _units_tag():
    return "xi,c0,mu0"


def _ensemble_run(cfg: ScenarioConfig, grid, gamma, *, noise, n_traj, deterministic,
                  reducers, keep_partials=False, paired_control=False):
    eng = EngineConfig(
        dt=cfg.dt,
        drains=tuple(DrainSpec(p, gamma) for p in cfg.drains),
        noise_enabled=noise,
        interaction_g=1.0 / cfg.n0_xi,
        scheme=Scheme(cfg.scheme),
    )
    spec = EnsembleSpec(grid=grid, cfg=eng, n0=cfg.n0_xi, schedule=tuple(cfg.snapshots),
                        base_seed=cfg.seed, deterministic_init=deterministic,
                        paired_control=paired_control)
    return run_ensemble(spec, n_traj, reducers, batch_size=cfg.batch_size,
                        workers=cfg.workers, keep_partials=keep_partials)


def _run_drain_scenario(cfg: ScenarioConfig, out: Path, summary: dict) -> dict:
    grid = make_grid(cfg.n_sites, cfg.dx, Boundary(cfg.boundary))
    x = grid.positions
    ch = bytes.fromhex(cfg.config_hash)

    want_wedge = cfg.noise and cfg.scenario == "single_drain"
    reducers = [DensityReducer(), PhaseReducer(min_density=1e-3 * cfg.n0_xi)]
    if want_wedge:
        reducers.append(PairedFluctuationReducer(grid))
    if cfg.correlations:
        reducers.append(G2Reducer(smooth_sigma=1.0, dx=cfg.dx))

    # deterministic mean-field companion (figure overlays)
    mf = _ensemble_run(cfg, grid, cfg.gamma, noise=False, n_traj=1, deterministic=True,
                       reducers=[DensityReducer(), PhaseReducer()])
    mf_d = mf.results["density"]
    mf_p = mf.results["phase"]

    stats = _ensemble_run(cfg, grid, cfg.gamma, noise=cfg.noise, n_traj=cfg.n_traj,
                          deterministic=False, reducers=reducers,
                          paired_control=want_wedge)
    dens_stats = stats.results["density"]
    phase_stats = stats.results["phase"]
    if cfg.n_traj >= 2:
        dens, dens_err = density_profile(dens_stats, grid)
    else:
        dens, dens_err = dens_stats.mean - 0.5 / grid.dx, np.zeros_like(dens_stats.mean)

    files = {}
    datasets = {
        "profile_series": dict(
            times=dens_stats.times, x=x, density=dens, density_err=dens_err,
            phase=phase_stats.mean, phase_err=phase_stats.err,
            velocity=flow_velocity(phase_stats.mean, grid),
            unreliable=phase_stats.unreliable.astype(float),
        ),
        "meanfield_series": dict(
            times=mf_d.times, x=x, density=mf_d.mean,
            phase=mf_p.mean, velocity=flow_velocity(mf_p.mean, grid),
        ),
    }

    # measured stationary-state parameters and the analytic overlay
    v_hat = fit_plateau_velocity(phase_stats.mean[-1], grid)
    n_plateau = _mean_density_window(dens[-1], grid) / cfg.n0_xi
    e_hat = float(np.polyfit(np.abs(x[np.abs(x) < 60]),
                             phase_stats.mean[-1][np.abs(x) < 60], 1)[1])
    summary.update(v_plateau=v_hat, n_plateau=n_plateau)
    t_fin = dens_stats.times[-1]
    overlay = dict(
        x=x,
        phase_fit=e_hat - v_hat * np.abs(x),
        density_plateau=np.full_like(x, n_plateau * cfg.n0_xi),
    )
    if want_wedge:
        wedge = fluctuation_wedge(stats.results["paired_fluct"])
        v_loc = v_hat / np.sqrt(max(n_plateau, 1e-12))
        datasets["fluctuation_wedge"] = dict(times=wedge.times, x=x,
                                             n_out=wedge.n_out, n_out_err=wedge.n_out_err)
        overlay["wedge_prediction"] = analytics.fluctuation_wedge_prediction(
            min(v_loc, 0.999), x, t_fin)
        slope, kink = fit_wedge_profile(x, wedge.n_out[-1])
        summary.update(wedge_slope=slope, wedge_kink=kink)
    datasets["analytic_overlay"] = overlay

    if cfg.correlations:
        g2 = g2_map(stats.results["g2"], t_index=-1, baseline_index=0,
                    remove_global=True)
        datasets["g2_map"] = dict(x=x, g2=g2.g2,
                                  normalization=np.array([g2.normalization]),
                                  n_traj=np.array([float(g2.n_traj)]))

    if cfg.scenario == "two_drain":
        final = datasets["meanfield_series"]["density"][-1]
        inner = (min(cfg.drains) + 3.0, max(cfg.drains) - 3.0)
        n_sol, sol_x = count_solitons(x, final, inner, exclude=cfg.drains)
        summary.update(n_solitons=n_sol, soliton_positions=sol_x)

    for name, arrays in datasets.items():
        files.update(_persist_dataset(out, name, arrays, cfg, ch))
    return files


def _persist_dataset(out: Path, name: str, arrays: dict, cfg: ScenarioConfig,
                     ch: bytes) -> dict:
    files = {}
    if "binary" in cfg.formats:
        p = write_dataset(out / f"{name}.bin", arrays, units=_units_tag(), config_hash=ch)
        files[str(p)] = _sha(p)
    if "csv" in cfg.formats:
        files.update(_csv_export(out, name, arrays, cfg))
    return files


def _csv_export(out: Path, name: str, arrays: dict, cfg: ScenarioConfig) -> dict:
    """Long-format CSV: 2-D (T, n) arrays are repeated per snapshot time."""
    files = {}
    hash_hex = cfg.config_hash
    if "g2" in arrays:
        p = write_matrix_csv(out / f"{name}.csv", arrays["g2"], arrays["x"], hash_hex)
        files[str(p)] = _sha(p)
        return files
    x = arrays.get("x")
    times = arrays.get("times")
    cols = {}
    series = {k: v for k, v in arrays.items() if k not in ("x", "times")}
    if times is not None and x is not None:
        t_rep = np.repeat(np.asarray(times, dtype=float), len(x))
        cols["time"] = t_rep
        cols["x"] = np.tile(x, len(times))
        for k, v in series.items():
            v = np.asarray(v)
            if v.ndim == 2:
                cols[k] = v.reshape(-1)
            elif v.ndim == 1 and len(v) == len(x):
                cols[k] = np.tile(v, len(times))
            else:
                cols[k] = np.repeat(v.astype(float), len(t_rep) // max(v.size, 1))
    elif x is not None:
        cols["x"] = x
        for k, v in series.items():
            v = np.asarray(v)
            cols[k] = v if v.ndim == 1 and len(v) == len(x) else np.full(len(x), float(v.ravel()[0]))
    else:
        cols = {k: np.asarray(v, dtype=float).ravel() for k, v in arrays.items()}
    p = write_table_csv(out / f"{name}.csv", cols, hash_hex)
    files[str(p)] = _sha(p)
    return files


def _run_critical_scan(cfg: ScenarioConfig, out: Path, summary: dict) -> dict:
    grid = make_grid(cfg.n_sites, cfg.dx, Boundary(cfg.boundary))
    x = grid.positions
    gamma_c = analytics.critical_gamma(1.0)
    ch = bytes.fromhex(cfg.config_hash)

    mf = _ensemble_run(cfg, grid, gamma_c, noise=False, n_traj=1, deterministic=True,
                       reducers=[DensityReducer(), PhaseReducer()])
    dens = mf.results["density"].mean
    phs = mf.results["phase"].mean

    files = {}
    rows = dict(times=mf.results["density"].times, x=x, density=dens, phase=phs)
    files.update(_persist_dataset(out, "profile_series", rows, cfg, ch))

    # collapse datasets: per snapshot, rescaled simulated curves + analytic law
    deviations = []
    for i, t in enumerate(cfg.snapshots):
        if t <= 0:
            continue
        nfun, sfun = analytics.critical_profile(t, n0=cfg.n0_xi, c0=1.0)
        xi = x / t
        s_sim = phs[i] - phs[i][0]
        s_ana = sfun(x) - sfun(np.array([x[0]]))[0]
        arrays = dict(
            x_over_ct=xi, density_scaled=dens[i] / cfg.n0_xi,
            density_analytic=nfun(x) / cfg.n0_xi,
            phase_scaled=s_sim / t, phase_analytic=s_ana / t,
        )
        files.update(_persist_dataset(out, f"collapse_t{int(t)}", arrays, cfg, ch))
        sel = np.abs(x) < 0.9 * t
        dev_n = (np.linalg.norm((dens[i] - nfun(x))[sel])
                 / np.linalg.norm(nfun(x)[sel]))
        dev_s = (np.linalg.norm((s_sim - s_ana)[sel]) / np.linalg.norm(s_ana[sel]))
        deviations.append((t, dev_n, dev_s))
    summary["collapse_deviations"] = [
        dict(t=t, density=dn, phase=ds) for t, dn, ds in deviations
    ]
    return files


def _run_gamma_sweep(cfg: ScenarioConfig, out: Path, summary: dict) -> dict:
    grid = make_grid(cfg.n_sites, cfg.dx, Boundary(cfg.boundary))
    ch = bytes.fromhex(cfg.config_hash)
    rows = {"gamma": [], "v_plateau": [], "n_drain": [], "n_plateau": [],
            "v_sub_branch": [], "v_super_branch": []}
    j0 = grid.index_of(0.0)
    for gam in cfg.gamma_list:
        mf = _ensemble_run(cfg, grid, gam, noise=False, n_traj=1, deterministic=True,
                           reducers=[DensityReducer(), PhaseReducer()])
        dens = mf.results["density"].mean[-1]
        phs = mf.results["phase"].mean[-1]
        v_hat = fit_plateau_velocity(phs, grid)
        n_pl = _mean_density_window(dens, grid) / cfg.n0_xi
        rows["gamma"].append(gam)
        rows["v_plateau"].append(v_hat)
        rows["n_drain"].append(dens[j0] / cfg.n0_xi)
        rows["n_plateau"].append(n_pl)
        rows["v_sub_branch"].append(gam)
        rows["v_super_branch"].append(n_pl / gam)
    arrays = {k: np.array(v) for k, v in rows.items()}
    summary["gamma_at_max_v"] = float(
        arrays["gamma"][np.argmax(arrays["v_plateau"])])
    return _persist_dataset(out, "gamma_sweep", arrays, cfg, ch)


def _run_scattering_scan(cfg: ScenarioConfig, out: Path, summary: dict) -> dict:
    ch = bytes.fromhex(cfg.config_hash)
    omegas = np.geomspace(cfg.omega_min, cfg.omega_max, cfg.n_omega)
    gamma = cfg.gamma
    n = cfg.n_asym if cfg.n_asym is not None else 1.0
    supercritical = gamma > np.sqrt(n)

    cols = {"omega": omegas}
    for oc in OUTPUT_CHANNELS:
        for ic in INPUT_CHANNELS:
            cols[f"re_{oc}_{ic}"] = np.zeros_like(omegas)
            cols[f"im_{oc}_{ic}"] = np.zeros_like(omegas)
    extra = {k: np.zeros_like(omegas) for k in
             ("p_out", "loc_intensity_in", "loc_intensity_eta", "loc_norm",
              "re_k_out", "re_k_in", "re_k_evan", "im_k_evan")}
    cols.update(extra)

    for i, om in enumerate(omegas):
        sm = (build_smatrix_supercritical(om, gamma, n) if supercritical
              else build_smatrix_subcritical(om, gamma, n))
        for a, oc in enumerate(OUTPUT_CHANNELS):
            for b, ic in enumerate(INPUT_CHANNELS):
                cols[f"re_{oc}_{ic}"][i] = sm.entries[a, b].real
                cols[f"im_{oc}_{ic}"][i] = sm.entries[a, b].imag
        cols["p_out"][i] = phonon_flux(sm)
        cols["loc_intensity_in"][i] = localized_intensity(sm, "A_in")
        cols["loc_intensity_eta"][i] = (localized_intensity(sm, "eta")
                                        + localized_intensity(sm, "eta_star"))
        cols["loc_norm"][i] = localized_norm(sm)
        modes = {m.klass: m for m in sm.background["modes"]}
        cols["re_k_out"][i] = modes["out"].k.real
        cols["re_k_in"][i] = modes["in"].k.real
        cols["re_k_evan"][i] = modes["evanescent"].k.real
        cols["im_k_evan"][i] = modes["evanescent"].k.imag

    summary["branch"] = "supercritical" if supercritical else "subcritical"
    return _persist_dataset(out, "smatrix_scan", cols, cfg, ch)


def run_scenario(cfg: ScenarioConfig) -> dict:
    """Execute a scenario; returns the manifest dict (also written to disk)."""
    t0 = time.time()
    out = Path(cfg.directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved.ini").write_text(cfg.resolved_text())

    summary: dict = {}
    manifest = {
        "scenario": cfg.scenario,
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "versions": {"drainbec": __version__, "numpy": np.__version__},
        "status": "running",
    }
    try:
        if cfg.scenario in ("single_drain", "two_drain"):
            files = _run_drain_scenario(cfg, out, summary)
        elif cfg.scenario == "critical_scan":
            files = _run_critical_scan(cfg, out, summary)
        elif cfg.scenario == "gamma_sweep":
            files = _run_gamma_sweep(cfg, out, summary)
        elif cfg.scenario == "scattering_scan":
            files = _run_scattering_scan(cfg, out, summary)
        else:  # pragma: no cover - guarded by parse_config
            raise ValueError(f"unknown scenario {cfg.scenario}")
        manifest.update(status="ok", files=files, summary=summary,
                        wall_time_s=time.time() - t0)
    except Exception as e:
        manifest.update(status="failed", error=f"{type(e).__name__}: {e}",
                        wall_time_s=time.time() - t0)
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
        raise
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest


def _sha(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# --------------------------------------------------------------------------
# command line interface


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="drainbec",
                                 description="localized-loss condensate scenarios")
    sub = ap.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario config")
    run_p.add_argument("config", type=Path)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--workers", type=int, default=None)
    run_p.add_argument("--out-dir", type=Path, default=None)

    val_p = sub.add_parser("validate", help="parse and validate a config")
    val_p.add_argument("config", type=Path)

    sub.add_parser("list-scenarios", help="print the scenario names")

    args = ap.parse_args(argv)
    if args.command == "list-scenarios":
        for s in SCENARIOS:
            print(s)
        return 0

    try:
        cfg = parse_config(args.config.read_text())
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"ok: scenario={cfg.scenario} hash={cfg.config_hash[:16]}")
        return 0

    if args.seed is not None:
        cfg.seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out_dir is not None:
        cfg.directory = str(args.out_dir)
    try:
        manifest = run_scenario(cfg)
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    print(json.dumps(manifest.get("summary", {}), indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
