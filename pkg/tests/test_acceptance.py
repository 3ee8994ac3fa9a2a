"""Acceptance criteria, one test per criterion, tolerances pinned.

Each test prints one line `ACCEPTANCE <name>: PASS|FAIL <details>`.  The
ensemble runs are the expensive part (tens of minutes total on two cores);
results are cached per module so reruns within one session are free.

Units note: measured stationary backgrounds are depleted relative to n0,
and the low-frequency emission formulas live in units of the local
stationary background (gn = 1 there).  Where a criterion references those
formulas, local quantities are measured from the run itself: the local
sound speed is c_s = sqrt(n_plateau / n0).
"""

import numpy as np
import pytest

from drainbec import analytics as an
from drainbec import scattering as sc
from drainbec.gpe_engine import (DrainSpec, EngineConfig, EnsembleSpec, NoiseDraw,
                                 Stepper, run_ensemble, trajectory_rng)
from drainbec.lattice import ComplexField, make_grid
from drainbec.observables import (DensityReducer, G2Reducer, PairedFluctuationReducer,
                                  PhaseReducer, band_mean, count_solitons,
                                  fit_wedge_profile, fluctuation_wedge, g2_map,
                                  region_flow)
from drainbec.vacuum_sampler import sample_vacuum

pytestmark = pytest.mark.acceptance

N_TRAJ_FLOW = 1000
N_TRAJ_STAT = 10000
WORKERS = 2
_cache = {}


def report(name, ok, detail):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


def fit_velocity(phase, grid, window):
    x = grid.positions
    slopes = []
    for sgn in (+1, -1):
        sel = (sgn * x >= window[0]) & (sgn * x <= window[1])
        slopes.append(abs(np.polyfit(x[sel], phase[sel], 1)[0]))
    return float(np.mean(slopes))


def plateau_density(dens, grid, window):
    ax = np.abs(grid.positions)
    return float(dens[(ax >= window[0]) & (ax <= window[1])].mean())


def flow_run(gamma, seed, n0=10.0):
    key = ("flow", gamma, n0)
    if key not in _cache:
        grid = make_grid(4096, 0.5)
        cfg = EngineConfig(dt=0.02, drains=(DrainSpec(0.0, gamma),),
                           noise_enabled=True, interaction_g=1.0 / n0)
        spec = EnsembleSpec(grid=grid, cfg=cfg, n0=n0, schedule=(0.0, 200.0),
                            base_seed=seed)
        from drainbec.observables import FluctuationReducer
        stats = run_ensemble(spec, N_TRAJ_FLOW,
                             [DensityReducer(), PhaseReducer(), FluctuationReducer(grid)],
                             batch_size=250, workers=WORKERS)
        _cache[key] = (grid, stats, n0)
    return _cache[key]


def test_subcritical_flow_law():
    gamma = 0.1
    grid, stats, n0 = flow_run(gamma, seed=101)
    v_hat = fit_velocity(stats.results["phase"].mean[-1], grid, (8.0, 60.0))
    rel = abs(v_hat - gamma) / gamma
    report("subcritical flow law v = gamma",
           rel < 0.05, f"v = {v_hat:.4f} vs {gamma}, dev {rel * 100:.1f}%")


def test_supercritical_flow_law():
    """gamma = 3 at the same grid/time/trajectory scale.  Strong loss pumps
    an O(1/xi) phonon density (n0-independent), so the run is made dilute
    (n0 xi = 100, a free parameter) and the asymptotic background is
    measured as the phase-aligned condensate density |<psi>|^2, which
    excludes the emitted fluctuations."""
    gamma = 3.0
    grid, stats, n0 = flow_run(gamma, seed=102, n0=100.0)
    window = (8.0, 60.0)
    v_hat = fit_velocity(stats.results["phase"].mean[-1], grid, window)
    n_s = plateau_density(stats.results["fluct"].condensate[-1], grid, window) / n0
    v_pred = n_s / gamma                       # c_s^2 / gamma in c0 units
    rel = abs(v_hat - v_pred) / v_pred
    report("supercritical flow law v = c^2/gamma",
           rel < 0.05,
           f"v = {v_hat:.4f} vs c_s^2/gamma = {v_pred:.4f} (n_s = {n_s:.3f}), "
           f"dev {rel * 100:.1f}%")


def deterministic_profile(gamma, t_max, n_sites=4096, dx=0.5, dt=0.02,
                          snapshots=None, drains=(0.0,), n0=10.0):
    key = ("det", gamma, t_max, n_sites, dx, tuple(drains), tuple(snapshots or ()))
    if key not in _cache:
        grid = make_grid(n_sites, dx)
        cfg = EngineConfig(dt=dt, drains=tuple(DrainSpec(p, gamma) for p in drains),
                           noise_enabled=False, interaction_g=1.0 / n0)
        spec = EnsembleSpec(grid=grid, cfg=cfg, n0=n0,
                            schedule=tuple(snapshots or (0.0, t_max)),
                            base_seed=1, deterministic_init=True)
        stats = run_ensemble(spec, 1, [DensityReducer(), PhaseReducer()], batch_size=1)
        _cache[key] = (grid, stats, n0)
    return _cache[key]


def drain_region_speed(gamma, t_max=400.0, x_probe=4.0, n0=10.0):
    """|j/n| at |x| = x_probe of the deterministic field at t_max."""
    key = ("detspeed", gamma, t_max, x_probe)
    if key not in _cache:
        grid = make_grid(4096, 0.5)
        cfg = EngineConfig(dt=0.02, drains=(DrainSpec(0.0, gamma),),
                           noise_enabled=False, interaction_g=1.0 / n0)
        st = Stepper(grid, cfg)
        psi = np.full((1, grid.n_sites), np.sqrt(n0), dtype=complex)
        psi = st.evolve_segment(psi, int(round(t_max / cfg.dt)))[0]
        j = np.imag(np.conj(psi) * np.gradient(psi, grid.dx))
        n = np.abs(psi) ** 2
        jl, jr = grid.index_of(-x_probe), grid.index_of(x_probe)
        _cache[key] = 0.5 * (abs(j[jl] / n[jl]) + abs(j[jr] / n[jr]))
    return _cache[key]


def test_critical_point_cusp():
    """Steady drain-region flow speed |j/n| just outside the core (x = 4 xi,
    where the NESS forms first) at t = 400: rises ~gamma below, falls
    ~c^2/gamma above; the cusp must sit within one sweep step of 2/3."""
    gammas = np.round(np.arange(0.5, 0.851, 0.05), 3)
    vs = [drain_region_speed(float(g)) for g in gammas]
    g_star = gammas[int(np.argmax(vs))]
    ok = abs(g_star - 2.0 / 3.0) <= 0.05 + 1e-9
    report("critical point cusp at 2 c0/3", ok,
           f"argmax v(gamma) at {g_star:.2f}, v = {np.round(vs, 4).tolist()}")


def test_critical_collapse():
    n0 = 10.0
    gamma_c = an.critical_gamma(1.0)
    times = (100.0, 200.0, 300.0)
    grid, stats, _ = deterministic_profile(gamma_c, 300.0,
                                           snapshots=(0.0,) + times)
    x = grid.positions
    worst = 0.0
    details = []
    for i, t in enumerate(times, start=1):
        dens = stats.results["density"].mean[i]
        phase = stats.results["phase"].mean[i]
        nfun, sfun = an.critical_profile(t, n0=n0, c0=1.0)
        sel = np.abs(x) < 0.9 * t
        dev_n = np.linalg.norm((dens - nfun(x))[sel]) / np.linalg.norm(nfun(x)[sel])
        s_sim = phase - phase[0]
        s_ana = sfun(x) - sfun(np.array([x[0]]))[0]
        dev_s = np.linalg.norm((s_sim - s_ana)[sel]) / np.linalg.norm(s_ana[sel])
        worst = max(worst, dev_n, dev_s)
        details.append(f"t={t:g}: n {dev_n * 100:.2f}%, S {dev_s * 100:.2f}%")
    report("critical collapse onto analytic profiles", worst < 0.05,
           "; ".join(details))


def test_thermal_wedge():
    key = "wedge"
    if key not in _cache:
        n0 = 100.0
        grid = make_grid(768, 0.25)
        cfg = EngineConfig(dt=0.005, drains=(DrainSpec(0.0, 0.1),),
                           noise_enabled=True, interaction_g=1.0 / n0)
        spec = EnsembleSpec(grid=grid, cfg=cfg, n0=n0, schedule=(0.0, 60.0),
                            base_seed=7, paired_control=True)
        stats = run_ensemble(spec, N_TRAJ_STAT, [PairedFluctuationReducer(grid),
                                                 DensityReducer()],
                             batch_size=250, workers=WORKERS)
        _cache[key] = (grid, stats, n0)
    grid, stats, n0 = _cache[key]
    t_fin = 60.0
    v = 0.1
    w = fluctuation_wedge(stats.results["paired_fluct"])
    slope, kink = fit_wedge_profile(grid.positions, w.n_out[-1], inner_cut=4.0)
    slope_pred = 0.5 * v / (1 + v)
    rel = abs(slope - slope_pred) / slope_pred
    # the front rides the depleted stationary background: c_s from the run
    dens = stats.results["density"].mean[-1] - 0.5 / grid.dx
    n_s = plateau_density(dens, grid, (4.0, 40.0)) / n0
    c_s = np.sqrt(n_s)
    kink_target = (c_s - v) * t_fin
    dk = abs(kink - kink_target)
    ok = rel < 0.10 and dk <= 2.0
    report("thermal wedge slope and kink", ok,
           f"slope {slope:.5f} vs {slope_pred:.5f} ({rel * 100:.1f}%), "
           f"kink {kink:.1f} vs (c_s-v)t = {kink_target:.1f} (|d| = {dk:.2f} xi)")


def test_lowfrequency_smatrix():
    v = 0.6
    sm = sc.build_smatrix_subcritical(1e-3, v)
    r = sm.entry("A_out", "A_in").real
    t = sm.entry("B_out", "A_in").real
    ok_rt = abs(r + 0.75) / 0.75 < 0.01 and abs(t - 1.25) / 1.25 < 0.01
    oms = np.geomspace(1e-3, 1e-2, 7)
    wp = np.array([om * sc.phonon_flux(sc.build_smatrix_subcritical(om, v))
                   for om in oms])
    flat = np.abs(wp / (v / (1 + v)) - 1.0).max()
    ok = ok_rt and flat < 0.02
    report("low-frequency S-matrix r, t and equipartition", ok,
           f"r = {r:.4f}, t = {t:.4f}, max |omega p_out/(v/(1+v)) - 1| = {flat * 100:.2f}%")


def test_evanescent_decoupling_and_ir_enhancement():
    oms = np.geomspace(1e-3, 1e-2, 9)
    inten = [sc.localized_intensity(sc.build_smatrix_subcritical(om, 0.6), "A_in")
             for om in oms]
    slope_sub = np.polyfit(np.log(oms), np.log(inten), 1)[0]

    oms_s = np.geomspace(1e-4, 1e-2, 9)
    extra = []
    for om in oms_s:
        sm = sc.build_smatrix_supercritical(om, 10.0)
        vv = sm.background["v"]
        extra.append(abs(sm.entry("A_loc", "eta")) / np.sqrt(1 / (2 * (1 + vv) * om)))
    slope_sup = np.polyfit(np.log(oms_s), np.log(extra), 1)[0]
    ok = abs(slope_sub - 2.0) <= 0.1 and abs(slope_sup + 0.5) <= 0.1
    report("evanescent decoupling (omega^2) and 1/sqrt(omega) enhancement", ok,
           f"subcritical intensity slope {slope_sub:.3f} (want 2.0 +- 0.1); "
           f"supercritical extra-factor exponent {slope_sup:.3f} (want -0.5 +- 0.1)")


def g2_run(gamma, seed):
    key = ("g2", gamma)
    if key not in _cache:
        n0 = 10.0
        grid = make_grid(512, 0.5)
        cfg = EngineConfig(dt=0.02, drains=(DrainSpec(0.0, gamma),),
                           noise_enabled=True, interaction_g=1.0 / n0)
        spec = EnsembleSpec(grid=grid, cfg=cfg, n0=n0, schedule=(0.0, 100.0),
                            base_seed=seed)
        stats = run_ensemble(spec, N_TRAJ_STAT, [G2Reducer()], batch_size=250,
                             workers=WORKERS, keep_partials=True)
        _cache[key] = (grid, stats)
    return _cache[key]


def _g2_bands(grid, region):
    """Band masks: diagonal 1..3 xi (the exact-diagonal core and adjacent
    cells carry the reservoir shot structure), anti-diagonal <= 1.5 xi."""
    x = grid.positions
    X, Xp = np.meshgrid(x, x, indexing="ij")
    sel = (np.abs(X) > 6) & (np.abs(X) < region) & (np.abs(Xp) > 6) & (np.abs(Xp) < region)
    diag = sel & (np.abs(X - Xp) >= 1.0) & (np.abs(X - Xp) <= 3.0) & (np.abs(X + Xp) > 6)
    anti = sel & (np.abs(X + Xp) <= 1.5) & (np.abs(X - Xp) > 6)
    return diag, anti


def _band_stats(stats, mask):
    """Band mean and standard error (per-batch jackknife), with the
    per-shot total-number mode deflated from every map."""
    red = G2Reducer()
    full = band_mean(g2_map(red.merge(stats.partials["g2"]), remove_global=True).g2, mask)
    per_batch = [band_mean(g2_map(red.merge([p]), remove_global=True).g2, mask)
                 for p in stats.partials["g2"]]
    err = np.std(per_batch) / np.sqrt(len(per_batch))
    return full, err


def test_g2_pattern_subcritical():
    grid, stats = g2_run(0.1, seed=201)
    diag, anti = _g2_bands(grid, region=70.0)
    d, derr = _band_stats(stats, diag)
    a, aerr = _band_stats(stats, anti)
    ratio = a / abs(d) if d else np.inf
    ok = (d < 0 and abs(d) > 3 * derr and a > 3 * aerr
          and abs(ratio - 0.5) <= 0.3 * 0.5)
    report("g2 pattern at gamma = 0.1", ok,
           f"diag {d:.5f} +- {derr:.5f}, anti {a:.5f} +- {aerr:.5f}, "
           f"anti/|diag| = {ratio:.3f} (want 0.5 +- 30%)")


def test_g2_pattern_supercritical():
    """gamma = 2: anti-diagonal sign flip and localized-mode bands.

    The localized coupling is side-asymmetric (|S_loc,in| is ~1.8x larger
    on the incident side), so reflected<->localized is measured as the
    same-side core x far band and transmitted<->localized as the
    cross-side core x near band."""
    grid, stats = g2_run(2.0, seed=202)
    diag, anti = _g2_bands(grid, region=45.0)
    d, derr = _band_stats(stats, diag)
    a, aerr = _band_stats(stats, anti)
    x = grid.positions
    X, Xp = np.meshgrid(x, x, indexing="ij")
    lcore = (X > -3) & (X < -0.25)
    rcore = (X > 0.25) & (X < 3)
    far_l, far_r = (Xp < -8) & (Xp > -45), (Xp > 8) & (Xp < 45)
    near_l, near_r = (Xp < -4) & (Xp > -12), (Xp > 4) & (Xp < 12)
    refl, rerr = _band_stats(stats, (lcore & far_l) | (rcore & far_r))
    tran, terr = _band_stats(stats, (lcore & near_r) | (rcore & near_l))
    ok = (d < 0 and abs(d) > 3 * derr
          and a < 0 and abs(a) > 3 * aerr
          and refl < 0 and abs(refl) > 3 * rerr
          and tran > 0 and tran > 3 * terr)
    report("g2 pattern at gamma = 2 (anti-diagonal flip, localized bands)", ok,
           f"diag {d:.5f}+-{derr:.5f}, anti {a:.5f}+-{aerr:.5f}, "
           f"refl-loc {refl:.5f}+-{rerr:.5f}, trans-loc {tran:.5f}+-{terr:.5f}")


def test_two_drain_lasing():
    """Solitons counted on the t = 200 snapshot; inter-drain flow measured
    in the saturated regime (median |j/n| with soliton dips masked,
    averaged over t in [280, 300])."""
    n0 = 10.0
    grid = make_grid(2048, 0.5)
    cfg = EngineConfig(dt=0.02, drains=(DrainSpec(-30.0, 0.4), DrainSpec(30.0, 0.4)),
                       noise_enabled=False, interaction_g=1.0 / n0)
    st = Stepper(grid, cfg)
    psi = np.full((1, 2048), np.sqrt(n0), dtype=complex)
    psi = st.evolve_segment(psi, 10000)
    cnt_l, pos_l = count_solitons(grid.positions, np.abs(psi[0]) ** 2, (-27.0, 27.0),
                                  depth=0.3, exclude=(-30.0, 30.0))
    psi = st.evolve_segment(psi, 4000)       # to t = 280
    flows = []
    for _ in range(5):
        psi = st.evolve_segment(psi, 200)    # every 4 time units to t = 300
        flows.append(region_flow(psi[0], grid, (-27.0, 27.0), exclude=(-30.0, 30.0),
                                 mask_dips=0.75))
    flow = float(np.mean(flows))

    grid_c, stats_c, _ = deterministic_profile(0.1, 200.0, n_sites=2048,
                                               drains=(-30.0, 30.0))
    cnt_c, _ = count_solitons(grid_c.positions, stats_c.results["density"].mean[-1],
                              (-27.0, 27.0), depth=0.3, exclude=(-30.0, 30.0))
    ok = cnt_l >= 3 and flow < 0.02 and cnt_c == 0
    report("two-drain lasing (solitons + stalled inter-drain flow)", ok,
           f"gamma=0.4: {cnt_l} solitons at t=200 at {np.round(pos_l, 1).tolist()}, "
           f"saturated inter-drain flow {flow:.4f} c0; gamma=0.1 control: {cnt_c} solitons")


# --------------------------------------------------------------------------
# always-on property suite


def test_property_unitary_conservation():
    grid = make_grid(128, 0.5)
    rng = np.random.default_rng(8)
    s = sample_vacuum(grid, 10.0, cutoff_k=1.0, rng=rng)
    cfg = EngineConfig(dt=0.002, noise_enabled=False, interaction_g=0.1)
    st = Stepper(grid, cfg)
    from drainbec.gpe_engine import energy_functional
    psi = s.field.values.copy()
    n0 = float((np.abs(psi) ** 2).sum() * grid.dx)
    e0 = energy_functional(s.field, 0.1)
    psi = st.evolve_segment(psi, 50000)
    f = ComplexField(psi, grid)
    dn = abs(float(f.weyl_norm()) - n0) / n0
    de = abs(energy_functional(f, 0.1) - e0) / abs(e0)
    report("gamma = 0 norm/energy conservation 1e-8", dn < 1e-8 and de < 1e-8,
           f"dN/N = {dn:.2e}, dE/E = {de:.2e} over t = 100")


def test_property_vacuum_fixed_point():
    grid = make_grid(64, 0.5)
    cfg = EngineConfig(dt=0.02, drains=(DrainSpec(0.0, 0.5),),
                       noise_enabled=True, interaction_g=0.0)
    m, n_steps = 2000, 600
    psi = np.empty((m, grid.n_sites), dtype=complex)
    noise = np.empty((m, n_steps, 1), dtype=complex)
    for i in range(m):
        r = trajectory_rng(99, i)
        psi[i] = sample_vacuum(grid, 0.0, rng=r, g=0.0).field.values
        noise[i] = NoiseDraw.draw(r, n_steps, cfg.drains, cfg.dt, grid.dx).increments
    st = Stepper(grid, cfg)
    psi = st.evolve_segment(psi, n_steps, noise)
    dens = np.abs(psi) ** 2
    dev = (dens.mean(axis=0) - 1.0) / (dens.std(axis=0) / np.sqrt(m))
    drain_dev = abs(dev[grid.index_of(0.0)])
    report("vacuum fixed point under loss + noise (3 sigma)",
           drain_dev < 3.0 and np.abs(dev).max() < 4.0,
           f"drain-site deviation {drain_dev:.2f} sigma, max {np.abs(dev).max():.2f}")


def test_property_loss_continuity():
    grid = make_grid(256, 0.5)
    cfg = EngineConfig(dt=0.01, drains=(DrainSpec(0.0, 0.1),),
                       noise_enabled=False, interaction_g=0.1)
    st = Stepper(grid, cfg)
    psi = np.full(256, np.sqrt(10.0), dtype=complex)
    norms, dens0 = [], []
    j0 = grid.index_of(0.0)
    for s in range(600):
        norms.append(float((np.abs(psi) ** 2).sum() * grid.dx))
        dens0.append(abs(psi[j0]) ** 2)
        st.advance(psi)
    norms = np.array(norms)
    dndt = (norms[2:] - norms[:-2]) / (2 * cfg.dt)
    pred = -2 * 0.1 * np.array(dens0[1:-1])
    worst = float(np.abs(dndt / pred - 1.0).max())
    report("deterministic loss continuity 1%", worst < 0.01,
           f"max |dN/dt / (-2 gamma n(0)) - 1| = {worst:.2e}")


def test_property_bdg_current_conservation():
    sm = sc.build_smatrix_subcritical(0.12, 0.5)
    worst = 0.0
    for inputs in ([1, 0, 0, 0], [0, 1, 0, 0], [0.3, -0.7j, 1.0, 0.2]):
        for side in (+1, -1):
            xs = side * np.array([0.7, 3.3, 9.1, 17.0])
            js = [sc.solution_current(sm, inputs, float(x)) for x in xs]
            worst = max(worst, float(np.ptp(js)))
    report("BdG current piecewise constant 1e-6", worst < 1e-6,
           f"max in-side current spread {worst:.2e}")


def test_property_reducer_worker_independence():
    grid = make_grid(64, 0.5)
    cfg = EngineConfig(dt=0.02, drains=(DrainSpec(0.0, 0.2),),
                       noise_enabled=True, interaction_g=0.1)
    spec = EnsembleSpec(grid=grid, cfg=cfg, n0=10.0, schedule=(0.0, 2.0), base_seed=17)
    r1 = run_ensemble(spec, 96, [DensityReducer()], batch_size=32, workers=1)
    r2 = run_ensemble(spec, 96, [DensityReducer()], batch_size=32, workers=2)
    same = np.array_equal(r1.results["density"].mean, r2.results["density"].mean)
    report("reducer worker-count independence (bitwise)", same,
           "1-worker and 2-worker ensemble means identical")
