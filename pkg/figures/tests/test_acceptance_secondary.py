"""Secondary acceptance: render every figure kind from real simulator output.

The simulator is driven through its command line only (subprocess), and
the renders go through the public recipe interface.  The collapse figure
must carry the persisted analytic overlay, and SVG output must be
byte-stable (hash check).
"""

import hashlib
import json
import subprocess
import sys

import pytest

from becfigs import FIGURE_KINDS, FigureRecipe, render

pytestmark = pytest.mark.acceptance


def _run_cli(config_text, tmp_path, name):
    cfg = tmp_path / f"{name}.ini"
    cfg.write_text(config_text)
    proc = subprocess.run([sys.executable, "-m", "drainbec.cli_runner", "run", str(cfg)],
                          capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    return tmp_path / name


@pytest.fixture(scope="module")
def rundirs(tmp_path_factory):
    base = tmp_path_factory.mktemp("runs")
    dirs = {}
    dirs["weak"] = _run_cli(f"""
[scenario]
name = single_drain
[physics]
gamma = 0.1
[numerics]
n_sites = 256
dx = 0.5
dt = 0.02
t_max = 20
[ensemble]
n_traj = 12
seed = 3
batch_size = 6
[outputs]
directory = {base / 'weak'}
correlations = true
""", base, "weak")
    dirs["strong"] = _run_cli(f"""
[scenario]
name = single_drain
[physics]
gamma = 2.0
[numerics]
n_sites = 256
dx = 0.5
dt = 0.02
t_max = 20
[ensemble]
n_traj = 12
seed = 4
batch_size = 6
[outputs]
directory = {base / 'strong'}
""", base, "strong")
    dirs["two"] = _run_cli(f"""
[scenario]
name = two_drain
[physics]
gamma = 0.4
drains = -20,20
[numerics]
n_sites = 512
dx = 0.5
dt = 0.02
t_max = 30
snapshots = 0,15,30
[ensemble]
n_traj = 8
seed = 5
batch_size = 4
[outputs]
directory = {base / 'two'}
correlations = true
""", base, "two")
    dirs["crit"] = _run_cli(f"""
[scenario]
name = critical_scan
[numerics]
n_sites = 512
dx = 0.5
dt = 0.02
t_max = 40
snapshots = 0,20,40
[outputs]
directory = {base / 'crit'}
""", base, "crit")
    dirs["sweep"] = _run_cli(f"""
[scenario]
name = gamma_sweep
[physics]
gamma_list = 0.2,0.6
[numerics]
n_sites = 256
dx = 0.5
dt = 0.02
t_max = 30
[outputs]
directory = {base / 'sweep'}
""", base, "sweep")
    dirs["scan_sub"] = _run_cli(f"""
[scenario]
name = scattering_scan
[physics]
gamma = 0.6
[numerics]
omega_min = 1e-3
omega_max = 1
n_omega = 12
[outputs]
directory = {base / 'scan_sub'}
""", base, "scan_sub")
    dirs["scan_sup"] = _run_cli(f"""
[scenario]
name = scattering_scan
[physics]
gamma = 10
[numerics]
omega_min = 1e-3
omega_max = 1
n_omega = 10
[outputs]
directory = {base / 'scan_sup'}
""", base, "scan_sup")
    return dirs


def _recipes(dirs, outdir):
    w, s, two, crit, sweep = dirs["weak"], dirs["strong"], dirs["two"], dirs["crit"], dirs["sweep"]
    return {
        "density_current": {"datasets": {"profile": f"{s}/profile_series.bin"}},
        "phase_profiles": {"datasets": {"profile": f"{w}/profile_series.bin"},
                           "overlays": [f"{w}/analytic_overlay.bin"]},
        "drain_response": {"datasets": {"sweep": f"{sweep}/gamma_sweep.bin"}},
        "critical_collapse": {"datasets": {"t20": f"{crit}/collapse_t20.bin",
                                           "t40": f"{crit}/collapse_t40.bin"}},
        "dispersion_branches": {"datasets": {"scan": f"{dirs['scan_sub']}/smatrix_scan.bin"}},
        "smatrix_scan": {"datasets": {"scan": f"{dirs['scan_sub']}/smatrix_scan.bin"}},
        "smatrix_noise": {"datasets": {"scan": f"{dirs['scan_sub']}/smatrix_scan.bin"}},
        "smatrix_scan_strong": {"datasets": {"scan": f"{dirs['scan_sup']}/smatrix_scan.bin"}},
        "wedge_fluctuations": {"datasets": {"wedge": f"{w}/fluctuation_wedge.bin"},
                               "overlays": [f"{w}/analytic_overlay.bin"]},
        "g2_map": {"datasets": {"g2": f"{w}/g2_map.bin"}},
        "two_drain_evolution": {"datasets": {"profile": f"{two}/profile_series.bin"}},
        "g2_map_two_drain": {"datasets": {"g2": f"{two}/g2_map.bin"}},
    }


def test_all_twelve_kinds_render_from_real_runs(rundirs, tmp_path):
    specs = _recipes(rundirs, tmp_path)
    assert set(specs) == set(FIGURE_KINDS)
    for kind, spec in specs.items():
        recipe = FigureRecipe(kind=kind, datasets=spec["datasets"],
                              overlays=spec.get("overlays", []),
                              output=str(tmp_path / f"{kind}.svg"))
        out = render(recipe)
        assert out.exists() and out.stat().st_size > 1000, kind
    print("\nACCEPTANCE secondary figures: PASS (12/12 kinds rendered)")


def test_collapse_overlay_and_svg_hash(rundirs, tmp_path):
    crit = rundirs["crit"]
    recipe = FigureRecipe(
        kind="critical_collapse",
        datasets={"t20": f"{crit}/collapse_t20.bin", "t40": f"{crit}/collapse_t40.bin"},
        output=str(tmp_path / "collapse.svg"))
    out = render(recipe)
    svg = out.read_text()
    assert "analytic" in svg            # persisted analytic-curve overlay drawn
    h1 = hashlib.sha256(out.read_bytes()).hexdigest()
    render(recipe)
    h2 = hashlib.sha256(out.read_bytes()).hexdigest()
    assert h1 == h2                      # visual-regression hash stability
    print(f"\nACCEPTANCE secondary collapse overlay + hash: PASS ({h1[:16]})")


def test_cli_renders_recipe_files(rundirs, tmp_path):
    crit = rundirs["crit"]
    rp = tmp_path / "r.json"
    rp.write_text(json.dumps(dict(
        kind="critical_collapse",
        datasets={"t20": f"{crit}/collapse_t20.bin"},
        output=str(tmp_path / "cli_collapse.svg"))))
    proc = subprocess.run([sys.executable, "-m", "becfigs.cli", str(rp)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "cli_collapse.svg").exists()
