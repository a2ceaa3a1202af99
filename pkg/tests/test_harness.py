import json
import math

import numpy as np
import pytest

from pdintensity import harness
from pdintensity.errors import DegenerateSweep, NonPositiveInput, PDError
from pdintensity.generators import SyntheticMeasureSpec
from pdintensity.harness import ConvergenceConfig, fit_rate, reproduce_figure, run_convergence


class TestFitRate:
    def test_exact_power_law(self):
        xs = [1.0, 4.0, 16.0]
        slope, _, r2 = fit_rate([(x, x**-0.5) for x in xs])
        assert slope == pytest.approx(-0.5, abs=1e-12)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_quadratic(self):
        slope, intercept, _ = fit_rate([(x, 2 * x**2) for x in (0.5, 1.0, 3.0, 7.0)])
        assert slope == pytest.approx(2.0, abs=1e-12)
        assert intercept == pytest.approx(math.log(2.0), abs=1e-12)

    def test_noisy(self):
        xs = np.array([10, 30, 100, 300, 1000, 3000], dtype=float)
        inside = 0
        for seed in range(200):
            eps = np.random.default_rng(seed).normal(0, 0.01, xs.size)
            slope, _, _ = fit_rate(list(zip(xs, xs**-0.5 * np.exp(eps))))
            inside += -0.6 <= slope <= -0.4
        assert inside >= 190

    @pytest.mark.parametrize("pts,err", [([(1, 1), (2, 2)], PDError), ([(1, 1), (2, 0), (3, 1)], NonPositiveInput),
                                         ([(-1, 1), (2, 2), (3, 1)], NonPositiveInput)])
    def test_invalid(self, pts, err):
        with pytest.raises(err):
            fit_rate(pts)


class TestConfig:
    @pytest.mark.parametrize("kw", [
        dict(n_values=[100, 400]),
        dict(n_values=[100, 100, 400]),
        dict(n_values=[400, 100, 1600]),
        dict(n_values=[1, 2, 3], h_values=[0.1, 0.2, 0.3]),
        dict(),
        dict(n_values=[1, 2, 3], replicates=4),
        dict(n_values=[1, 2, 3], target="surface"),
        dict(h_values=[0.1, 0.2, 0.3], target="betti_curve"),
    ])
    def test_rejected(self, kw):
        with pytest.raises(PDError):
            ConvergenceConfig(**kw)

    def test_json_roundtrip(self, tmp_path):
        cfg = {"target": "density", "n_values": [50, 100, 200], "h": 0.1, "replicates": 5,
               "generator": {"lam": 4, "density_id": "bump", "seed": 0, "L": 1.0},
               "grid": {"origin": [0.0, 0.0], "cell": 0.0625, "nx": 16, "ny": 16}}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        loaded = ConvergenceConfig.from_json(path)
        assert loaded.generator.lam == 4 and loaded.grid.nx == 16
        assert json.loads(json.dumps(loaded.to_dict()))["grid"]["cell"] == 0.0625


class TestRuns:
    def test_variance_slope(self):
        rep = run_convergence(ConvergenceConfig(target="density", n_values=[100, 400, 1600], h=0.08, replicates=10))
        assert -0.65 <= rep.slope <= -0.35

    def test_bias_slope(self):
        cfg = ConvergenceConfig(target="density", h_values=[0.05, 0.1, 0.2], replicates=5,
                                generator=SyntheticMeasureSpec(density_id="bump", L=20.0))
        rep = run_convergence(cfg)
        assert 1.5 <= rep.slope <= 2.5
        assert all(s == 0.0 for s in rep.std)

    def test_deterministic_report(self):
        cfg = dict(target="intensity", n_values=[20, 40, 80], h=0.1, replicates=5, seed=3, grid=32)
        a = run_convergence(ConvergenceConfig(**cfg)).to_json()
        b = run_convergence(ConvergenceConfig(**cfg)).to_json()
        assert a == b
        report = json.loads(a)
        assert len(report["errors"]) == 3 and all(len(e) == 5 for e in report["errors"])
        assert all(v >= 0 for e in report["errors"] for v in e)

    def test_betti_curve_target(self):
        rep = run_convergence(ConvergenceConfig(target="betti_curve", n_values=[50, 200, 800], replicates=5))
        assert rep.slope < 0 and all(m > 0 for m in rep.mean)

    def test_errors_decrease_across_sweep(self):
        ok = total = 0
        for batch in range(10):
            rep = run_convergence(ConvergenceConfig(target="density", n_values=[50, 200, 800], h=0.1,
                                                    replicates=5, seed=batch, grid=64))
            pairs = list(zip(rep.mean, rep.mean[1:]))
            ok += sum(b < a for a, b in pairs)
            total += len(pairs)
        assert ok >= 0.8 * total

    def test_degenerate_sweep(self, monkeypatch):
        monkeypatch.setattr(harness, "_field_error", lambda *a, **k: 0.0)
        with pytest.raises(DegenerateSweep):
            run_convergence(ConvergenceConfig(target="density", n_values=[5, 10, 20], replicates=5, grid=16))


class TestRepro:
    def test_manifest_bookkeeping(self, tmp_path):
        m = reproduce_figure("orbit_r40", 10, tmp_path, seed=1, n_points=150)
        assert m["n_diagrams"] == 10
        assert len(m["fields"]) == 2 and len(m["curves"]) == 2
        for name in m["files"].values():
            assert (tmp_path / name).exists()
        assert json.loads((tmp_path / "manifest.json").read_text())["setup"] == "orbit_r40"

    def test_circle_power_defaults(self, tmp_path):
        m = reproduce_figure("circle_power", 1, tmp_path)
        p = m["parameters"]
        assert (p["mu"], p["kappa"], p["noise_sd"], p["n_points"]) == (math.pi / 2, 1.0, 0.05, 1000)

    def test_byte_identical(self, tmp_path):
        for d in ("a", "b"):
            reproduce_figure("orbit_r25", 5, tmp_path / d, seed=7, n_points=120)
        for name in ("intensity.csv", "density.csv", "betti_raw.csv", "betti_normalized.csv", "diagrams.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_unknown_setup(self, tmp_path):
        with pytest.raises(PDError):
            reproduce_figure("mnist", 1, tmp_path)
