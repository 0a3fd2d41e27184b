import csv
import json

import numpy as np
import pytest

from fsvd.cli import dumps, main
from fsvd.core import AtomicMeasure, MomentSequence, atom_matrix, atom_vector, complex_from_pairs, complex_to_pairs, moments_from_measure, real_embedding
from fsvd.moments import certificate_polynomial, verify_measure
from fsvd.spectral import max_frequency_error

from conftest import bands

K3 = [[0.05, 0.3], [0.65, 0.75]]
K5 = [[0.2, 0.3], [0.6, 0.8]]
K6 = [[0.2, 0.3], [0.6, 0.75]]


def run(tmp_path, command, payload, *extra):
    inp = tmp_path / "in.json"
    out = tmp_path / "out.json"
    inp.write_text(json.dumps(payload) if not isinstance(payload, str) else payload)
    code = main([command, "--input", str(inp), "--output", str(out), *extra])
    return code, json.loads(out.read_text()) if out.exists() else None


def measure_of(obj) -> AtomicMeasure:
    return AtomicMeasure.from_json(obj["measure"])


class TestVd:
    def test_mu1_standard(self, tmp_path, t_mu1_4):
        code, out = run(tmp_path, "vd", {"t": complex_to_pairs(t_mu1_4.t)})
        assert code == 0 and out["status"] == "ok"
        mu = measure_of(out)
        np.testing.assert_allclose(mu.f, [0.1, 0.25, 0.7], atol=1e-8)
        np.testing.assert_allclose(mu.p, [0.7, 2.0, 1.0], atol=1e-8)
        assert out["rank"] == 3 and out["residual"] < 1e-10

    def test_mu2_band(self, tmp_path, t_mu1_3):
        code, out = run(tmp_path, "vd", {"t": complex_to_pairs(t_mu1_3.t), "band": [0.05, 0.75]})
        assert code == 0
        mu = measure_of(out)
        expected = [(0.4630, 0.05), (2.2485, 0.2383), (0.9885, 0.6927)]
        for (p, f), (pe, fe) in zip(mu.atoms, expected):
            assert p == pytest.approx(pe, abs=5e-4) and f == pytest.approx(fe, abs=5e-4)

    def test_impulse_not_representable(self, tmp_path):
        code, out = run(tmp_path, "vd", {"t": [[1, 0], [0, 0], [0, 0]], "band": [0.2, 0.3]})
        assert code == 2 and out["error"] == "not_representable"

    def test_round_trip(self, tmp_path, t_mu1_4):
        # a result measure fed back through vd reproduces the moments
        code, out = run(tmp_path, "vd", {"t": complex_to_pairs(t_mu1_4.t)})
        t2 = moments_from_measure(measure_of(out), 4)
        code, again = run(tmp_path, "vd", {"t": complex_to_pairs(t2.t)})
        assert code == 0
        np.testing.assert_allclose(moments_from_measure(measure_of(again), 4).t, t_mu1_4.t, atol=1e-9)

    def test_stems_csv(self, tmp_path, t_mu1_4):
        code, _ = run(tmp_path, "vd", {"t": complex_to_pairs(t_mu1_4.t)}, "--stems")
        rows = list(csv.reader((tmp_path / "out.stems.csv").open()))
        assert rows[0] == ["f", "p"] and len(rows) == 4

    def test_f_extra(self, tmp_path, t_mu1_3):
        code, out = run(tmp_path, "vd", {"t": complex_to_pairs(t_mu1_3.t), "f_extra": 0.5})
        assert code == 0 and 0.5 in measure_of(out).f


class TestMoment:
    def test_item4_feasible(self, tmp_path, t_mu1_3):
        code, out = run(tmp_path, "moment", {"t": complex_to_pairs(t_mu1_3.t), "bands": K3})
        assert code == 0 and out["status"] == "Feasible"
        mu = measure_of(out)
        assert len(mu) <= 6
        assert verify_measure(mu, t_mu1_3, bands(*K3), tol=1e-6)

    def test_item5_four_atoms(self, tmp_path, t_mu1_3):
        code, out = run(tmp_path, "moment", {"t": complex_to_pairs(t_mu1_3.t), "bands": K5, "objective": "max-trace-first"})
        assert code == 0 and len(measure_of(out)) == 4

    def test_objective_flag_overrides(self, tmp_path, t_mu1_3):
        code, out = run(tmp_path, "moment", {"t": complex_to_pairs(t_mu1_3.t), "bands": K5}, "--objective", "max-trace-first")
        assert code == 0 and len(measure_of(out)) == 4

    def test_item6_infeasible(self, tmp_path, t_mu1_3):
        code, out = run(tmp_path, "moment", {"t": complex_to_pairs(t_mu1_3.t), "bands": K6})
        assert code == 5 and out["status"] == "Infeasible"
        alpha = np.array(out["certificate"])
        assert real_embedding(t_mu1_3) @ alpha < -1e-8
        for lo, hi in K6:
            assert certificate_polynomial(alpha, np.linspace(lo, hi, 10_000)).min() >= -1e-7

    def test_missing_bands(self, tmp_path, t_mu1_3):
        code, out = run(tmp_path, "moment", {"t": complex_to_pairs(t_mu1_3.t)})
        assert code == 3 and out["error"] == "bad_input"

    def test_unknown_objective(self, tmp_path, t_mu1_3):
        code, _ = run(tmp_path, "moment", {"t": complex_to_pairs(t_mu1_3.t), "bands": K5, "objective": "sideways"})
        assert code == 3

    def test_overlapping_bands(self, tmp_path, t_mu1_3):
        code, _ = run(tmp_path, "moment", {"t": complex_to_pairs(t_mu1_3.t), "bands": [[0.1, 0.4], [0.3, 0.5]]})
        assert code == 3


class TestLse:
    def test_single_atom_full(self, tmp_path):
        s = 1.5 * np.exp(0.3j)
        y = s * atom_vector(8, 0.25)
        payload = {"n": 8, "omega": list(range(8)), "y_obs": complex_to_pairs(y), "bands": [[0.2, 0.3]], "eta": 0.0}
        code, out = run(tmp_path, "lse", payload)
        assert code == 0
        np.testing.assert_allclose(out["frequencies"], [0.25], atol=1e-7)
        assert out["atomic_norm"] == pytest.approx(abs(s), abs=1e-6)
        np.testing.assert_allclose(complex_from_pairs(out["amplitudes"]), [s], atol=1e-6)
        np.testing.assert_allclose(complex_from_pairs(out["y_full"]), y, atol=1e-12)

    def test_noise_bound(self, tmp_path, rng):
        n, f = 12, [0.22, 0.27]
        y = atom_matrix(n, f) @ np.array([1.0, 1.0j])
        omega = [0, 1, 3, 4, 6, 8, 9, 11]
        y_obs = y[omega] + 0.01 * (rng.standard_normal(8) + 1j * rng.standard_normal(8))
        payload = {"n": n, "omega": omega, "y_obs": complex_to_pairs(y_obs), "bands": [[0.2, 0.3]], "eta": 0.05}
        code, out = run(tmp_path, "lse", payload)
        assert code == 0
        y_full = complex_from_pairs(out["y_full"])
        assert np.linalg.norm(y_full[omega] - y_obs) <= 0.05 + 1e-6
        assert out["noise_residual"] <= 0.05 + 1e-6

    def test_dual_and_plot(self, tmp_path):
        n, f = 16, [0.22, 0.27]
        y = atom_matrix(n, f) @ np.array([1.0, -1.0j])
        omega = [0, 1, 2, 4, 5, 7, 9, 10, 12, 15]
        payload = {"n": n, "omega": omega, "y_obs": complex_to_pairs(y[omega]), "bands": [[0.2, 0.3]], "eta": 0.0, "dual": True}
        code, out = run(tmp_path, "lse", payload, "--plot-grid", "500")
        assert code == 0
        assert max_frequency_error(out["retrieval"]["fs_vd"], f) < 1e-6
        assert max_frequency_error(out["retrieval"]["root_finding"], f) < 1e-4
        assert out["dual_value"] == pytest.approx(out["atomic_norm"], rel=1e-5)
        rows = list(csv.reader((tmp_path / "out.dual.csv").open()))
        assert rows[0] == ["f", "abs_q"] and len(rows) == 502
        assert (tmp_path / "out.stems.csv").exists()

    def test_bad_omega(self, tmp_path):
        payload = {"n": 8, "omega": [0, 9], "y_obs": [[1, 0], [1, 0]], "bands": [[0.2, 0.3]], "eta": 0.0}
        code, out = run(tmp_path, "lse", payload)
        assert code == 3 and out["status"] == "error"

    def test_gen_then_solve(self, tmp_path):
        prob = tmp_path / "p.json"
        assert main(["gen-lse", "--seed", "0", "--output", str(prob)]) == 0
        obj = json.loads(prob.read_text())
        assert obj["n"] == 64 and len(obj["omega"]) == 16
        truth = obj["truth"]["frequencies"]
        out = tmp_path / "out.json"
        assert main(["lse", "--input", str(prob), "--output", str(out)]) == 0
        res = json.loads(out.read_text())
        assert max_frequency_error(res["frequencies"], truth) < 1e-6

    def test_gen_is_seeded(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["gen-lse", "--seed", "5", "--n", "32", "--m", "12", "--output", str(a)])
        main(["gen-lse", "--seed", "5", "--n", "32", "--m", "12", "--output", str(b)])
        assert a.read_text() == b.read_text()


class TestDualPoly:
    def test_dirichlet(self, tmp_path):
        z = atom_vector(10, 0.3) / 10
        code, out = run(tmp_path, "dual-poly", {"z": complex_to_pairs(z)}, "--plot-grid", "100")
        assert code == 0
        assert out["max_abs_q"] == pytest.approx(1.0)
        np.testing.assert_allclose(out["roots"], [0.3], atol=1e-6)
        assert len((tmp_path / "out.dual.csv").read_text().splitlines()) == 102


class TestErrors:
    def test_broken_json(self, tmp_path):
        code, out = run(tmp_path, "vd", "{not json")
        assert code == 3 and out["error"] == "bad_input"

    def test_missing_file(self, tmp_path):
        assert main(["vd", "--input", str(tmp_path / "nope.json"), "--output", str(tmp_path / "o.json")]) == 3

    def test_bad_pairs(self, tmp_path):
        code, _ = run(tmp_path, "vd", {"t": [1, 2, 3]})
        assert code == 3

    def test_degenerate_band(self, tmp_path):
        code, _ = run(tmp_path, "vd", {"t": [[1, 0], [0, 0]], "band": [0.2, 0.2]})
        assert code == 3

    def test_top_level_array(self, tmp_path):
        code, _ = run(tmp_path, "vd", [1, 2])
        assert code == 3


class TestSerialisation:
    def test_seventeen_digits(self):
        x = 0.1 + 0.2
        assert float(json.loads(dumps({"x": x}))["x"]) == x
        assert "0.30000000000000004" in dumps([x])

    def test_non_finite(self):
        assert json.loads(dumps({"a": float("nan"), "b": float("inf")})) == {"a": None, "b": None}

    def test_numpy_types(self):
        out = json.loads(dumps({"a": np.float64(1.5), "b": np.int64(3), "c": np.array([1.0, 2.0]), "d": np.bool_(True)}))
        assert out == {"a": 1.5, "b": 3, "c": [1.0, 2.0], "d": True}

    def test_moment_json_round_trip(self, t_mu1_4):
        again = MomentSequence.from_json(json.loads(dumps(t_mu1_4.to_json())))
        np.testing.assert_array_equal(again.t, t_mu1_4.t)
