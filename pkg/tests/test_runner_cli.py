import json

import numpy as np
import pytest

import eigenring.runner as runner_mod
from eigenring import (
    Combine,
    ConfigError,
    EnsembleSpec,
    FactorKind,
    FactorSpec,
    GinibreProduct,
    HaarSum,
    RadialGrid,
    RejectionCapError,
    SingularFactorError,
    SphericalProduct,
    TruncatedHaarProduct,
    model_for_ensemble,
    predict_rows,
    run_sample,
)
from eigenring.cli import main
from eigenring.runner import (
    ExperimentConfig,
    compare_table,
    config_from_dict,
    load_report_csv,
    run_oracle,
)


def base_config_dict(**overrides):
    data = {
        "ensemble": {
            "combine": "product",
            "dimension": 16,
            "factors": [{"kind": "ginibre"}],
        },
        "model": "auto",
        "samples": 4,
        "seed": 99,
        "grid": {"bins": 10, "lo": 0.0, "hi": 1.2},
        "workers": 1,
    }
    data.update(overrides)
    return data


class TestConfig:
    def test_roundtrip(self):
        config = config_from_dict(base_config_dict())
        assert config.ensemble.dim == 16
        assert config.n_samples == 4
        assert config.grid.bins == 10

    def test_missing_ensemble(self):
        with pytest.raises(ConfigError):
            config_from_dict({"samples": 3, "seed": 1})

    def test_bad_factor_kind(self):
        data = base_config_dict()
        data["ensemble"]["factors"] = [{"kind": "wishart"}]
        with pytest.raises(ConfigError):
            config_from_dict(data)

    def test_bad_model_family(self):
        with pytest.raises(ConfigError):
            config_from_dict(base_config_dict(model={"family": "bogus"}))

    def test_explicit_model(self):
        config = config_from_dict(
            base_config_dict(model={"family": "spherical", "k": 2})
        )
        assert config.model == SphericalProduct(2)

    def test_thresholds(self):
        config = config_from_dict(
            base_config_dict(thresholds={"sup_overlap": 0.1, "sup_rho": 0.2})
        )
        assert config.max_overlap_error == 0.1
        assert config.max_rho_error == 0.2

    def test_invalid_samples(self):
        with pytest.raises(ConfigError):
            config_from_dict(base_config_dict(samples=0))


class TestModelResolution:
    def test_families(self):
        def spec(combine, *kinds, dim=8):
            return EnsembleSpec(
                combine,
                tuple(
                    FactorSpec(k, 1.0 if k is FactorKind.TRUNCATED_HAAR else 0.0)
                    for k in kinds
                ),
                dim,
            )

        g, i, h, t = (
            FactorKind.GINIBRE,
            FactorKind.INVERSE_GINIBRE,
            FactorKind.HAAR_UNITARY,
            FactorKind.TRUNCATED_HAAR,
        )
        assert model_for_ensemble(spec(Combine.PRODUCT, g, g)) == GinibreProduct(2)
        assert model_for_ensemble(spec(Combine.PRODUCT, t, t)) == TruncatedHaarProduct(2, 1.0)
        assert model_for_ensemble(spec(Combine.PRODUCT, g, i)) == SphericalProduct(1)
        assert model_for_ensemble(spec(Combine.PRODUCT, g, g, i, i)) == SphericalProduct(2)
        assert model_for_ensemble(spec(Combine.SUM, h, h, h)) == HaarSum(3)
        assert model_for_ensemble(spec(Combine.PRODUCT, h, h)) == HaarSum(1)
        with pytest.raises(ConfigError):
            model_for_ensemble(spec(Combine.PRODUCT, g, h))


class TestRunSample:
    def test_worker_count_is_invisible(self, tmp_path):
        # reproducibility contract: identical bytes with 1 and 2 workers
        results = {}
        for workers in (1, 2):
            out = tmp_path / f"w{workers}"
            config = config_from_dict(
                base_config_dict(
                    workers=workers,
                    out_dir=str(out),
                    dump_samples=True,
                    samples=3,
                )
            )
            run_sample(config)
            results[workers] = (
                (out / "report.csv").read_bytes(),
                (out / "samples.csv").read_bytes(),
                (out / "summary.json").read_bytes(),
            )
        assert results[1] == results[2]

    def test_haar_unitary_unit_conditioning(self):
        # normal ensemble: every occupied bin has mean O_ii / N * N = 1
        spec = EnsembleSpec(
            Combine.PRODUCT, (FactorSpec(FactorKind.HAAR_UNITARY),), 256
        )
        config = ExperimentConfig(
            ensemble=spec,
            n_samples=10,
            seed=7,
            grid=RadialGrid.uniform(0.9, 1.1, 5),
        )
        result = run_sample(config)
        profile = result.profile
        occupied = profile.count > 0
        assert np.allclose(profile.kappa2_hat[occupied] * 256, 1.0, atol=1e-8)

    def test_rejections_counted(self, monkeypatch):
        calls = {"n": 0}
        real = runner_mod.realize

        def flaky(spec, stream):
            calls["n"] += 1
            if calls["n"] == 1:
                raise SingularFactorError("synthetic")
            return real(spec, stream)

        monkeypatch.setattr(runner_mod, "realize", flaky)
        config = config_from_dict(base_config_dict(samples=2))
        result = run_sample(config)
        assert result.profile.n_rejected == 1
        assert result.profile.n_samples == 2

    def test_rejection_cap(self, monkeypatch):
        def always_singular(spec, stream):
            raise SingularFactorError("synthetic")

        monkeypatch.setattr(runner_mod, "realize", always_singular)
        config = config_from_dict(base_config_dict(samples=1))
        with pytest.raises(RejectionCapError):
            run_sample(config)

    def test_threshold_status(self, tmp_path):
        config = config_from_dict(
            base_config_dict(
                samples=6,
                thresholds={"sup_overlap": 1e-9, "sup_rho": 1e-9},
            )
        )
        result = run_sample(config)
        assert result.summary["status"] == "fail"


class TestPredict:
    def test_two_factor_overlap_value(self):
        rows = predict_rows(GinibreProduct(2), np.array([0.5]))
        assert rows[0]["O"] == pytest.approx(1 / np.pi, abs=1e-12)

    def test_haar_sum_support_edge(self):
        rows = predict_rows(HaarSum(2), np.array([np.sqrt(2)]))
        assert rows[0]["F"] == 1.0
        assert rows[0]["O"] == pytest.approx(0.0, abs=1e-12)

    def test_spherical_uniform_conditioning_column(self):
        rows = predict_rows(SphericalProduct(3), np.array([0.4, 2.2]))
        assert rows[0]["c"] == pytest.approx(rows[1]["c"], abs=1e-12)
        assert rows[0]["c"] == pytest.approx(3.0, abs=1e-9)


class TestReportIo:
    def test_csv_roundtrip(self, tmp_path):
        config = config_from_dict(base_config_dict(out_dir=str(tmp_path), samples=4))
        result = run_sample(config)
        rows = load_report_csv(result.report_path)
        assert len(rows) == result.report.grid.bins
        assert rows[0]["count"] == int(result.report.count[0])
        assert rows[3]["O_hat"] == pytest.approx(result.report.overlap_hat[3], rel=1e-10)

    def test_compare_table_self_and_mismatch(self, tmp_path):
        grid = RadialGrid.uniform(0.0, 1.1, 20)
        from tests.test_stats import analytic_profile

        model = GinibreProduct(1)
        from eigenring.stats import compare

        report = compare(analytic_profile(model, grid, 400), model)
        rows = report.rows()
        good = compare_table(rows, 400, model)
        assert good["bulk_sup_err_O"] == pytest.approx(0.0, abs=1e-12)
        bad = compare_table(rows, 400, HaarSum(2))
        assert bad["bulk_sup_err_O"] > 0.05


class TestOracle:
    def test_fast_suite_all_pass(self):
        checks = run_oracle(seed=1, heavy=False)
        failed = [c for c in checks if not c.passed]
        assert not failed, failed


class TestCli:
    def test_predict_stdout(self, capsys):
        code = main(
            [
                "predict", "--family", "ginibre_product", "--factors", "2",
                "--r-min", "0.5", "--r-max", "0.5", "--points", "1",
            ]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert out.splitlines()[0] == "r,F,rho,O,c"
        assert float(out.splitlines()[1].split(",")[3]) == pytest.approx(1 / np.pi, rel=1e-9)

    def test_sample_and_compare_roundtrip(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        data = base_config_dict(samples=5, out_dir=str(tmp_path / "out"))
        # large enough that the bulk window is nonempty for both models
        data["ensemble"]["dimension"] = 100
        cfg.write_text(json.dumps(data))
        code = main(["sample", "--config", str(cfg)])
        assert code == 0
        out_dir = tmp_path / "out"
        # negative control: compare stored Ginibre data against a sum model
        code = main(
            [
                "compare",
                "--report", str(out_dir / "report.csv"),
                "--summary", str(out_dir / "summary.json"),
                "--family", "haar_sum", "--factors", "2",
            ]
        )
        assert code == 1
        capsys.readouterr()

    def test_bad_config_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{not json")
        assert main(["sample", "--config", str(cfg)]) == 2
        capsys.readouterr()

    def test_missing_compare_inputs_exit_2(self, capsys):
        assert main(["compare", "--family", "haar_sum"]) == 2
        capsys.readouterr()

    def test_oracle_fast(self, capsys):
        assert main(["oracle", "--fast", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out and "[FAIL]" not in out
