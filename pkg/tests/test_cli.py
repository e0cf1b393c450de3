import json

import pytest

from main import EXIT_DATA, EXIT_OK, EXIT_STAGE, EXIT_USAGE, main


class TestUsage:

    def test_pipeline_help_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["pipeline", "--help"])

        assert excinfo.value.code == 0
        assert "--input" in capsys.readouterr().out

    def test_unknown_flag_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["reduct", "--input", "x.csv", "--frobnicate"])

        assert excinfo.value.code == EXIT_USAGE
        assert "error" in capsys.readouterr().err

    def test_no_command_prints_help(self, capsys):
        assert main([]) == EXIT_USAGE
        assert "pipeline" in capsys.readouterr().out


class TestReductCommand:

    def test_t1_selects_a(self, t1_csv, capsys):
        code = main(["reduct", "--input", str(t1_csv), "--format", "json"])

        assert code == EXIT_OK
        result = json.loads(capsys.readouterr().out)
        assert result["selected_names"] == ["a"]
        assert result["reached_full"] is True

    def test_table_output_and_artifact(self, t1_csv, tmp_path, capsys):
        code = main(["reduct", "--input", str(t1_csv), "--method", "exhaustive", "--out", str(tmp_path / "r")])

        assert code == EXIT_OK
        assert "Selected attributes (1): a" in capsys.readouterr().out
        assert json.loads((tmp_path / "r" / "reduct.json").read_text(encoding="utf-8"))["method"] == "exhaustive"

    def test_missing_input_file(self, tmp_path, capsys):
        code = main(["reduct", "--input", str(tmp_path / "absent.csv")])

        assert code == EXIT_DATA
        assert "not found" in capsys.readouterr().err


class TestEvaluateCommand:

    def test_length_mismatch(self, tmp_path, capsys):
        predicted = tmp_path / "pred.txt"
        truth = tmp_path / "truth.txt"
        predicted.write_text("0\n1\n1\n", encoding="utf-8")
        truth.write_text("0\n1\n", encoding="utf-8")

        code = main(["evaluate", "--predicted", str(predicted), "--truth", str(truth)])

        assert code == EXIT_DATA
        assert "length mismatch" in capsys.readouterr().err

    def test_fractional_labels_are_rejected(self, tmp_path, capsys):
        predicted = tmp_path / "pred.txt"
        truth = tmp_path / "truth.txt"
        predicted.write_text("1.9\n0.2\n", encoding="utf-8")
        truth.write_text("1\n0\n", encoding="utf-8")

        code = main(["evaluate", "--predicted", str(predicted), "--truth", str(truth)])

        assert code == EXIT_DATA
        assert "'1.9' at line 1" in capsys.readouterr().err

    def test_needs_labels_or_runs(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["evaluate", "--predicted", "pred.txt"])

        assert excinfo.value.code == EXIT_USAGE
        assert "--runs" in capsys.readouterr().err

    def test_combines_pipeline_runs(self, blobs_csv, tmp_path, capsys):
        data = tmp_path / "demo.csv"
        assert main(["synth", "--out", str(data), "--samples", "30", "--noise", "6", "--seed", "2"]) == EXIT_OK
        for source, run in ((blobs_csv, "run_blobs"), (data, "run_demo")):
            assert main(["pipeline", "--input", str(source), "--out", str(tmp_path / run), "--epochs", "50"]) == EXIT_OK
        capsys.readouterr()

        code = main(["evaluate", "--runs", str(tmp_path / "run_blobs"), str(tmp_path / "run_demo"),
                     "--out", str(tmp_path / "combined"), "--format", "json"])

        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert set(report["accuracy"]) == {"blobs", "demo"}
        assert set(report["accuracy"]["blobs"]) == {"K-Means", "FCM", "BPN"}
        assert [row["dataset"] for row in report["selected_features"]] == ["blobs", "demo"]
        assert (tmp_path / "combined" / "metrics.csv").exists()

    def test_reports_rates(self, tmp_path, capsys):
        predicted = tmp_path / "pred.txt"
        truth = tmp_path / "truth.txt"
        predicted.write_text("1\n1\n0\n0\n", encoding="utf-8")
        truth.write_text("1\n0\n0\n0\n", encoding="utf-8")

        code = main(["evaluate", "--predicted", str(predicted), "--truth", str(truth), "--format", "json"])

        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["counts"] == {"tp": 1, "fp": 1, "fn": 0, "tn": 2}
        assert report["accuracy"] == 0.75
        assert report["error"] == 0.25


class TestStageCommands:

    def test_discretize_then_reduct(self, blobs_csv, tmp_path, capsys):
        out = tmp_path / "stages"

        assert main(["discretize", "--input", str(blobs_csv), "--out", str(out)]) == EXIT_OK
        assert (out / "discretization.json").exists()
        assert main(["reduct", "--input", str(out / "discretized.csv"), "--format", "json"]) == EXIT_OK

        output = capsys.readouterr().out
        result = json.loads(output[output.index("{"):])
        assert result["selected_names"] == ["g1"]

    def test_cluster(self, blobs_csv, capsys):
        code = main(["cluster", "--input", str(blobs_csv), "--cluster", "kmeans,fcm", "--format", "json"])

        assert code == EXIT_OK
        results = json.loads(capsys.readouterr().out)
        assert set(results) == {"kmeans", "fcm"}

    def test_unknown_cluster_algorithm(self, blobs_csv, capsys):
        assert main(["cluster", "--input", str(blobs_csv), "--cluster", "dbscan"]) == EXIT_DATA

    def test_classify(self, tmp_path, capsys):
        data = tmp_path / "codes.csv"
        rows = ["a,b,class"] + [f"{i % 2},{(i // 2) % 3},{'y' if i % 2 else 'x'}" for i in range(20)]
        data.write_text("\n".join(rows) + "\n", encoding="utf-8")

        code = main(["classify", "--input", str(data), "--epochs", "500", "--hidden", "3", "--format", "json"])

        assert code == EXIT_OK
        result = json.loads(capsys.readouterr().out)
        assert result["confusion"]["accuracy"] == 1.0


class TestPipelineCommand:

    def test_synth_then_pipeline(self, tmp_path, capsys):
        data = tmp_path / "demo.csv"
        out = tmp_path / "run"

        assert main(["synth", "--out", str(data), "--samples", "30", "--noise", "6", "--seed", "2"]) == EXIT_OK
        code = main(["pipeline", "--input", str(data), "--out", str(out), "--epochs", "50", "--seed", "2"])

        assert code == EXIT_OK
        assert "Pipeline completed" in capsys.readouterr().out
        assert json.loads((out / "manifest.json").read_text(encoding="utf-8"))["complete"] is True

    def test_stage_commands_reproduce_pipeline_artifacts(self, tmp_path, capsys):
        data = tmp_path / "demo.csv"
        run = tmp_path / "run"
        stages = tmp_path / "stages"

        assert main(["synth", "--out", str(data), "--samples", "30", "--noise", "6", "--seed", "4"]) == EXIT_OK
        assert main(["pipeline", "--input", str(data), "--out", str(run), "--epochs", "80", "--seed", "4"]) == EXIT_OK
        assert main(["cluster", "--input", str(run / "reduced.csv"), "--out", str(stages), "--seed", "4"]) == EXIT_OK
        assert main(["classify", "--input", str(run / "reduced_discretized.csv"), "--out", str(stages),
                     "--epochs", "80", "--seed", "4"]) == EXIT_OK

        manifest = json.loads((run / "manifest.json").read_text(encoding="utf-8"))
        assert "reduced_discretized.csv" in [artifact["name"] for artifact in manifest["artifacts"]]
        for name in ("kmeans.json", "fcm.json", "bpn.json", "bpn_network.json"):
            assert (stages / name).read_bytes() == (run / name).read_bytes(), name

    def test_flags_override_config_file(self, blobs_csv, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"input_path": str(blobs_csv), "bins": 1, "epochs": 20,
                                      "output_dir": str(tmp_path / "run")}), encoding="utf-8")

        code = main(["pipeline", "--config", str(config), "--bins", "3", "--format", "json"])

        assert code == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        manifest = json.loads((tmp_path / "run" / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["parameters"]["bins"] == 3
        assert manifest["parameters"]["epochs"] == 20
        assert summary["selected"] == ["g1"]

    def test_stage_failure_exit_code(self, blobs_csv, tmp_path, capsys):
        code = main(["pipeline", "--input", str(blobs_csv), "--out", str(tmp_path / "run"), "--bins", "1"])

        assert code == EXIT_STAGE
        assert "reduct" in capsys.readouterr().err

    def test_invalid_parameter_is_a_data_error(self, blobs_csv, tmp_path, capsys):
        code = main(["pipeline", "--input", str(blobs_csv), "--out", str(tmp_path / "run"), "--fcm-m", "0.5"])

        assert code == EXIT_DATA
        assert "fcm m" in capsys.readouterr().err

    def test_missing_input(self, capsys):
        assert main(["pipeline"]) == EXIT_DATA
