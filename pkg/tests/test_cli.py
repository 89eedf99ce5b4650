import csv

import numpy as np
import pytest

from pbmf.cli import main
from pbmf.data import SplitSpec, load_movielens, split
from pbmf.metrics import REPORT_COLUMNS, evaluate_all, format_value, report_from_row
from pbmf.model import load_model
from pbmf.synthetic import write_movielens_file, zipf_popularity_dataset
from pbmf.training import TrainConfig, train


@pytest.fixture
def ratings_file(tmp_path):
    ds = zipf_popularity_dataset(60, 30, 10, seed=5, rating_scale=5.0, integer_ratings=True)
    path = tmp_path / "ratings.dat"
    write_movielens_file(ds, path)
    return path


def read_csv_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestTrainCommand:
    def test_happy_path(self, ratings_file, tmp_path, capsys):
        out = tmp_path / "model.pbmf"
        code = main([
            "train", "--input", str(ratings_file), "--format", "movielens",
            "--algorithm", "position_bias_mf", "--beta", "0.1", "--k", "4",
            "--lr", "0.01", "--epochs", "2", "--seed", "42",
            "--test-fraction", "0.2", "--output", str(out),
        ])
        assert code == 0
        assert out.exists()
        history = tmp_path / "model.pbmf.history.csv"
        assert history.exists()
        lines = history.read_text().splitlines()
        assert lines[0] == "epoch,fit_loss,penalty_loss,total_loss"
        assert len(lines) == 3
        assert "final loss:" in capsys.readouterr().out
        model = load_model(out)
        assert model.mode == "cosine" and model.k == 4

    def test_missing_input_shows_usage(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["train", "--algorithm", "cosine_mf", "--output", "x.pbmf"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_negative_beta_rejected(self, ratings_file, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main([
                "train", "--input", str(ratings_file), "--algorithm",
                "position_bias_mf", "--beta", "-1", "--output", str(tmp_path / "m.pbmf"),
            ])
        assert exc.value.code == 2
        assert ">= 0" in capsys.readouterr().err

    def test_divergence_reported(self, ratings_file, tmp_path, capsys):
        code = main([
            "train", "--input", str(ratings_file), "--algorithm", "classic_mf",
            "--lr", "10", "--k", "8", "--epochs", "3", "--output",
            str(tmp_path / "m.pbmf"),
        ])
        assert code == 1
        assert "diverged" in capsys.readouterr().err

    def test_unreadable_input_fails_cleanly(self, tmp_path, capsys):
        code = main([
            "train", "--input", str(tmp_path / "missing.dat"),
            "--algorithm", "cosine_mf", "--output", str(tmp_path / "m.pbmf"),
        ])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestEvaluateCommand:
    def test_report_row(self, ratings_file, tmp_path):
        model_path = tmp_path / "model.pbmf"
        assert main([
            "train", "--input", str(ratings_file), "--algorithm", "cosine_mf",
            "--k", "4", "--epochs", "2", "--output", str(model_path),
        ]) == 0
        out = tmp_path / "report.csv"
        assert main([
            "evaluate", "--input", str(ratings_file), "--model", str(model_path),
            "--label", "cosine_mf", "--output", str(out),
        ]) == 0
        rows = read_csv_rows(out)
        assert len(rows) == 1
        report = report_from_row(rows[0])
        assert report.algorithm == "cosine_mf"
        assert report.mae >= 0.0


class TestBenchmarkCommand:
    def test_beta_zero_matches_cosine(self, ratings_file, tmp_path):
        out = tmp_path / "results.csv"
        code = main([
            "benchmark", "--input", str(ratings_file),
            "--algorithms", "cosine_mf,position_bias_mf", "--beta", "0",
            "--k", "4", "--epochs", "2", "--seed", "7", "--output", str(out),
        ])
        assert code == 0
        rows = read_csv_rows(out)
        assert [r["algorithm"] for r in rows] == ["cosine_mf", "position_bias_mf"]
        varying = [c for c in REPORT_COLUMNS if c != "algorithm"]
        assert [rows[0][c] for c in varying] == [rows[1][c] for c in varying]

    def test_baselines_only(self, ratings_file, tmp_path):
        out = tmp_path / "results.csv"
        code = main([
            "benchmark", "--input", str(ratings_file),
            "--algorithms", "random,zipf", "--output", str(out),
        ])
        assert code == 0
        rows = read_csv_rows(out)
        assert [r["algorithm"] for r in rows] == ["random", "zipf"]
        assert all(r["error"] == "" for r in rows)
        assert all(r["k"] == "0" and r["epochs"] == "0" for r in rows)

    def test_rows_match_library_oracle(self, ratings_file, tmp_path):
        out = tmp_path / "results.csv"
        seed = 13
        code = main([
            "benchmark", "--input", str(ratings_file),
            "--algorithms", "classic_mf,position_bias_mf,zipf", "--beta", "0.5",
            "--k", "4", "--epochs", "3", "--seed", str(seed),
            "--test-fraction", "0.25", "--k-top", "5", "--output", str(out),
        ])
        assert code == 0
        rows = read_csv_rows(out)

        dataset = load_movielens(ratings_file)
        train_set, test_set = split(dataset, SplitSpec(test_fraction=0.25, seed=seed))
        from pbmf.baselines import ZipfScorer

        expected = {}
        for algorithm, beta in (("classic_mf", 0.0), ("position_bias_mf", 0.5)):
            model, _ = train(train_set, TrainConfig(
                algorithm=algorithm, beta=beta, k=4, epochs=3, seed=seed))
            expected[algorithm] = evaluate_all(
                model, train_set, test_set, k_top=5, algorithm=algorithm, beta=beta)
        expected["zipf"] = evaluate_all(
            ZipfScorer.from_dataset(train_set), train_set, test_set, k_top=5,
            algorithm="zipf")

        for row in rows:
            want = expected[row["algorithm"]]
            assert row["mae"] == format_value(want.mae)
            assert row["matthew_degree"] == format_value(want.matthew_degree)
            assert row["position_bias"] == format_value(want.position_bias)
            assert row["test_size"] == str(want.test_size)

    def test_byte_identical_reruns(self, ratings_file, tmp_path):
        args = [
            "benchmark", "--input", str(ratings_file),
            "--algorithms", "cosine_mf,random,zipf", "--k", "4", "--epochs", "2",
        ]
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert main(args + ["--output", str(a)]) == 0
        assert main(args + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_per_algorithm_failure_recorded(self, ratings_file, tmp_path):
        out = tmp_path / "results.csv"
        code = main([
            "benchmark", "--input", str(ratings_file),
            "--algorithms", "classic_mf,zipf", "--lr", "10", "--k", "8",
            "--epochs", "3", "--output", str(out),
        ])
        assert code == 1  # an algorithm failed
        rows = read_csv_rows(out)
        assert len(rows) == 2  # the run continued
        assert "diverged" in rows[0]["error"]
        assert rows[0]["mae"] == ""
        assert rows[1]["algorithm"] == "zipf" and rows[1]["error"] == ""

    def test_stdout_when_no_output(self, ratings_file, capsys):
        code = main([
            "benchmark", "--input", str(ratings_file), "--algorithms", "zipf",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith(",".join(REPORT_COLUMNS))

    def test_unknown_algorithm_rejected(self, ratings_file, capsys):
        with pytest.raises(SystemExit) as exc:
            main([
                "benchmark", "--input", str(ratings_file),
                "--algorithms", "dlrm",
            ])
        assert exc.value.code == 2


class TestSweepCommand:
    def test_rows_follow_beta_order(self, ratings_file, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main([
            "sweep", "--input", str(ratings_file), "--beta", "0,0.1,1.0",
            "--k", "4", "--epochs", "2", "--output", str(out),
        ])
        assert code == 0
        rows = read_csv_rows(out)
        assert [r["algorithm"] for r in rows] == ["position_bias_mf"] * 3
        betas = [float(r["beta"]) for r in rows]
        assert betas == [0.0, 0.1, 1.0]
        assert betas == sorted(betas)

    def test_byte_identical_reruns(self, ratings_file, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        args = ["sweep", "--input", str(ratings_file), "--beta", "0,0.5",
                "--k", "4", "--epochs", "2"]
        assert main(args + ["--output", str(a)]) == 0
        assert main(args + ["--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_requires_two_betas(self, ratings_file, capsys):
        code = main(["sweep", "--input", str(ratings_file), "--beta", "0.5"])
        assert code == 1
        assert "two beta values" in capsys.readouterr().err

    def test_split_shared_across_betas(self, ratings_file, tmp_path):
        # test_size must be identical on every row: one split per invocation.
        out = tmp_path / "sweep.csv"
        assert main([
            "sweep", "--input", str(ratings_file), "--beta", "0,0.2,0.8",
            "--k", "4", "--epochs", "2", "--output", str(out),
        ]) == 0
        sizes = {r["test_size"] for r in read_csv_rows(out)}
        assert len(sizes) == 1


class TestConfigFile:
    def test_config_supplies_defaults(self, ratings_file, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# experiment defaults\nk = 4\nepochs = 2\nalgorithms = zipf,random\n"
        )
        out = tmp_path / "results.csv"
        code = main([
            "benchmark", "--input", str(ratings_file), "--config", str(cfg),
            "--output", str(out),
        ])
        assert code == 0
        rows = read_csv_rows(out)
        assert [r["algorithm"] for r in rows] == ["zipf", "random"]

    def test_flags_override_config(self, ratings_file, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("k = 4\nepochs = 2\n")
        out = tmp_path / "results.csv"
        code = main([
            "benchmark", "--input", str(ratings_file), "--config", str(cfg),
            "--algorithms", "cosine_mf", "--k", "6", "--output", str(out),
        ])
        assert code == 0
        rows = read_csv_rows(out)
        assert rows[0]["k"] == "6"
        assert rows[0]["epochs"] == "2"  # still from the file

    def test_bad_config_line_is_usage_error(self, ratings_file, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("this is not a key value pair\n")
        with pytest.raises(SystemExit) as exc:
            main(["benchmark", "--input", str(ratings_file), "--config", str(cfg)])
        assert exc.value.code == 2
