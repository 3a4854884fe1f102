import csv
import json

import numpy as np
import pytest

from galaxy_al.cli import main
from galaxy_al.scorefile import write_labels_csv, write_scores

from conftest import HAND_SCORES, HAND_TRUTH


@pytest.fixture
def hand_files(tmp_path):
    scores = tmp_path / "scores.gxsm"
    labels = tmp_path / "labels.csv"
    oracle = tmp_path / "oracle.csv"
    write_scores(scores, HAND_SCORES)
    write_labels_csv(labels, [(0, 0), (4, 1)])
    write_labels_csv(oracle, list(enumerate(HAND_TRUTH)))
    return scores, labels, oracle


def select_args(scores, labels, out, strategy, extra=()):
    return [
        "select", "--scores", str(scores), "--labels", str(labels),
        "--batch", "2", "--strategy", strategy, "--out", str(out), *extra,
    ]


class TestSelect:
    def test_galaxy_hand_trace(self, tmp_path, hand_files, capsys):
        scores, labels, oracle = hand_files
        out = tmp_path / "batch.csv"
        code = main(select_args(scores, labels, out, "galaxy",
                                ["--oracle", str(oracle)]))
        assert code == 0
        rows = list(csv.reader(out.open()))
        assert rows == [
            ["index", "provenance"],
            ["2", "bisection"],
            ["3", "bisection"],
        ]

    def test_galaxy_without_oracle_exits_4(self, tmp_path, hand_files, capsys):
        scores, labels, _ = hand_files
        code = main(select_args(scores, labels, tmp_path / "o.csv", "galaxy"))
        assert code == 4
        assert "--oracle" in capsys.readouterr().err

    def test_confidence_picks_least_confident(self, tmp_path):
        scores = tmp_path / "s.gxsm"
        write_scores(scores, np.array([[0.9, 0.1], [0.51, 0.49], [0.7, 0.3]]))
        labels = tmp_path / "l.csv"
        write_labels_csv(labels, [])
        out = tmp_path / "o.csv"
        code = main([
            "select", "--scores", str(scores), "--labels", str(labels),
            "--batch", "1", "--strategy", "confidence", "--out", str(out),
        ])
        assert code == 0
        assert list(csv.reader(out.open())) == [["index"], ["1"]]

    def test_truncated_scores_exit_2(self, tmp_path, hand_files, capsys):
        scores, labels, oracle = hand_files
        scores.write_bytes(scores.read_bytes()[:-3])
        code = main(select_args(scores, labels, tmp_path / "o.csv", "galaxy",
                                ["--oracle", str(oracle)]))
        assert code == 2
        assert "bytes" in capsys.readouterr().err

    def test_exhausted_pool_exit_3(self, tmp_path, hand_files, capsys):
        scores, _, oracle = hand_files
        labels = tmp_path / "all.csv"
        write_labels_csv(labels, list(enumerate(HAND_TRUTH)))
        code = main(select_args(scores, labels, tmp_path / "o.csv", "galaxy",
                                ["--oracle", str(oracle)]))
        assert code == 3

    def test_csv_fallback(self, tmp_path, hand_files):
        _, labels, oracle = hand_files
        csv_scores = tmp_path / "s.csv"
        csv_scores.write_text(
            "\n".join(",".join(str(v) for v in row) for row in HAND_SCORES)
        )
        out = tmp_path / "o.csv"
        code = main([
            "select", "--scores-csv", str(csv_scores), "--labels", str(labels),
            "--batch", "2", "--strategy", "galaxy", "--out", str(out),
            "--oracle", str(oracle),
        ])
        assert code == 0
        assert [r[0] for r in list(csv.reader(out.open()))[1:]] == ["2", "3"]

    def test_byte_identical_outputs_for_fixed_seed(self, tmp_path, hand_files):
        scores, labels, oracle = hand_files
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            code = main(select_args(scores, labels, out, "random",
                                    ["--seed", "42"]))
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestVerify:
    def test_prop53_passes(self, capsys):
        assert main(["verify", "--suite", "prop53", "--trials", "1000"]) == 0
        out = capsys.readouterr().out
        assert "PASS" in out and "FAIL" not in out

    def test_thm51_insufficient_trials_exit_2(self, capsys):
        code = main(["verify", "--suite", "thm51", "--trials", "10"])
        assert code == 2
        assert "1000" in capsys.readouterr().err

    def test_thm51_small_run_passes(self, capsys):
        assert main(["verify", "--suite", "thm51", "--trials", "2000"]) == 0
        out = capsys.readouterr().out
        assert out.count("thm51") == 25
        assert "FAIL" not in out

    def test_thm54_small_run_passes(self, capsys):
        assert main(["verify", "--suite", "thm54", "--trials", "1000"]) == 0
        assert "FAIL" not in capsys.readouterr().out


class TestSimulate:
    def config(self, tmp_path, **overrides):
        cfg = {
            "n": 200, "k": 2, "epsilon": 0.2, "B": 10, "T": 3,
            "strategies": ["galaxy", "random"], "seed": 1, "repeats": 2,
        }
        cfg.update(overrides)
        p = tmp_path / "config.json"
        p.write_text(json.dumps(cfg))
        return p

    def test_emits_per_strategy_and_summary_csvs(self, tmp_path):
        cfg = self.config(tmp_path)
        out_dir = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg), "--out-dir", str(out_dir)]) == 0
        for name in ("galaxy.csv", "random.csv", "summary.csv"):
            assert (out_dir / name).exists()
        rows = list(csv.reader((out_dir / "galaxy.csv").open()))
        assert rows[0] == ["round", "labels_used", "acc_bal", "id_labels", "strategy"]
        assert len(rows) == 4
        assert [r[1] for r in rows[1:]] == ["10", "20", "30"]
        summary = list(csv.reader((out_dir / "summary.csv").open()))
        assert len(summary) == 1 + 2 * 3
        assert all(r[3] != "" for r in summary[1:])  # SE present with repeats=2

    def test_single_repeat_leaves_se_empty(self, tmp_path):
        cfg = self.config(tmp_path, repeats=1, strategies=["random"])
        out_dir = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg), "--out-dir", str(out_dir)]) == 0
        summary = list(csv.reader((out_dir / "summary.csv").open()))
        assert all(r[3] == "" and r[5] == "" for r in summary[1:])

    def test_budget_over_pool_exit_2(self, tmp_path, capsys):
        cfg = self.config(tmp_path, B=100, T=5)
        code = main(["simulate", "--config", str(cfg), "--out-dir", str(tmp_path / "o")])
        assert code == 2

    def test_bad_config_exit_2(self, tmp_path, capsys):
        p = tmp_path / "config.json"
        p.write_text("{not json")
        code = main(["simulate", "--config", str(p), "--out-dir", str(tmp_path / "o")])
        assert code == 2

    def test_byte_identical_for_fixed_seed(self, tmp_path):
        cfg = self.config(tmp_path, strategies=["galaxy"])
        dirs = []
        for name in ("o1", "o2"):
            out_dir = tmp_path / name
            assert main(["simulate", "--config", str(cfg), "--out-dir", str(out_dir)]) == 0
            dirs.append(out_dir)
        assert (dirs[0] / "galaxy.csv").read_bytes() == (dirs[1] / "galaxy.csv").read_bytes()
        assert (dirs[0] / "summary.csv").read_bytes() == (dirs[1] / "summary.csv").read_bytes()
