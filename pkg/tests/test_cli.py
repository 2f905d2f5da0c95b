import json
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from mcels.classifier import FcnClassifier
from mcels.cli import main
from mcels.data import load_dataset
from mcels.synthetic import make_two_class, signal_window


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Generated dataset plus a trained checkpoint, shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    assert main(["gen-synthetic", "--T", "16", "--D", "2", "--n", "24",
                 "--seed", "1", "--out", str(root)]) == 0
    train = root / "synthetic_train.mts"
    test = root / "synthetic_test.mts"
    ckpt = root / "clf.ckpt"
    assert main(["train", "--train", str(train), "--test", str(test),
                 "--checkpoint", str(ckpt), "--epochs", "60",
                 "--seed", "3", "--out", str(root)]) == 0
    return root, train, test, ckpt


def run_explain(workspace, out, extra=()):
    root, train, test, ckpt = workspace
    return main(["explain", "--checkpoint", str(ckpt), "--train", str(train),
                 "--test", str(test), "--out", str(out), "--seed", "5",
                 "--epochs", "40", "--patience", "10", "--parallelism", "1",
                 *extra])


class TestGenSynthetic:
    def test_files_parse_back(self, workspace):
        root, train, test, _ = workspace
        ds_train = load_dataset(train)
        ds_test = load_dataset(test)
        assert ds_train.series_length == 16 and ds_train.n_dims == 2
        assert ds_train.n_classes == 2
        assert ds_train.n + ds_test.n == 24

    def test_same_seed_is_byte_identical(self, tmp_path):
        for sub in ("a", "b"):
            assert main(["gen-synthetic", "--T", "16", "--D", "2", "--n", "24",
                         "--seed", "9", "--out", str(tmp_path / sub)]) == 0
        for name in ("synthetic_train.mts", "synthetic_test.mts"):
            assert (tmp_path / "a" / name).read_bytes() == \
                   (tmp_path / "b" / name).read_bytes()

    def test_signal_concentrates_in_planted_region(self):
        train, _ = make_two_class(32, 3, 400, seed=2)
        lo, hi = signal_window(32)
        diff = train.X[train.y == 1].mean(axis=0) - train.X[train.y == 0].mean(axis=0)
        inside = np.abs(diff[lo:hi, 0]).sum()
        total = np.abs(diff).sum()
        assert inside / total > 0.7

    def test_invalid_sizes_exit_2(self, tmp_path, capsys):
        assert main(["gen-synthetic", "--T", "4", "--out", str(tmp_path)]) == 2
        assert "error:" in capsys.readouterr().err


class TestTrain:
    def test_checkpoint_loadable_and_accurate(self, workspace, capsys):
        root, train, test, ckpt = workspace
        clf = FcnClassifier.load(ckpt)
        ds = load_dataset(test)
        from mcels.data import apply_normalization
        X = apply_normalization(ds.X, clf.norm_mean_, clf.norm_std_)
        assert np.mean(clf.predict(X) == ds.y) >= 0.8
        assert (root / "train_log.csv").read_text().startswith("epoch,loss\n")

    def test_missing_file_exit_2_names_path(self, tmp_path, capsys):
        code = main(["train", "--train", str(tmp_path / "nope.mts"),
                     "--checkpoint", str(tmp_path / "c.ckpt")])
        assert code == 2
        assert "nope.mts" in capsys.readouterr().err

    def test_same_seed_byte_identical_checkpoint(self, workspace, tmp_path):
        root, train, test, ckpt = workspace
        other = tmp_path / "again.ckpt"
        assert main(["train", "--train", str(train), "--checkpoint", str(other),
                     "--epochs", "60", "--seed", "3", "--out", str(tmp_path)]) == 0
        assert other.read_bytes() == Path(ckpt).read_bytes()


class TestExplain:
    def test_limit_one_processes_one_instance(self, workspace, tmp_path):
        out = tmp_path / "one"
        assert run_explain(workspace, out, ["--limit", "1"]) == 0
        assert sorted(p.name for p in out.glob("result_*.json")) == ["result_00000.json"]

    def test_output_count_matches_test_size(self, workspace, tmp_path):
        out = tmp_path / "all"
        assert run_explain(workspace, out, ["--limit", "3"]) == 0
        assert len(list(out.glob("result_*.json"))) == 3
        payload = json.loads((out / "result_00000.json").read_text())
        assert payload["schema"] == "mcels-result v1"
        assert "theta" in payload and "trace" in payload

    def test_rerun_same_seed_identical_csv(self, workspace, tmp_path):
        outs = []
        for sub in ("r1", "r2"):
            out = tmp_path / sub
            assert run_explain(workspace, out, ["--limit", "2"]) == 0
            outs.append((out / "aggregate.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_full_nun_baseline(self, workspace, tmp_path):
        out = tmp_path / "baseline"
        assert run_explain(workspace, out, ["--method", "full-nun"]) == 0
        from mcels.metrics import read_report_csv
        [report] = read_report_csv((out / "aggregate.csv").read_text())
        assert report.method == "full-nun"
        # wholesale replacement leaves (essentially) nothing unchanged
        assert report.mean_sparsity < 0.05

    def test_config_file_flags_win(self, workspace, tmp_path):
        root, train, test, ckpt = workspace
        config = tmp_path / "run.conf"
        config.write_text("epochs = 40\nlimit = 1\npatience = 10\n")
        out = tmp_path / "cfg"
        assert main(["explain", "--checkpoint", str(ckpt), "--train", str(train),
                     "--test", str(test), "--out", str(out), "--seed", "5",
                     "--config", str(config), "--parallelism", "1",
                     "--limit", "2"]) == 0
        # --limit 2 on the command line beats limit=1 from the config
        assert len(list(out.glob("result_*.json"))) == 2

    def test_checkpoint_dataset_mismatch(self, workspace, tmp_path, capsys):
        root, train, test, ckpt = workspace
        assert main(["gen-synthetic", "--T", "16", "--D", "3", "--n", "24",
                     "--seed", "2", "--out", str(tmp_path)]) == 0
        code = main(["explain", "--checkpoint", str(ckpt),
                     "--train", str(tmp_path / "synthetic_train.mts"),
                     "--test", str(tmp_path / "synthetic_test.mts"),
                     "--out", str(tmp_path / "x")])
        assert code == 2


class TestReport:
    @pytest.fixture()
    def results_dir(self, workspace, tmp_path):
        out = tmp_path / "results"
        assert run_explain(workspace, out, ["--limit", "2"]) == 0
        return tmp_path

    def test_emits_wellformed_svg_and_summary(self, results_dir):
        assert main(["report", str(results_dir)]) == 0
        for name in ("mean_target_prob", "mean_l1", "mean_sparsity"):
            tree = ET.parse(results_dir / f"{name}.svg")
            assert tree.getroot().tag.endswith("svg")
        assert (results_dir / "summary.md").read_text().startswith("| dataset |")

    def test_bar_heights_proportional_to_values(self, tmp_path):
        csv = ("dataset,method,n,validity_rate,mean_target_prob,mean_l1,mean_sparsity\n"
               "d1,mcels,4,1.0,0.8,2.0,0.9\n"
               "d1,full-nun,4,1.0,0.4,8.0,0.3\n")
        (tmp_path / "aggregate.csv").write_text(csv)
        assert main(["report", str(tmp_path)]) == 0
        tree = ET.parse(tmp_path / "mean_target_prob.svg")
        ns = "{http://www.w3.org/2000/svg}"
        bars = [el for el in tree.iter(f"{ns}rect")
                if el.get("class") == "bar"]
        heights = [float(el.get("height")) for el in bars]
        values = [float(el.get("data-value")) for el in bars]
        assert len(bars) == 2
        assert heights[0] / heights[1] == pytest.approx(values[0] / values[1], rel=1e-6)

    def test_empty_dir_exit_2(self, tmp_path, capsys):
        assert main(["report", str(tmp_path)]) == 2

    def test_missing_column_exit_2_names_column(self, tmp_path, capsys):
        (tmp_path / "aggregate.csv").write_text("dataset,method,n\nd,m,1\n")
        assert main(["report", str(tmp_path)]) == 2
        assert "mean" in capsys.readouterr().err


class TestConvert:
    def test_ts_to_native(self, tmp_path):
        ts = tmp_path / "toy.ts"
        ts.write_text(
            "@problemName toy\n@dimensions 2\n@seriesLength 2\n"
            "@equalLength true\n@classLabel true a b\n@data\n"
            "1,2:3,4:a\n5,6:7,8:b\n")
        out = tmp_path / "toy.mts"
        assert main(["convert", str(ts), str(out)]) == 0
        ds = load_dataset(out)
        assert ds.n == 2 and ds.n_dims == 2 and ds.n_classes == 2
        assert np.array_equal(ds.X[0], [[1, 3], [2, 4]])

    def test_missing_input_exit_2(self, tmp_path, capsys):
        assert main(["convert", str(tmp_path / "no.ts"), str(tmp_path / "o")]) == 2


class TestUsage:
    def test_unknown_flag_exit_1(self, capsys):
        assert main(["train", "--bogus"]) == 1

    def test_missing_required_flag_exit_1(self, capsys):
        assert main(["train"]) == 1

    def test_no_command_exit_1(self, capsys):
        assert main([]) == 1
