import json

import numpy as np
import pytest

from hdsl.cli import main
from hdsl.model import deserialize
from hdsl.sparse_data import Dataset, SparseVector, parse_libsvm, serialize_libsvm


@pytest.fixture
def labeled_file(tmp_path):
    rng = np.random.default_rng(0)
    pts, labels = [], []
    for c in range(2):
        for _ in range(12):
            base = np.arange(c * 4, c * 4 + 3)
            extra = rng.choice(np.arange(8, 20), 2, replace=False)
            idx = np.sort(np.concatenate([base, extra]))
            pts.append(SparseVector(idx, rng.uniform(0.3, 1.0, idx.size), 20))
            labels.append(c)
    ds = Dataset(pts, labels, dim=20)
    path = tmp_path / "train.svm"
    path.write_text(serialize_libsvm(ds))
    return path


def run(args):
    return main([str(a) for a in args])


class TestTrain:
    def test_deterministic_model_file(self, tmp_path, labeled_file, capsys):
        outs = []
        for rep in range(2):
            out = tmp_path / f"m{rep}.hdsl"
            code = run(
                ["train", "--data", labeled_file, "--lambda", 5, "--iters", 30,
                 "--oracle", "exact", "--seed", 1, "--out", out]
            )
            assert code == 0
            outs.append(out.read_text())
        assert outs[0] == outs[1]

    def test_missing_data_file_exits_3(self, tmp_path, capsys):
        code = run(["train", "--data", tmp_path / "absent.svm", "--lambda", 1,
                    "--out", tmp_path / "m.hdsl"])
        assert code == 3

    def test_bad_flags_exit_2(self, labeled_file, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run(["train", "--data", labeled_file, "--out", tmp_path / "m.hdsl"])
        assert exc.value.code == 2

    def test_history_jsonl_schema(self, tmp_path, labeled_file, capsys):
        hist = tmp_path / "h.jsonl"
        code = run(["train", "--data", labeled_file, "--lambda", 5, "--iters", 20,
                    "--seed", 0, "--out", tmp_path / "m.hdsl", "--history", hist])
        assert code == 0
        rows = [json.loads(line) for line in hist.read_text().splitlines()]
        assert rows
        for row in rows:
            assert {"k", "objective", "gap", "step", "gamma", "atoms", "features"} <= set(row)
            assert row["step"] in ("F", "A")

    def test_constraint_file_round_trip(self, tmp_path, labeled_file, capsys):
        trip = tmp_path / "t.txt"
        trip.write_text("0 1 12\n2 3 13\n")
        code = run(["train", "--data", labeled_file, "--constraints", "file",
                    "--triplets", trip, "--lambda", 2, "--iters", 10,
                    "--out", tmp_path / "m.hdsl"])
        assert code == 0

    def test_solver_precondition_exit_4(self, tmp_path, capsys):
        # single-class data cannot build random-label constraints
        data = tmp_path / "one.svm"
        data.write_text("1 1:1.0\n1 2:1.0\n")
        code = run(["train", "--data", data, "--constraints", "random-label",
                    "--lambda", 1, "--out", tmp_path / "m.hdsl"])
        assert code == 4


class TestEval:
    def test_eval_json(self, tmp_path, labeled_file, capsys):
        model = tmp_path / "m.hdsl"
        assert run(["train", "--data", labeled_file, "--lambda", 5, "--iters", 30,
                    "--seed", 1, "--out", model]) == 0
        capsys.readouterr()
        code = run(["eval", "--model", model, "--train", labeled_file,
                    "--test", labeled_file, "--k", 1])
        assert code == 0
        out = json.loads(capsys.readouterr().out)
        assert {"knn_error", "atoms", "features", "nnz"} <= set(out)
        assert out["k"] == 1

    def test_corrupt_model_exits_3(self, tmp_path, labeled_file):
        bad = tmp_path / "bad.hdsl"
        bad.write_text("not a model\n")
        code = run(["eval", "--model", bad, "--train", labeled_file, "--test", labeled_file])
        assert code == 3


class TestProject:
    def test_projected_dots_match_similarity(self, tmp_path, labeled_file, capsys):
        model_path = tmp_path / "m.hdsl"
        proj_path = tmp_path / "p.svm"
        assert run(["train", "--data", labeled_file, "--lambda", 5, "--iters", 30,
                    "--seed", 1, "--out", model_path]) == 0
        assert run(["project", "--model", model_path, "--data", labeled_file,
                    "--out", proj_path]) == 0
        model = deserialize(model_path.read_text())
        ds = parse_libsvm(labeled_file.read_text(), dim=model.dim)
        projected = parse_libsvm(proj_path.read_text(), dim=model.n_atoms)
        from hdsl.model import similarity

        for a in range(0, len(ds), 5):
            for b in range(0, len(ds), 7):
                lhs = np.dot(projected[a].to_dense(), projected[b].to_dense())
                assert lhs == pytest.approx(similarity(model, ds[a], ds[b]), abs=1e-10)

    def test_single_atom_gives_one_dimension(self, tmp_path, labeled_file, capsys):
        model_path = tmp_path / "m1.hdsl"
        model_path.write_text("hdsl-model 1\nlambda 2 dim 20\nP 0 4 1\n")
        proj_path = tmp_path / "p1.svm"
        assert run(["project", "--model", model_path, "--data", labeled_file,
                    "--out", proj_path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["dimensions"] == 1

    def test_empty_dataset_gives_empty_output(self, tmp_path, capsys):
        model_path = tmp_path / "m1.hdsl"
        model_path.write_text("hdsl-model 1\nlambda 2 dim 20\nP 0 4 1\n")
        data = tmp_path / "empty.svm"
        data.write_text("")
        proj_path = tmp_path / "p2.svm"
        assert run(["project", "--model", model_path, "--data", data, "--out", proj_path]) == 0
        assert proj_path.read_text() == ""


class TestSynth:
    def test_recovery_outputs_consume_cleanly(self, tmp_path, capsys):
        out_dir = tmp_path / "rec"
        code = run(["synth", "recovery", "--d", 60, "--bases", 8, "--alpha", 0.2,
                    "--n", 60, "--triplets", 400, "--seed", 3, "--out-dir", out_dir])
        assert code == 0
        samples = parse_libsvm((out_dir / "samples.svm").read_text())
        truth = deserialize((out_dir / "truth.hdsl").read_text())
        assert truth.n_atoms == 8
        assert len(samples) == 60
        # triplet file feeds back into train via --constraints file
        model_out = tmp_path / "m.hdsl"
        code = run(["train", "--data", out_dir / "samples.svm", "--dim", 60,
                    "--constraints", "file", "--triplets", out_dir / "triplets.txt",
                    "--lambda", 10, "--iters", 15, "--out", model_out])
        assert code == 0

    def test_recovery_seed_reproducible(self, tmp_path, capsys):
        texts = []
        for rep in range(2):
            out_dir = tmp_path / f"rec{rep}"
            assert run(["synth", "recovery", "--d", 40, "--bases", 5, "--n", 40,
                        "--triplets", 100, "--seed", 9, "--out-dir", out_dir]) == 0
            texts.append((out_dir / "samples.svm").read_text()
                         + (out_dir / "truth.hdsl").read_text()
                         + (out_dir / "triplets.txt").read_text())
        assert texts[0] == texts[1]

    def test_link_protocol_runs(self, tmp_path, capsys):
        out_dir = tmp_path / "lnk"
        code = run(["synth", "link", "--d", 300, "--n", 60, "--links", 90,
                    "--per-link", 2, "--bases", 10, "--avg-sparsity", 0.06,
                    "--seed", 3, "--out-dir", out_dir, "--run",
                    "--lambda", 20, "--iters", 60, "--oracle", "heuristic", "--batch", 32])
        assert code == 0
        metrics = json.loads((out_dir / "metrics.json").read_text())
        assert 0.0 <= metrics["test_auc"] <= 1.0
        assert (out_dir / "links.train.txt").exists()

    def test_run_without_lambda_exits_2(self, tmp_path):
        code = run(["synth", "recovery", "--d", 40, "--bases", 5, "--n", 40,
                    "--triplets", 100, "--seed", 1, "--out-dir", tmp_path / "x", "--run"])
        assert code == 2
