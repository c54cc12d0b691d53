"""experiment-cli data layer: dataset I/O and SBM generation."""

import filecmp
import json
import os

import numpy as np
import pytest

from legnn import DatasetError, gen_sbm, load_dataset, save_dataset
from legnn.data import make_splits


@pytest.fixture
def saved(tmp_path, small_sbm):
    d = str(tmp_path / "ds")
    save_dataset(small_sbm, d)
    return d


class TestRoundTrip:
    def test_identity(self, saved, small_sbm):
        loaded = load_dataset(saved)
        assert loaded.num_nodes == small_sbm.num_nodes
        assert np.array_equal(loaded.graph.col_indices, small_sbm.graph.col_indices)
        assert np.array_equal(loaded.graph.row_offsets, small_sbm.graph.row_offsets)
        assert np.array_equal(loaded.features, small_sbm.features)  # %.17g is lossless
        assert np.array_equal(loaded.clean_labels, small_sbm.clean_labels)
        for key in ("train", "val", "test"):
            assert np.array_equal(loaded.splits[key], small_sbm.splits[key])

    def test_required_files_written(self, saved):
        for name in ("meta.json", "edges.tsv", "features.csv", "labels.csv", "splits.json"):
            assert os.path.exists(os.path.join(saved, name))


class TestValidation:
    def test_missing_file(self, saved):
        os.remove(os.path.join(saved, "labels.csv"))
        with pytest.raises(DatasetError) as exc:
            load_dataset(saved)
        assert any("missing file: labels.csv" in p for p in exc.value.problems)

    def test_label_out_of_range_names_line(self, saved, small_sbm):
        path = os.path.join(saved, "labels.csv")
        lines = open(path).read().splitlines()
        lines[7] = str(small_sbm.num_classes)  # class id == C is invalid
        open(path, "w").write("\n".join(lines) + "\n")
        with pytest.raises(DatasetError) as exc:
            load_dataset(saved)
        assert any("line 8" in p for p in exc.value.problems)

    def test_overlapping_splits(self, saved):
        path = os.path.join(saved, "splits.json")
        splits = json.load(open(path))
        splits["val"][0] = splits["train"][0]
        json.dump(splits, open(path, "w"))
        with pytest.raises(DatasetError, match="overlap"):
            load_dataset(saved)

    def test_bad_edge_line(self, saved):
        with open(os.path.join(saved, "edges.tsv"), "a") as fh:
            fh.write("1 2\n")  # space, not tab
        with pytest.raises(DatasetError) as exc:
            load_dataset(saved)
        assert any("src<TAB>dst" in p for p in exc.value.problems)

    def test_collects_multiple_problems(self, saved, small_sbm):
        path = os.path.join(saved, "labels.csv")
        lines = open(path).read().splitlines()
        lines[0] = "99"
        lines[1] = "99"
        open(path, "w").write("\n".join(lines) + "\n")
        with pytest.raises(DatasetError) as exc:
            load_dataset(saved)
        assert len(exc.value.problems) >= 2


class TestGenSbm:
    def test_disconnected_when_p_out_zero(self):
        b = gen_sbm(3, 15, 0.3, 0.0, 4, 1.0, seed=1)
        rows, cols = b.graph.row_ids(), b.graph.col_indices
        labels = b.clean_labels
        cross = (labels[rows] != labels[cols]).sum()
        assert cross == 0

    def test_intra_class_edge_count(self):
        C, m, p_in = 4, 60, 0.1
        b = gen_sbm(C, m, p_in, 0.0, 4, 1.0, seed=2)
        edges = (b.graph.nnz - b.num_nodes) // 2
        expected = C * p_in * m * (m - 1) / 2
        sigma = np.sqrt(C * m * (m - 1) / 2 * p_in * (1 - p_in))
        assert abs(edges - expected) < 3 * sigma

    def test_same_seed_identical_bytes(self, tmp_path):
        a, bdir = str(tmp_path / "a"), str(tmp_path / "b")
        save_dataset(gen_sbm(3, 10, 0.2, 0.02, 4, 1.5, seed=9), a)
        save_dataset(gen_sbm(3, 10, 0.2, 0.02, 4, 1.5, seed=9), bdir)
        for name in ("meta.json", "edges.tsv", "features.csv", "labels.csv", "splits.json"):
            assert filecmp.cmp(os.path.join(a, name), os.path.join(bdir, name), shallow=False)

    def test_invalid_probabilities(self):
        with pytest.raises(ValueError):
            gen_sbm(3, 10, 0.01, 0.05, 4, 1.0, seed=0)  # p_out > p_in
        with pytest.raises(ValueError):
            gen_sbm(3, 10, 0.1, 0.01, 4, 0.0, seed=0)  # zero shift

    def test_split_rates(self):
        b = gen_sbm(5, 100, 0.05, 0.005, 8, 2.0, seed=0)
        assert len(b.splits["train"]) == 25   # 5% of 500
        assert len(b.splits["val"]) == 75     # 15%
        assert len(b.splits["test"]) == 400


def test_make_splits_disjoint_and_complete():
    splits = make_splits(200, np.random.default_rng(0))
    combined = np.concatenate([splits["train"], splits["val"], splits["test"]])
    assert np.array_equal(np.sort(combined), np.arange(200))
    assert len(splits["train"]) == 10
    assert len(splits["val"]) == 30
