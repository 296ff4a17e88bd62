import json

import numpy as np
import pytest

from fiforest.baseline import fit_if
from fiforest.data import FunctionalDataset, uniform_grid
from fiforest.errors import DataError
from fiforest.forest import FIForest, ForestConfig, fit
from fiforest.model_io import load_model, save_model
from fiforest.synthetic import gen_brownian_dataset, gen_cuevas105


def roundtrip(forest, tmp_path, name="model.json"):
    path = tmp_path / name
    save_model(forest, path)
    return load_model(path), path


class TestFunctionalRoundTrip:
    @pytest.mark.parametrize(
        "dictionary",
        [
            {"family": "gaussian_wavelet", "size": 40},
            {"family": "dyadic_indicator"},
            {"family": "brownian", "size": 15},
            "self",
            "local_self",
            {"family": "cosine", "size": None},
            {"family": "mixture", "components": [
                {"family": "cosine", "weight": 0.5},
                {"family": "self", "weight": 0.5},
            ]},
        ],
    )
    def test_reloaded_model_scores_identically(self, tmp_path, dictionary):
        data = gen_brownian_dataset(25, 30, seed=4)
        queries = gen_brownian_dataset(10, 30, seed=5)
        f = fit(data, ForestConfig(seed=6, n_trees=10, dictionary=dictionary))
        back, _ = roundtrip(f, tmp_path)
        np.testing.assert_array_equal(back.score_samples(queries), f.score_samples(queries))

    def test_combined_product_round_trips(self, tmp_path):
        data = gen_cuevas105(seed=1)
        f = fit(
            data,
            ForestConfig(
                seed=2,
                n_trees=8,
                dictionary={"family": "gaussian_wavelet", "size": 30},
                inner_product={"kind": "combined", "alpha": 0.5},
            ),
        )
        back, _ = roundtrip(f, tmp_path)
        np.testing.assert_array_equal(back.score_samples(data), f.score_samples(data))

    def test_multichannel_round_trips(self, tmp_path):
        rng = np.random.default_rng(0)
        data = FunctionalDataset(grid=uniform_grid(20), values=rng.standard_normal((12, 2, 20)))
        f = fit(
            data,
            ForestConfig(seed=1, n_trees=6, dictionary="sinuscosine2d",
                         inner_product=["l2", "deriv"]),
        )
        back, _ = roundtrip(f, tmp_path)
        np.testing.assert_array_equal(back.score_samples(data), f.score_samples(data))


class TestBytesOnDisk:
    def test_two_saves_are_byte_identical(self, tmp_path):
        data = gen_brownian_dataset(20, 25, seed=1)
        f = fit(data, ForestConfig(seed=3, n_trees=5))
        save_model(f, tmp_path / "a.json")
        save_model(f, tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_refit_same_seed_is_byte_identical(self, tmp_path):
        data = gen_brownian_dataset(20, 25, seed=1)
        save_model(fit(data, ForestConfig(seed=3, n_trees=5)), tmp_path / "a.json")
        save_model(fit(data, ForestConfig(seed=3, n_trees=5)), tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_thread_count_is_not_part_of_the_model(self, tmp_path):
        data = gen_brownian_dataset(20, 25, seed=1)
        save_model(fit(data, ForestConfig(seed=3, n_trees=8, threads=1)), tmp_path / "a.json")
        save_model(fit(data, ForestConfig(seed=3, n_trees=8, threads=4)), tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


class TestStorageChoices:
    def test_parametric_atoms_store_parameters_not_values(self, tmp_path):
        data = gen_brownian_dataset(15, 20, seed=1)
        f = fit(data, ForestConfig(seed=2, n_trees=3, dictionary={"family": "cosine", "size": 6}))
        _, path = roundtrip(f, tmp_path)
        doc = json.loads(path.read_text())
        assert all("values" not in rec and "a" in rec for rec in doc["atoms"])

    def test_stochastic_atoms_store_values(self, tmp_path):
        data = gen_brownian_dataset(15, 20, seed=1)
        f = fit(data, ForestConfig(seed=2, n_trees=3, dictionary={"family": "brownian", "size": 4}))
        _, path = roundtrip(f, tmp_path)
        doc = json.loads(path.read_text())
        assert all("values" in rec for rec in doc["atoms"])

    def test_self_splits_embed_their_curves(self, tmp_path):
        data = gen_brownian_dataset(15, 20, seed=1)
        f = fit(data, ForestConfig(seed=2, n_trees=3, dictionary="self"))
        back, _ = roundtrip(f, tmp_path)
        assert back.train_pack is None
        queries = gen_brownian_dataset(5, 20, seed=9)
        np.testing.assert_array_equal(back.score_samples(queries), f.score_samples(queries))


class TestBaselineRoundTrip:
    @pytest.mark.parametrize("mode", ["axis", "extended"])
    def test_vector_models_reload(self, tmp_path, mode):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((40, 3))
        f = fit_if(X, ForestConfig(seed=4, n_trees=9), mode=mode)
        back, _ = roundtrip(f, tmp_path)
        np.testing.assert_array_equal(back.score_samples(X), f.score_samples(X))
        assert back.mode == mode


class TestFileValidation:
    def test_truncated_json_is_a_data_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "fif-forest/1", "mode": ')
        with pytest.raises(DataError, match="not a valid model file"):
            load_model(path)

    def test_wrong_format_tag_rejected(self, tmp_path):
        data = gen_brownian_dataset(10, 15, seed=1)
        f = fit(data, ForestConfig(seed=1, n_trees=2))
        path = tmp_path / "m.json"
        save_model(f, path)
        doc = json.loads(path.read_text())
        doc["format"] = "something-else/9"
        path.write_text(json.dumps(doc))
        with pytest.raises(DataError, match="format"):
            load_model(path)

    def test_loaded_model_is_the_right_class(self, tmp_path):
        data = gen_brownian_dataset(10, 15, seed=1)
        back, _ = roundtrip(fit(data, ForestConfig(seed=1, n_trees=2)), tmp_path)
        assert isinstance(back, FIForest)
