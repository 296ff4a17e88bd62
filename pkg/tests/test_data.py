import numpy as np
import pytest

from fiforest.data import (
    FunctionalDataset,
    TimeGrid,
    as_value_array,
    finite_difference,
    load_dataset,
    load_ucr,
    save_dataset,
    uniform_grid,
)
from fiforest.errors import DataError


class TestTimeGrid:
    def test_rejects_non_increasing_points(self):
        with pytest.raises(DataError, match="strictly increasing"):
            TimeGrid(np.array([0.0, 0.5, 0.5, 1.0]))

    def test_rejects_points_outside_unit_interval(self):
        with pytest.raises(DataError, match=r"\[0, 1\]"):
            TimeGrid(np.array([0.0, 0.5, 1.2]))

    def test_rejects_single_point(self):
        with pytest.raises(DataError):
            TimeGrid(np.array([0.5]))

    def test_uniform_grid_endpoints(self):
        g = uniform_grid(11)
        assert g.p == 11
        assert g.points[0] == 0.0 and g.points[-1] == 1.0
        np.testing.assert_allclose(np.diff(g.points), 0.1)

    def test_equality_is_pointwise(self):
        assert uniform_grid(5) == uniform_grid(5)
        assert uniform_grid(5) != uniform_grid(6)
        assert uniform_grid(5) != TimeGrid(np.linspace(0.0, 0.9, 5))


class TestValueCoercion:
    def test_single_curve_gets_unit_axes(self):
        assert as_value_array(np.zeros(7)).shape == (1, 1, 7)

    def test_matrix_is_univariate_batch(self):
        assert as_value_array(np.zeros((4, 7))).shape == (4, 1, 7)

    def test_single_multichannel_curve(self):
        assert as_value_array(np.zeros((3, 7)), n_channels=3).shape == (1, 3, 7)

    def test_rejects_nan(self):
        with pytest.raises(DataError, match="NaN"):
            as_value_array(np.array([0.0, np.nan, 1.0]))


class TestFunctionalDataset:
    def test_grid_length_must_match(self):
        with pytest.raises(DataError, match="grid"):
            FunctionalDataset(grid=uniform_grid(5), values=np.zeros((3, 7)))

    def test_labels_must_be_binary(self):
        with pytest.raises(DataError, match="0 .* or 1"):
            FunctionalDataset(grid=uniform_grid(5), values=np.zeros((2, 5)), labels=[0, 3])

    def test_subset_carries_labels(self):
        ds = FunctionalDataset(
            grid=uniform_grid(4),
            values=np.arange(12.0).reshape(3, 4),
            labels=[0, 1, 0],
            class_labels=[5, 6, 7],
        )
        sub = ds.subset([2, 0])
        np.testing.assert_array_equal(sub.labels, [0, 0])
        np.testing.assert_array_equal(sub.class_labels, [7, 5])
        np.testing.assert_array_equal(sub.values[0], ds.values[2])


def test_finite_difference_of_line_is_constant():
    grid = uniform_grid(50)
    vals = 3.0 * grid.points - 1.0
    df = finite_difference(vals, grid)
    np.testing.assert_allclose(df, 3.0, atol=1e-9)


def test_finite_difference_repeats_last_column():
    grid = uniform_grid(20)
    rng = np.random.default_rng(0)
    vals = rng.standard_normal((3, 20))
    df = finite_difference(vals, grid)
    np.testing.assert_array_equal(df[:, -1], df[:, -2])
    assert df.shape == vals.shape


class TestUcrFormat:
    def test_reads_tab_separated_label_first(self, tmp_path):
        path = tmp_path / "toy.tsv"
        path.write_text("1\t0.0\t1.0\t2.0\n2\t3.0\t4.0\t5.0\n")
        ds = load_ucr(path)
        assert ds.n == 2 and ds.p == 3
        np.testing.assert_array_equal(ds.class_labels, [1, 2])
        np.testing.assert_allclose(ds.values[1, 0], [3.0, 4.0, 5.0])

    def test_reads_comma_separated(self, tmp_path):
        path = tmp_path / "toy.csv"
        path.write_text("-1,0.5,1.5,2.5\n")
        ds = load_ucr(path)
        assert ds.class_labels[0] == -1

    def test_empty_file_is_data_error(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("")
        with pytest.raises(DataError, match="empty"):
            load_ucr(path)

    def test_ragged_row_names_the_row(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1,0.0,1.0,2.0\n1,0.0,1.0\n")
        with pytest.raises(DataError, match="row 2"):
            load_ucr(path)

    def test_bad_cell_names_row_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,0.0,oops,2.0\n")
        with pytest.raises(DataError, match="row 1, column 3"):
            load_ucr(path)


class TestOwnFormat:
    def test_round_trip_is_exact(self, tmp_path):
        rng = np.random.default_rng(42)
        ds = FunctionalDataset(
            grid=TimeGrid(np.sort(rng.uniform(0, 1, 9))),
            values=rng.standard_normal((6, 9)) * 1e3,
            labels=rng.integers(0, 2, 6),
        )
        path = tmp_path / "ds.csv"
        save_dataset(ds, path)
        back = load_dataset(path)
        np.testing.assert_array_equal(back.values, ds.values)
        np.testing.assert_array_equal(back.grid.points, ds.grid.points)
        np.testing.assert_array_equal(back.labels, ds.labels)

    def test_multichannel_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        ds = FunctionalDataset(grid=uniform_grid(5), values=rng.standard_normal((4, 3, 5)))
        path = tmp_path / "mv.csv"
        save_dataset(ds, path)
        back = load_dataset(path)
        assert back.d == 3
        np.testing.assert_array_equal(back.values, ds.values)

    def test_falls_back_to_ucr_without_header(self, tmp_path):
        path = tmp_path / "plain.tsv"
        path.write_text("1\t0.0\t1.0\t2.0\n")
        ds = load_dataset(path)
        assert ds.n == 1 and ds.p == 3

    def test_non_binary_class_labels_do_not_become_anomaly_labels(self, tmp_path):
        path = tmp_path / "cls.csv"
        ds = FunctionalDataset(
            grid=uniform_grid(4), values=np.zeros((2, 4)), class_labels=[3, 5]
        )
        save_dataset(ds, path)
        back = load_dataset(path)
        assert back.labels is None
        np.testing.assert_array_equal(back.class_labels, [3, 5])
