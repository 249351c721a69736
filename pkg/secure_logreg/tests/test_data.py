"""
Tests for synthetic generation, CSV ingestion and partitioning
"""
import numpy as np
import pytest

from secure_logreg.data import (
    SyntheticSpec,
    TabularSource,
    file_checksum,
    generate_synthetic,
    load_csv,
    partition_horizontal,
    write_institution_csvs,
)
from secure_logreg.errors import (
    CSVParseError,
    DataError,
    InvalidSpecError,
    MissingColumnError,
    NonBinaryResponseError,
    TooManyPartitionsError,
)
from secure_logreg.regression import sigmoid
from secure_logreg.types import LocalDataset


def write(path, text: str):
    path.write_text(text, encoding="utf-8")
    return path


class TestSyntheticSpec:
    """Test SyntheticSpec validation"""

    @pytest.mark.parametrize("kwargs", [
        {"d": 1, "sizes": (10,)},
        {"d": 3, "sizes": ()},
        {"d": 3, "sizes": (10, 0)},
        {"d": 3, "sizes": (10,), "sigma": 0.0},
        {"d": 3, "sizes": (10,), "beta_range": (1.0, -1.0)},
        {"d": 3, "sizes": (10,), "true_beta": (1.0, 2.0)},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidSpecError):
            SyntheticSpec(**kwargs)

    def test_even_split(self):
        spec = SyntheticSpec.even(10, 3, 3)
        assert spec.sizes == (4, 3, 3)
        assert spec.records == 10
        assert spec.S == 3

    def test_even_split_too_many_institutions(self):
        with pytest.raises(InvalidSpecError):
            SyntheticSpec.even(2, 3, 3)


class TestGenerateSynthetic:
    """Test synthetic consortium generation"""

    def test_shapes_and_intercept(self):
        datasets, beta = generate_synthetic(SyntheticSpec(d=4, sizes=(30, 20), seed=1))
        assert [ds.n_rows for ds in datasets] == [30, 20]
        assert beta.shape == (4,)
        assert np.all((beta >= -1) & (beta <= 1))
        for ds in datasets:
            assert np.all(ds.X[:, 0] == 1.0)
            assert set(np.unique(ds.y)) <= {0.0, 1.0}
        assert [ds.institution_id for ds in datasets] == ["institution-0", "institution-1"]

    def test_deterministic(self):
        spec = SyntheticSpec(d=3, sizes=(50, 50), seed=9)
        (a, beta_a), (b, beta_b) = generate_synthetic(spec), generate_synthetic(spec)
        np.testing.assert_array_equal(beta_a, beta_b)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.X, y.X)
            np.testing.assert_array_equal(x.y, y.y)

    def test_intercept_only_rate(self):
        beta0 = 0.8
        spec = SyntheticSpec(d=2, sizes=(100_000,), sigma=1e-9, true_beta=(beta0, 0.0), seed=3)
        (ds,), _ = generate_synthetic(spec)
        p = sigmoid(beta0)
        se = np.sqrt(p * (1 - p) / ds.n_rows)
        assert abs(ds.y.mean() - p) <= 3 * se

    def test_responses_follow_logistic_model(self):
        spec = SyntheticSpec(d=3, sizes=(100_000,), seed=5)
        (ds,), beta = generate_synthetic(spec)
        eta = ds.X @ beta
        edges = np.quantile(eta, np.linspace(0, 1, 11))
        bins = np.clip(np.searchsorted(edges, eta, side="right") - 1, 0, 9)
        for k in range(10):
            mask = bins == k
            p_emp = ds.y[mask].mean()
            p_model = sigmoid(eta[mask]).mean()
            se = np.sqrt(p_model * (1 - p_model) / mask.sum())
            assert abs(p_emp - p_model) <= 3 * se + 1e-3

    @pytest.mark.slow
    def test_million_records(self):
        datasets, _ = generate_synthetic(SyntheticSpec.even(1_000_000, 6, 6, seed=7))
        assert len(datasets) == 6
        assert sum(ds.n_rows for ds in datasets) == 1_000_000


class TestLoadCSV:
    """Test CSV ingestion"""

    def test_hand_written(self, tmp_path):
        path = write(tmp_path / "tiny.csv", "age,dose,y\n1.5,2,1\n-3,0.25,0\n")
        ds = load_csv(TabularSource(path, "y"))
        np.testing.assert_array_equal(ds.X, [[1.0, 1.5, 2.0], [1.0, -3.0, 0.25]])
        np.testing.assert_array_equal(ds.y, [1.0, 0.0])
        assert ds.institution_id == "tiny"

    def test_covariate_selection_and_delimiter(self, tmp_path):
        path = write(tmp_path / "semi.csv", "a;b;c;label\n1;2;3;1\n4;5;6;0\n")
        ds = load_csv(TabularSource(path, "label", covariates=("c", "a"), delimiter=";"))
        np.testing.assert_array_equal(ds.X, [[1.0, 3.0, 1.0], [1.0, 6.0, 4.0]])

    def test_non_binary_response(self, tmp_path):
        path = write(tmp_path / "bad.csv", "x,y\n1,0\n2,2\n")
        with pytest.raises(NonBinaryResponseError):
            load_csv(TabularSource(path, "y"))

    def test_text_labels_need_mapping(self, tmp_path):
        path = write(tmp_path / "labels.csv", "x,y\n1,yes\n2,no\n")
        with pytest.raises(NonBinaryResponseError):
            load_csv(TabularSource(path, "y"))
        ds = load_csv(TabularSource(path, "y", response_mapping={"yes": 1, "no": 0}))
        np.testing.assert_array_equal(ds.y, [1.0, 0.0])

    def test_missing_response_column(self, tmp_path):
        path = write(tmp_path / "nocol.csv", "x,z\n1,0\n")
        with pytest.raises(MissingColumnError):
            load_csv(TabularSource(path, "y"))

    def test_missing_covariate_column(self, tmp_path):
        path = write(tmp_path / "nocov.csv", "x,y\n1,0\n")
        with pytest.raises(MissingColumnError):
            load_csv(TabularSource(path, "y", covariates=("x", "w")))

    def test_unparseable_cell_has_diagnostics(self, tmp_path):
        path = write(tmp_path / "cell.csv", "x1,x2,y\n1,2,0\n3,abc,1\n")
        with pytest.raises(CSVParseError) as exc:
            load_csv(TabularSource(path, "y"))
        assert exc.value.row == 3
        assert exc.value.column == "x2"

    def test_ragged_row(self, tmp_path):
        path = write(tmp_path / "ragged.csv", "x,y\n1,0\n2,1,7,8\n")
        with pytest.raises(CSVParseError):
            load_csv(TabularSource(path, "y"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(TabularSource(tmp_path / "nope.csv", "y"))

    def test_response_listed_as_covariate(self, tmp_path):
        with pytest.raises(InvalidSpecError):
            TabularSource(tmp_path / "x.csv", "y", covariates=("x", "y"))

    def test_wide_file(self, tmp_path):
        rng = np.random.default_rng(0)
        n, k = 9822, 84
        cov = rng.normal(size=(n, k))
        y = rng.integers(0, 2, size=n)
        header = ",".join([f"f{j}" for j in range(k)] + ["caravan"])
        lines = [header] + [",".join([*(f"{v:.6f}" for v in row), str(t)]) for row, t in zip(cov, y)]
        path = write(tmp_path / "insurance.csv", "\n".join(lines) + "\n")
        ds = load_csv(TabularSource(path, "caravan"))
        assert ds.n_rows == 9822
        assert ds.n_coefficients == 85


class TestPartition:
    """Test horizontal partitioning"""

    @pytest.fixture
    def pooled(self, rng):
        X = np.hstack([np.ones((10, 1)), rng.normal(size=(10, 2))])
        return LocalDataset(X, rng.integers(0, 2, size=10).astype(float), "pooled")

    def test_single_partition_is_identity(self, pooled):
        assert partition_horizontal(pooled, 1, seed=0) == [pooled]

    def test_near_equal_sizes(self, pooled):
        parts = partition_horizontal(pooled, 3, seed=0)
        assert sorted(p.n_rows for p in parts) == [3, 3, 4]

    def test_lossless(self, pooled):
        parts = partition_horizontal(pooled, 4, seed=1)
        rows = sorted(tuple(np.append(x, y)) for p in parts for x, y in zip(p.X, p.y))
        expected = sorted(tuple(np.append(x, y)) for x, y in zip(pooled.X, pooled.y))
        assert rows == expected

    def test_deterministic(self, pooled):
        a = partition_horizontal(pooled, 3, seed=5)
        b = partition_horizontal(pooled, 3, seed=5)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.X, y.X)

    def test_too_many_partitions(self, pooled):
        with pytest.raises(TooManyPartitionsError):
            partition_horizontal(pooled, 11, seed=0)


class TestWriteInstitutionCSVs:
    """Test dataset export"""

    def test_round_trip_is_exact(self, tmp_path):
        datasets, _ = generate_synthetic(SyntheticSpec(d=3, sizes=(25, 15), seed=2))
        paths = write_institution_csvs(datasets, tmp_path)
        assert [p.name for p in paths] == ["institution-0.csv", "institution-1.csv"]
        for ds, path in zip(datasets, paths):
            loaded = load_csv(TabularSource(path, "y"))
            np.testing.assert_array_equal(loaded.X, ds.X)
            np.testing.assert_array_equal(loaded.y, ds.y)

    def test_seventeen_digit_values_reload_bit_identically(self, tmp_path):
        (ds,), _ = generate_synthetic(SyntheticSpec(d=6, sizes=(10_000,), seed=8))
        (path,) = write_institution_csvs([ds], tmp_path)
        loaded = load_csv(TabularSource(path, "y"))
        mismatched = int(np.sum(loaded.X != ds.X))
        assert mismatched == 0

    def test_bad_cell_after_many_good_rows(self, tmp_path):
        lines = ["x,y"] + [f"{float(v)!r},0" for v in np.random.default_rng(1).normal(size=50)] + ["1e,1"]
        path = write(tmp_path / "late.csv", "\n".join(lines) + "\n")
        with pytest.raises(CSVParseError) as exc:
            load_csv(TabularSource(path, "y"))
        assert exc.value.row == 52
        assert exc.value.column == "x"

    def test_checksums_stable(self, tmp_path):
        spec = SyntheticSpec(d=3, sizes=(20,), seed=4)
        a = write_institution_csvs(generate_synthetic(spec)[0], tmp_path / "a")
        b = write_institution_csvs(generate_synthetic(spec)[0], tmp_path / "b")
        assert file_checksum(a[0]) == file_checksum(b[0])
