import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loair.data import (Dataset, SealedDataset, apply_normalizer, fit_normalizer, load_csv, save_csv,
                        split, split_sizes, synth_locally_varying)
from loair.errors import DataError, DomainError, FeatureLookupError, ParseError
from loair.ols import fit_dataset


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_load_csv_shape(tmp_path):
    ds = load_csv(write(tmp_path, "a,b,target\n1,2,3\n4,5,6\n7,8,9.5\n"), "target")
    assert (ds.n, ds.p) == (3, 2)
    assert ds.feature_names == ("a", "b")
    np.testing.assert_array_equal(ds.y, [3, 6, 9.5])


def test_target_in_middle(tmp_path):
    ds = load_csv(write(tmp_path, "a,t,b\n1,2,3\n"), "t")
    assert ds.feature_names == ("a", "b")
    np.testing.assert_array_equal(ds.X, [[1, 3]])


def test_na_cell_is_parse_error(tmp_path):
    with pytest.raises(ParseError) as info:
        load_csv(write(tmp_path, "a,b,target\n1,2,3\n4,NA,6\n"), "target")
    assert info.value.row == 2 and info.value.column == "b"
    assert "NA" in str(info.value)


def test_non_finite_cell_rejected(tmp_path):
    with pytest.raises(ParseError):
        load_csv(write(tmp_path, "a,target\ninf,1\n"), "target")


def test_missing_target(tmp_path):
    with pytest.raises(FeatureLookupError):
        load_csv(write(tmp_path, "a,b\n1,2\n"), "target")


def test_drop_columns(tmp_path):
    ds = load_csv(write(tmp_path, "a,b,c,t\n1,2,3,4\n"), "t", drop=("b",))
    assert ds.feature_names == ("a", "c")


def test_dataset_rejects_non_finite():
    with pytest.raises(DataError):
        Dataset(["a"], [[np.nan]], [1.0])


def test_round_trip(tmp_path):
    ds = synth_locally_varying(150, seed=3)
    path = str(tmp_path / "s.csv")
    save_csv(ds, path)
    back = load_csv(path, "y")
    assert back.equals(ds)


@pytest.mark.skipif("LOAIR_BOSTON_CSV" not in os.environ, reason="Boston Housing CSV not supplied")
def test_boston_shape():
    ds = load_csv(os.environ["LOAIR_BOSTON_CSV"], os.environ.get("LOAIR_BOSTON_TARGET", "MEDV"))
    assert (ds.n, ds.p) == (506, 13)


@pytest.mark.parametrize("n,sizes", [(100, (75, 15, 10)), (506, (380, 76, 50)), (768, (576, 115, 77)), (10, (7, 2, 1))])
def test_split_sizes(n, sizes):
    assert split_sizes(n) == sizes


def test_split_too_small():
    with pytest.raises(DomainError):
        split_sizes(9)
    with pytest.raises(DomainError):
        split_sizes(100, (0.5, 0.5, 0.1))


@settings(max_examples=40, deadline=None)
@given(st.integers(10, 400), st.integers(0, 2**31))
def test_split_partitions(n, seed):
    ds = Dataset(["i"], np.arange(n, dtype=float), np.zeros(n))
    parts = split(ds, seed=seed)
    ids = np.concatenate([p.X[:, 0] for p in parts])
    assert sorted(ids) == list(range(n))
    assert [p.n for p in parts] == list(split_sizes(n))


def test_split_deterministic():
    ds = synth_locally_varying(200, seed=1)
    a, b = split(ds, seed=7), split(ds, seed=7)
    assert all(x.equals(y) for x, y in zip(a, b))
    c = split(ds, seed=8)
    assert not a.train.equals(c.train)


def test_normalizer_population_std():
    norm = fit_normalizer(Dataset(["a"], [[1.0], [2.0], [3.0]], [0, 0, 0]))
    assert norm.mean[0] == 2.0
    np.testing.assert_allclose(apply_normalizer(norm, [[1.0], [2.0], [3.0]])[:, 0],
                               [-1.224744871391589, 0, 1.224744871391589], atol=1e-12)


def test_normalizer_constant_column():
    norm = fit_normalizer(Dataset(["a", "b"], [[5.0, 1.0], [5.0, 2.0]], [0, 0]))
    assert norm.constant.tolist() == [True, False]
    assert norm.std[0] == 1.0
    np.testing.assert_array_equal(norm.apply([[5.0, 1.0], [5.0, 2.0]])[:, 0], [0, 0])


def test_normalizer_train_statistics():
    ds = synth_locally_varying(300, seed=2)
    parts = split(ds, seed=0)
    norm = fit_normalizer(parts.train)
    z = norm.apply(parts.train.X)
    np.testing.assert_allclose(z.mean(axis=0), 0, atol=1e-10)
    np.testing.assert_allclose(z.std(axis=0), 1, atol=1e-10)
    before = (norm.loc.copy(), norm.scale.copy())
    norm.apply(parts.val.X), norm.apply(parts.test.X)
    np.testing.assert_array_equal(norm.loc, before[0])
    np.testing.assert_array_equal(norm.scale, before[1])
    np.testing.assert_array_equal(norm.loc, parts.train.X.mean(axis=0))
    np.testing.assert_allclose(norm.invert(norm.apply(parts.test.X)), parts.test.X, atol=1e-12)


def test_minmax_normalizer():
    norm = fit_normalizer(Dataset(["a"], [[2.0], [4.0], [6.0]], [0, 0, 0]), kind="minmax")
    np.testing.assert_allclose(norm.apply([[2.0], [4.0], [6.0]])[:, 0], [0, 0.5, 1])


def test_synth_deterministic():
    assert synth_locally_varying(120, seed=4).equals(synth_locally_varying(120, seed=4))
    assert not synth_locally_varying(120, seed=4).equals(synth_locally_varying(120, seed=5))


def test_synth_degenerates_to_linear():
    ds = synth_locally_varying(500, seed=0, band=0.0, noise=0.0)
    assert fit_dataset(ds).r_squared == pytest.approx(1.0, abs=1e-8)


def test_synth_needs_rows():
    with pytest.raises(DomainError):
        synth_locally_varying(50)


def test_sealed_dataset_logs_access():
    log = []
    sealed = SealedDataset(synth_locally_varying(100), log)
    assert log == []
    sealed.open()
    assert log == ["open:test"]
