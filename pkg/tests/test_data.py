import logging

import numpy as np
import pytest

from fairtune.data import (
    CELLS,
    ComposeMode,
    Dataset,
    Domain,
    balanced_split,
    cell_counts,
    compose_training_set,
    concat_datasets,
    default_real_spec,
    generate_balanced_dataset,
    generate_domain_dataset,
    generate_test_set,
    generate_triplet,
    is_balanced,
    load_csv_dataset,
    subsample_real,
    synthetic_spec,
    write_csv_dataset,
)
from fairtune.data.dataset import stratified_indices
from fairtune.data.simulator import default_synthetic_shift
from fairtune.errors import (
    ConfigurationError,
    InsufficientPoolError,
    ParseError,
    PreconditionError,
    ShapeError,
)
from fairtune.seeding import derive_seeds, fingerprint


def same_data(first, second):
    return (
        np.array_equal(first.features, second.features)
        and np.array_equal(first.target, second.target)
        and np.array_equal(first.protected, second.protected)
        and np.array_equal(first.domain, second.domain)
    )


def planted(counts, dim=3, seed=0):
    """Dataset with the given number of examples per cell, in CELLS order"""
    rng = np.random.default_rng(seed)
    target, protected = [], []
    for (y, s), count in zip(CELLS, counts):
        target += [y] * count
        protected += [s] * count
    return Dataset(
        features=rng.normal(size=(len(target), dim)),
        target=target,
        protected=protected,
        domain=np.zeros(len(target), dtype=np.int64),
        spec_fingerprint=f"planted-{seed}",
    )


def test_dataset_validates_columns():
    with pytest.raises(ShapeError):
        Dataset(features=np.zeros((3, 2)), target=[0, 1], protected=[0, 1, 0],
                domain=[0, 0, 0], spec_fingerprint="x")
    with pytest.raises(PreconditionError):
        Dataset(features=np.zeros((2, 2)), target=[0, 2], protected=[0, 1],
                domain=[0, 0], spec_fingerprint="x")
    with pytest.raises(PreconditionError):
        Dataset(features=[[np.nan, 0.0]], target=[0], protected=[0],
                domain=[0], spec_fingerprint="x")


def test_dataset_examples():
    data = planted((1, 1, 0, 2))
    assert len(data) == 4
    assert data.feature_dim == 3
    first = data[0]
    assert (first.target, first.protected, first.domain) == (0, 0, Domain.REAL)
    assert len(list(data)) == 4
    assert cell_counts(data) == {(0, 0): 1, (0, 1): 1, (1, 0): 0, (1, 1): 2}


def test_bias_ratio_is_planted():
    spec = default_real_spec(n_per_target=500, bias_ratio=0.9)
    for seed in range(20):
        data = generate_domain_dataset(spec, seed)
        assert np.sum(data.target == 0) == 500
        assert np.sum(data.target == 1) == 500
        agreement = np.mean(data.target == data.protected)
        assert 0.86 <= agreement <= 0.94


def test_balanced_bias_fills_cells_evenly():
    spec = default_real_spec(n_per_target=1000, bias_ratio=0.5)
    counts = cell_counts(generate_domain_dataset(spec, 4))
    sigma = np.sqrt(1000 * 0.5 * 0.5)
    for count in counts.values():
        assert abs(count - 500) <= 3 * sigma


def test_generation_is_deterministic():
    spec = default_real_spec(n_per_target=100)
    first = generate_domain_dataset(spec, 9)
    second = generate_domain_dataset(spec, 9)
    other = generate_domain_dataset(spec, 10)
    assert same_data(first, second)
    assert first.spec_fingerprint == second.spec_fingerprint
    assert first.spec_fingerprint == fingerprint({"spec": spec.to_dict(), "seed": 9})
    assert not same_data(first, other)


def test_features_follow_the_generator():
    spec = default_real_spec(n_per_target=4000, bias_ratio=0.5)
    data = generate_domain_dataset(spec, 1)
    features = data.features
    signal = features[data.target == 1, :5].mean() - features[data.target == 0, :5].mean()
    spurious = features[data.protected == 1, 5:10].mean() - features[data.protected == 0, 5:10].mean()
    assert signal == pytest.approx(1.0, abs=0.05)
    assert spurious == pytest.approx(1.2, abs=0.05)
    assert features[:, 10:].mean() == pytest.approx(0.0, abs=0.02)
    assert features[:, 10:].std() == pytest.approx(1.0, abs=0.02)


def test_zero_shift_domains_match():
    real = default_real_spec(n_per_target=1000, bias_ratio=0.5)
    synthetic = synthetic_spec(real, shift=np.zeros(20))
    first = generate_domain_dataset(real, 1)
    second = generate_domain_dataset(synthetic, 2)
    difference = first.features.mean(axis=0) - second.features.mean(axis=0)
    ## per-dimension z statistic of a difference of two 2000-sample means
    z = difference / np.sqrt(2.0 / 2000)
    assert np.max(np.abs(z)) < 4.5


def test_domain_gap_grows_with_shift():
    real = default_real_spec(n_per_target=500)
    gaps = []
    for magnitude in (0.0, 0.5, 1.0):
        shift = default_synthetic_shift(20, magnitude)
        distances = []
        for seed in range(5):
            d_r = generate_domain_dataset(real, seed)
            d_s = generate_domain_dataset(synthetic_spec(real, shift=shift), 100 + seed)
            distances.append(np.linalg.norm(d_r.features.mean(0) - d_s.features.mean(0)))
        gaps.append(np.mean(distances))
    assert gaps[0] < gaps[1] < gaps[2]


def test_spec_validation():
    spec = default_real_spec()
    with pytest.raises(ConfigurationError):
        spec.replace(bias_ratio=0.4).validate()
    with pytest.raises(ConfigurationError):
        spec.replace(noise_sigma=0.0).validate()
    with pytest.raises(ConfigurationError):
        spec.replace(n_per_target=0).validate()
    with pytest.raises(ConfigurationError):
        spec.replace(domain_shift=spec.signal_mean).validate()


def test_triplet_sizes_and_domains():
    d_r, d_s1, d_s2 = generate_triplet(default_real_spec(n_per_target=2000), seed=0)
    assert (len(d_r), len(d_s1), len(d_s2)) == (4000, 4000, 4000)
    assert set(cell_counts(d_s2).values()) == {1000}
    assert not d_r.domain.any()
    assert d_s1.domain.all() and d_s2.domain.all()
    shift = d_s2.features[:, 10:].mean() - d_r.features[:, 10:].mean()
    assert shift == pytest.approx(0.8, abs=0.05)


def test_triplet_cell_size_follows_real_size():
    _, _, d_s2 = generate_triplet(default_real_spec(n_per_target=10000), seed=1)
    assert set(cell_counts(d_s2).values()) == {5000}


def test_triplet_mirrors_real_bias():
    _, d_s1, _ = generate_triplet(default_real_spec(n_per_target=2000, bias_ratio=0.9), seed=2)
    for y in (0, 1):
        majority = np.mean(d_s1.protected[d_s1.target == y] == y)
        assert majority == pytest.approx(0.9, abs=0.03)


def test_triplet_is_deterministic():
    spec = default_real_spec(n_per_target=200)
    first = generate_triplet(spec, 0.7, seed=5)
    second = generate_triplet(spec, 0.7, seed=5)
    for a, b in zip(first, second):
        assert same_data(a, b)
        assert a.spec_fingerprint == b.spec_fingerprint


def test_triplet_uses_derived_seeds():
    spec = default_real_spec(n_per_target=50)
    d_r, _, _ = generate_triplet(spec, seed=3)
    assert same_data(d_r, generate_domain_dataset(spec, derive_seeds(3, 3)[0]))


def test_triplet_syn_ratio_and_remainder(caplog):
    spec = default_real_spec(n_per_target=5)
    with caplog.at_level(logging.WARNING, logger="fairtune"):
        _, _, d_s2 = generate_triplet(spec, seed=0)
    assert len(d_s2) == 8
    assert "drops 2 examples" in caplog.text
    _, _, half = generate_triplet(default_real_spec(n_per_target=100), seed=0, syn_ratio=0.5)
    assert set(cell_counts(half).values()) == {25}


def test_triplet_needs_enough_real_examples():
    with pytest.raises(PreconditionError):
        generate_triplet(default_real_spec(n_per_target=1), seed=0)


def test_balanced_dataset_from_pool():
    spec = synthetic_spec(default_real_spec(n_per_target=10), bias_ratio=0.5)
    data = generate_balanced_dataset(spec, 30, seed=1, pool_per_cell=200)
    assert set(cell_counts(data).values()) == {30}
    assert is_balanced(data)
    with pytest.raises(ConfigurationError):
        generate_balanced_dataset(spec, 30, seed=1, pool_per_cell=10)


def test_test_set_is_balanced_real():
    test = generate_test_set(default_real_spec(), 50, seed=3)
    assert set(cell_counts(test).values()) == {50}
    assert not test.domain.any()


def test_repairing_fills_deficits():
    d_r = planted((90, 10, 10, 90))
    pool = planted((100, 100, 100, 100), seed=1)
    combined = compose_training_set(ComposeMode.REPAIRING, d_r, pool)
    assert cell_counts(combined) == {cell: 90 for cell in CELLS}
    assert np.array_equal(combined.features[:len(d_r)], d_r.features)
    added = combined.features[len(d_r):]
    expected = np.concatenate([
        pool.features[pool.cell_indices((0, 1))[:80]],
        pool.features[pool.cell_indices((1, 0))[:80]],
    ])
    assert np.array_equal(added, expected)


def test_repairing_planted_counts():
    d_r = planted((900, 100, 100, 900), dim=1)
    pool = planted((1000, 1000, 1000, 1000), dim=1, seed=2)
    combined = compose_training_set("repairing", d_r, pool)
    assert len(combined) - len(d_r) == 1600
    assert set(cell_counts(combined).values()) == {900}


def test_repairing_balanced_is_identity():
    d_r = planted((5, 5, 5, 5))
    pool = planted((5, 5, 5, 5), seed=1)
    assert compose_training_set(ComposeMode.REPAIRING, d_r, pool) is d_r


def test_repairing_names_short_cell():
    d_r = planted((9, 1, 1, 9))
    pool = planted((9, 3, 9, 9), seed=1)
    with pytest.raises(InsufficientPoolError) as err:
        compose_training_set(ComposeMode.REPAIRING, d_r, pool)
    assert err.value.cell == (0, 1)
    assert err.value.needed == 8
    assert err.value.available == 3


def test_supplementation_concatenates():
    d_r = planted((3, 1, 1, 3))
    pool = planted((2, 2, 2, 2), seed=1)
    combined = compose_training_set(ComposeMode.SUPPLEMENTATION, d_r, pool)
    assert len(combined) == 16
    assert np.array_equal(combined.features, np.concatenate([d_r.features, pool.features]))


def test_compose_rejects_empty_inputs():
    empty = planted((0, 0, 0, 0))
    with pytest.raises(PreconditionError):
        compose_training_set(ComposeMode.SUPPLEMENTATION, empty, planted((1, 1, 1, 1)))


def test_concat_rejects_mixed_dims():
    with pytest.raises(ShapeError):
        concat_datasets(planted((1, 1, 1, 1), dim=2), planted((1, 1, 1, 1), dim=3))


def test_stratified_split():
    data = planted((40, 20, 20, 40))
    train, validation = balanced_split(data, 0.1, seed=0)
    assert cell_counts(validation) == {(0, 0): 4, (0, 1): 2, (1, 0): 2, (1, 1): 4}
    assert len(train) + len(validation) == len(data)
    again = stratified_indices(data, 0.1, seed=0)
    assert np.array_equal(again, stratified_indices(data, 0.1, seed=0))
    with pytest.raises(PreconditionError):
        balanced_split(data, 1.0, seed=0)


def test_subsample_real():
    data = planted((100, 20, 20, 100))
    half = subsample_real(data, 0.5, seed=1)
    assert cell_counts(half) == {(0, 0): 50, (0, 1): 10, (1, 0): 10, (1, 1): 50}
    assert subsample_real(data, 1.0, seed=1) is data


def test_csv_round_trip(tmp_path):
    spec = default_real_spec(n_per_target=50)
    data = generate_domain_dataset(spec, 0)
    path = write_csv_dataset(data, tmp_path / "data.csv")
    loaded = load_csv_dataset(path)
    assert np.array_equal(loaded.target, data.target)
    assert np.array_equal(loaded.protected, data.protected)
    assert np.array_equal(loaded.domain, data.domain)
    assert np.max(np.abs(loaded.features - data.features)) <= 1e-12
    write_csv_dataset(loaded, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


def test_csv_small_file(tmp_path):
    path = tmp_path / "small.csv"
    path.write_text("f0,f1,y,s\n0.5,1,0,1\n-2,3.25,1,1\n0,0,1,0\n")
    data = load_csv_dataset(path)
    assert len(data) == 3
    assert data.feature_dim == 2
    assert data.features[1].tolist() == [-2.0, 3.25]
    assert data.domain.tolist() == [0, 0, 0]


def test_csv_rejects_bad_label(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("f0,y,s\n0.1,0,1\n0.2,2,0\n")
    with pytest.raises(ParseError) as err:
        load_csv_dataset(path)
    assert err.value.row == 2
    assert err.value.column == "y"
    assert "row 2" in str(err.value)


def test_csv_rejects_bad_feature_and_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("f0,y,s\nabc,0,1\n")
    with pytest.raises(ParseError) as err:
        load_csv_dataset(path)
    assert err.value.row == 1
    assert err.value.column == "f0"
    missing = tmp_path / "missing.csv"
    missing.write_text("f0,y\n0.1,0\n")
    with pytest.raises(ParseError) as err:
        load_csv_dataset(missing)
    assert err.value.column == "s"
