from fractions import Fraction
from statistics import median

import numpy as np
import pytest

from fairtune.data import Dataset, default_real_spec, generate_domain_dataset
from fairtune.errors import UndefinedStratumError
from fairtune.metrics import (
    RECORD_FIELDS,
    aggregate_reports,
    confusion_by_group,
    equalized_odds_rate_gaps,
    error_set,
    evaluate,
    fairness_report,
    estimate_bias_ratio,
)
from fairtune.metrics.jtt import MAX_RATIO, MIN_RATIO
from fairtune.net import Model, ModelArch


def labeled(target, protected):
    return Dataset(
        features=np.zeros((len(target), 1)),
        target=target,
        protected=protected,
        domain=np.zeros(len(target), dtype=np.int64),
        spec_fingerprint="labels",
    )


def report_for(target, protected, predictions):
    data = labeled(target, protected)
    return fairness_report(confusion_by_group(predictions, data))


def hand_case():
    ## s=0 pairs (y, y_hat): (1,1) (1,0) (0,0) (0,0); s=1 pairs: (1,1) (1,1) (0,1) (0,0)
    target = [1, 1, 0, 0, 1, 1, 0, 0]
    protected = [0, 0, 0, 0, 1, 1, 1, 1]
    predictions = [1, 0, 0, 0, 1, 1, 1, 0]
    return target, protected, predictions


def oracle(target, protected, predictions):
    """Exact rational metrics from explicit conditional counting"""
    def rate(s, y, y_hat):
        members = [i for i in range(len(target)) if protected[i] == s and target[i] == y]
        hits = [i for i in members if predictions[i] == y_hat]
        return Fraction(len(hits), len(members))

    cells = [rate(s, y, y) for y in (0, 1) for s in (0, 1)]
    eo = sum(
        abs(rate(0, y, y_hat) - rate(1, y, y_hat)) for y in (0, 1) for y_hat in (0, 1)
    ) / 4
    mean = sum(cells) / 4
    variance = sum((c - mean) ** 2 for c in cells) / 4
    correct = sum(1 for t, p in zip(target, predictions) if t == p)
    return {
        "acc": Fraction(correct, len(target)),
        "wst": min(cells),
        "eo": eo,
        "std": float(variance) ** 0.5,
    }


def test_counts_match_hand_tally():
    target, protected, predictions = hand_case()
    stats = confusion_by_group(predictions, labeled(target, protected))
    assert stats.counts[0].tolist() == [[2, 0], [1, 1]]
    assert stats.counts[1].tolist() == [[1, 1], [0, 2]]


def test_hand_case_metrics():
    report = report_for(*hand_case())
    assert report.acc == 0.75
    assert report.wst == 0.5
    assert report.eo == 0.5
    assert report.std == 0.25
    assert report.cell(1, 0) == 0.5
    assert report.cell(0, 0) == 1.0
    assert report.cell(1, 1) == 1.0
    assert report.cell(0, 1) == 0.5


def test_perfect_classifier():
    target = [0, 1, 0, 1, 1, 0]
    protected = [0, 0, 1, 1, 1, 0]
    report = report_for(target, protected, target)
    assert (report.acc, report.wst, report.eo, report.std) == (1.0, 1.0, 0.0, 0.0)


def test_constant_classifier_has_zero_eo():
    target = [0, 1, 0, 1]
    protected = [0, 0, 1, 1]
    report = report_for(target, protected, [1, 1, 1, 1])
    assert report.eo == 0.0
    assert report.wst == 0.0


def test_empty_stratum_is_an_error():
    target = [0, 1, 1]
    protected = [0, 0, 1]
    stats = confusion_by_group([0, 1, 1], labeled(target, protected))
    with pytest.raises(UndefinedStratumError) as err:
        fairness_report(stats)
    assert (err.value.s, err.value.y) == (1, 0)
    with pytest.raises(UndefinedStratumError):
        equalized_odds_rate_gaps(stats)


def _random_instance(rng):
    while True:
        count = int(rng.integers(4, 101))
        target = rng.integers(0, 2, size=count).tolist()
        protected = rng.integers(0, 2, size=count).tolist()
        if len(set(zip(target, protected))) == 4:
            return target, protected, rng.integers(0, 2, size=count).tolist()


def test_metrics_match_counting_oracle():
    rng = np.random.default_rng(0)
    for _ in range(200):
        target, protected, predictions = _random_instance(rng)
        report = report_for(target, protected, predictions)
        expected = oracle(target, protected, predictions)
        assert report.acc == pytest.approx(float(expected["acc"]), abs=1e-12)
        assert report.wst == pytest.approx(float(expected["wst"]), abs=1e-12)
        assert report.eo == pytest.approx(float(expected["eo"]), abs=1e-12)
        assert report.std == pytest.approx(expected["std"], abs=1e-12)
        cells = [report.cell(y, s) for y in (0, 1) for s in (0, 1)]
        assert report.wst == min(cells)
        assert min(cells) <= report.acc <= max(cells)


def test_rate_gap_path_agrees():
    rng = np.random.default_rng(1)
    for _ in range(100):
        target, protected, predictions = _random_instance(rng)
        stats = confusion_by_group(predictions, labeled(target, protected))
        assert equalized_odds_rate_gaps(stats) == pytest.approx(fairness_report(stats).eo, abs=1e-12)


def test_eo_symmetry_and_label_permutation():
    rng = np.random.default_rng(2)
    for _ in range(50):
        target, protected, predictions = _random_instance(rng)
        report = report_for(target, protected, predictions)
        swapped = report_for(target, [1 - s for s in protected], predictions)
        assert swapped.eo == pytest.approx(report.eo, abs=1e-12)
        flipped = report_for(
            [1 - y for y in target], protected, [1 - p for p in predictions]
        )
        for name in ("eo", "wst", "std", "acc"):
            assert getattr(flipped, name) == pytest.approx(getattr(report, name), abs=1e-12)
        assert flipped.cell(0, 0) == report.cell(1, 0)


def test_record_percent_fields():
    record = report_for(*hand_case()).to_record()
    for name in RECORD_FIELDS:
        assert abs(record[f"{name}_pct"] - 100 * record[name]) <= 1e-9
    assert record["eo_pct"] == 50.0


def test_aggregate_reports():
    first = report_for(*hand_case())
    target = [0, 1, 0, 1]
    protected = [0, 0, 1, 1]
    second = report_for(target, protected, target)
    means, stds = aggregate_reports([first, second])
    assert means["acc"] == pytest.approx(0.875)
    assert stds["acc"] == pytest.approx(0.125)
    assert means["eo"] == pytest.approx(0.25)
    assert aggregate_reports([]) == ({}, {})


def test_evaluate_and_error_set():
    arch = ModelArch(input_dim=1, hidden_widths=(1,))
    ## predicts 1 exactly when x > 0
    model = Model.from_arrays(
        arch, [np.array([[1.0]]), np.zeros(1), np.array([[0.0], [1.0]]), np.zeros(2)]
    )
    data = Dataset(
        features=[[1.0], [-1.0], [2.0], [-3.0], [0.5]],
        target=[1, 0, 0, 0, 1],
        protected=[0, 0, 1, 1, 1],
        domain=[0] * 5,
        spec_fingerprint="tiny",
    )
    assert error_set(model, data).tolist() == [2]
    report = evaluate(model, data)
    assert report.acc == 0.8
    assert report.fingerprint == "tiny"


def test_jtt_floor_on_separable_data():
    spec = default_real_spec(
        n_per_target=1000, bias_ratio=0.5, signal_magnitude=5.0, spurious_magnitude=0.0
    )
    d_r = generate_domain_dataset(spec, 0)
    assert estimate_bias_ratio(ModelArch.default(), d_r) == MIN_RATIO


def test_jtt_ceiling_on_random_labels():
    spec = default_real_spec(
        n_per_target=1000, bias_ratio=0.5, signal_magnitude=0.0, spurious_magnitude=0.0
    )
    d_r = generate_domain_dataset(spec, 0)
    estimate = estimate_bias_ratio(ModelArch.default(), d_r)
    assert estimate <= MAX_RATIO
    assert estimate == pytest.approx(0.5, abs=0.06)


def test_jtt_is_deterministic():
    d_r = generate_domain_dataset(default_real_spec(n_per_target=100), 3)
    arch = ModelArch.default()
    assert estimate_bias_ratio(arch, d_r) == estimate_bias_ratio(arch, d_r)


@pytest.mark.slow
def test_jtt_estimate_on_default_simulator():
    estimates = [
        estimate_bias_ratio(
            ModelArch.default(), generate_domain_dataset(default_real_spec(), seed)
        )
        for seed in range(8)
    ]
    assert 0.05 <= median(estimates) <= 0.25
