# tests/test_lso.py

import csv

import numpy as np
import pytest
from scipy.optimize import least_squares
from scipy.special import expit

from nevae.autodiff import Tensor, ops
from nevae.errors import IncompatibleModelsError
from nevae.lso import (
    LsoBenchmarkConfig,
    LsoConfig,
    check_compatible,
    freeze,
    lso_benchmark,
    lso_optimize,
    lso_trajectory,
    pairwise_sq_distances,
    random_inits,
    select_targets,
    write_lso_csvs,
)
from nevae.models import DecoderParams, ModelConfig, decode, init_model

from tests.conftest import make_collapsed_model


class LinearDecoder:
    """p(z) = z @ w with a trainable weight, outside the DecoderParams family."""

    def __init__(self, weight: np.ndarray):
        self.w = Tensor(weight, requires_grad=True, name="w")

    def mean(self, z: Tensor) -> Tensor:
        return ops.matmul(z, self.w)

    def parameters(self):
        return [self.w]


def _sigmoid_decoder(weight: np.ndarray, bias: np.ndarray) -> DecoderParams:
    return DecoderParams(
        weights=[Tensor(weight, requires_grad=True)],
        biases=[Tensor(bias, requires_grad=True)],
        activations=["linear"],
    )


def _bench_config(**overrides) -> LsoBenchmarkConfig:
    base = dict(n_targets=3, thresholds=[0.01, 0.0], n_random_inits=2, max_iters=150, lr=1e-2, seed=11)
    base.update(overrides)
    return LsoBenchmarkConfig(**base)


# --- Single trajectories ---

def test_exact_target_stops_without_moving(tiny_model):
    z0 = np.array([0.3, -1.2, 0.7])
    target = decode(z0[None, :], tiny_model.decoder).probs.data[0]
    trace = lso_optimize(target, tiny_model.decoder, LsoConfig(stop_threshold=1e-12, stop_window=10), z0)
    assert trace.stopped
    assert trace.iterations == 10
    assert trace.final_loss == 0.0
    np.testing.assert_array_equal(trace.final_code, z0)


def test_zero_threshold_runs_to_max_iters(tiny_model):
    z0 = np.array([0.3, -1.2, 0.7])
    target = decode(z0[None, :], tiny_model.decoder).probs.data[0]
    # the loss never changes here, and a zero change is still not below 0
    trace = lso_optimize(target, tiny_model.decoder, LsoConfig(stop_threshold=0.0, max_iters=30), z0)
    assert not trace.stopped
    assert trace.iterations == 30
    assert trace.loss_curve == [0.0] * 31


def test_loss_increases_count_as_progress():
    decoder = LinearDecoder(np.eye(2))
    # lr far above the distance to the optimum makes Adam overshoot and oscillate
    trace = lso_optimize(np.array([0.01, -0.01]), decoder, LsoConfig(stop_threshold=1e-9, max_iters=40, lr=0.5), np.zeros(2))
    assert any(b > a for a, b in zip(trace.loss_curve, trace.loss_curve[1:]))
    assert not trace.stopped and trace.iterations == 40


def test_infinite_threshold_stops_after_window(tiny_model, tiny_dataset):
    traces = lso_trajectory(tiny_dataset.images[0], tiny_model.decoder, np.zeros(3), [np.inf], stop_window=7)
    trace = traces[np.inf]
    assert trace.stopped and trace.iterations == 7
    assert len(trace.loss_curve) == 8


def test_max_iters_caps_the_trajectory(tiny_model, tiny_dataset):
    trace = lso_optimize(
        tiny_dataset.images[1],
        tiny_model.decoder,
        LsoConfig(stop_threshold=0.0, stop_window=1000, max_iters=25, lr=1e-2),
        np.zeros(3),
    )
    assert not trace.stopped
    assert trace.iterations == 25
    assert trace.final_loss == trace.loss_curve[-1]


def test_reaches_least_squares_optimum():
    rng = np.random.default_rng(8)
    weight = rng.normal(0.0, 1.5, size=(2, 6))
    bias = rng.normal(0.0, 0.5, size=6)
    z_true = np.array([0.6, -0.4])
    target = np.clip(expit(z_true @ weight + bias) + rng.normal(0.0, 0.02, size=6), 0.0, 1.0)

    reference = least_squares(lambda z: expit(z @ weight + bias) - target, x0=np.zeros(2))
    optimum = float(np.sum(reference.fun ** 2))

    traces = lso_trajectory(
        target, _sigmoid_decoder(weight, bias), np.zeros(2), [0.0], stop_window=100, max_iters=20000, lr=1e-2
    )
    trace = traces[0.0]
    assert trace.best_loss <= optimum + 1e-4
    assert trace.best_loss < trace.initial_loss


def test_decoder_is_never_modified(tiny_model, tiny_dataset):
    before = [p.data.copy() for p in tiny_model.decoder.parameters()]
    lso_trajectory(tiny_dataset.images[2], tiny_model.decoder, np.ones(3), [0.0], max_iters=50, lr=1e-2)
    for p, b in zip(tiny_model.decoder.parameters(), before):
        np.testing.assert_array_equal(p.data, b)
        assert p.grad is None


def test_freeze_shares_values_without_gradients(tiny_model):
    frozen = freeze(tiny_model.decoder)
    assert all(not p.requires_grad for p in frozen.parameters())
    for p, q in zip(frozen.parameters(), tiny_model.decoder.parameters()):
        np.testing.assert_array_equal(p.data, q.data)


def test_linear_decoder_recovers_least_squares_code():
    rng = np.random.default_rng(21)
    weight = rng.normal(size=(3, 20))
    target = rng.uniform(0.0, 1.0, size=20)
    expected, *_ = np.linalg.lstsq(weight.T, target, rcond=None)

    decoder = LinearDecoder(weight.copy())
    trace = lso_optimize(target, decoder, LsoConfig(stop_threshold=0.0, max_iters=50000, lr=1e-4), np.zeros(3))

    assert not trace.stopped and trace.iterations == 50000
    np.testing.assert_allclose(trace.final_code, expected, atol=1e-4)
    np.testing.assert_array_equal(decoder.w.data, weight)
    assert decoder.w.grad is None


def test_freeze_any_decoder():
    decoder = LinearDecoder(np.arange(6.0).reshape(2, 3))
    frozen = freeze(decoder)
    assert all(not p.requires_grad for p in frozen.parameters())
    np.testing.assert_array_equal(frozen.parameters()[0].data, decoder.w.data)

    lso_trajectory(np.ones(3), decoder, np.zeros(2), [0.01, 0.0], max_iters=20, lr=1e-2)
    assert decoder.w.grad is None
    assert decoder.w.requires_grad


def test_looser_threshold_never_stops_later(tiny_model, tiny_dataset):
    thresholds = [0.05, 0.01, 0.001, 0.0]
    traces = lso_trajectory(
        tiny_dataset.images[3], tiny_model.decoder, np.zeros(3), thresholds, stop_window=5, max_iters=400, lr=1e-2
    )
    iterations = [traces[t].iterations for t in thresholds]
    assert iterations == sorted(iterations)
    for trace in traces.values():
        assert trace.best_loss <= trace.initial_loss
        assert trace.final_loss == trace.loss_curve[trace.iterations]
        assert len(trace.loss_curve) == trace.iterations + 1


# --- Benchmark ---

def test_random_inits_depend_only_on_seed_and_target():
    np.testing.assert_array_equal(random_inits(3, 5, 2, 4), random_inits(3, 5, 2, 4))
    assert not np.array_equal(random_inits(3, 5, 2, 4), random_inits(3, 6, 2, 4))


def test_select_targets(tiny_dataset):
    assert select_targets(tiny_dataset, 500, seed=0) == list(range(tiny_dataset.n))
    picked = select_targets(tiny_dataset, 5, seed=0)
    assert len(picked) == 5 and picked == sorted(set(picked))
    assert picked == select_targets(tiny_dataset, 5, seed=0)


def test_pairwise_distances():
    code = np.array([1.0, 2.0])
    assert pairwise_sq_distances({"a": code, "b": code.copy()}) == [("a", "b", 0.0)]
    assert pairwise_sq_distances({"b": np.zeros(2), "a": np.array([3.0, 4.0])}) == [("a", "b", 25.0)]
    assert pairwise_sq_distances({"a": code}) == []


def test_single_init_has_no_pairs(tiny_model, tiny_dataset):
    config = _bench_config(n_random_inits=1, include_encoder_mean=False)
    report = lso_benchmark(tiny_dataset, {"m": tiny_model}, config)
    assert report.pairs == []
    assert len(report.trials) == 3 * 2
    row = report.summary_for("m", 0.0)
    assert row.n_trials == 3
    assert row.mean_pairwise_distance is None and row.final_loss_spread is None
    assert report.summary_for("m", 0.0, "encoder_mean") is None


def test_benchmark_rows_and_groups(tiny_model, tiny_dataset):
    report = lso_benchmark(tiny_dataset, {"m": tiny_model}, _bench_config())
    # 3 targets x 3 inits x 2 thresholds
    assert len(report.trials) == 18
    # 3 unordered init pairs per target and threshold
    assert len(report.pairs) == 18
    assert all(p.sq_distance >= 0.0 for p in report.pairs)
    groups = {(r.threshold, r.init_kind) for r in report.summary}
    assert groups == {(t, g) for t in (0.01, 0.0) for g in ("random_prior", "encoder_mean", "all")}
    assert report.summary_for("m", 0.01, "all").n_trials == 9


def test_models_share_targets_and_prior_inits(tiny_model, tiny_dataset):
    config = _bench_config(include_encoder_mean=False)
    report = lso_benchmark(tiny_dataset, {"a": tiny_model, "b": tiny_model.clone()}, config)
    rows_a = [r.model_dump(exclude={"model_id"}) for r in report.trials if r.model_id == "a"]
    rows_b = [r.model_dump(exclude={"model_id"}) for r in report.trials if r.model_id == "b"]
    assert rows_a == rows_b


def test_parallel_targets_match_serial(tiny_model, tiny_dataset):
    serial = lso_benchmark(tiny_dataset, {"m": tiny_model}, _bench_config(workers=1))
    parallel = lso_benchmark(tiny_dataset, {"m": tiny_model}, _bench_config(workers=3))
    assert serial.model_dump() == parallel.model_dump()


def test_incompatible_models(tiny_model, tiny_dataset):
    other = init_model(ModelConfig(n_z=5, encoder_hidden=[8], decoder_hidden=[8]), pixels=16, seed=0)
    with pytest.raises(IncompatibleModelsError):
        check_compatible(tiny_dataset, {"a": tiny_model, "b": other})
    with pytest.raises(IncompatibleModelsError):
        lso_benchmark(tiny_dataset, {"a": make_collapsed_model(n_z=3, pixels=25)}, _bench_config())
    with pytest.raises(IncompatibleModelsError):
        check_compatible(tiny_dataset, {})


def test_thresholds_are_parsed_and_ordered():
    config = LsoBenchmarkConfig(thresholds="0.001,0.01,0,0.01")
    assert config.thresholds == [0.01, 0.001, 0.0]
    assert config.init_kinds() == ["random_prior_0", "random_prior_1", "encoder_mean"]
    with pytest.raises(ValueError):
        LsoBenchmarkConfig(thresholds=[-0.1])


def test_write_lso_csvs(tmp_path, tiny_model, tiny_dataset):
    report = lso_benchmark(tiny_dataset, {"m": tiny_model}, _bench_config(n_random_inits=1))
    paths = write_lso_csvs(tmp_path, report)
    with open(paths["trials"], newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == [
        "model_id", "target_id", "init_kind", "threshold", "iterations",
        "final_loss", "stopped", "best_loss", "initial_loss",
    ]
    assert len(rows) == 1 + len(report.trials)
    with open(paths["summary"], newline="") as f:
        summary = list(csv.DictReader(f))
    random_rows = [r for r in summary if r["init_kind"] == "random_prior"]
    assert all(r["mean_pairwise_distance"] == "" for r in random_rows)
    assert paths["pairs"].read_text().splitlines()[0] == "model_id,threshold,target_id,init_a,init_b,sq_distance"


# --- Desk-scale directional reproduction ---

@pytest.mark.slow
def test_ne_se_stops_sooner_than_vanilla():
    from nevae.data import SyntheticSpec, binarize, make_synthetic
    from nevae.losses import LossConfig
    from nevae.training import TrainConfig, train

    data = binarize(make_synthetic(SyntheticSpec(intrinsic_dim=4, ambient_dim=784, n_samples=2000, seed=0)))
    models = {}
    for variant in ("vanilla", "ne_se"):
        config = TrainConfig(
            epochs=20,
            model=ModelConfig(n_z=8, encoder_hidden=[128], decoder_hidden=[128]),
            loss=LossConfig(variant=variant),
            eval_every=0,
        )
        models[variant], _ = train(data, config)
    config = LsoBenchmarkConfig(
        n_targets=50, thresholds=[0.001], n_random_inits=1, include_encoder_mean=False, max_iters=5000
    )
    report = lso_benchmark(data, models, config)
    vanilla = report.summary_for("vanilla", 0.001)
    ne = report.summary_for("ne_se", 0.001)
    assert vanilla.n_trials == ne.n_trials == 50
    assert ne.mean_iterations < vanilla.mean_iterations
