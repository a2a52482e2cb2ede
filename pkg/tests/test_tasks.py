import json

import numpy as np
import pytest

from asnrc.errors import DimensionError, TrainingError
from asnrc.models.readout import ReadoutWeights
from asnrc.models.reservoir import ReservoirParams, ReservoirState
from asnrc.tasks.autoencoder import (AutoencoderInput, AutoencoderTask, inject_correction,
                                    reference_variance)
from asnrc.tasks.base import ReservoirConfig, TaskReport, trace_columns
from asnrc.tasks.glyphs import DistortionParams, GlyphVideoSpec
from asnrc.tasks.inverter import InverterInput, InverterTask, task_inverter
from asnrc.tasks.signals import SignalSpec
from asnrc.tasks.video_filter import VideoFilterInput, VideoFilterTask, transition_lags


def test_task_presets():
    assert ReservoirConfig.for_task("inverter").n == 25
    assert ReservoirConfig.for_task("video").n == 200
    assert ReservoirConfig.for_task("autoencoder").n == 100
    assert ReservoirConfig.for_task("autoencoder", n=400).n == 400


def test_inverter_report_carries_traces_and_top_neurons():
    report = task_inverter(train_len=300, test_len=100, seed=1)
    assert report.ok
    assert 0.0 <= report.metrics.sign_agreement <= 1.0
    labels, data = trace_columns(report)
    assert labels[:3] == ["input", "target", "output"]
    assert data.shape == (100, 6)
    assert len(report.extras["top_neurons"]) == 3
    np.testing.assert_allclose(report.traces["target"], -report.traces["input"])


def test_summary_json_leaves_traces_out():
    report = task_inverter(train_len=200, test_len=50, seed=0)
    summary = json.loads(report.summary_json())
    assert "traces" not in summary and "frames" not in summary
    assert summary["task"] == "inverter"
    assert summary["metrics"]["nrmse"] == pytest.approx(report.metrics.nrmse)


def test_identity_is_no_harder_than_inversion():
    base = dict(train_len=500, test_len=200, seed=3)
    inverted = InverterTask(InverterInput(**base)).run()
    identity = InverterTask(InverterInput(target_gain=1.0, **base)).run()
    assert identity.metrics.nrmse <= inverted.metrics.nrmse + 1e-9


def test_noiseless_sine_is_inverted_accurately():
    reservoir = ReservoirConfig.for_task("inverter", params=ReservoirParams(noise_gain=0.0))
    inp = InverterInput(reservoir=reservoir, signal=SignalSpec(kind="sine", period=20), seed=2)
    report = InverterTask(inp).run()
    assert report.metrics.nrmse <= 0.05


def test_transition_lags():
    labels = ["A", "A", "B", "B", "B", "A"]
    accuracy = np.array([1.0, 1.0, 0.5, 0.9, 1.0, 1.0])
    assert transition_lags(labels, accuracy, 0.95) == [2, 0]


def test_reference_variance_falls_back_to_power():
    assert reference_variance(np.array([1.0, -1.0])) == pytest.approx(1.0)
    assert reference_variance(np.full(10, 0.5)) == pytest.approx(0.25)
    assert reference_variance(np.zeros(10)) == 1.0


def test_inject_correction_returns_the_free_run_after_the_window():
    cfg = ReservoirConfig.for_task("autoencoder", n=15)
    topo = cfg.build(m=1, p=1, seed=2)
    weights = ReadoutWeights(w_out=np.full((1, 15), 0.01))
    truth = np.sin(np.arange(40) / 4.0)
    out, state = inject_correction(topo, cfg.params, weights, ReservoirState.for_topology(topo), truth,
                                   inject_len=10, rng=np.random.default_rng(0))
    assert out.shape == (30,)
    assert np.all(np.isfinite(out))
    with pytest.raises(DimensionError):
        inject_correction(topo, cfg.params, weights, state, truth[:10], inject_len=10,
                          rng=np.random.default_rng(0))


def test_autoencoder_needs_feedback():
    inp = AutoencoderInput(reservoir=ReservoirConfig.for_task("autoencoder", n=20, fb_scale=0.0),
                           teach_len=100, free_len=50, eval_len=20, window=10, inject_len=0)
    with pytest.raises(TrainingError):
        AutoencoderTask(inp).run()


def test_autoencoder_small_run_reports_horizon_and_windows():
    inp = AutoencoderInput(reservoir=ReservoirConfig.for_task("autoencoder", n=40),
                           teach_len=400, free_len=120, eval_len=100, window=20, inject_len=10, seed=4)
    report = AutoencoderTask(inp).run()
    assert report.ok
    assert len(report.extras["windowed_nrmse"]) == 6
    assert report.traces["output"].shape == (120,)
    assert "nrmse_after_correction" in report.extras


def _median(values):
    return float(np.median(values))


def test_autoencoder_preset_runs_quiet_and_contracting():
    cfg = ReservoirConfig.for_task("autoencoder")
    assert cfg.spectral_radius < 0.9
    assert cfg.params.noise_gain <= 1e-4
    assert AutoencoderInput().bias != 0.0


def test_autoencoder_tracks_the_signal_right_after_the_switch():
    scores = []
    for s in range(3):
        inp = AutoencoderInput(reservoir=ReservoirConfig.for_task("autoencoder", n=40), teach_len=400,
                               free_len=30, eval_len=10, window=10, inject_len=0, seed=s)
        report = AutoencoderTask(inp).run()
        assert report.ok
        scores.append(report.metrics.nrmse)
    assert _median(scores) <= 0.25


def test_teacher_noise_changes_only_the_fed_back_signal():
    base = dict(reservoir=ReservoirConfig.for_task("autoencoder", n=20), teach_len=200, free_len=20,
                eval_len=10, window=10, inject_len=0, seed=3)
    jittered = AutoencoderTask(AutoencoderInput(**base)).run()
    clean = AutoencoderTask(AutoencoderInput(teacher_noise=0.0, **base)).run()
    np.testing.assert_array_equal(jittered.traces["target"], clean.traces["target"])
    assert not np.array_equal(jittered.traces["output"], clean.traces["output"])


def test_reports_are_reproducible_from_config_and_seed():
    def twice(make):
        first, second = make().run(), make().run()
        assert first.summary_json() == second.summary_json()
        assert first.traces.keys() == second.traces.keys()
        for name in first.traces:
            np.testing.assert_array_equal(first.traces[name], second.traces[name])

    twice(lambda: InverterTask(InverterInput(train_len=200, test_len=50, seed=6)))
    twice(lambda: AutoencoderTask(AutoencoderInput(reservoir=ReservoirConfig.for_task("autoencoder", n=20),
                                                   teach_len=200, free_len=40, eval_len=20, window=10,
                                                   inject_len=5, seed=6)))
    video = GlyphVideoSpec(total_frames=96)
    twice(lambda: VideoFilterTask(VideoFilterInput(reservoir=ReservoirConfig.for_task("video", n=30),
                                                   video=video, seed=6)))


def test_inverter_sign_agreement_is_scale_free_in_the_linear_region():
    reservoir = ReservoirConfig.for_task("inverter", params=ReservoirParams(noise_gain=0.0))

    def agreement(amplitude):
        inp = InverterInput(reservoir=reservoir, signal=SignalSpec(kind="square", period=20, amplitude=amplitude),
                            train_len=400, test_len=200, seed=4)
        return InverterTask(inp).run().metrics.sign_agreement

    assert agreement(0.05) == pytest.approx(agreement(0.1), abs=0.02)


def test_failed_report():
    report = TaskReport.failed("video", 3, "states became non-finite")
    assert not report.ok
    assert report.metrics.recovery_rate is None


@pytest.mark.slow
def test_inverter_acceptance():
    reports = [task_inverter(seed=s) for s in range(5)]
    assert _median([r.metrics.sign_agreement for r in reports]) >= 0.90
    assert _median([r.metrics.nrmse for r in reports]) <= 0.3


@pytest.mark.slow
def test_video_filter_acceptance():
    rates = [VideoFilterTask(VideoFilterInput(seed=s)).run().metrics.recovery_rate for s in range(3)]
    assert _median(rates) >= 0.85


@pytest.mark.slow
def test_video_filter_without_distortion_recovers_everything():
    inp = VideoFilterInput(video=GlyphVideoSpec(distortion=DistortionParams.clean()), seed=0)
    report = VideoFilterTask(inp).run()
    assert report.metrics.recovery_rate == 1.0
    assert report.extras["max_transition_lag"] <= 8


@pytest.mark.slow
def test_autoencoder_double_sinusoid_acceptance():
    reports = [AutoencoderTask(AutoencoderInput(seed=s)).run() for s in range(5)]
    assert _median([r.metrics.nrmse for r in reports]) <= 0.25


@pytest.mark.slow
def test_autoencoder_holds_a_constant():
    inp = AutoencoderInput(signal=SignalSpec(kind="constant", amplitude=0.5), free_len=500, eval_len=500)
    assert AutoencoderTask(inp).run().metrics.nrmse <= 0.05


@pytest.mark.slow
def test_larger_reservoirs_reproduce_mackey_glass_better():
    def median_nrmse(n):
        scores = []
        for s in range(5):
            inp = AutoencoderInput(reservoir=ReservoirConfig.for_task("autoencoder", n=n),
                                   signal=SignalSpec(kind="mackey_glass"), eval_len=100, seed=s)
            report = AutoencoderTask(inp).run()
            assert np.isfinite(report.metrics.nrmse)
            scores.append(report.metrics.nrmse)
        return _median(scores)

    assert median_nrmse(400) < median_nrmse(100)


@pytest.mark.slow
def test_corrective_injection_pulls_the_free_run_back():
    inp = AutoencoderInput(free_len=1500, seed=1)
    report = AutoencoderTask(inp).run()
    assert report.extras["nrmse_after_correction"] < 0.25


@pytest.mark.slow
def test_video_recovery_degrades_with_pixel_noise():
    def median_rate(noise):
        rates = []
        for s in range(3):
            video = GlyphVideoSpec(distortion=DistortionParams(pixel_noise=noise))
            rates.append(VideoFilterTask(VideoFilterInput(video=video, seed=s)).run().metrics.recovery_rate)
        return _median(rates)

    rates = [median_rate(noise) for noise in (0.0, 0.1, 0.3, 0.6)]
    assert all(later <= earlier for earlier, later in zip(rates, rates[1:]))
