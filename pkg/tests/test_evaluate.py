"""SINR scoring, CFAR detection, zeroing baselines, binned reports."""

import numpy as np
import pytest

from rimlab import (CfarConfig, SceneSpec, TargetParams, InterferenceParams,
                    cfar_detect, evaluate_method, oracle_mask, sample_scene,
                    sinr_db, synthesize_scene, write_report_csv,
                    zero_and_score)
from rimlab.errors import ConfigError, DataError, ShapeMismatchError


class TestSinrDb:
    def test_known_energy_ratio(self):
        s = np.zeros(100, complex)
        s[:100] = 1.0  # ||s||^2 = 100
        err = np.zeros(100, complex)
        err[0] = 1.0  # ||err||^2 = 1
        assert sinr_db(s + err, s) == pytest.approx(20.0)

    def test_zero_recovery_scores_zero_db(self, rng):
        s = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        assert sinr_db(np.zeros_like(s), s) == pytest.approx(0.0)

    def test_relative_noise_power(self, rng):
        s = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
        n = rng.standard_normal(4096) + 1j * rng.standard_normal(4096)
        n *= np.sqrt(1e-3 * np.sum(np.abs(s) ** 2) / np.sum(np.abs(n) ** 2))
        assert sinr_db(s + n, s) == pytest.approx(30.0)

    def test_exact_recovery_capped(self, rng):
        s = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        assert sinr_db(s.copy(), s) == 150.0

    def test_scale_distortion_penalized(self, rng):
        s = rng.standard_normal(256) + 1j * rng.standard_normal(256)
        for c in (2.0, 1.1, 0.5):
            expected = 10.0 * np.log10(1.0 / (c - 1.0) ** 2)
            assert sinr_db(c * s, s) == pytest.approx(expected)

    def test_noise_monotonicity(self, rng):
        s = rng.standard_normal(512) + 1j * rng.standard_normal(512)
        n1 = 0.1 * (rng.standard_normal(512) + 1j * rng.standard_normal(512))
        n2 = 0.1 * (rng.standard_normal(512) + 1j * rng.standard_normal(512))
        assert sinr_db(s + n1, s) > sinr_db(s + n1 + n2, s)

    def test_zero_reference_rejected(self):
        with pytest.raises(DataError):
            sinr_db(np.ones(8, complex), np.zeros(8, complex))


class TestCfar:
    def test_constant_envelope_empty_mask(self):
        signal = np.exp(1j * np.linspace(0.0, 40.0, 1000))
        mask = cfar_detect(signal, CfarConfig(24, 8, 3.0))
        assert not mask.any()

    def test_strong_burst_mostly_flagged(self):
        rng = np.random.default_rng(5)
        n = 1000
        signal = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        burst = slice(400, 450)
        signal[burst] *= 10.0  # 20 dB above the floor
        mask = cfar_detect(signal, CfarConfig(100, 10, 3.0))
        assert mask[burst].mean() >= 0.9
        assert mask[:395].sum() + mask[455:].sum() == 0

    def test_window_must_fit(self):
        with pytest.raises(ConfigError):
            cfar_detect(np.ones(64, complex), CfarConfig(24, 8, 3.0))

    def test_low_sinr_detection_rate_with_tuned_factor(self, paper):
        def scenes(seed0, count):
            out, i = [], 0
            while len(out) < count:
                rng = np.random.default_rng(seed0 ^ i)
                scene = sample_scene(rng, paper.radar, paper.ranges)
                i += 1
                if not (-40.0 <= scene.sinr_db <= -20.0) or not scene.targets:
                    continue
                sweep = synthesize_scene(paper.radar, scene)
                if oracle_mask(sweep).any():
                    out.append(sweep)
            return out

        def recall(sweeps, factor):
            hit = total = 0
            cfg = CfarConfig(200, 16, factor)
            for sweep in sweeps:
                truth = oracle_mask(sweep)
                found = cfar_detect(sweep, cfg)
                hit += int(np.sum(found & truth))
                total += int(np.sum(truth))
            return hit / total

        tune_split = scenes(31337, 12)
        test_split = scenes(99991, 25)
        # pick the largest threshold that still clears the target (with a
        # margin) on the held-out tuning split
        factor = next(f for f in (1.0, 0.7, 0.5, 0.3, 0.2, 0.15, 0.1, 0.07, 0.05)
                      if recall(tune_split, f) >= 0.96)
        assert recall(test_split, factor) > 0.95


class TestZeroAndScore:
    def _sweep(self, desk, sinr=-20.0):
        scene = SceneSpec(
            (TargetParams(400.0, 1.0), TargetParams(900.0, 0.5)),
            (InterferenceParams(1.0, -5e10, 30e-6, 5e-6,
                                desk.radar.center_frequency_hz),),
            snr_db=20.0, sinr_db=sinr, seed=17)
        return synthesize_scene(desk.radar, scene)

    def test_empty_mask_is_identity(self, desk):
        sweep = self._sweep(desk)
        recovered, score = zero_and_score(sweep, np.zeros(256, bool))
        assert np.array_equal(recovered, sweep.samples)
        assert score == pytest.approx(sinr_db(sweep.samples, sweep.clean))

    def test_full_mask_scores_zero_db(self, desk):
        sweep = self._sweep(desk)
        recovered, score = zero_and_score(sweep, np.ones(256, bool))
        assert not np.any(recovered)
        assert score == pytest.approx(0.0)

    def test_oracle_mask_improves_strong_interference(self, desk):
        sweep = self._sweep(desk, sinr=-30.0)
        mask = oracle_mask(sweep)
        assert mask.any() and not mask.all()
        _, score = zero_and_score(sweep, mask)
        assert score > sinr_db(sweep.samples, sweep.clean)

    def test_mask_length_checked(self, desk):
        with pytest.raises(ShapeMismatchError):
            zero_and_score(self._sweep(desk), np.zeros(100, bool))


def _dataset(desk, count=30, seed0=2024):
    sweeps = []
    i = 0
    while len(sweeps) < count:
        rng = np.random.default_rng(seed0 ^ i)
        scene = sample_scene(rng, desk.radar, desk.ranges)
        i += 1
        sweeps.append(synthesize_scene(desk.radar, scene))
    return sweeps


class TestEvaluateMethod:
    def test_identity_bins_match_input(self, desk):
        dataset = _dataset(desk)
        report = evaluate_method(lambda sw: sw.samples, dataset,
                                 method_name="identity")
        for stat in report.bins:
            if stat.count:
                assert stat.mean_output_db == pytest.approx(
                    stat.mean_input_db, abs=0.1)

    def test_zero_method_all_bins_zero_db(self, desk):
        dataset = _dataset(desk)
        report = evaluate_method(lambda sw: np.zeros_like(sw.samples),
                                 dataset, method_name="zero")
        for row in report.rows:
            assert row.output_sinr_db == pytest.approx(0.0, abs=1e-9)

    def test_zero_target_scenes_skipped(self, desk):
        dataset = _dataset(desk, count=40, seed0=555)
        n_zero = sum(1 for sw in dataset if not np.any(sw.clean))
        report = evaluate_method(lambda sw: sw.samples, dataset)
        assert len(report.rows) == len(dataset) - n_zero

    def test_report_deterministic(self, desk):
        dataset = _dataset(desk, count=10)
        a = evaluate_method(lambda sw: sw.samples, dataset)
        b = evaluate_method(lambda sw: sw.samples, dataset)
        assert a == b

    def test_csv_format(self, desk, tmp_path):
        dataset = _dataset(desk, count=5)
        report = evaluate_method(lambda sw: sw.samples, dataset,
                                 method_name="identity")
        path = tmp_path / "report.csv"
        write_report_csv(path, report)
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().strip().split("\n")
        assert lines[0] == "scene_id,method,input_sinr_db,output_sinr_db"
        assert len(lines) == 1 + len(report.rows)
        for line in lines[1:]:
            scene_id, method, a, b2 = line.split(",")
            int(scene_id)
            assert method == "identity"
            float(a), float(b2)
