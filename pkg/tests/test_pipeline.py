"""Chunked split/integrate bookkeeping and end-to-end inference."""

import numpy as np
import pytest

from rimlab import SceneSpec, TargetParams, sinr_db, synthesize_scene
from rimlab.cvnn import ArchitectureSpec, init_model
from rimlab.errors import ConfigError
from rimlab.pipeline import (ChunkBatch, SplitConfig, denormalize_chunks,
                             integrate, make_training_pairs, run_inference,
                             split)
from rimlab.timefreq import stft


def _stack(rng, n_maps, bins, frames):
    return rng.standard_normal((n_maps, bins, frames)) \
        + 1j * rng.standard_normal((n_maps, bins, frames))


class TestSplit:
    def test_trace_n1000(self, rng):
        maps = _stack(rng, 1, 256, 1000)
        batch = split(maps, SplitConfig(256, 4))
        assert batch.n_chunks == 5
        starts = [0, 248, 496, 744, 992]
        chunks = batch.chunks.to_complex()[:, 0] * batch.scales[:, None, None]
        for i, start in enumerate(starts):
            valid = min(256, 1000 - start)
            assert np.allclose(chunks[i, :, :valid],
                               maps[0, :, start:start + valid], rtol=0, atol=0)
            assert not np.any(chunks[i, :, valid:])
        assert 1000 - starts[-1] == 8  # final chunk carries 8 valid frames

    def test_trace_n_equals_m(self, rng):
        cfg = SplitConfig(256, 4)
        maps = _stack(rng, 1, 256, 256)
        batch = split(maps, cfg)
        assert batch.n_chunks == 2
        # final chunk carries M - (M - 2*Np) = 2*Np frames
        final = batch.chunks.to_complex()[1, 0] * batch.scales[1]
        assert np.allclose(final[:, :8], maps[0, :, 248:])
        assert not np.any(final[:, 8:])

    def test_all_zero_map_bypasses_normalization(self):
        batch = split(np.zeros((1, 64, 80), complex), SplitConfig(64, 4))
        assert np.all(batch.scales == 1.0)
        assert not np.any(batch.chunks.re)

    def test_scales_are_powers_of_two_covering_peak(self, rng):
        maps = _stack(rng, 2, 64, 200) * 37.5
        batch = split(maps, SplitConfig(64, 4))
        peaks = np.abs(batch.chunks.to_complex()).reshape(batch.scales.size, -1).max(axis=1)
        exponents = np.log2(batch.scales)
        assert np.allclose(exponents, np.round(exponents))
        assert np.all((peaks > 0.5) & (peaks <= 1.0))

    def test_short_input_zero_padded(self, rng):
        maps = _stack(rng, 1, 64, 49)
        batch = split(maps, SplitConfig(64, 4))
        assert batch.n_frames == 64
        assert batch.n_frames_original == 49

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            SplitConfig(8, 4)
        with pytest.raises(ConfigError):
            split(np.zeros((1, 64, 80), complex), SplitConfig(128, 4))


class TestIntegrate:
    @pytest.mark.parametrize("frames", [300, 744, 1000])
    def test_pass_through_roundtrip_bitwise(self, rng, frames):
        maps = _stack(rng, 1, 256, frames)
        batch = split(maps, SplitConfig(256, 4))
        out = integrate(denormalize_chunks(batch))
        assert np.array_equal(out, maps)

    def test_seam_frames_come_from_expected_chunks(self):
        # fill chunk i with the constant i and read back frame ownership
        cfg = SplitConfig(256, 4)
        batch = split(np.zeros((1, 256, 1000), complex), cfg, normalize=False)
        marked = batch.chunks.to_complex()
        for i in range(batch.n_chunks):
            marked[i] = i + 1
        out = integrate(ChunkBatch(
            type(batch.chunks).from_complex(marked), batch.scales, 1,
            batch.n_frames, batch.n_frames_original, cfg))[0]
        owners = out[0].real.astype(int)
        seams = [252, 500, 748, 996]
        expected = np.repeat([1, 2, 3, 4, 5],
                             [seams[0], 248, 248, 248, 1000 - seams[-1]])
        assert np.array_equal(owners, expected)

    def test_multiple_maps_independent(self, rng):
        cfg = SplitConfig(64, 4)
        maps = _stack(rng, 3, 64, 300)
        together = integrate(denormalize_chunks(split(maps, cfg)))
        for l in range(3):
            alone = integrate(denormalize_chunks(split(maps[l:l + 1], cfg)))
            assert np.array_equal(together[l], alone[0])

    def test_scale_consistency(self, rng):
        maps = _stack(rng, 1, 64, 200)
        batch = split(maps, SplitConfig(64, 4))
        back = integrate(denormalize_chunks(batch))
        assert np.max(np.abs(back - maps)) <= 1e-12 * np.max(np.abs(maps))


class TestRunInference:
    def _scene_sweep(self, desk):
        scene = SceneSpec((TargetParams(400.0, 1.0),), (), 10.0, 10.0, 3)
        return synthesize_scene(desk.radar, scene)

    def test_zero_model_recovers_zero(self, desk, rng):
        model = init_model(ArchitectureSpec(2, 2, 3, "complex"), rng)
        for layer in model.layers:
            layer.kernel_re[:] = 0.0
            layer.kernel_im[:] = 0.0
        sweep = self._scene_sweep(desk)
        _, recovered = run_inference(model, sweep.samples, desk.stft, desk.split)
        assert np.max(np.abs(recovered)) < 1e-12
        assert sinr_db(recovered, sweep.clean) == pytest.approx(0.0, abs=1e-9)

    def test_residual_zero_kernels_pass_through(self, desk, rng):
        model = init_model(ArchitectureSpec(2, 2, 3, "complex", residual=True),
                           rng)
        for layer in model.layers:
            layer.kernel_re[:] = 0.0
            layer.kernel_im[:] = 0.0
        sweep = self._scene_sweep(desk)
        _, recovered = run_inference(model, sweep.samples, desk.stft, desk.split)
        assert np.max(np.abs(recovered - sweep.samples)) <= \
            1e-10 * np.max(np.abs(sweep.samples))

    def test_chunk_fft_mismatch_rejected(self, desk, rng):
        model = init_model(ArchitectureSpec(2, 2, 3, "complex"), rng)
        with pytest.raises(ConfigError):
            run_inference(model, np.zeros(256, complex), desk.stft,
                          SplitConfig(128, 4))


class TestMakeTrainingPairs:
    def test_clean_scene_input_equals_label(self, desk):
        scene = SceneSpec((TargetParams(700.0, 2.0),), (), 10.0, 10.0, 4)
        sweep = synthesize_scene(desk.radar, scene)
        clean_only = type(sweep)(samples=sweep.clean, clean=sweep.clean,
                                 interference=np.zeros_like(sweep.clean),
                                 noise=np.zeros_like(sweep.clean),
                                 spec=scene)
        pairs = make_training_pairs([clean_only], desk.stft, desk.split,
                                    np.random.default_rng(0))
        for x, y in pairs:
            assert np.array_equal(x, y)

    def test_deterministic_under_seed(self, desk):
        scene = SceneSpec((TargetParams(500.0, 1.0),),
                          (), 0.0, 0.0, 11)
        sweep = synthesize_scene(desk.radar, scene)
        a = make_training_pairs([sweep] * 3, desk.stft, desk.split,
                                np.random.default_rng(8))
        b = make_training_pairs([sweep] * 3, desk.stft, desk.split,
                                np.random.default_rng(8))
        assert len(a) == len(b)
        for (xa, ya), (xb, yb) in zip(a, b):
            assert np.array_equal(xa, xb) and np.array_equal(ya, yb)

    def test_chunk_count_follows_split_formula(self, desk):
        scene = SceneSpec((TargetParams(500.0, 1.0),), (), 0.0, 0.0, 12)
        sweep = synthesize_scene(desk.radar, scene)
        frames = stft(sweep.samples, desk.stft).n_frames
        n_eff = max(frames, desk.split.chunk_size)
        p = n_eff // desk.split.stride + 1
        pairs = make_training_pairs([sweep], desk.stft, desk.split,
                                    np.random.default_rng(0))
        assert len(pairs) == p

    def test_label_shares_input_scale(self, desk):
        scene = SceneSpec((TargetParams(500.0, 1.0),),
                          (), 20.0, 20.0, 13)
        sweep = synthesize_scene(desk.radar, scene)
        noisy = split(stft(sweep.samples, desk.stft).data[None], desk.split)
        label = split(stft(sweep.clean, desk.stft).data[None], desk.split,
                      scales=noisy.scales)
        raw_label = stft(sweep.clean, desk.stft).data
        rebuilt = label.chunks.to_complex()[0, 0] * noisy.scales[0]
        assert np.allclose(rebuilt[:, :raw_label.shape[1]],
                           raw_label[:, :desk.split.chunk_size])
