import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emospeaker.dsp import DspError
from emospeaker.prosody import (
    PitchTrackerConfig,
    aggregate_blocks,
    estimate_f0,
    frame_log_energy,
    pitch_energy_track,
    suprasegmental_sequence,
)


def tone(freq: float, sr: int = 16000, seconds: float = 1.0) -> np.ndarray:
    t = np.arange(int(sr * seconds)) / sr
    return np.sin(2 * np.pi * freq * t)


class TestPitchEstimation:
    @pytest.mark.parametrize("freq", [100.0, 160.0, 200.0, 320.0])
    def test_exact_period_tones(self, freq):
        f0, voiced = estimate_f0(tone(freq)[:480], 16000)
        assert voiced
        assert f0 == pytest.approx(freq, rel=0.01)

    def test_harmonic_rich_signal(self):
        sr = 16000
        t = np.arange(480) / sr
        voice = sum(np.exp(-h / 2.0) * np.sin(2 * np.pi * h * 125.0 * t) for h in range(1, 6))
        f0, voiced = estimate_f0(voice, sr)
        assert voiced
        assert f0 == pytest.approx(125.0, rel=0.02)

    def test_noise_is_unvoiced(self):
        frame = np.random.default_rng(8).standard_normal(480)
        f0, voiced = estimate_f0(frame, 16000)
        assert not voiced
        assert f0 == 0.0

    def test_reported_f0_confined_to_search_range(self):
        # tones outside [75, 400] Hz may read as voiced (smooth signals
        # autocorrelate everywhere) but the reported f0 must stay in range
        for freq in (20.0, 50.0, 500.0, 701.0):
            f0, voiced = estimate_f0(tone(freq)[:480], 16000)
            if voiced:
                assert 75.0 <= f0 <= 400.0

    def test_lag_bounds(self):
        config = PitchTrackerConfig()
        lag_min, lag_max = config.lag_bounds(16000, 480)
        assert lag_min == 40   # ceil(16000 / 400)
        assert lag_max == 213  # floor(16000 / 75)

    def test_frame_too_short_rejected(self):
        with pytest.raises(DspError):
            PitchTrackerConfig().lag_bounds(16000, 30)

    def test_silence_is_unvoiced(self):
        f0, voiced = estimate_f0(np.zeros(480), 16000)
        assert not voiced


class TestFrameEnergy:
    def test_known_values(self):
        frames = np.stack([np.zeros(100), np.ones(100)])
        energy = frame_log_energy(frames)
        assert energy[0] == pytest.approx(-100.0)  # floored
        assert energy[1] == pytest.approx(0.0)

    def test_amplitude_scaling(self):
        rng = np.random.default_rng(2)
        frame = rng.standard_normal(200)
        base = frame_log_energy(frame[None, :])[0]
        scaled = frame_log_energy(10.0 * frame[None, :])[0]
        assert scaled - base == pytest.approx(20.0)


class TestBlockAggregation:
    def test_hand_example(self):
        f0 = np.array([100.0, 110.0, 0.0, 120.0, 0.0])
        voiced = np.array([True, True, False, True, False])
        energy = np.array([-10.0, -12.0, -30.0, -8.0, -40.0])
        blocks = aggregate_blocks(f0, voiced, energy, block_size=3)
        assert blocks.shape == (2, 4)
        # block 0: voiced f0s {100, 110}
        assert blocks[0] == pytest.approx([105.0, 10.0, (-10 - 12 - 30) / 3, 2 / 3])
        # block 1 (partial): voiced f0s {120}
        assert blocks[1] == pytest.approx([120.0, 0.0, (-8 - 40) / 2, 1 / 2])

    def test_fully_unvoiced_block(self):
        blocks = aggregate_blocks(
            np.zeros(4), np.zeros(4, dtype=bool), np.full(4, -50.0), block_size=4
        )
        assert blocks[0] == pytest.approx([0.0, 0.0, -50.0, 0.0])

    @given(n=st.integers(1, 200), block=st.integers(1, 20))
    @settings(max_examples=60, deadline=None)
    def test_block_count_is_ceiling(self, n, block):
        blocks = aggregate_blocks(
            np.full(n, 150.0), np.ones(n, dtype=bool), np.zeros(n), block_size=block
        )
        assert blocks.shape == (-(-n // block), 4)

    def test_shape_validation(self):
        with pytest.raises(DspError):
            aggregate_blocks(np.zeros(3), np.zeros(4, dtype=bool), np.zeros(3))
        with pytest.raises(DspError):
            aggregate_blocks(np.zeros(0), np.zeros(0, dtype=bool), np.zeros(0))
        with pytest.raises(DspError):
            aggregate_blocks(np.zeros(3), np.zeros(3, dtype=bool), np.zeros(3), block_size=0)


class TestEndToEnd:
    def test_track_lengths_match_frames(self):
        signal = tone(160.0)
        f0, voiced, energy = pitch_energy_track(signal, 16000)
        assert len(f0) == len(voiced) == len(energy) == 195

    def test_tone_blocks(self):
        blocks = suprasegmental_sequence(tone(160.0), 16000)
        assert blocks.shape == (-(-195 // 9), 4)
        assert np.allclose(blocks[:, 0], 160.0)
        assert np.allclose(blocks[:, 1], 0.0)
        assert np.allclose(blocks[:, 3], 1.0)

    def test_alternating_voicing_summary(self):
        sr = 16000
        # 0.5 s tone then 0.5 s silence: later blocks mostly unvoiced
        signal = np.concatenate([tone(200.0, sr, 0.5), np.zeros(sr // 2)])
        blocks = suprasegmental_sequence(signal, sr)
        assert blocks[0, 3] == 1.0
        assert blocks[-1, 3] == 0.0
