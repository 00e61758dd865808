"""Pitch and energy contour features aggregated over multi-frame blocks.

A small observation stream summarizes prosody: per frame, fundamental
frequency (normalized-autocorrelation peak picking inside a plausible pitch
range) and log energy; frames are then grouped into fixed-size blocks and each
block yields a 4-dimensional vector

    [mean voiced f0, f0 range, mean log energy, voiced fraction]

suitable for a coarser HMM than the spectral stream.
"""

from dataclasses import dataclass

import numpy as np

from .dsp import DspError, frame_signal

ENERGY_FLOOR = 1e-10


@dataclass(frozen=True)
class PitchTrackerConfig:
    f_min: float = 75.0
    f_max: float = 400.0
    voicing_threshold: float = 0.3

    def lag_bounds(self, sample_rate: int, frame_length: int) -> tuple[int, int]:
        """Inclusive autocorrelation lag range searched for a pitch peak."""
        lag_min = int(np.ceil(sample_rate / self.f_max))
        lag_max = min(int(np.floor(sample_rate / self.f_min)), frame_length - 1)
        if lag_min < 1 or lag_min > lag_max:
            raise DspError(
                f"frame of {frame_length} samples too short for pitch range"
                f" [{self.f_min}, {self.f_max}] Hz at {sample_rate} Hz"
            )
        return lag_min, lag_max


def estimate_f0(
    frame: np.ndarray, sample_rate: int, config: PitchTrackerConfig = PitchTrackerConfig()
) -> tuple[float, bool]:
    """Estimate (f0_hz, voiced) for one frame.

    The normalized autocorrelation r(k) / sqrt(e0 * e_k) is evaluated for lags
    inside the configured pitch range (e_k is the energy of the lag-k-shifted
    segment, so the score stays in [-1, 1]); the frame is voiced when the best
    peak reaches the voicing threshold. Among lags scoring within 90% of the
    best peak the shortest wins, which suppresses period-doubling errors at
    multiples of the true lag. Unvoiced frames report f0 = 0.
    """
    frame = np.asarray(frame, dtype=np.float64)
    frame = frame - frame.mean()
    n = frame.size
    lag_min, lag_max = config.lag_bounds(sample_rate, n)

    energy = frame * frame
    csum = np.concatenate([[0.0], np.cumsum(energy)])
    lags = np.arange(lag_min, lag_max + 1)
    # r(k) = sum_{t} x_t x_{t+k}; head/tail energies normalize each overlap
    corr = np.array([np.dot(frame[: n - k], frame[k:]) for k in lags])
    head = csum[n - lags] - csum[0]
    tail = csum[n] - csum[lags]
    denom = np.sqrt(head * tail)
    with np.errstate(invalid="ignore", divide="ignore"):
        score = np.where(denom > 0.0, corr / denom, 0.0)

    best = int(np.argmax(score))
    if score[best] < config.voicing_threshold:
        return 0.0, False
    padded = np.concatenate([[-np.inf], score, [-np.inf]])
    is_peak = (score >= padded[:-2]) & (score >= padded[2:])
    candidates = np.flatnonzero(is_peak & (score >= 0.9 * score[best]))
    return sample_rate / float(lags[candidates[0]]), True


def frame_log_energy(frames: np.ndarray) -> np.ndarray:
    """10*log10 of mean squared amplitude per frame, floored at 1e-10."""
    frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
    mean_sq = np.mean(frames * frames, axis=1)
    return 10.0 * np.log10(np.maximum(mean_sq, ENERGY_FLOOR))


def pitch_energy_track(
    samples: np.ndarray,
    sample_rate: int,
    *,
    window_ms: float = 30.0,
    hop_ms: float = 5.0,
    config: PitchTrackerConfig = PitchTrackerConfig(),
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-frame (f0, voiced, log_energy) arrays for a waveform."""
    frame_length = int(round(sample_rate * window_ms / 1000.0))
    hop = int(round(sample_rate * hop_ms / 1000.0))
    frames = frame_signal(samples, frame_length, hop)
    f0 = np.empty(len(frames))
    voiced = np.empty(len(frames), dtype=bool)
    for i, frame in enumerate(frames):
        f0[i], voiced[i] = estimate_f0(frame, sample_rate, config)
    return f0, voiced, frame_log_energy(frames)


def aggregate_blocks(
    f0: np.ndarray, voiced: np.ndarray, log_energy: np.ndarray, block_size: int = 9
) -> np.ndarray:
    """Fold frame tracks into (n_blocks, 4) vectors; the last block may be short.

    Columns: mean f0 over voiced frames (0 if none), f0 range over voiced
    frames, mean log energy, fraction of voiced frames.
    """
    f0 = np.asarray(f0, dtype=np.float64)
    voiced = np.asarray(voiced, dtype=bool)
    log_energy = np.asarray(log_energy, dtype=np.float64)
    if not (f0.shape == voiced.shape == log_energy.shape) or f0.ndim != 1:
        raise DspError("f0, voiced, log_energy must be equal-length 1-D arrays")
    if f0.size == 0:
        raise DspError("empty frame track")
    if block_size < 1:
        raise DspError("block_size must be >= 1")

    n_blocks = -(-f0.size // block_size)
    out = np.zeros((n_blocks, 4))
    for b in range(n_blocks):
        sl = slice(b * block_size, min((b + 1) * block_size, f0.size))
        v = voiced[sl]
        if v.any():
            voiced_f0 = f0[sl][v]
            out[b, 0] = voiced_f0.mean()
            out[b, 1] = voiced_f0.max() - voiced_f0.min()
        out[b, 2] = log_energy[sl].mean()
        out[b, 3] = v.mean()
    return out


def suprasegmental_sequence(
    samples: np.ndarray,
    sample_rate: int,
    *,
    window_ms: float = 30.0,
    hop_ms: float = 5.0,
    block_size: int = 9,
    config: PitchTrackerConfig = PitchTrackerConfig(),
) -> np.ndarray:
    """Waveform -> (n_blocks, 4) prosodic observation sequence."""
    f0, voiced, energy = pitch_energy_track(
        samples, sample_rate, window_ms=window_ms, hop_ms=hop_ms, config=config
    )
    return aggregate_blocks(f0, voiced, energy, block_size)
