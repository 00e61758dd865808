"""
From a waveform to log-frequency band energies
==============================================

The acoustic front end turns a signal into a sequence of 16 band-energy
coefficients on a logarithmic frequency axis. This script walks through
every stage on a synthetic vowel so the numbers stay small enough to read.
"""

import numpy as np

from emospeaker.dsp import (
    build_log_filterbank,
    filterbank_energies,
    frame_signal,
    hamming_window,
    lfpc,
    lfpc_sequence,
    power_spectrum,
)

SAMPLE_RATE = 16000

# A fake vowel: a 150 Hz fundamental with a handful of harmonics, one second.
t = np.arange(SAMPLE_RATE) / SAMPLE_RATE
signal = sum(
    amp * np.sin(2 * np.pi * 150 * k * t)
    for k, amp in enumerate([0.5, 0.25, 0.12, 0.08, 0.05], start=1)
)

# Stage 1: slice into 30 ms frames every 5 ms.
frames = frame_signal(signal, frame_length=480, hop=80)
print(f"1 s of audio -> {len(frames)} frames of {frames.shape[1]} samples")

# Stage 2: Hamming window + power spectrum per frame.
window = hamming_window(480)
spectra = power_spectrum(frames * window, n_fft=512)
print(f"power spectrum: {spectra.shape[1]} bins up to the Nyquist frequency")

# Stage 3: the filter bank. Sixteen bands tile 100-8000 Hz so that each
# band's ratio of upper to lower edge is constant; low bands are narrow,
# high bands wide, mimicking how pitch spacing feels roughly logarithmic.
bank = build_log_filterbank(SAMPLE_RATE, n_fft=512, n_bands=16,
                            f_low=100.0, f_high=8000.0)
print("\nband   DFT bins      center (Hz)   width (Hz)")
for i in range(16):
    print(
        f"{i:>4}   [{bank.bin_lo[i]:>3}, {bank.bin_hi[i]:>3}]"
        f"   {bank.center_hz[i]:>10.1f} {bank.bandwidth_hz[i]:>12.1f}"
    )

ratios = bank.center_hz[1:] / bank.center_hz[:-1]
print(f"\ncenter-frequency ratios: min {ratios.min():.4f}, max {ratios.max():.4f}")
print("(nearly constant -- that is the 'log' in the log-frequency bank)")

# Stage 4: sum power inside each band, normalize by bandwidth, go to dB.
energies = filterbank_energies(spectra, bank)
features = lfpc(energies, bank)
print(f"\nfeature matrix: {features.shape} (frames x bands)")

middle = features[len(features) // 2]
print("frame 97 coefficients (dB):")
print("  " + "  ".join(f"{v:6.1f}" for v in middle))

# The harmonics sit below 750 Hz, i.e. inside the first half of the bank.
loud = int(np.argmax(middle))
print(f"\nloudest band: {loud} (center {bank.center_hz[loud]:.0f} Hz)")

# The one-call version used by the rest of the package:
same = lfpc_sequence(signal, SAMPLE_RATE)
print(f"lfpc_sequence agrees with the staged pipeline: {np.array_equal(same, features)}")
