"""Multistatic (MIMO) channel simulation and separation measurement.

Every transmit/receive platform pair gets its own channel impulse
response; a receiver's cube is the sum over transmitters of that pair's
channel convolved with that transmitter's waveform, plus receiver
noise.  Waveform separability is measured by matched-filtering a
single-transmitter cube with every transmitter's waveform and comparing
peaks.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .channel import ChannelImpulseResponse
from .errors import ConfigurationError
from .rxsim import DataCube, _noise_for_cpi, noiseless_samples
from .waveform import Waveform


def enumerate_pairs(num_tx: int, num_rx: int) -> list[tuple[int, int]]:
    """All (tx, rx) index pairs in tx-major order."""
    if num_tx < 1 or num_rx < 1:
        raise ConfigurationError("need at least one transmitter and one receiver")
    return [(t, r) for t in range(num_tx) for r in range(num_rx)]


def simulate_mimo_cube(pair_irs: Sequence[Sequence[ChannelImpulseResponse]],
                       waveforms: Sequence[Waveform], noise_power: float,
                       seed: int, carrier_hz: float = 0.0,
                       cpi_index: int = 0) -> list[DataCube]:
    """Per-receiver cubes for a T x R channel matrix.

    pair_irs[t][r] is the channel from transmitter t to receiver r;
    waveforms[t] is what transmitter t radiates.  Transmit returns are
    accumulated in tx order; receiver noise uses per-receiver streams,
    so the 1x1 case is bit-identical to the single-channel simulator.
    """
    num_tx = len(pair_irs)
    if num_tx == 0:
        raise ConfigurationError("need at least one transmitter")
    if len(waveforms) != num_tx:
        raise ConfigurationError(
            f"{num_tx} transmitters but {len(waveforms)} waveforms")
    num_rx = len(pair_irs[0])
    for row in pair_irs:
        if len(row) != num_rx:
            raise ConfigurationError("pair_irs rows must share one receiver count")

    cubes = []
    for r in range(num_rx):
        ref = pair_irs[0][r]
        signal = noiseless_samples(ref, waveforms[0])
        for t in range(1, num_tx):
            ir = pair_irs[t][r]
            if (ir.num_channels, ir.num_pulses, ir.num_taps) != (
                    ref.num_channels, ref.num_pulses, ref.num_taps):
                raise ConfigurationError(
                    f"pair ({t}, {r}) channel dimensions differ from pair (0, {r})")
            signal = signal + noiseless_samples(ir, waveforms[t])
        noise = np.zeros((1,) + signal.shape, dtype=np.complex128)
        if noise_power > 0.0:
            noise = _noise_for_cpi(cpi_index, ref.num_channels, ref.num_pulses,
                                   signal.shape[2], noise_power, seed, rx_index=r)
        cubes.append(DataCube(samples=signal[None] + noise, sample_rate=ref.sample_rate,
                              prf=ref.prf, noise_power=noise_power,
                              carrier_hz=carrier_hz, delay_origin=ref.delay_origin))
    return cubes


LEAKAGE_FLOOR_DB = -300.0


def cross_channel_leakage(single_tx_cubes: Sequence[DataCube],
                          waveforms: Sequence[Waveform], cpi: int = 0,
                          channel: int = 0) -> np.ndarray:
    """Matched-filter cross-talk matrix in dB.

    single_tx_cubes[b] must be generated with only transmitter b
    radiating.  Entry (a, b) is the peak magnitude of waveform a's
    matched filter applied to cube b, relative to the matched peak
    (a, a), as 20 log10 of the amplitude ratio.  Peaks are taken over
    all pulses and fully-overlapped range lags of one receive channel.
    An exactly zero cross response reports the floor value
    LEAKAGE_FLOOR_DB.
    """
    from .dsp import pulse_compress  # local import; dsp depends on rxsim

    num_tx = len(waveforms)
    if len(single_tx_cubes) != num_tx:
        raise ConfigurationError(
            f"{num_tx} waveforms but {len(single_tx_cubes)} single-tx cubes")
    peaks = np.empty((num_tx, num_tx))
    for a in range(num_tx):
        for b in range(num_tx):
            x = single_tx_cubes[b].samples[cpi, channel]
            mf = pulse_compress(x, waveforms[a])
            peaks[a, b] = float(np.abs(mf).max())
    out = np.empty((num_tx, num_tx))
    for a in range(num_tx):
        if peaks[a, a] == 0.0:
            raise ValueError(f"matched response ({a}, {a}) is identically zero")
        for b in range(num_tx):
            if peaks[a, b] == 0.0:
                out[a, b] = LEAKAGE_FLOOR_DB
            else:
                out[a, b] = max(LEAKAGE_FLOOR_DB,
                                20.0 * np.log10(peaks[a, b] / peaks[a, a]))
    return out
