"""Multistatic cubes: superposition over transmitters, waveform cross-talk."""

import numpy as np
import pytest

from rfclutter.channel import ChannelImpulseResponse
from rfclutter.errors import ConfigurationError
from rfclutter.mimo import (LEAKAGE_FLOOR_DB, cross_channel_leakage,
                            enumerate_pairs, simulate_mimo_cube)
from rfclutter.rxsim import simulate_cube
from rfclutter.seeding import derive_rng
from rfclutter.waveform import Waveform, lfm, phase_code

FS = 10e6
PRF = 2000.0


def random_ir(seed, n=2, m=8, taps=24):
    rng = derive_rng(seed, 555)
    t = rng.standard_normal((n, m, taps)) + 1j * rng.standard_normal((n, m, taps))
    return ChannelImpulseResponse(taps=t.astype(np.complex64),
                                  sample_rate=FS, prf=PRF)


def delta_ir(tap, total_taps, n=1, m=4, amp=1.0):
    t = np.zeros((n, m, total_taps), dtype=np.complex64)
    t[:, :, tap] = amp
    return ChannelImpulseResponse(taps=t, sample_rate=FS, prf=PRF)


def test_enumerate_pairs_tx_major():
    assert enumerate_pairs(2, 3) == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)]
    assert enumerate_pairs(1, 1) == [(0, 0)]
    with pytest.raises(ConfigurationError):
        enumerate_pairs(0, 2)


def test_single_pair_matches_plain_simulator_exactly():
    """1x1 MIMO must be bit-identical to the single-channel path."""
    ir = random_ir(1)
    wf = phase_code(12, FS, seed=9)
    mimo = simulate_mimo_cube([[ir]], [wf], noise_power=0.5, seed=77)
    plain = simulate_cube(ir, None, wf, noise_power=0.5, seed=77)
    assert len(mimo) == 1
    np.testing.assert_array_equal(mimo[0].samples, plain.samples)
    assert mimo[0].delay_origin == plain.delay_origin


def test_multi_tx_cube_is_superposition():
    ir_a, ir_b = random_ir(2), random_ir(3)
    wf_a = lfm(bandwidth=2e6, duration=1.6e-6, sample_rate=FS)
    wf_b = phase_code(16, FS, seed=4)
    both = simulate_mimo_cube([[ir_a], [ir_b]], [wf_a, wf_b],
                              noise_power=0.0, seed=1)[0]
    only_a = simulate_mimo_cube([[ir_a]], [wf_a], noise_power=0.0, seed=1)[0]
    only_b = simulate_mimo_cube([[ir_b]], [wf_b], noise_power=0.0, seed=1)[0]
    np.testing.assert_allclose(
        both.samples, only_a.samples + only_b.samples,
        atol=1e-10 * np.abs(both.samples).max())


def test_receiver_noise_streams_are_independent():
    ir = random_ir(4)
    wf = phase_code(12, FS, seed=9)
    cubes = simulate_mimo_cube([[ir, ir]], [wf], noise_power=1.0, seed=5)
    assert len(cubes) == 2
    noise0 = cubes[0].samples - cubes[1].samples  # same signal, different noise
    assert np.abs(noise0).max() > 0.0
    again = simulate_mimo_cube([[ir, ir]], [wf], noise_power=1.0, seed=5)
    np.testing.assert_array_equal(cubes[0].samples, again[0].samples)
    np.testing.assert_array_equal(cubes[1].samples, again[1].samples)


def test_pair_dimension_guards():
    ir = random_ir(6)
    small = random_ir(7, taps=10)
    wf = phase_code(12, FS, seed=9)
    with pytest.raises(ConfigurationError):
        simulate_mimo_cube([[ir], [small]], [wf, wf], noise_power=0.0, seed=1)
    with pytest.raises(ConfigurationError):
        simulate_mimo_cube([[ir]], [wf, wf], noise_power=0.0, seed=1)
    with pytest.raises(ConfigurationError):
        simulate_mimo_cube([[ir, ir], [ir]], [wf, wf], noise_power=0.0, seed=1)


def test_identical_waveforms_leak_at_zero_db():
    wf = phase_code(16, FS, seed=11)
    irs = [delta_ir(3, 40), delta_ir(3, 40)]
    cubes = [simulate_mimo_cube([[ir]], [wf], noise_power=0.0, seed=1)[0]
             for ir in irs]
    leak = cross_channel_leakage(cubes, [wf, wf])
    np.testing.assert_allclose(leak, 0.0, atol=1e-9)


def test_disjoint_support_waveforms_hit_the_floor():
    """Waveforms with non-overlapping time support cannot cross-correlate."""
    a = np.zeros(16, dtype=np.complex128)
    b = np.zeros(16, dtype=np.complex128)
    a[:8] = 1.0 / np.sqrt(8.0)
    b[8:] = 1.0 / np.sqrt(8.0)
    wf_a = Waveform(samples=a, sample_rate=FS)
    wf_b = Waveform(samples=b, sample_rate=FS)
    # a one-tap channel keeps the receive frame at exactly P samples, so the
    # matched filter evaluates only the zero lag, where the disjoint halves
    # give an exact zero cross product
    ir = delta_ir(0, 1)
    cubes = [simulate_mimo_cube([[ir]], [w], noise_power=0.0, seed=1)[0]
             for w in (wf_a, wf_b)]
    leak = cross_channel_leakage(cubes, [wf_a, wf_b])
    assert leak[0, 0] == pytest.approx(0.0, abs=1e-9)
    assert leak[1, 1] == pytest.approx(0.0, abs=1e-9)
    assert leak[0, 1] == LEAKAGE_FLOOR_DB
    assert leak[1, 0] == LEAKAGE_FLOOR_DB


def test_chirp_pair_sits_between_floor_and_unity():
    wf_up = lfm(bandwidth=4e6, duration=6.4e-6, sample_rate=FS)
    wf_dn = lfm(bandwidth=4e6, duration=6.4e-6, sample_rate=FS, direction="down")
    ir = delta_ir(0, wf_up.samples.shape[0] + 20)
    cubes = [simulate_mimo_cube([[ir]], [w], noise_power=0.0, seed=1)[0]
             for w in (wf_up, wf_dn)]
    leak = cross_channel_leakage(cubes, [wf_up, wf_dn])
    off = leak[0, 1]
    assert LEAKAGE_FLOOR_DB < off < -3.0
    assert leak[0, 0] == pytest.approx(0.0, abs=1e-9)


def test_leakage_validation():
    wf = phase_code(8, FS, seed=2)
    ir = delta_ir(0, 20)
    cube = simulate_mimo_cube([[ir]], [wf], noise_power=0.0, seed=1)[0]
    with pytest.raises(ConfigurationError):
        cross_channel_leakage([cube], [wf, wf])
    zero = ChannelImpulseResponse(
        taps=np.zeros((1, 4, 20), dtype=np.complex64), sample_rate=FS, prf=PRF)
    zcube = simulate_mimo_cube([[zero]], [wf], noise_power=0.0, seed=1)[0]
    with pytest.raises(ValueError):
        cross_channel_leakage([zcube], [wf])
