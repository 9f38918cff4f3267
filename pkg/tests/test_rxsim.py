"""Receiver simulation: pulse convolution, superposition, noise, cube files."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfclutter.channel import ChannelImpulseResponse
from rfclutter.errors import ConfigurationError
from rfclutter.rxsim import (DataCube, convolve_pulse, noise_samples,
                             noiseless_samples, read_cube, simulate_cube,
                             stack_cubes, write_cube)
from rfclutter.waveform import Waveform, lfm

FS = 5e6


def random_ir(rng, n=2, m=3, l=16, kind="clutter"):
    taps = rng.normal(size=(n, m, l)) + 1j * rng.normal(size=(n, m, l))
    return ChannelImpulseResponse(taps=taps, sample_rate=FS, prf=2000.0, kind=kind)


def random_waveform(rng, p=8):
    s = rng.normal(size=p) + 1j * rng.normal(size=p)
    return Waveform(samples=s, sample_rate=FS)


def direct_convolve(taps, wf):
    """O(LP) reference convolution, written independently."""
    l, p = len(taps), len(wf)
    out = np.zeros(l + p - 1, dtype=complex)
    for i in range(l):
        for j in range(p):
            out[i + j] += taps[i] * wf[j]
    return out


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 128), st.integers(1, 64), st.integers(0, 2 ** 31))
def test_convolution_matches_direct_oracle(l, p, seed):
    """FFT pulse convolution == direct O(LP) sum, 1e-12 relative."""
    rng = np.random.default_rng(seed)
    taps = rng.normal(size=l) + 1j * rng.normal(size=l)
    wf = rng.normal(size=p) + 1j * rng.normal(size=p)
    got = convolve_pulse(taps, wf)
    want = direct_convolve(taps, wf)
    scale = np.abs(want).max() or 1.0
    assert got.shape == (l + p - 1,)
    np.testing.assert_allclose(got, want, atol=1e-12 * scale)


def test_noiseless_samples_per_pulse_lines():
    rng = np.random.default_rng(0)
    ir = random_ir(rng)
    wf = random_waveform(rng)
    out = noiseless_samples(ir, wf)
    assert out.shape == (2, 3, 16 + 8 - 1)
    for n in range(2):
        for m in range(3):
            want = direct_convolve(ir.taps[n, m].astype(complex), wf.samples)
            np.testing.assert_allclose(out[n, m], want, atol=1e-12 * np.abs(want).max())


def test_noiseless_samples_distinct_pulse_waveforms():
    """Pulse-to-pulse agility: each pulse convolves its own waveform."""
    rng = np.random.default_rng(1)
    ir = random_ir(rng, m=3)
    wfs = [random_waveform(rng) for _ in range(3)]
    out = noiseless_samples(ir, wfs)
    for m in range(3):
        want = direct_convolve(ir.taps[0, m].astype(complex), wfs[m].samples)
        np.testing.assert_allclose(out[0, m], want, atol=1e-12 * np.abs(want).max())


def test_clutter_target_superposition_is_exact():
    """Separate convolutions summed: combined cube == sum of parts."""
    rng = np.random.default_rng(2)
    clutter = random_ir(rng)
    target = random_ir(rng, kind="target")
    wf = random_waveform(rng)
    both = simulate_cube(clutter, target, wf, 0.0, seed=5)
    only_c = simulate_cube(clutter, None, wf, 0.0, seed=5)
    only_t = simulate_cube(None, target, wf, 0.0, seed=5)
    np.testing.assert_array_equal(both.samples, only_c.samples + only_t.samples)


def test_waveform_linearity_under_shared_seed():
    """cube(s1 + s2) - noise == (cube(s1) - noise) + (cube(s2) - noise)."""
    rng = np.random.default_rng(3)
    ir = random_ir(rng)
    w1 = random_waveform(rng)
    w2 = random_waveform(rng)
    w_sum = Waveform(samples=w1.samples + w2.samples, sample_rate=FS)
    noise_power = 0.5
    cube1 = simulate_cube(ir, None, w1, noise_power, seed=9)
    cube2 = simulate_cube(ir, None, w2, noise_power, seed=9)
    cube_sum = simulate_cube(ir, None, w_sum, noise_power, seed=9)
    noise = simulate_cube(ir, None, w1, noise_power, seed=9).samples \
        - simulate_cube(ir, None, w1, 0.0, seed=9).samples
    lhs = cube_sum.samples - noise
    rhs = (cube1.samples - noise) + (cube2.samples - noise)
    scale = np.abs(rhs).max()
    np.testing.assert_allclose(lhs, rhs, atol=1e-10 * scale)


def test_noise_variance_and_independence():
    noise = noise_samples(1, 2, 4, 4096, noise_power=2.0, seed=11)
    var = np.mean(np.abs(noise) ** 2)
    assert var == pytest.approx(2.0, rel=0.05)
    # per-line streams: two lines never share samples
    assert not np.allclose(noise[0, 0, 0], noise[0, 0, 1])
    assert not np.allclose(noise[0, 0, 0], noise[0, 1, 0])
    # deterministic
    again = noise_samples(1, 2, 4, 4096, noise_power=2.0, seed=11)
    np.testing.assert_array_equal(noise, again)


def test_zero_noise_power_is_exactly_zero():
    noise = noise_samples(1, 1, 2, 64, noise_power=0.0, seed=1)
    assert np.all(noise == 0)


def test_cube_noise_matches_absolute_cpi_stream():
    """Per-CPI simulation indexes noise by absolute CPI, not batch slot."""
    rng = np.random.default_rng(4)
    ir = random_ir(rng)
    wf = random_waveform(rng)
    c0 = simulate_cube(ir, None, wf, 0.3, seed=7, cpi_index=0)
    c2 = simulate_cube(ir, None, wf, 0.3, seed=7, cpi_index=2)
    assert not np.array_equal(c0.samples, c2.samples)
    again = simulate_cube(ir, None, wf, 0.3, seed=7, cpi_index=2)
    np.testing.assert_array_equal(c2.samples, again.samples)


def test_range_window_truncation():
    rng = np.random.default_rng(5)
    ir = random_ir(rng, l=16)
    wf = random_waveform(rng, p=8)
    full = simulate_cube(ir, None, wf, 0.0, seed=1)
    cut = simulate_cube(ir, None, wf, 0.0, seed=1, num_range_samples=10)
    assert cut.num_range_samples == 10
    np.testing.assert_array_equal(cut.samples, full.samples[:, :, :, :10])
    with pytest.raises(ConfigurationError):
        simulate_cube(ir, None, wf, 0.0, seed=1, num_range_samples=99)


def test_mismatched_channels_rejected():
    rng = np.random.default_rng(6)
    a = random_ir(rng, n=2)
    b = random_ir(rng, n=3, kind="target")
    with pytest.raises(ConfigurationError):
        simulate_cube(a, b, random_waveform(rng), 0.0, seed=1)
    with pytest.raises(ConfigurationError):
        simulate_cube(None, None, random_waveform(rng), 0.0, seed=1)


def test_stack_cubes_orders_cpis():
    rng = np.random.default_rng(7)
    ir = random_ir(rng)
    wf = random_waveform(rng)
    cubes = [simulate_cube(ir, None, wf, 0.1, seed=3, cpi_index=c) for c in range(3)]
    stacked = stack_cubes(cubes)
    assert stacked.num_cpis == 3
    for c in range(3):
        np.testing.assert_array_equal(stacked.samples[c], cubes[c].samples[0])


def test_cube_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    ir = random_ir(rng)
    wf = random_waveform(rng)
    cube = simulate_cube(ir, None, wf, 0.2, seed=4, carrier_hz=10e9)
    path = tmp_path / "cube.rfcube"
    write_cube(path, cube)
    back = read_cube(path)
    assert back.dims == cube.dims
    assert back.prf == cube.prf
    assert back.carrier_hz == cube.carrier_hz
    assert back.noise_power == cube.noise_power
    # payload stored as complex64
    np.testing.assert_array_equal(back.samples, cube.samples.astype(np.complex64))


def test_cube_reader_rejects_corruption(tmp_path):
    path = tmp_path / "bad.rfcube"
    path.write_bytes(b"XXCUBE99" + b"\x00" * 56)
    with pytest.raises(ConfigurationError):
        read_cube(path)
