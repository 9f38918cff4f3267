"""Waveform optimization: generalized eigensolution vs brute-force search."""

import numpy as np
import pytest

from rfclutter.cofar import (ChannelMoments, generalized_eigenvalues,
                             max_gain_db, optimal_waveform, scnr)
from rfclutter.errors import ConditioningError, ConfigurationError
from rfclutter.seeding import derive_rng

P = 6


def random_moments(dim, seed, noise_power=0.1):
    """Random Hermitian PSD clutter/target pair with a noise floor."""
    rng = derive_rng(seed, 777)
    fc = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    ft = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return ChannelMoments.from_second_moments(
        fc @ fc.conj().T, ft @ ft.conj().T, noise_power)


def unit(vec):
    v = np.asarray(vec, dtype=np.complex128)
    return v / np.linalg.norm(v)


def test_scnr_hand_case():
    # diagonal moments: SCNR of a basis vector reads off the ratio directly
    m = ChannelMoments(clutter_plus_noise=np.diag([2.0, 4.0]).astype(complex),
                       target=np.diag([6.0, 1.0]).astype(complex),
                       noise_power=0.0)
    e0 = np.array([1.0, 0.0])
    e1 = np.array([0.0, 1.0])
    assert scnr(e0, m) == pytest.approx(3.0, rel=1e-15)
    assert scnr(e1, m) == pytest.approx(0.25, rel=1e-15)
    s, lam = optimal_waveform(m)
    assert lam == pytest.approx(3.0, rel=1e-12)
    np.testing.assert_allclose(np.abs(s), [1.0, 0.0], atol=1e-12)
    assert max_gain_db(m) == pytest.approx(10.0 * np.log10(12.0), rel=1e-12)


def test_optimum_achieves_its_eigenvalue():
    for seed in range(6):
        m = random_moments(P, seed)
        s, lam = optimal_waveform(m)
        assert np.vdot(s, s).real == pytest.approx(1.0, rel=1e-12)
        assert abs(scnr(s, m) - lam) <= 1e-9 * lam


def test_optimum_beats_random_probes():
    rng = derive_rng(3, 778)
    m = random_moments(P, 42)
    s, lam = optimal_waveform(m)
    for _ in range(300):
        probe = unit(rng.standard_normal(P) + 1j * rng.standard_normal(P))
        assert scnr(probe, m) <= lam * (1.0 + 1e-9)


def test_scnr_phase_invariant():
    m = random_moments(P, 7)
    s, _ = optimal_waveform(m)
    rot = s * np.exp(1j * 1.234)
    assert scnr(rot, m) == pytest.approx(scnr(s, m), rel=1e-12)


def test_isotropic_channel_has_no_headroom():
    """Equal-eigenvalue moments leave nothing to optimize: 0 dB spread."""
    eye = np.eye(4, dtype=np.complex128)
    m = ChannelMoments(clutter_plus_noise=2.0 * eye, target=5.0 * eye,
                       noise_power=0.0)
    assert max_gain_db(m) == pytest.approx(0.0, abs=1e-6)
    vals = generalized_eigenvalues(m)
    np.testing.assert_allclose(vals, 2.5, rtol=1e-12)


def test_gain_formula_is_exact_eigen_ratio():
    m = random_moments(P, 11)
    vals = generalized_eigenvalues(m)
    want = 10.0 * np.log10(vals[-1] / vals[0])
    assert max_gain_db(m) == want


def test_noise_floor_tempers_scnr():
    """More noise in A can only lower the achievable SCNR."""
    rng = derive_rng(5, 779)
    fc = rng.standard_normal((P, P)) + 1j * rng.standard_normal((P, P))
    ft = rng.standard_normal((P, P)) + 1j * rng.standard_normal((P, P))
    clutter, target = fc @ fc.conj().T, ft @ ft.conj().T
    lams = []
    for sigma2 in (0.01, 0.1, 1.0, 10.0):
        m = ChannelMoments.from_second_moments(clutter, target, sigma2)
        lams.append(optimal_waveform(m)[1])
    assert all(a > b for a, b in zip(lams, lams[1:]))


def test_target_scaling_moves_eigenvalues_not_vector():
    m = random_moments(P, 13)
    s1, lam1 = optimal_waveform(m)
    m2 = ChannelMoments(clutter_plus_noise=m.clutter_plus_noise,
                        target=4.0 * m.target, noise_power=m.noise_power)
    s2, lam2 = optimal_waveform(m2)
    assert lam2 == pytest.approx(4.0 * lam1, rel=1e-12)
    np.testing.assert_allclose(s2, s1, atol=1e-9)
    # headroom is scale-free
    assert max_gain_db(m2) == pytest.approx(max_gain_db(m), rel=1e-12)


def test_from_second_moments_adds_noise_identity():
    rng = derive_rng(6, 780)
    f = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    clutter = f @ f.conj().T
    m = ChannelMoments.from_second_moments(clutter, np.eye(3), 0.7)
    np.testing.assert_allclose(m.clutter_plus_noise,
                               clutter + 0.7 * np.eye(3), atol=1e-14)


def test_validation():
    eye = np.eye(3, dtype=np.complex128)
    with pytest.raises(ConfigurationError):
        ChannelMoments(clutter_plus_noise=eye, target=np.eye(4), noise_power=0.0)
    with pytest.raises(ConfigurationError):
        ChannelMoments(clutter_plus_noise=eye, target=eye, noise_power=-1.0)
    skew = eye.copy()
    skew[0, 1] = 1.0   # not Hermitian
    with pytest.raises(ConfigurationError):
        ChannelMoments(clutter_plus_noise=skew, target=eye, noise_power=0.0)
    m = ChannelMoments(clutter_plus_noise=eye, target=eye, noise_power=0.0)
    with pytest.raises(ValueError):
        scnr(np.ones(3), m)          # energy 3, not unit
    with pytest.raises(ConfigurationError):
        scnr(unit(np.ones(4)), m)    # wrong length
    sing = ChannelMoments(clutter_plus_noise=np.diag([1.0, 0.0]).astype(complex),
                          target=np.eye(2, dtype=complex), noise_power=0.0)
    with pytest.raises(ConditioningError):
        optimal_waveform(sing)
