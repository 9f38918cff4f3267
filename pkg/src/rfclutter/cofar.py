"""Waveform optimization against channel second moments.

With A = E{H_c^H H_c} + sigma^2 I (clutter-plus-noise moment) and
B = E{H_t^H H_t} (target moment), the SCNR of a unit-energy waveform S
is (S^H B S) / (S^H A S).  Its maximizer is the principal generalized
eigenvector of B S = lambda A S, and the achieved SCNR equals the
principal eigenvalue; the available design headroom is the eigenvalue
spread lambda_max / lambda_min in dB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConditioningError, ConfigurationError

_HERMITIAN_RTOL = 1e-10


def _check_hermitian(mat: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(mat, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigurationError(f"{name} must be square, got shape {m.shape}")
    scale = np.linalg.norm(m)
    if scale > 0 and np.linalg.norm(m - m.conj().T) > _HERMITIAN_RTOL * scale:
        raise ConfigurationError(f"{name} is not Hermitian within tolerance")
    return 0.5 * (m + m.conj().T)


@dataclass
class ChannelMoments:
    """Second moments driving the waveform design.

    clutter_plus_noise already includes the sigma^2 I term, so the SCNR
    denominator for a unit-energy waveform is S^H clutter_plus_noise S.
    """

    clutter_plus_noise: np.ndarray   # A, (P, P) Hermitian
    target: np.ndarray               # B, (P, P) Hermitian PSD
    noise_power: float

    def __post_init__(self):
        self.clutter_plus_noise = _check_hermitian(self.clutter_plus_noise, "clutter_plus_noise")
        self.target = _check_hermitian(self.target, "target")
        if self.clutter_plus_noise.shape != self.target.shape:
            raise ConfigurationError("clutter and target moments must share a shape")
        if self.noise_power < 0:
            raise ConfigurationError("noise_power must be non-negative")

    @property
    def waveform_len(self) -> int:
        return self.target.shape[0]

    @classmethod
    def from_second_moments(cls, clutter: np.ndarray, target: np.ndarray,
                            noise_power: float) -> "ChannelMoments":
        """Build from raw E{H^H H} moments; adds the sigma^2 I term."""
        clutter = np.asarray(clutter, dtype=np.complex128)
        a = clutter + noise_power * np.eye(clutter.shape[0])
        return cls(clutter_plus_noise=a, target=target, noise_power=noise_power)


def scnr(waveform_samples: np.ndarray, moments: ChannelMoments) -> float:
    """SCNR of a unit-energy waveform under the given moments."""
    s = np.asarray(waveform_samples, dtype=np.complex128).reshape(-1)
    if s.shape[0] != moments.waveform_len:
        raise ConfigurationError(
            f"waveform length {s.shape[0]} != moment size {moments.waveform_len}")
    energy = float(np.vdot(s, s).real)
    if abs(energy - 1.0) > 1e-9:
        raise ValueError(f"waveform must have unit energy, got {energy}")
    num = float(np.vdot(s, moments.target @ s).real)
    den = float(np.vdot(s, moments.clutter_plus_noise @ s).real)
    if den <= 0:
        raise ConditioningError("clutter-plus-noise moment is not positive along the waveform")
    return num / den


def generalized_eigenvalues(moments: ChannelMoments) -> np.ndarray:
    """Eigenvalues of B S = lambda A S, ascending."""
    return scipy.linalg.eigh(moments.target, moments.clutter_plus_noise,
                             eigvals_only=True)


def optimal_waveform(moments: ChannelMoments) -> tuple[np.ndarray, float]:
    """Principal generalized eigenvector and its eigenvalue (= SCNR).

    The returned waveform has unit energy and its first nonzero entry
    made real positive so results are reproducible across solver
    backends.  A is reduced by Cholesky inside the Hermitian-definite
    solve; singular or indefinite A raises ConditioningError.
    """
    a = moments.clutter_plus_noise
    try:
        vals, vecs = scipy.linalg.eigh(moments.target, a)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ConditioningError(
            "clutter-plus-noise moment is not positive definite") from exc
    lam = float(vals[-1])
    s = vecs[:, -1]
    s = s / np.linalg.norm(s)
    # phase convention: first entry with non-negligible magnitude real positive
    tol = 1e-12 * float(np.abs(s).max())
    for entry in s:
        if abs(entry) > tol:
            s = s * (entry.conjugate() / abs(entry))
            break
    return s, lam


def max_gain_db(moments: ChannelMoments) -> float:
    """Design headroom 10 log10(lambda_max / lambda_min) of the
    generalized eigenspectrum.  Raises ConditioningError when the
    smallest eigenvalue is at or below zero (flat or singular target
    moment)."""
    vals = generalized_eigenvalues(moments)
    lam_min = float(vals[0])
    lam_max = float(vals[-1])
    if lam_min <= 0.0:
        raise ConditioningError(
            f"generalized eigenvalue floor {lam_min:g} is not positive; "
            "gain ratio undefined")
    return 10.0 * np.log10(lam_max / lam_min)
