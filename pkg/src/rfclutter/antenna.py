"""Receive array geometry and space-time steering vectors.

Directions are unit vectors in the scene ENU frame pointing from the
array toward the source.  Spatial steering is phase-referenced to
element 0, temporal steering to pulse 0, and the space-time vector is
their Kronecker product with the temporal factor varying slowest.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass
class ArrayGeometry:
    """Element positions and the common element pattern.

    The element pattern is cos(theta)^cosine_exponent of the angle off
    boresight, zero in the back hemisphere.  Optional per-element
    complex gain errors model uncalibrated hardware; they are applied
    when forming channel responses, never inside the ideal steering
    vectors.
    """

    element_positions: np.ndarray        # (n, 3) m, array frame == ENU frame
    wavelength: float                    # m
    boresight: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    cosine_exponent: float = 1.0
    gain_errors: np.ndarray | None = None   # optional complex (n,)

    def __post_init__(self):
        self.element_positions = np.atleast_2d(
            np.asarray(self.element_positions, dtype=np.float64))
        if self.element_positions.ndim != 2 or self.element_positions.shape[1] != 3:
            raise ConfigurationError("element_positions must have shape (n, 3)")
        if self.wavelength <= 0:
            raise ConfigurationError(f"wavelength must be positive, got {self.wavelength}")
        self.boresight = np.asarray(self.boresight, dtype=np.float64).reshape(3)
        n = np.linalg.norm(self.boresight)
        if n == 0:
            raise ConfigurationError("boresight must be a non-zero vector")
        self.boresight = self.boresight / n
        if self.cosine_exponent < 0:
            raise ConfigurationError("cosine_exponent must be non-negative")
        if self.gain_errors is not None:
            self.gain_errors = np.asarray(self.gain_errors, dtype=np.complex128).reshape(-1)
            if self.gain_errors.shape[0] != self.num_elements:
                raise ConfigurationError("gain_errors length must match element count")

    @property
    def num_elements(self) -> int:
        return self.element_positions.shape[0]

    @property
    def element_gains(self) -> np.ndarray:
        """Per-element complex gains; ones when no errors are configured."""
        if self.gain_errors is None:
            return np.ones(self.num_elements, dtype=np.complex128)
        return self.gain_errors

    @classmethod
    def ula(cls, num_elements: int, spacing: float, wavelength: float,
            axis=(1.0, 0.0, 0.0), boresight=(0.0, 1.0, 0.0),
            cosine_exponent: float = 1.0) -> "ArrayGeometry":
        """Uniform linear array along `axis`, element 0 at the origin."""
        if num_elements < 1:
            raise ConfigurationError("array needs at least one element")
        if spacing <= 0:
            raise ConfigurationError(f"element spacing must be positive, got {spacing}")
        axis = np.asarray(axis, dtype=np.float64).reshape(3)
        n = np.linalg.norm(axis)
        if n == 0:
            raise ConfigurationError("array axis must be a non-zero vector")
        axis = axis / n
        positions = np.outer(np.arange(num_elements) * spacing, axis)
        return cls(element_positions=positions, wavelength=wavelength,
                   boresight=np.asarray(boresight, dtype=np.float64),
                   cosine_exponent=cosine_exponent)


@dataclass
class SteeringVector:
    """A steering vector with a tag recording which factor(s) it holds."""

    entries: np.ndarray          # complex (len,)
    kind: str                    # "spatial" | "temporal" | "space_time"

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.complex128).reshape(-1)
        if self.kind not in ("spatial", "temporal", "space_time"):
            raise ConfigurationError(f"unknown steering vector kind {self.kind!r}")

    def __len__(self) -> int:
        return self.entries.shape[0]


def _check_unit(direction: np.ndarray) -> np.ndarray:
    direction = np.asarray(direction, dtype=np.float64).reshape(3)
    n = np.linalg.norm(direction)
    if abs(n - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector, |d| = {n}")
    return direction


def spatial_steering_many(array: ArrayGeometry, directions: np.ndarray) -> np.ndarray:
    """Ideal spatial steering entries for many directions, shape (k, n).

    Entry (i, m) = exp(j 2 pi / lambda <p_m - p_0, d_i>); element 0 is
    the phase reference, so column 0 is identically 1.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    rel = array.element_positions - array.element_positions[0]
    phase = (2.0 * np.pi / array.wavelength) * (directions @ rel.T)
    return np.exp(1j * phase)


def spatial_steering(array: ArrayGeometry, direction) -> SteeringVector:
    """Spatial steering vector toward a unit direction."""
    direction = _check_unit(direction)
    return SteeringVector(entries=spatial_steering_many(array, direction)[0], kind="spatial")


def wrap_normalized_doppler(f: float) -> float:
    """Wrap a normalized Doppler (cycles/pulse) into [-0.5, 0.5)."""
    return float((f + 0.5) % 1.0 - 0.5)


def temporal_steering(normalized_doppler: float, num_pulses: int) -> SteeringVector:
    """Temporal steering vector, entry m = exp(j 2 pi f m), m = 0..M-1."""
    if num_pulses < 1:
        raise ConfigurationError(f"num_pulses must be >= 1, got {num_pulses}")
    if not -0.5 <= normalized_doppler < 0.5:
        raise ValueError(
            f"normalized Doppler {normalized_doppler} outside [-0.5, 0.5); "
            "wrap it first (wrap_normalized_doppler)")
    m = np.arange(num_pulses)
    return SteeringVector(entries=np.exp(2j * np.pi * normalized_doppler * m), kind="temporal")


def space_time_steering(spatial: SteeringVector, temporal: SteeringVector) -> SteeringVector:
    """Kronecker product temporal (x) spatial: entry (m*n_elems + n) = t_m * s_n."""
    if spatial.kind != "spatial" or temporal.kind != "temporal":
        raise ConfigurationError(
            f"expected (spatial, temporal) factors, got ({spatial.kind}, {temporal.kind})")
    return SteeringVector(entries=np.kron(temporal.entries, spatial.entries), kind="space_time")


def pattern_gain(array: ArrayGeometry, weights: np.ndarray, direction) -> float:
    """Power gain |w^H s(d)|^2 * cos^p(angle off boresight).

    Zero in the back hemisphere.  Per-element gain errors, when
    configured, are included in the response the weights act on.
    """
    direction = _check_unit(direction)
    weights = np.asarray(weights, dtype=np.complex128).reshape(-1)
    if weights.shape[0] != array.num_elements:
        raise ConfigurationError(
            f"weights length {weights.shape[0]} != element count {array.num_elements}")
    cos_off = float(np.dot(direction, array.boresight))
    if cos_off <= 0.0:
        return 0.0
    response = spatial_steering_many(array, direction)[0] * array.element_gains
    af = abs(np.vdot(weights, response)) ** 2
    return af * cos_off ** array.cosine_exponent


def pattern_gains(array: ArrayGeometry, weights: np.ndarray,
                  directions: np.ndarray) -> np.ndarray:
    """Vectorized pattern_gain over rows of `directions`."""
    weights = np.asarray(weights, dtype=np.complex128).reshape(-1)
    if weights.shape[0] != array.num_elements:
        raise ConfigurationError(
            f"weights length {weights.shape[0]} != element count {array.num_elements}")
    directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    response = spatial_steering_many(array, directions) * array.element_gains
    af = np.abs(response @ weights.conj()) ** 2
    cos_off = directions @ array.boresight
    ef = np.where(cos_off > 0.0, np.maximum(cos_off, 0.0) ** array.cosine_exponent, 0.0)
    return af * ef
