"""Dynamic sea-surface clutter.

Each water patch carries an Ornstein-Uhlenbeck radial surface velocity
whose stationary standard deviation scales with wind speed, plus a
unit-median lognormal amplitude factor whose log-spread also scales
with wind speed.  Per pulse, the velocity maps to a Doppler offset
(monostatic convention, 2 v / lambda) and the offsets integrate into a
per-pulse phase track that feeds synthesize_ir.

At zero wind every draw collapses to exactly zero velocity and unit
amplitude, so the channel reduces bit-for-bit to the static terrain
case.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .seeding import STREAM_OCEAN, derive_rng
from .terrain import ScenePatch

DEFAULT_VELOCITY_PER_WIND = 0.1      # stationary velocity sigma per m/s of wind
DEFAULT_LOG_AMP_PER_WIND = 0.02      # lognormal sigma per m/s of wind


@dataclass
class OceanState:
    """Sea-surface configuration for a set of water patches."""

    patches: list[ScenePatch]
    wind_speed: float                    # m/s
    wind_direction: float = 0.0          # rad from east, reserved for wakes
    velocity_per_wind: float = DEFAULT_VELOCITY_PER_WIND
    log_amp_per_wind: float = DEFAULT_LOG_AMP_PER_WIND
    correlation_time: float = 0.05       # s, OU velocity decorrelation

    def __post_init__(self):
        if self.wind_speed < 0:
            raise ConfigurationError(f"wind_speed must be non-negative, got {self.wind_speed}")
        if self.correlation_time <= 0:
            raise ConfigurationError("correlation_time must be positive")
        if self.velocity_per_wind < 0 or self.log_amp_per_wind < 0:
            raise ConfigurationError("wind scaling coefficients must be non-negative")

    @property
    def velocity_std(self) -> float:
        """Stationary radial-velocity sigma, m/s."""
        return self.velocity_per_wind * self.wind_speed

    @property
    def log_amp_std(self) -> float:
        return self.log_amp_per_wind * self.wind_speed


def surface_series(state: OceanState, num_pulses: int, prf: float,
                   seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-patch radial velocities and amplitude factors over a CPI.

    Returns (velocities, amplitudes), each (num_patches, num_pulses).
    Each patch draws from its own stream keyed by patch_id, with the
    velocity innovation and amplitude draw interleaved per pulse, so a
    series of any length is a prefix of a longer one.
    """
    if num_pulses < 1:
        raise ConfigurationError(f"num_pulses must be >= 1, got {num_pulses}")
    if prf <= 0:
        raise ConfigurationError(f"prf must be positive, got {prf}")
    n = len(state.patches)
    xi = np.empty((n, num_pulses))
    za = np.empty((n, num_pulses))
    for i, p in enumerate(state.patches):
        rng = derive_rng(seed, STREAM_OCEAN, p.patch_id)
        buf = rng.standard_normal(2 * num_pulses)
        xi[i] = buf[0::2]
        za[i] = buf[1::2]

    sigma_v = state.velocity_std
    rho = float(np.exp(-1.0 / (state.correlation_time * prf)))
    vel = np.empty((n, num_pulses))
    vel[:, 0] = sigma_v * xi[:, 0]
    drive = sigma_v * np.sqrt(1.0 - rho * rho)
    for m in range(1, num_pulses):
        vel[:, m] = rho * vel[:, m - 1] + drive * xi[:, m]

    amp = np.exp(state.log_amp_std * za)
    return vel, amp


def evolve_clutter_map(state: OceanState, pulse_index: int, prf: float,
                       wavelength: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-patch (Doppler offset Hz, amplitude factor) at one pulse.

    Deterministic in (state, pulse_index, seed): recomputes the series
    up to the requested pulse, so calls at different pulse indices are
    mutually consistent.
    """
    if pulse_index < 0:
        raise ConfigurationError(f"pulse_index must be non-negative, got {pulse_index}")
    if wavelength <= 0:
        raise ConfigurationError(f"wavelength must be positive, got {wavelength}")
    vel, amp = surface_series(state, pulse_index + 1, prf, seed)
    doppler = 2.0 * vel[:, pulse_index] / wavelength
    return doppler, amp[:, pulse_index]


def pulse_modulation(state: OceanState, num_pulses: int, prf: float,
                     wavelength: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-patch, per-pulse extra phase (rad) and amplitude factor.

    The phase track integrates the per-pulse Doppler offsets (zero at
    pulse 0), in the form synthesize_ir consumes.  At zero wind both
    arrays are exactly zeros/ones.
    """
    if wavelength <= 0:
        raise ConfigurationError(f"wavelength must be positive, got {wavelength}")
    vel, amp = surface_series(state, num_pulses, prf, seed)
    doppler = 2.0 * vel / wavelength
    phase = np.zeros_like(doppler)
    if num_pulses > 1:
        phase[:, 1:] = (2.0 * np.pi / prf) * np.cumsum(doppler[:, 1:], axis=1)
    return phase, amp


def make_sea_patches(extent_east: float, extent_north: float, patch_size: float,
                     landcover_class: int = 0, first_id: int = 0) -> list[ScenePatch]:
    """Flat sea-surface patch grid at height 0."""
    if patch_size <= 0:
        raise ConfigurationError(f"patch_size must be positive, got {patch_size}")
    n_x = max(1, int(np.ceil(extent_east / patch_size - 1e-9)))
    n_y = max(1, int(np.ceil(extent_north / patch_size - 1e-9)))
    up = np.array([0.0, 0.0, 1.0])
    patches = []
    k = first_id
    for i in range(n_y):
        for j in range(n_x):
            patches.append(ScenePatch(
                center=np.array([(j + 0.5) * patch_size, (i + 0.5) * patch_size, 0.0]),
                normal=up.copy(),
                area=patch_size * patch_size,
                landcover_class=landcover_class,
                patch_id=k,
            ))
            k += 1
    return patches


def wake_strip(start, heading: float, length: float, width: float,
               patch_size: float, landcover_class: int, first_id: int) -> list[ScenePatch]:
    """Line of elevated-reflectivity patches approximating a ship wake.

    Geometry only; callers assign the wake class a stronger table entry.
    """
    if length <= 0 or width <= 0 or patch_size <= 0:
        raise ConfigurationError("wake dimensions must be positive")
    start = np.asarray(start, dtype=np.float64).reshape(2)
    u = np.array([np.cos(heading), np.sin(heading)])
    n_along = max(1, int(np.ceil(length / patch_size - 1e-9)))
    up = np.array([0.0, 0.0, 1.0])
    patches = []
    for k in range(n_along):
        c = start + u * (k + 0.5) * patch_size
        patches.append(ScenePatch(
            center=np.array([c[0], c[1], 0.0]),
            normal=up.copy(),
            area=patch_size * width,
            landcover_class=landcover_class,
            patch_id=first_id + k,
        ))
    return patches


def wind_doppler_spread(power_map: np.ndarray, doppler_freqs: np.ndarray,
                        mask: np.ndarray | None = None) -> float:
    """Power-weighted Doppler standard deviation of a range-Doppler map.

    `power_map` is linear power, shape (doppler bins, range bins);
    `doppler_freqs` gives the Hz value of each Doppler bin.  `mask`
    restricts the estimate to the clutter ridge when given.
    """
    p = np.asarray(power_map, dtype=np.float64)
    f = np.asarray(doppler_freqs, dtype=np.float64).reshape(-1)
    if p.ndim != 2 or p.shape[0] != f.shape[0]:
        raise ConfigurationError(
            f"power_map rows {p.shape} must match doppler_freqs length {f.shape[0]}")
    if np.any(p < 0):
        raise ValueError("power_map must be non-negative (linear power)")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != p.shape:
            raise ConfigurationError("mask shape must match power_map")
        p = np.where(mask, p, 0.0)
    weights = p.sum(axis=1)
    total = weights.sum()
    if total == 0.0:
        raise ValueError("power map is all zero over the selected bins")
    mean = float(np.dot(weights, f) / total)
    var = float(np.dot(weights, (f - mean) ** 2) / total)
    return float(np.sqrt(var))
