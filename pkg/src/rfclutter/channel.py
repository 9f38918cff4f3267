"""Channel impulse response synthesis.

The clutter and target channels are represented as per-channel,
per-pulse tapped delay lines: taps[n, m, l] is the complex gain of
receive channel n, pulse m at fast-time delay delay_origin + l / fs.
A receiver data cube is then just each pulse's waveform convolved with
these taps plus noise, which is what makes the channel description
waveform independent.

Taps are stored as complex64; that is the precision of the interchange
file format, and keeping the in-memory array identical to the on-disk
payload makes export/import lossless.  Accumulation happens in
complex128 before the final cast.

The binary impulse-response file format (magic RFGIR001) is
little-endian:

    offset  type    field
    0       8s      magic "RFGIR001"
    8       u32     N receive channels
    12      u32     M pulses
    16      u32     L delay taps
    20      f64     sample rate, Hz
    28      f64     delay origin, s
    36      f64     PRF, Hz
    44      f32*2NML interleaved I/Q, channel-major (n, m, l) C order
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.linalg import convolution_matrix

from .antenna import ArrayGeometry, spatial_steering_many
from .errors import ConfigurationError
from .scattering import patch_power_scale
from .seeding import STREAM_CLUTTER, derive_rng
from .terrain import PlatformState, ScenePatch

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0  # m/s

_MAGIC = b"RFGIR001"
_HEADER = struct.Struct("<8sIIIddd")

_ACCUM_CHUNK = 512  # patches per accumulation chunk; bounds scratch memory


@dataclass
class RadarTiming:
    """Fast/slow time bookkeeping for one CPI."""

    prf: float                   # Hz
    sample_rate: float           # Hz
    num_pulses: int
    num_taps: int                # receive window length, fast-time samples
    delay_origin: float = 0.0    # s, absolute delay of tap 0

    def __post_init__(self):
        if self.prf <= 0:
            raise ConfigurationError(f"prf must be positive, got {self.prf}")
        if self.sample_rate <= 0:
            raise ConfigurationError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.num_pulses < 1:
            raise ConfigurationError(f"num_pulses must be >= 1, got {self.num_pulses}")
        if self.num_taps < 1:
            raise ConfigurationError(f"num_taps must be >= 1, got {self.num_taps}")
        if self.delay_origin < 0:
            raise ConfigurationError(f"delay_origin must be non-negative, got {self.delay_origin}")

    @classmethod
    def for_swath(cls, prf: float, sample_rate: float, num_pulses: int,
                  swath: float, delay_origin: float = 0.0) -> "RadarTiming":
        """Receive window sized to a monostatic ground swath of `swath` meters.

        num_taps = ceil(two-way swath delay * sample_rate), with a small
        guard so windows that land exactly on a sample count do not gain
        a spurious extra tap.
        """
        if swath <= 0:
            raise ConfigurationError(f"swath must be positive, got {swath}")
        delay_extent = 2.0 * swath / SPEED_OF_LIGHT
        num_taps = max(1, math.ceil(delay_extent * sample_rate - 1e-9))
        return cls(prf=prf, sample_rate=sample_rate, num_pulses=num_pulses,
                   num_taps=num_taps, delay_origin=delay_origin)


@dataclass
class StochasticModel:
    """Per-realization randomness applied to patch responses."""

    seed: int = 0
    doppler_std_hz: float = 0.0      # intrinsic-motion Doppler jitter, 1 sigma
    deterministic_phase: bool = False  # phase from path length instead of a draw

    def __post_init__(self):
        if self.doppler_std_hz < 0:
            raise ConfigurationError("doppler_std_hz must be non-negative")


@dataclass
class PatchResponse:
    """Delay/Doppler/amplitude of one scatterer for one realization."""

    delay: float                 # s, total propagation delay
    doppler: float               # Hz
    amplitude: complex
    patch_id: int


@dataclass
class ChannelImpulseResponse:
    """Tapped-delay-line channel: taps[n, m, l], complex64."""

    taps: np.ndarray             # (N, M, L) complex64
    sample_rate: float           # Hz
    prf: float                   # Hz
    delay_origin: float = 0.0    # s
    kind: str = "clutter"        # "clutter" | "target"

    def __post_init__(self):
        self.taps = np.ascontiguousarray(self.taps, dtype=np.complex64)
        if self.taps.ndim != 3:
            raise ConfigurationError("impulse response taps must have shape (N, M, L)")
        if self.sample_rate <= 0 or self.prf <= 0:
            raise ConfigurationError("sample_rate and prf must be positive")
        self.taps.setflags(write=False)

    @property
    def num_channels(self) -> int:
        return self.taps.shape[0]

    @property
    def num_pulses(self) -> int:
        return self.taps.shape[1]

    @property
    def num_taps(self) -> int:
        return self.taps.shape[2]


@dataclass
class TransferFunction:
    """DFT of the impulse response along the delay axis."""

    bins: np.ndarray             # (N, M, L) complex128
    bin_spacing: float           # Hz

    @property
    def num_bins(self) -> int:
        return self.bins.shape[2]


def bistatic_delay_doppler(position, velocity, tx: PlatformState, rx: PlatformState,
                           wavelength: float) -> tuple[float, float]:
    """Propagation delay and Doppler of a point at `position` moving with
    `velocity`, for the given transmit and receive platforms.

    Doppler is positive for closing geometry; with tx == rx and a static
    point it reduces to 2 <v_platform, u> / lambda with u the unit
    vector from the platform to the point.
    """
    if wavelength <= 0:
        raise ConfigurationError(f"wavelength must be positive, got {wavelength}")
    position = np.asarray(position, dtype=np.float64).reshape(3)
    velocity = np.asarray(velocity, dtype=np.float64).reshape(3)
    d_tx = position - tx.position
    d_rx = position - rx.position
    r_tx = float(np.linalg.norm(d_tx))
    r_rx = float(np.linalg.norm(d_rx))
    if r_tx == 0.0 or r_rx == 0.0:
        raise ValueError("point coincides with a platform")
    u_tx = d_tx / r_tx
    u_rx = d_rx / r_rx
    delay = (r_tx + r_rx) / SPEED_OF_LIGHT
    doppler = (float(np.dot(tx.velocity - velocity, u_tx))
               + float(np.dot(rx.velocity - velocity, u_rx))) / wavelength
    return delay, doppler


def patch_response(patch: ScenePatch, power_scale: float, tx: PlatformState,
                   rx: PlatformState, wavelength: float, model: StochasticModel,
                   realization: int = 0) -> PatchResponse:
    """Delay/Doppler/amplitude of one patch for one CPI realization.

    amplitude = sqrt(G) * exp(j phi) with phi uniform per (patch,
    realization) under the model seed, or derived from the path length
    when the model is deterministic.  Doppler jitter, when configured,
    is drawn after the phase from the same per-patch stream.
    """
    if power_scale < 0:
        raise ValueError(f"power_scale must be non-negative, got {power_scale}")
    delay, doppler = bistatic_delay_doppler(patch.center, (0.0, 0.0, 0.0), tx, rx,
                                            wavelength)
    needs_rng = (not model.deterministic_phase) or model.doppler_std_hz > 0
    rng = None
    if needs_rng:
        rng = derive_rng(model.seed, STREAM_CLUTTER, realization, patch.patch_id)
    if model.deterministic_phase:
        phase = -2.0 * np.pi * (delay * SPEED_OF_LIGHT) / wavelength
    else:
        phase = rng.uniform(0.0, 2.0 * np.pi)
    if model.doppler_std_hz > 0:
        doppler += rng.normal(0.0, model.doppler_std_hz)
    amplitude = math.sqrt(power_scale) * complex(np.exp(1j * phase))
    return PatchResponse(delay=delay, doppler=doppler, amplitude=amplitude,
                         patch_id=patch.patch_id)


def patch_responses(patches: list[ScenePatch], power_scales: np.ndarray,
                    tx: PlatformState, rx: PlatformState, wavelength: float,
                    model: StochasticModel, realization: int = 0) -> list[PatchResponse]:
    """patch_response over a patch list; same per-patch streams as the
    scalar form, so a single patch can always be reproduced in isolation."""
    power_scales = np.asarray(power_scales, dtype=np.float64).reshape(-1)
    if power_scales.shape[0] != len(patches):
        raise ConfigurationError("power_scales length must match patch count")
    return [patch_response(p, float(g), tx, rx, wavelength, model, realization)
            for p, g in zip(patches, power_scales)]


def synthesize_ir(responses: list[PatchResponse], directions: np.ndarray,
                  array: ArrayGeometry, timing: RadarTiming, kind: str = "clutter",
                  delay_origin: float | None = None,
                  pulse_phase: np.ndarray | None = None,
                  pulse_amp: np.ndarray | None = None) -> ChannelImpulseResponse:
    """Accumulate patch responses into a per-channel, per-pulse tap array.

    tap[n, m, round((delay - origin) * fs)] += amp * exp(j 2 pi fd m / prf) * s_n(d)

    `directions` holds the unit receive direction (array -> patch) per
    response.  Responses are accumulated in ascending patch_id order so
    the result is bit-reproducible; zero-amplitude (shadowed) responses
    are skipped, which leaves the sum unchanged.  Responses whose tap
    falls outside the receive window are dropped and counted in a
    warning.

    `pulse_phase` / `pulse_amp`, when given, apply an extra per-response,
    per-pulse phase (rad) and amplitude factor; dynamic surfaces (sea
    states) use these to modulate individual pulses.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    if directions.shape[0] != len(responses):
        raise ConfigurationError("directions must align with responses")
    n_elem = array.num_elements
    n_pulse = timing.num_pulses
    n_tap = timing.num_taps
    origin = timing.delay_origin if delay_origin is None else delay_origin

    order = sorted(range(len(responses)), key=lambda k: (responses[k].patch_id, k))
    amps = np.array([responses[k].amplitude for k in order], dtype=np.complex128)
    keep = amps != 0
    order = [order[k] for k in np.nonzero(keep)[0]]
    amps = amps[keep]
    delays = np.array([responses[k].delay for k in order], dtype=np.float64)
    dopplers = np.array([responses[k].doppler for k in order], dtype=np.float64)
    dirs = directions[order] if order else np.zeros((0, 3))

    taps_idx = np.round((delays - origin) * timing.sample_rate).astype(np.int64)
    in_window = (taps_idx >= 0) & (taps_idx < n_tap)
    dropped = int(np.count_nonzero(~in_window))
    if dropped:
        logger.warning("%d patch responses fall outside the receive window and were dropped",
                       dropped)

    sel = np.nonzero(in_window)[0]
    out = np.zeros((n_tap, n_elem, n_pulse), dtype=np.complex128)
    if sel.size:
        if pulse_phase is not None:
            pulse_phase = np.asarray(pulse_phase, dtype=np.float64)
            if pulse_phase.shape != (len(responses), n_pulse):
                raise ConfigurationError("pulse_phase must have shape (num_responses, num_pulses)")
            pulse_phase = pulse_phase[order][sel]
        if pulse_amp is not None:
            pulse_amp = np.asarray(pulse_amp, dtype=np.float64)
            if pulse_amp.shape != (len(responses), n_pulse):
                raise ConfigurationError("pulse_amp must have shape (num_responses, num_pulses)")
            pulse_amp = pulse_amp[order][sel]

        steer = spatial_steering_many(array, dirs[sel]) * array.element_gains
        m = np.arange(n_pulse)
        for start in range(0, sel.size, _ACCUM_CHUNK):
            stop = min(start + _ACCUM_CHUNK, sel.size)
            blk = slice(start, stop)
            idx = sel[blk]
            slow = np.exp((2j * np.pi / timing.prf) * np.outer(dopplers[idx], m))
            if pulse_phase is not None:
                slow = slow * np.exp(1j * pulse_phase[blk])
            if pulse_amp is not None:
                slow = slow * pulse_amp[blk]
            contrib = (amps[idx, None, None] * steer[blk][:, :, None] * slow[:, None, :])
            np.add.at(out, taps_idx[idx], contrib)

    taps = np.ascontiguousarray(out.transpose(1, 2, 0)).astype(np.complex64)
    return ChannelImpulseResponse(taps=taps, sample_rate=timing.sample_rate,
                                  prf=timing.prf, delay_origin=origin, kind=kind)


def synthesize_target_ir(position, velocity, rcs: float, tx: PlatformState,
                         rx: PlatformState, array: ArrayGeometry,
                         timing: RadarTiming, tx_gain: float = 1.0,
                         rx_gain: float = 1.0) -> ChannelImpulseResponse:
    """Deterministic single-point target channel.

    The target amplitude follows the same range-equation budget as a
    patch with sigma0 * area replaced by the RCS, and its phase comes
    from the path length, so repeated runs are bit-identical.
    """
    if rcs < 0:
        raise ValueError(f"rcs must be non-negative, got {rcs}")
    position = np.asarray(position, dtype=np.float64).reshape(3)
    velocity = np.asarray(velocity, dtype=np.float64).reshape(3)
    wavelength = array.wavelength
    delay, doppler = bistatic_delay_doppler(position, velocity, tx, rx, wavelength)
    r_tx = float(np.linalg.norm(position - tx.position))
    r_rx = float(np.linalg.norm(position - rx.position))
    g = patch_power_scale(sigma0=rcs, area=1.0, tx_gain=tx_gain, rx_gain=rx_gain,
                          wavelength=wavelength, r_tx=r_tx, r_rx=r_rx)
    phase = -2.0 * np.pi * (delay * SPEED_OF_LIGHT) / wavelength
    amplitude = math.sqrt(g) * complex(np.exp(1j * phase))
    response = PatchResponse(delay=delay, doppler=doppler, amplitude=amplitude, patch_id=0)
    d_rx = position - rx.position
    direction = d_rx / np.linalg.norm(d_rx)
    return synthesize_ir([response], direction[None, :], array, timing, kind="target")


def to_transfer_function(ir: ChannelImpulseResponse) -> TransferFunction:
    """Stochastic transfer function: DFT of the taps along delay."""
    bins = np.fft.fft(ir.taps.astype(np.complex128), axis=2)
    return TransferFunction(bins=bins, bin_spacing=ir.sample_rate / ir.num_taps)


def ensemble_second_moment(realize, waveform_len: int, num_realizations: int = 64) -> np.ndarray:
    """Sample mean of H^H H over channel realizations.

    `realize(k)` must return the 1-D delay taps of realization k for a
    single channel/pulse.  H is that tap vector's convolution matrix
    acting on a length-`waveform_len` waveform, so the result is a
    (waveform_len, waveform_len) Hermitian matrix suitable for SCNR
    work.
    """
    if waveform_len < 1:
        raise ConfigurationError(f"waveform_len must be >= 1, got {waveform_len}")
    if num_realizations < 1:
        raise ConfigurationError(f"num_realizations must be >= 1, got {num_realizations}")
    acc = np.zeros((waveform_len, waveform_len), dtype=np.complex128)
    for k in range(num_realizations):
        taps = np.asarray(realize(k), dtype=np.complex128).reshape(-1)
        h = convolution_matrix(taps, waveform_len)
        acc += h.conj().T @ h
    acc /= num_realizations
    return 0.5 * (acc + acc.conj().T)


def write_ir(path, ir: ChannelImpulseResponse) -> None:
    taps = np.ascontiguousarray(ir.taps, dtype="<c8")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(_MAGIC, ir.num_channels, ir.num_pulses, ir.num_taps,
                             ir.sample_rate, ir.delay_origin, ir.prf))
        f.write(taps.tobytes())


def read_ir(path, kind: str = "clutter") -> ChannelImpulseResponse:
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise ConfigurationError(f"{path}: truncated impulse-response header")
        magic, n, m, l, fs, origin, prf = _HEADER.unpack(head)
        if magic != _MAGIC:
            raise ConfigurationError(f"{path}: not an impulse-response file (magic {magic!r})")
        nbytes = 8 * n * m * l
        payload = f.read(nbytes)
        if len(payload) < nbytes:
            raise ConfigurationError(f"{path}: truncated impulse-response payload")
        extra = f.read(1)
        if extra:
            raise ConfigurationError(f"{path}: trailing bytes after impulse-response payload")
    taps = np.frombuffer(payload, dtype="<c8").reshape(n, m, l)
    return ChannelImpulseResponse(taps=taps, sample_rate=fs, prf=prf,
                                  delay_origin=origin, kind=kind)
