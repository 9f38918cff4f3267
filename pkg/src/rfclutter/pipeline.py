"""End-to-end scenario simulation.

Turns a Scenario into, per CPI: a clutter impulse response (terrain
patches, buildings, stationary discretes), a target impulse response
(the declared movers), and a receiver data cube.  Geometry, visibility,
reflectivity, and the range-equation budget all happen here; the
numeric kernels live in the channel/rxsim modules.

CPIs are simulated independently with per-CPI derived random streams,
so a run is byte-identical whether CPIs execute serially or on a thread
pool.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import scattering
from .antenna import ArrayGeometry, pattern_gains
from .channel import (ChannelImpulseResponse, PatchResponse, RadarTiming,
                      SPEED_OF_LIGHT, StochasticModel, bistatic_delay_doppler,
                      ensemble_second_moment, patch_responses, synthesize_ir)
from .cofar import ChannelMoments
from .errors import ConfigurationError
from .ocean import OceanState, pulse_modulation
from .rxsim import DataCube, simulate_cube
from .scattering import patch_power_scale, patch_power_scales
from .scenario import Scenario
from .seeding import STREAM_MIMO_CODE, STREAM_OCEAN, derive_seed
from .terrain import (ClassGrid, ElevationGrid, PatchArrays, PlatformState,
                      ScenePatch, build_patch_grid, grazing_angles, line_of_sight,
                      patch_arrays)
from .waveform import Waveform, lfm

logger = logging.getLogger(__name__)

# Rays are lifted this much (m) before the terrain comparison so patch
# centers sitting exactly on the surface don't self-occlude.
LOS_CLEARANCE_M = 1.0

# Realization indices >= this belong to moment estimation, so training
# draws never reuse the phases of the exported CPIs.
MOMENT_REALIZATION_BASE = 1_000_000


@dataclass
class SceneModel:
    """Scenario geometry resolved into scatterers.

    `patches` holds the terrain grid first, then one roof patch per
    building; `discrete_patches` continue the id sequence.  The DEM
    includes the building extrusions so visibility rays see them.
    """

    dem: ElevationGrid
    landcover: ClassGrid
    patches: list[ScenePatch]
    discrete_patches: list[ScenePatch] = field(default_factory=list)
    discrete_rcs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    num_terrain_patches: int = 0
    num_building_patches: int = 0

    def __post_init__(self):
        self.arrays: PatchArrays = patch_arrays(self.patches)
        self.water: np.ndarray = self.arrays.classes == scattering.WATER

    @property
    def num_responses(self) -> int:
        return len(self.patches) + len(self.discrete_patches)


def _extrude_buildings(dem: ElevationGrid, scn: Scenario) -> ElevationGrid:
    """Raise the DEM cells under each building by the building height."""
    b = scn.buildings
    heights = dem.heights.copy()
    half = b.footprint / 2.0
    cell = dem.cell_size
    for cx, cy in b.centers():
        c0 = max(0, int(np.ceil((cx - half) / cell - 0.5)))
        c1 = min(dem.ncols - 1, int(np.floor((cx + half) / cell - 0.5)))
        r_from_south0 = max(0, int(np.ceil((cy - half) / cell - 0.5)))
        r_from_south1 = min(dem.nrows - 1, int(np.floor((cy + half) / cell - 0.5)))
        if c1 < c0 or r_from_south1 < r_from_south0:
            continue
        rows = dem.nrows - 1 - np.arange(r_from_south0, r_from_south1 + 1)
        heights[np.ix_(rows, np.arange(c0, c1 + 1))] += b.height
    return ElevationGrid(heights=heights, cell_size=dem.cell_size,
                         origin_lat=dem.origin_lat, origin_lon=dem.origin_lon)


def build_scene(scn: Scenario) -> SceneModel | None:
    """Resolve the scenario's scene content, or None for target-only runs."""
    if scn.dem is None:
        if scn.buildings is not None or scn.discretes:
            raise ConfigurationError("buildings and discretes need a terrain raster")
        return None
    dem = scn.dem
    landcover = scn.landcover
    if landcover is None:
        landcover = ClassGrid(classes=np.full(dem.heights.shape, scattering.GRASS,
                                              dtype=np.int64),
                              cell_size=dem.cell_size)

    ground = dem
    if scn.buildings is not None:
        dem = _extrude_buildings(dem, scn)

    patches = build_patch_grid(dem, landcover, scn.patch_size_m)
    n_terrain = len(patches)

    n_buildings = 0
    if scn.buildings is not None:
        b = scn.buildings
        up = np.array([0.0, 0.0, 1.0])
        for k, (cx, cy) in enumerate(b.centers()):
            roof = ground.height_at(cx, cy) + b.height
            patches.append(ScenePatch(
                center=np.array([cx, cy, roof]),
                normal=up.copy(),
                area=b.footprint ** 2,
                landcover_class=b.landcover_class,
                patch_id=n_terrain + k,
            ))
        n_buildings = b.count

    discrete_patches = []
    for j, d in enumerate(scn.discretes):
        discrete_patches.append(ScenePatch(
            center=d.position.copy(),
            normal=np.array([0.0, 0.0, 1.0]),
            area=1.0,
            landcover_class=scattering.URBAN,
            patch_id=n_terrain + n_buildings + j,
        ))

    return SceneModel(dem=dem, landcover=landcover, patches=patches,
                      discrete_patches=discrete_patches,
                      discrete_rcs=np.array([d.rcs for d in scn.discretes]),
                      num_terrain_patches=n_terrain,
                      num_building_patches=n_buildings)


def platform_states(scn: Scenario, cpi: int) -> tuple[PlatformState, PlatformState]:
    """Transmit and receive platform states at the start of a CPI."""
    t = cpi * scn.cpi_interval
    tx = PlatformState(position=scn.tx_position + scn.tx_velocity * t,
                       velocity=scn.tx_velocity.copy())
    if scn.rx_position is None:
        rx = PlatformState(position=tx.position.copy(), velocity=tx.velocity.copy())
    else:
        rx_vel = scn.rx_velocity if scn.rx_velocity is not None else np.zeros(3)
        rx = PlatformState(position=scn.rx_position + rx_vel * t,
                           velocity=rx_vel.copy())
    return tx, rx


def receive_array(scn: Scenario) -> ArrayGeometry:
    spacing = scn.array_spacing_m if scn.array_spacing_m > 0 else scn.wavelength / 2.0
    return ArrayGeometry.ula(scn.num_channels, spacing, scn.wavelength,
                             axis=scn.array_axis, boresight=scn.boresight,
                             cosine_exponent=scn.cosine_exponent)


def _visibility(dem: ElevationGrid, observer: np.ndarray,
                centers: np.ndarray) -> np.ndarray:
    """LOS mask from one observer to many points, with the standard
    clearance.  Points outside the raster extent count as visible (the
    terrain can't block what it doesn't cover)."""
    out = np.ones(len(centers), dtype=bool)
    for k, c in enumerate(centers):
        if not bool(dem.within_extent(c[0], c[1])):
            continue
        out[k] = line_of_sight(dem, observer, c, clearance=LOS_CLEARANCE_M)
    return out


@dataclass
class PatchBudget:
    """Per-scatterer link budget for one CPI (patches then discretes)."""

    gains: np.ndarray           # (n,) two-way power scale G
    directions: np.ndarray      # (n, 3) unit rx -> scatterer
    visible: np.ndarray         # (n,) bool, both paths clear
    grazing: np.ndarray         # (n,) rad, tx side; discretes carry pi/2
    sigma0: np.ndarray          # (n,) m^2/m^2; discretes carry their RCS


def patch_budget(scn: Scenario, scene: SceneModel, tx: PlatformState,
                 rx: PlatformState, array: ArrayGeometry,
                 timing: RadarTiming | None = None) -> PatchBudget:
    """Range-equation gains for every clutter scatterer at one CPI.

    With `timing` given, scatterers whose bistatic delay falls outside
    the receive window are zeroed like shadowed ones; they could never
    contribute a tap.
    """
    arr = scene.arrays
    disc = patch_arrays(scene.discrete_patches)
    centers = np.vstack([arr.centers, disc.centers]) if len(scene.discrete_patches) \
        else arr.centers

    d_tx = centers - tx.position
    d_rx = centers - rx.position
    r_tx = np.linalg.norm(d_tx, axis=1)
    r_rx = np.linalg.norm(d_rx, axis=1)
    if np.any(r_tx <= 0) or np.any(r_rx <= 0):
        raise ConfigurationError("platform coincides with a scatterer")
    dirs_tx = d_tx / r_tx[:, None]
    dirs_rx = d_rx / r_rx[:, None]

    graz = grazing_angles(arr, tx.position)
    table = scn.table()
    sigma0 = table.sigma0_many(arr.classes, scn.band, np.clip(graz, 0.0, np.pi / 2))
    sigma0 = np.where(graz > 0.0, sigma0, 0.0)

    monostatic = bool(np.array_equal(tx.position, rx.position))
    vis_tx = _visibility(scene.dem, tx.position, centers)
    vis_rx = vis_tx if monostatic else _visibility(scene.dem, rx.position, centers)
    visible = vis_tx & vis_rx
    if timing is not None:
        tap = np.round(((r_tx + r_rx) / SPEED_OF_LIGHT - timing.delay_origin)
                       * timing.sample_rate)
        visible &= (tap >= 0) & (tap < timing.num_taps)

    # transmit: full array pattern with uniform weights; receive: the
    # shared element pattern only (array gain comes from beamforming)
    weights = np.ones(array.num_elements)
    tx_gain = pattern_gains(array, weights, dirs_tx)
    cos_rx = dirs_rx @ np.asarray(array.boresight, dtype=np.float64)
    rx_gain = np.where(cos_rx > 0.0, np.maximum(cos_rx, 0.0) ** array.cosine_exponent, 0.0)

    n_disc = len(scene.discrete_patches)
    if n_disc:
        sigma0 = np.concatenate([sigma0, scene.discrete_rcs])
        graz = np.concatenate([graz, np.full(n_disc, np.pi / 2)])
        areas = np.concatenate([arr.areas, np.ones(n_disc)])
    else:
        areas = arr.areas

    gains = patch_power_scales(sigma0, areas, tx_gain, rx_gain, scn.wavelength,
                               r_tx, r_rx, shadowed=~visible)
    return PatchBudget(gains=gains, directions=dirs_rx, visible=visible,
                       grazing=graz, sigma0=sigma0)


def _clutter_responses(scn: Scenario, scene: SceneModel, budget: PatchBudget,
                       tx: PlatformState, rx: PlatformState,
                       realization: int) -> list[PatchResponse]:
    all_patches = scene.patches + scene.discrete_patches
    model = StochasticModel(seed=scn.seed,
                            doppler_std_hz=scn.clutter_doppler_std_hz,
                            deterministic_phase=scn.deterministic_clutter_phase)
    return patch_responses(all_patches, budget.gains, tx, rx, scn.wavelength,
                           model, realization=realization)


def _ocean_modulation(scn: Scenario, scene: SceneModel, cpi: int,
                      ) -> tuple[np.ndarray, np.ndarray] | None:
    """Per-pulse sea-surface phase/amplitude for the water patches, or
    None when the surface is static."""
    if scn.wind_speed_mps <= 0.0:
        return None
    water_idx = np.nonzero(scene.water)[0]
    if water_idx.size == 0:
        return None
    state = OceanState(patches=[scene.patches[int(k)] for k in water_idx],
                       wind_speed=scn.wind_speed_mps,
                       wind_direction=scn.wind_direction_rad)
    seed = derive_seed(scn.seed, STREAM_OCEAN, cpi)
    phase_w, amp_w = pulse_modulation(state, scn.num_pulses, scn.prf_hz,
                                      scn.wavelength, seed)
    n = scene.num_responses
    phase = np.zeros((n, scn.num_pulses))
    amp = np.ones((n, scn.num_pulses))
    phase[water_idx] = phase_w
    amp[water_idx] = amp_w
    return phase, amp


def synthesize_clutter(scn: Scenario, scene: SceneModel, cpi: int,
                       timing: RadarTiming | None = None,
                       realization: int | None = None,
                       budget: PatchBudget | None = None) -> ChannelImpulseResponse:
    """Clutter impulse response for one CPI (terrain + buildings +
    discretes, with sea-surface modulation when the wind blows).

    The link budget is pure geometry; callers drawing many realizations
    of the same CPI can compute it once and pass it in.
    """
    tx, rx = platform_states(scn, cpi)
    array = receive_array(scn)
    if timing is None:
        timing = scn.timing()
    if budget is None:
        budget = patch_budget(scn, scene, tx, rx, array, timing)
    responses = _clutter_responses(scn, scene, budget, tx, rx,
                                   cpi if realization is None else realization)
    mod = _ocean_modulation(scn, scene, cpi)
    phase, amp = mod if mod is not None else (None, None)
    return synthesize_ir(responses, budget.directions, array, timing,
                         kind="clutter", pulse_phase=phase, pulse_amp=amp)


def target_states(scn: Scenario, cpi: int) -> list[tuple[np.ndarray, np.ndarray, float]]:
    """(position, velocity, rcs) per target, propagated to the CPI start."""
    t = cpi * scn.cpi_interval
    return [(tgt.position + tgt.velocity * t, tgt.velocity.copy(), tgt.rcs)
            for tgt in scn.targets]


def _target_ir(scn: Scenario, scene: SceneModel | None, cpi: int,
               tx: PlatformState, rx: PlatformState, array: ArrayGeometry,
               timing: RadarTiming) -> ChannelImpulseResponse:
    """Deterministic target channel for one (tx, rx) pair at one CPI."""
    weights = np.ones(array.num_elements)
    boresight = np.asarray(array.boresight, dtype=np.float64)
    monostatic = bool(np.array_equal(tx.position, rx.position))

    responses = []
    directions = []
    for k, (pos, vel, rcs) in enumerate(target_states(scn, cpi)):
        d_tx = pos - tx.position
        d_rx = pos - rx.position
        r_tx = float(np.linalg.norm(d_tx))
        r_rx = float(np.linalg.norm(d_rx))
        dir_tx = d_tx / r_tx
        dir_rx = d_rx / r_rx

        visible = True
        if scene is not None and bool(scene.dem.within_extent(pos[0], pos[1])):
            visible = line_of_sight(scene.dem, tx.position, pos,
                                    clearance=LOS_CLEARANCE_M)
            if visible and not monostatic:
                visible = line_of_sight(scene.dem, rx.position, pos,
                                        clearance=LOS_CLEARANCE_M)
        tx_gain = pattern_gains(array, weights, dir_tx[None, :])[0]
        cos_rx = float(dir_rx @ boresight)
        rx_gain = max(0.0, cos_rx) ** array.cosine_exponent if cos_rx > 0 else 0.0
        g = patch_power_scale(sigma0=rcs, area=1.0, tx_gain=float(tx_gain),
                              rx_gain=rx_gain, wavelength=scn.wavelength,
                              r_tx=r_tx, r_rx=r_rx, shadowed=not visible)

        delay, doppler = bistatic_delay_doppler(pos, vel, tx, rx, scn.wavelength)
        phase = -2.0 * np.pi * (delay * SPEED_OF_LIGHT) / scn.wavelength
        amplitude = np.sqrt(g) * np.exp(1j * phase)
        responses.append(PatchResponse(delay=delay, doppler=doppler,
                                       amplitude=complex(amplitude), patch_id=k))
        directions.append(dir_rx)

    return synthesize_ir(responses, np.array(directions), array, timing,
                         kind="target")


def synthesize_targets(scn: Scenario, scene: SceneModel | None, cpi: int,
                       timing: RadarTiming | None = None) -> ChannelImpulseResponse | None:
    """Deterministic target impulse response for one CPI; None when the
    scenario declares no targets."""
    if not scn.targets:
        return None
    tx, rx = platform_states(scn, cpi)
    array = receive_array(scn)
    if timing is None:
        timing = scn.timing()
    return _target_ir(scn, scene, cpi, tx, rx, array, timing)


def default_waveform(scn: Scenario) -> Waveform:
    return lfm(scn.bandwidth_hz, scn.pulse_duration_s, scn.sample_rate)


@dataclass
class CPIResult:
    cpi: int
    clutter_ir: ChannelImpulseResponse | None
    target_ir: ChannelImpulseResponse | None
    cube: DataCube


@dataclass
class ScenarioRun:
    scenario: Scenario
    scene: SceneModel | None
    waveform: Waveform
    results: list[CPIResult]

    @property
    def cubes(self) -> list[DataCube]:
        return [r.cube for r in self.results]


def simulate_cpi(scn: Scenario, scene: SceneModel | None, cpi: int,
                 waveform: Waveform) -> CPIResult:
    timing = scn.timing()
    clutter_ir = synthesize_clutter(scn, scene, cpi, timing) if scene is not None else None
    target_ir = synthesize_targets(scn, scene, cpi, timing)
    if clutter_ir is None and target_ir is None:
        raise ConfigurationError("scenario has neither terrain nor targets")
    cube = simulate_cube(clutter_ir, target_ir, waveform, scn.noise_power,
                         seed=scn.seed, carrier_hz=scn.carrier_hz, cpi_index=cpi)
    return CPIResult(cpi=cpi, clutter_ir=clutter_ir, target_ir=target_ir, cube=cube)


def simulate_scenario(scn: Scenario, waveform: Waveform | None = None,
                      threads: int = 1, scene: SceneModel | None = None,
                      ) -> ScenarioRun:
    """Simulate every CPI of a scenario.

    CPIs draw from independent derived streams, so `threads` changes the
    wall time, never the bytes.
    """
    scn.validate()
    if scene is None:
        scene = build_scene(scn)
    if waveform is None:
        waveform = default_waveform(scn)
    indices = range(scn.num_cpis)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda c: simulate_cpi(scn, scene, c, waveform), indices))
    else:
        results = [simulate_cpi(scn, scene, c, waveform) for c in indices]
    logger.info("simulated %d CPIs of scenario %s", scn.num_cpis, scn.name)
    return ScenarioRun(scenario=scn, scene=scene, waveform=waveform, results=results)


# --- waveform design support -------------------------------------------------


def clutter_tap_realizations(scn: Scenario, scene: SceneModel, cpi: int,
                             pulse: int = 0, channel: int = 0):
    """Callable k -> fresh clutter delay taps for one (channel, pulse).

    Realization indices are offset into a reserved block so training
    draws are independent of every exported CPI.
    """
    timing = scn.timing()
    tx, rx = platform_states(scn, cpi)
    array = receive_array(scn)
    budget = patch_budget(scn, scene, tx, rx, array, timing)

    def realize(k: int) -> np.ndarray:
        ir = synthesize_clutter(scn, scene, cpi, timing,
                                realization=MOMENT_REALIZATION_BASE + k,
                                budget=budget)
        return ir.taps[channel, pulse, :]

    return realize


def channel_moments(scn: Scenario, scene: SceneModel | None = None, cpi: int = 0,
                    pulse: int = 0, channel: int = 0,
                    realizations: int = 64) -> ChannelMoments:
    """Second moments of the clutter and target channels at one
    (CPI, pulse, channel), sized for waveform design."""
    if scene is None:
        scene = build_scene(scn)
    if scene is None:
        raise ConfigurationError("waveform design needs a terrain scene")
    if not scn.targets:
        raise ConfigurationError("waveform design needs at least one target")
    p = scn.num_waveform_samples
    clutter = ensemble_second_moment(
        clutter_tap_realizations(scn, scene, cpi, pulse, channel), p, realizations)
    timing = scn.timing()
    target_ir = synthesize_targets(scn, scene, cpi, timing)
    t_taps = target_ir.taps[channel, pulse, :]
    target = ensemble_second_moment(lambda k: t_taps, p, 1)
    return ChannelMoments.from_second_moments(clutter, target, scn.noise_power)


# --- multi-transmitter geometry ----------------------------------------------


def mimo_transmitters(scn: Scenario, cpi: int) -> list[PlatformState]:
    """Transmitter platform states at one CPI: the scenario's own
    transmitter first, then every declared extra."""
    t = cpi * scn.cpi_interval
    tx0, _ = platform_states(scn, cpi)
    states = [tx0]
    for pos, vel in scn.mimo_tx:
        vel = np.asarray(vel, dtype=np.float64)
        states.append(PlatformState(position=np.asarray(pos, dtype=np.float64) + vel * t,
                                    velocity=vel))
    return states


def mimo_pair_irs(scn: Scenario, scene: SceneModel | None, cpi: int,
                  ) -> list[list[ChannelImpulseResponse]]:
    """Combined clutter+target impulse response per (transmitter,
    receiver) pair, indexed [tx][rx].  The single receiver is the
    scenario's array; targets ride in the same taps since the MIMO
    simulator takes one channel per pair."""
    if scene is None and not scn.targets:
        raise ConfigurationError("scenario has neither terrain nor targets")
    timing = scn.timing()
    _, rx = platform_states(scn, cpi)
    array = receive_array(scn)
    pair_row = []
    for t_idx, tx in enumerate(mimo_transmitters(scn, cpi)):
        ir = None
        if scene is not None:
            budget = patch_budget(scn, scene, tx, rx, array, timing)
            # transmitter 0 is the scenario's own: same streams as the
            # single-transmitter pipeline; extras get derived seeds
            seed = scn.seed if t_idx == 0 else derive_seed(scn.seed, STREAM_MIMO_CODE, t_idx)
            model = StochasticModel(seed=seed,
                                    doppler_std_hz=scn.clutter_doppler_std_hz,
                                    deterministic_phase=scn.deterministic_clutter_phase)
            all_patches = scene.patches + scene.discrete_patches
            responses = patch_responses(all_patches, budget.gains, tx, rx,
                                        scn.wavelength, model, realization=cpi)
            ir = synthesize_ir(responses, budget.directions, array, timing,
                               kind="clutter")
        if scn.targets:
            tgt = _target_ir(scn, scene, cpi, tx, rx, array, timing)
            if ir is None:
                ir = tgt
            else:
                ir = ChannelImpulseResponse(taps=ir.taps + tgt.taps,
                                            sample_rate=ir.sample_rate, prf=ir.prf,
                                            delay_origin=ir.delay_origin,
                                            kind="clutter")
        pair_row.append([ir])
    return pair_row


# --- diagnostic maps ---------------------------------------------------------


@dataclass
class GainMap:
    """Terrain-patch gains on their (north rows, east cols) grid; row 0
    is the northernmost patch row, matching image conventions."""

    gains_db: np.ndarray
    visible: np.ndarray
    grazing: np.ndarray
    patch_size: float
    floor_db: float


def gain_map(scn: Scenario, cpi: int = 0, floor_db: float = -320.0) -> GainMap:
    """Per-patch budget at one CPI arranged as a north-up raster."""
    scene = build_scene(scn)
    if scene is None:
        raise ConfigurationError("gain map needs a terrain raster")
    tx, rx = platform_states(scn, cpi)
    array = receive_array(scn)
    budget = patch_budget(scn, scene, tx, rx, array)

    n = scene.num_terrain_patches
    n_x = terrain_patch_cols(scene, scn)
    n_y = n // n_x
    g = budget.gains[:n].reshape(n_y, n_x)[::-1]           # south-up -> north-up
    vis = budget.visible[:n].reshape(n_y, n_x)[::-1]
    graz = budget.grazing[:n].reshape(n_y, n_x)[::-1]
    with np.errstate(divide="ignore"):
        gdb = 10.0 * np.log10(g)
    gdb = np.where(np.isfinite(gdb), np.maximum(gdb, floor_db), floor_db)
    return GainMap(gains_db=gdb, visible=vis, grazing=graz,
                   patch_size=scn.patch_size_m, floor_db=floor_db)


def terrain_patch_cols(scene: SceneModel, scn: Scenario) -> int:
    from .terrain import _count_cells
    return _count_cells(scene.dem.extent_east, scn.patch_size_m)
