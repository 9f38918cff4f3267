"""Terrain representation and scene geometry.

Everything works in a local east-north-up (ENU) frame in meters.  An
elevation grid is anchored at a geodetic origin (its south-west corner);
grid cells are area elements of size ``cell_size`` with the stored
height taken at the cell center.  Row 0 of the height array is the
northernmost row, matching the on-disk layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

EARTH_RADIUS_M = 6_378_137.0  # equatorial radius used by the flat-earth mapping


def enu_from_geodetic(lat_deg: float, lon_deg: float,
                      origin_lat_deg: float, origin_lon_deg: float) -> tuple[float, float]:
    """Equirectangular flat-earth mapping of a geodetic point to local ENU.

    Adequate for scene extents of a few tens of km; no attempt is made
    to handle pole or dateline wrap.
    """
    x = math.radians(lon_deg - origin_lon_deg) * EARTH_RADIUS_M * math.cos(math.radians(origin_lat_deg))
    y = math.radians(lat_deg - origin_lat_deg) * EARTH_RADIUS_M
    return x, y


def _count_cells(extent: float, size: float) -> int:
    # ceil with a small guard so exact divisions do not round up by one
    # float ulp (e.g. 20010 / 30 must give 667, not 668).
    return max(1, math.ceil(extent / size - 1e-9))


@dataclass
class ElevationGrid:
    """Regular height raster.

    heights[r, c] is the terrain height (m) at the center of cell
    (r, c); row 0 is the northernmost row.  The grid origin (south-west
    corner of the raster) sits at ENU (0, 0).
    """

    heights: np.ndarray          # (nrows, ncols) m, row 0 = north
    cell_size: float             # m
    origin_lat: float = 0.0      # deg, geodetic anchor of the SW corner
    origin_lon: float = 0.0      # deg

    def __post_init__(self):
        self.heights = np.asarray(self.heights, dtype=np.float64)
        if self.heights.ndim != 2 or self.heights.size == 0:
            raise ConfigurationError("elevation grid must be a non-empty 2-D array")
        if not np.all(np.isfinite(self.heights)):
            raise ConfigurationError("elevation grid contains non-finite heights")
        if self.cell_size <= 0:
            raise ConfigurationError(f"cell_size must be positive, got {self.cell_size}")
        self.heights.setflags(write=False)

    @property
    def nrows(self) -> int:
        return self.heights.shape[0]

    @property
    def ncols(self) -> int:
        return self.heights.shape[1]

    @property
    def extent_east(self) -> float:
        """East-west raster extent in meters."""
        return self.ncols * self.cell_size

    @property
    def extent_north(self) -> float:
        return self.nrows * self.cell_size

    def within_extent(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return (x >= 0.0) & (x <= self.extent_east) & (y >= 0.0) & (y <= self.extent_north)

    def heights_at(self, x, y) -> np.ndarray:
        """Bilinear interpolation of the height field at ENU (x, y).

        Interpolates between cell-center samples; queries in the half-cell
        rim between the outermost centers and the raster edge clamp to
        the border values.  Callers are expected to stay within the
        raster extent (see within_extent).
        """
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        h = self.heights
        # fractional node coordinates: node (r, c) sits at
        # x = (c + 0.5) * cell, y = (nrows - 1 - r + 0.5) * cell
        fc = np.clip(x / self.cell_size - 0.5, 0.0, self.ncols - 1.0)
        fr = np.clip((self.nrows - 1) - (y / self.cell_size - 0.5), 0.0, self.nrows - 1.0)
        c0 = np.floor(fc).astype(np.intp)
        r0 = np.floor(fr).astype(np.intp)
        c1 = np.minimum(c0 + 1, self.ncols - 1)
        r1 = np.minimum(r0 + 1, self.nrows - 1)
        wc = fc - c0
        wr = fr - r0
        return ((1.0 - wr) * (1.0 - wc) * h[r0, c0]
                + (1.0 - wr) * wc * h[r0, c1]
                + wr * (1.0 - wc) * h[r1, c0]
                + wr * wc * h[r1, c1])

    def height_at(self, x: float, y: float) -> float:
        return float(self.heights_at(np.float64(x), np.float64(y)))


@dataclass
class ClassGrid:
    """Integer land-cover raster co-registered with an ElevationGrid."""

    classes: np.ndarray          # (nrows, ncols) int codes, row 0 = north
    cell_size: float             # m
    origin_lat: float = 0.0
    origin_lon: float = 0.0

    def __post_init__(self):
        self.classes = np.asarray(self.classes, dtype=np.int64)
        if self.classes.ndim != 2 or self.classes.size == 0:
            raise ConfigurationError("class grid must be a non-empty 2-D array")
        if self.cell_size <= 0:
            raise ConfigurationError(f"cell_size must be positive, got {self.cell_size}")
        self.classes.setflags(write=False)

    @property
    def nrows(self) -> int:
        return self.classes.shape[0]

    @property
    def ncols(self) -> int:
        return self.classes.shape[1]

    def classes_at(self, x, y) -> np.ndarray:
        """Nearest-cell class lookup at ENU (x, y)."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        c = np.clip(np.round(x / self.cell_size - 0.5).astype(np.intp), 0, self.ncols - 1)
        r = np.clip(np.round((self.nrows - 1) - (y / self.cell_size - 0.5)).astype(np.intp),
                    0, self.nrows - 1)
        return self.classes[r, c]


@dataclass
class PlatformState:
    """Position and velocity of a transmitter or receiver, local ENU."""

    position: np.ndarray         # (3,) m
    velocity: np.ndarray         # (3,) m/s

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64).reshape(3)
        self.velocity = np.asarray(self.velocity, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(self.position)) and np.all(np.isfinite(self.velocity))):
            raise ConfigurationError("platform state must be finite")
        if self.position[2] < 0:
            raise ConfigurationError("platform altitude must be non-negative")


@dataclass
class ScenePatch:
    """One resolved scattering facet of the scene."""

    center: np.ndarray           # (3,) m ENU
    normal: np.ndarray           # (3,) unit, outward (up for level ground)
    area: float                  # m^2, tilt-corrected
    landcover_class: int
    patch_id: int

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64).reshape(3)
        self.normal = np.asarray(self.normal, dtype=np.float64).reshape(3)
        n = np.linalg.norm(self.normal)
        if abs(n - 1.0) > 1e-9:
            raise ConfigurationError(f"patch normal must be unit length, |n| = {n}")
        if not self.area > 0:
            raise ConfigurationError(f"patch area must be positive, got {self.area}")


@dataclass
class PatchArrays:
    """Column-array view of a patch list, for vectorized geometry."""

    centers: np.ndarray          # (n, 3)
    normals: np.ndarray          # (n, 3)
    areas: np.ndarray            # (n,)
    classes: np.ndarray          # (n,) int
    ids: np.ndarray              # (n,) int


def patch_arrays(patches: list[ScenePatch]) -> PatchArrays:
    if not patches:
        z3 = np.zeros((0, 3))
        return PatchArrays(z3, z3.copy(), np.zeros(0), np.zeros(0, dtype=np.int64),
                           np.zeros(0, dtype=np.int64))
    return PatchArrays(
        centers=np.array([p.center for p in patches]),
        normals=np.array([p.normal for p in patches]),
        areas=np.array([p.area for p in patches]),
        classes=np.array([p.landcover_class for p in patches], dtype=np.int64),
        ids=np.array([p.patch_id for p in patches], dtype=np.int64),
    )


def build_patch_grid(dem: ElevationGrid, landcover: ClassGrid,
                     patch_size: float) -> list[ScenePatch]:
    """Tile the raster extent into square patches and sample geometry.

    One patch per aggregated cell; patch centers are sampled from the
    height field bilinearly, normals from central height differences
    (one-sided at the borders), and the area carries the 1/cos(tilt)
    slope correction.  Patch ids run row-major from the south-west
    corner, ascending.
    """
    if landcover.classes.shape != dem.heights.shape:
        raise ConfigurationError(
            f"raster dimension mismatch: dem {dem.heights.shape} vs "
            f"landcover {landcover.classes.shape}")
    if abs(landcover.cell_size - dem.cell_size) > 1e-9:
        raise ConfigurationError("dem and landcover cell sizes differ")
    if patch_size < dem.cell_size - 1e-9:
        raise ConfigurationError(
            f"patch_size {patch_size} must be at least the cell size {dem.cell_size}")

    n_y = _count_cells(dem.extent_north, patch_size)
    n_x = _count_cells(dem.extent_east, patch_size)

    jj, ii = np.meshgrid(np.arange(n_x), np.arange(n_y))  # ii south->north
    cx = (jj.ravel() + 0.5) * patch_size
    cy = (ii.ravel() + 0.5) * patch_size
    cz = dem.heights_at(cx, cy)

    # central differences at one cell spacing, one-sided at the borders
    h = dem.cell_size
    lo = 0.5 * h                       # innermost clamp hull of the node grid
    hi_x = (dem.ncols - 0.5) * h
    hi_y = (dem.nrows - 0.5) * h
    xp = np.minimum(cx + h, hi_x)
    xm = np.maximum(cx - h, lo)
    yp = np.minimum(cy + h, hi_y)
    ym = np.maximum(cy - h, lo)
    dx = xp - xm
    dy = yp - ym
    gx = np.where(dx > 0, (dem.heights_at(xp, cy) - dem.heights_at(xm, cy)) / np.where(dx > 0, dx, 1.0), 0.0)
    gy = np.where(dy > 0, (dem.heights_at(cx, yp) - dem.heights_at(cx, ym)) / np.where(dy > 0, dy, 1.0), 0.0)

    norm = np.sqrt(gx * gx + gy * gy + 1.0)
    nx, ny, nz = -gx / norm, -gy / norm, 1.0 / norm
    area = patch_size * patch_size / nz

    cls = landcover.classes_at(cx, cy)

    patches = []
    for k in range(cx.size):
        patches.append(ScenePatch(
            center=np.array([cx[k], cy[k], cz[k]]),
            normal=np.array([nx[k], ny[k], nz[k]]),
            area=float(area[k]),
            landcover_class=int(cls[k]),
            patch_id=k,
        ))
    return patches


def grazing_angle(patch: ScenePatch, observer: np.ndarray) -> float:
    """Angle (rad) between the patch->observer ray and the patch's local
    horizontal plane.  Positive when the observer is on the outward side
    of the facet; pi/2 for an observer straight along the normal.
    """
    los = np.asarray(observer, dtype=np.float64).reshape(3) - patch.center
    r = np.linalg.norm(los)
    if r == 0.0:
        raise ValueError("observer coincides with the patch center")
    s = float(np.dot(los, patch.normal) / r)
    return math.asin(min(1.0, max(-1.0, s)))


def grazing_angles(arrays: PatchArrays, observer: np.ndarray) -> np.ndarray:
    """Vectorized grazing_angle over a PatchArrays bundle."""
    los = np.asarray(observer, dtype=np.float64).reshape(1, 3) - arrays.centers
    r = np.linalg.norm(los, axis=1)
    if np.any(r == 0.0):
        raise ValueError("observer coincides with a patch center")
    s = np.einsum("ij,ij->i", los, arrays.normals) / r
    return np.arcsin(np.clip(s, -1.0, 1.0))


def terrain_profile(dem: ElevationGrid, a, b, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Heights along the ground projection of segment a->b.

    Returns (distances, heights); both endpoints included, interior
    samples every `step` meters (the final partial interval is kept).
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)[:2]
    b = np.asarray(b, dtype=np.float64).reshape(-1)[:2]
    if step <= 0:
        raise ConfigurationError(f"profile step must be positive, got {step}")
    for name, p in (("start", a), ("end", b)):
        if not bool(dem.within_extent(p[0], p[1])):
            raise ValueError(f"profile {name} point {p} lies outside the raster extent")
    dist = float(np.hypot(b[0] - a[0], b[1] - a[1]))
    if dist == 0.0:
        ds = np.zeros(1)
    else:
        ds = np.arange(0.0, dist, step)
        if dist - ds[-1] > 1e-9:
            ds = np.append(ds, dist)
        else:
            ds[-1] = dist
    t = ds / dist if dist > 0 else ds
    xs = a[0] + t * (b[0] - a[0])
    ys = a[1] + t * (b[1] - a[1])
    return ds, dem.heights_at(xs, ys)


def line_of_sight(dem: ElevationGrid, observer, point,
                  clearance: float = 0.0, step: float | None = None) -> bool:
    """True when the straight ray observer->point clears the terrain.

    The terrain is sampled between the endpoints on a uniform grid no
    coarser than `step` (default cell_size / 2); the endpoints
    themselves are excluded, since both usually sit on or near the
    surface.  The ray is raised by `clearance` meters before the
    comparison.  The sample grid is symmetric in the two endpoints, so
    the result is direction-independent.
    """
    obs = np.asarray(observer, dtype=np.float64).reshape(3)
    pt = np.asarray(point, dtype=np.float64).reshape(3)
    if step is None:
        step = dem.cell_size / 2.0
    if step <= 0:
        raise ConfigurationError(f"line-of-sight step must be positive, got {step}")
    for name, p in (("observer", obs), ("point", pt)):
        if not bool(dem.within_extent(p[0], p[1])):
            raise ValueError(f"{name} ground projection {p[:2]} lies outside the raster extent")
    dist = float(np.hypot(pt[0] - obs[0], pt[1] - obs[1]))
    n_interior = max(0, math.ceil(dist / step) - 1)
    if n_interior == 0:
        return True
    t = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    xs = obs[0] + t * (pt[0] - obs[0])
    ys = obs[1] + t * (pt[1] - obs[1])
    ray_z = obs[2] + t * (pt[2] - obs[2])
    terrain_z = dem.heights_at(xs, ys)
    return not bool(np.any(terrain_z > ray_z + clearance))


def los_mask(dem: ElevationGrid, observer, patches: list[ScenePatch],
             clearance: float = 0.0, step: float | None = None) -> np.ndarray:
    """Boolean visibility per patch; True = line of sight is clear."""
    out = np.empty(len(patches), dtype=bool)
    for k, p in enumerate(patches):
        out[k] = line_of_sight(dem, observer, p.center, clearance=clearance, step=step)
    return out


# --- file formats -----------------------------------------------------------
#
# Height and land-cover rasters share one text layout:
#
#   nrows N
#   ncols M
#   cellsize S
#   origin LAT LON
#   <N * M values, row-major, north-to-south>
#
# Values are whitespace-separated; blank lines and '#' comments are skipped.


def _read_raster_text(path) -> tuple[dict, list[str]]:
    header = {}
    values: list[str] = []
    expected = ("nrows", "ncols", "cellsize", "origin")
    with open(path, "r", encoding="utf-8") as f:
        lines = f.readlines()
    idx = 0
    seen = 0
    for idx, line in enumerate(lines):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = stripped.split()
        if seen < len(expected):
            key = parts[0].lower()
            if key != expected[seen]:
                raise ConfigurationError(
                    f"{path}: line {idx + 1}: expected header '{expected[seen]}', got '{parts[0]}'")
            try:
                if key == "origin":
                    header["origin"] = (float(parts[1]), float(parts[2]))
                elif key == "cellsize":
                    header["cellsize"] = float(parts[1])
                else:
                    header[key] = int(parts[1])
            except (IndexError, ValueError) as exc:
                raise ConfigurationError(f"{path}: line {idx + 1}: bad header line: {stripped!r}") from exc
            seen += 1
        else:
            values.extend(parts)
    if seen < len(expected):
        raise ConfigurationError(f"{path}: truncated header, stopped after {seen} of {len(expected)} lines")
    n_expected = header["nrows"] * header["ncols"]
    if len(values) != n_expected:
        raise ConfigurationError(
            f"{path}: expected {n_expected} grid values, found {len(values)}")
    return header, values


def read_dem(path) -> ElevationGrid:
    header, values = _read_raster_text(path)
    try:
        heights = np.array([float(v) for v in values], dtype=np.float64)
    except ValueError as exc:
        raise ConfigurationError(f"{path}: non-numeric height value") from exc
    heights = heights.reshape(header["nrows"], header["ncols"])
    lat, lon = header["origin"]
    return ElevationGrid(heights=heights, cell_size=header["cellsize"],
                         origin_lat=lat, origin_lon=lon)


def read_landcover(path) -> ClassGrid:
    header, values = _read_raster_text(path)
    try:
        classes = np.array([int(v) for v in values], dtype=np.int64)
    except ValueError as exc:
        raise ConfigurationError(f"{path}: non-integer land-cover code") from exc
    classes = classes.reshape(header["nrows"], header["ncols"])
    lat, lon = header["origin"]
    return ClassGrid(classes=classes, cell_size=header["cellsize"],
                     origin_lat=lat, origin_lon=lon)


def write_dem(path, dem: ElevationGrid) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"nrows {dem.nrows}\n")
        f.write(f"ncols {dem.ncols}\n")
        f.write(f"cellsize {dem.cell_size!r}\n")
        f.write(f"origin {dem.origin_lat!r} {dem.origin_lon!r}\n")
        for row in dem.heights:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


def write_landcover(path, grid: ClassGrid) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"nrows {grid.nrows}\n")
        f.write(f"ncols {grid.ncols}\n")
        f.write(f"cellsize {grid.cell_size!r}\n")
        f.write(f"origin {grid.origin_lat!r} {grid.origin_lon!r}\n")
        for row in grid.classes:
            f.write(" ".join(str(int(v)) for v in row) + "\n")
