"""
Julia and dual Julia rendering
Bounded-orbit survival rasters, backward and forward chaos-game samplers, PGM/PPM output
"""
import functools
import logging
import math
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from PIL import Image

from corrdyn.errors import (
    BranchPointError,
    InvalidAnnulusError,
    NoAttractorError,
    ParameterError,
    StarvationError,
)
from corrdyn.parallel import parallel_map
from corrdyn.schemas import AnnulusBounds, CorrespondenceParams, RasterGrid, Viewport
from corrdyn.services.correspondence import annulus_bounds, branch_image, preimage_branch
from corrdyn.services.cycles import attracting_cycles_search

logger = logging.getLogger(__name__)

MAX_TRIES = 32
MAX_RESTARTS = 1000
ANNULUS_SLACK = 1e-9
DUAL_BURN_IN = 100


# --- survival raster ---

def _distance_to_band(modulus: float, lo: float, hi: float) -> float:
    return max(lo - modulus, modulus - hi, 0.0)


def pixel_survival(
    params: CorrespondenceParams,
    z: complex,
    radius: float,
    depth: int,
    lo: float,
    hi: float,
) -> int:
    """
    Survival value of the disk of the given radius around z.

    Depth-first over the q forward branches. A branch survives a step when its image
    lies within the propagated radius of the band lo <= |w| <= hi, and is accepted
    outright once that radius reaches hi. The radius is multiplied by the supremum of
    |Phi'| over the disk, beta (|w| + radius)^(beta - 1), so the image disk encloses
    the image of every point of the pixel. Returns 255 for survival, 0 when no step
    survives, otherwise the depth reached scaled into 1..254.
    """
    if _distance_to_band(abs(z), lo, hi) > radius:
        return 0
    beta = params.beta_float
    reached = 0
    stack = [(complex(z), radius, 0)]
    while stack:
        w, a, level = stack.pop()
        if level == depth:
            return 255
        if w == 0 and not params.integer_beta:
            continue
        a_next = a * beta * (abs(w) + a) ** (beta - 1)
        for k in range(params.q - 1, -1, -1):
            image = branch_image(params, w, k)
            if _distance_to_band(abs(image), lo, hi) <= a_next:
                if a_next >= hi:
                    return 255
                reached = max(reached, level + 1)
                stack.append((image, a_next, level + 1))
    if reached == 0:
        return 0
    return max(1, round(254 * reached / depth))


def _render_row(params: CorrespondenceParams, vp: Viewport, depth: int, lo: float, hi: float, row: int) -> np.ndarray:
    radius = vp.half_diagonal
    return np.array(
        [pixel_survival(params, complex(z), radius, depth, lo, hi) for z in vp.row_centers(row)],
        dtype=np.uint8,
    )


def default_viewport(bounds: AnnulusBounds, size: int, width: Optional[float] = None, center: complex = 0j) -> Viewport:
    """Square view of side 2.2 s_c unless given"""
    side = width if width is not None else 2.2 * bounds.s_c
    return Viewport.square(side, size, center)


def membership_grid(
    params: CorrespondenceParams,
    vp: Viewport,
    depth: int,
    bounds: AnnulusBounds,
    tol: float,
    workers: int = 1,
) -> RasterGrid:
    """Survival raster of the trapping annulus; rows render in parallel"""
    if not bounds.valid:
        raise InvalidAnnulusError(f"no trapping annulus at c={params.c}")
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    lo = bounds.R_c * (1 - tol)
    hi = bounds.s_c * (1 + tol)
    rows = parallel_map(
        functools.partial(_render_row, params, vp, depth, lo, hi), list(range(vp.ny)), workers=workers, chunksize=8
    )
    data = np.vstack(rows).astype(np.uint8)

    expanding = params.beta_float * bounds.R_c ** params.gamma > 1
    if not expanding:
        logger.warning("membership_grid: branches do not expand on the annulus, render is heuristic")
    metadata = {
        "p": params.p, "q": params.q, "c": [params.c.real, params.c.imag],
        "depth": depth, "tol": tol, "heuristic": not expanding,
    }
    return RasterGrid(viewport=vp, data=data, metadata=metadata)


# --- samplers ---

def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _circle_start(rng: np.random.Generator) -> complex:
    angle = 2 * math.pi * rng.random()
    return complex(math.cos(angle), math.sin(angle))


def inverse_ifs_sample(
    params: CorrespondenceParams,
    n_points: int,
    burn_in: int,
    seed: int,
    bounds: AnnulusBounds,
) -> np.ndarray:
    """
    Random backward orbit restricted to the annulus.

    Each step draws a uniform preimage index, redrawing up to 32 times while the
    preimage leaves the annulus; after that the walk restarts on the unit circle and
    burns in again.
    """
    if not bounds.valid:
        raise InvalidAnnulusError(f"no trapping annulus at c={params.c}")
    rng = _rng(seed)
    lo = bounds.R_c - ANNULUS_SLACK
    hi = bounds.s_c + ANNULUS_SLACK
    z = _circle_start(rng)
    out = np.empty(n_points, dtype=complex)
    emitted = 0
    steps = 0
    restarts = 0
    while emitted < n_points:
        for _ in range(MAX_TRIES):
            j = int(rng.integers(params.p))
            try:
                candidate = preimage_branch(params, z, j)
            except BranchPointError:
                continue
            if lo <= abs(candidate) <= hi:
                break
        else:
            restarts += 1
            if restarts > MAX_RESTARTS:
                raise StarvationError(f"{MAX_RESTARTS} consecutive restarts without staying in the annulus")
            z = _circle_start(rng)
            steps = 0
            continue
        restarts = 0
        z = candidate
        steps += 1
        if steps > burn_in:
            out[emitted] = z
            emitted += 1
    return out


def dual_ifs_sample(
    params: CorrespondenceParams,
    n_points: int,
    seed: int,
    burn_in: int = DUAL_BURN_IN,
    max_period: int = 2,
    grid: Optional[Sequence[complex]] = None,
    workers: int = 1,
) -> np.ndarray:
    """
    Forward chaos game near the attracting cycles.

    Starts on the first attracting cycle found and applies uniformly drawn forward
    branches, kept inside |z| <= R_c (the escape radius when there is no annulus).
    """
    cycles = attracting_cycles_search(params, max_period, grid, workers=workers)
    if not cycles:
        raise NoAttractorError(f"no attracting cycle found for c={params.c}")
    bounds = annulus_bounds(params)
    limit = bounds.R_c if bounds.valid else bounds.escape_radius
    start = cycles[0].points[0]
    rng = _rng(seed)

    def step(z: complex, k: int) -> complex:
        if z == 0:
            return complex(params.c)
        return branch_image(params, z, k)

    z = start
    out = np.empty(n_points, dtype=complex)
    emitted = 0
    steps = 0
    restarts = 0
    while emitted < n_points:
        for _ in range(MAX_TRIES):
            candidate = step(z, int(rng.integers(params.q)))
            if abs(candidate) <= limit:
                break
        else:
            restarts += 1
            if restarts > MAX_RESTARTS:
                raise NoAttractorError("forward orbit keeps leaving the attracting region")
            z = start
            continue
        restarts = 0
        z = candidate
        steps += 1
        if steps > burn_in:
            out[emitted] = z
            emitted += 1
    logger.debug("dual_ifs_sample: %d points from cycle %s", n_points, cycles[0].symbols)
    return out


def rasterize_points(points: Sequence[complex], vp: Viewport) -> RasterGrid:
    """255 on every pixel hit by a sample point"""
    data = np.zeros((vp.ny, vp.nx), dtype=np.uint8)
    for z in points:
        cell = vp.pixel_of(complex(z))
        if cell is not None:
            data[cell] = 255
    return RasterGrid(viewport=vp, data=data, metadata={"points": len(points)})


# --- output ---

def write_image(grid: RasterGrid, path: Union[str, Path]) -> None:
    """Binary PGM (P5, maxval 255), row-major from the top-left"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(grid.data)).save(path, format="PPM")


def overlay(base: RasterGrid, marks: RasterGrid, color: Sequence[int] = (255, 0, 0)) -> np.ndarray:
    """RGB image of a gray raster with marked pixels painted in color"""
    rgb = np.repeat(base.data[:, :, None], 3, axis=2)
    rgb[marks.data > 0] = np.asarray(color, dtype=np.uint8)
    return rgb


def write_color_image(rgb: np.ndarray, path: Union[str, Path]) -> None:
    """Binary PPM (P6) from an (ny, nx, 3) uint8 array"""
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise ParameterError("expected an (ny, nx, 3) uint8 array")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(rgb)).save(path, format="PPM")
