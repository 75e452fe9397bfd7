"""
Domain types for the correspondence family (w - c)^q = z^p
All values are immutable after construction
"""
import math
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SymbolSequence = List[int]


# --- CORRESPONDENCE SCHEMAS ---

class CorrespondenceParams(BaseModel):
    """The triple (p, q, c) defining (w - c)^q = z^p"""

    model_config = ConfigDict(frozen=True)

    p: int
    q: int
    c: complex = 0j

    @model_validator(mode="after")
    def _check_exponents(self) -> "CorrespondenceParams":
        if not self.p > self.q >= 1:
            raise ValueError(f"need p > q >= 1, got p={self.p}, q={self.q}")
        return self

    @property
    def beta(self) -> Fraction:
        """Exact exponent p/q"""
        return Fraction(self.p, self.q)

    @property
    def beta_float(self) -> float:
        return self.p / self.q

    @property
    def gamma(self) -> float:
        """p/q - 1"""
        return self.p / self.q - 1.0

    @property
    def integer_beta(self) -> bool:
        """q divides p: every branch is a polynomial and 0 is not a branch point"""
        return self.p % self.q == 0

    def with_c(self, c: complex) -> "CorrespondenceParams":
        return CorrespondenceParams(p=self.p, q=self.q, c=complex(c))


class AnnulusBounds(BaseModel):
    """Trapping radii r_c < R_c < 1 < s_c and the escape radius"""

    model_config = ConfigDict(frozen=True)

    r_c: float
    R_c: float
    s_c: float
    escape_radius: float
    valid: bool

    def contains(self, modulus: float, slack: float = 0.0) -> bool:
        return self.valid and self.R_c - slack <= modulus <= self.s_c + slack


class ExpansionEstimate(NamedTuple):
    """min |phi'| over forward branches, max |phi'| over backward branches"""

    inverse_min: float
    backward_max: float

    @property
    def expanding(self) -> bool:
        return self.inverse_min > 1.0


# --- ORBIT SCHEMAS ---

class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class OrbitSegment(BaseModel):
    """
    z_0 -> z_1 -> ... -> z_N with one branch label per step.

    Forward labels are in 0..q-1 (branch_image), backward labels in 0..p-1 (preimage_branch).
    """

    model_config = ConfigDict(frozen=True)

    points: List[complex]
    symbols: SymbolSequence
    direction: Direction = Direction.FORWARD
    error_bounds: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_lengths(self) -> "OrbitSegment":
        if len(self.points) == 0:
            raise ValueError("orbit needs at least its base point")
        if len(self.symbols) != len(self.points) - 1:
            raise ValueError("need exactly one symbol per step")
        if self.error_bounds is not None and len(self.error_bounds) != len(self.points):
            raise ValueError("need one error bound per point")
        return self

    @property
    def base(self) -> complex:
        return self.points[0]

    @property
    def length(self) -> int:
        """Number of steps"""
        return len(self.symbols)

    def truncated(self, steps: int) -> "OrbitSegment":
        steps = min(steps, self.length)
        bounds = None if self.error_bounds is None else self.error_bounds[:steps + 1]
        return OrbitSegment(
            points=self.points[:steps + 1],
            symbols=self.symbols[:steps],
            direction=self.direction,
            error_bounds=bounds,
        )

    def shifted(self) -> "OrbitSegment":
        """Drop the base point"""
        bounds = None if self.error_bounds is None else self.error_bounds[1:]
        return OrbitSegment(
            points=self.points[1:],
            symbols=self.symbols[1:],
            direction=self.direction,
            error_bounds=bounds,
        )


class CycleKind(str, Enum):
    REPELLING = "repelling"
    ATTRACTING = "attracting"


class Cycle(BaseModel):
    """A periodic orbit with its branch word and multiplier"""

    model_config = ConfigDict(frozen=True)

    points: List[complex]
    symbols: SymbolSequence
    multiplier: complex
    kind: CycleKind
    provenance: Optional[Dict[str, Any]] = None

    @model_validator(mode="after")
    def _check_period(self) -> "Cycle":
        if len(self.points) == 0 or len(self.points) != len(self.symbols):
            raise ValueError("need one symbol per cycle point")
        return self

    @property
    def period(self) -> int:
        return len(self.points)


# --- BUNDLE SCHEMAS ---

class BundleParams(BaseModel):
    """Encoding constants (r, delta) of the Cantor bundle"""

    model_config = ConfigDict(frozen=True)

    r: float = Field(gt=0)
    delta: float = Field(gt=0, lt=0.25)
    separation: Optional[float] = Field(default=None, description="analytic separation lower bound used")


class BundlePoint(BaseModel):
    """A point (z, s) of the bundle carried with its truncated orbit"""

    model_config = ConfigDict(frozen=True)

    base: complex
    orbit: OrbitSegment
    series: complex
    tail_bound: float
    direction: Direction = Direction.FORWARD

    @property
    def c2(self) -> Tuple[complex, complex]:
        """The point in C^2"""
        return (self.base, self.series)


class SectionTable(BaseModel):
    """Finite-depth sections over a base sample, keyed by symbol word"""

    model_config = ConfigDict(frozen=True)

    depth: int
    sections: Dict[Tuple[int, ...], List[BundlePoint]]
    separated: bool
    min_separation: float
    metadata: Dict[str, Any] = Field(default_factory=dict)


# --- SOLENOID SCHEMAS ---

class TorusPoint(BaseModel):
    """A point (e^{it}, disk) of the solid torus S^1 x closed disk"""

    model_config = ConfigDict(frozen=True)

    t: float
    disk: complex

    @field_validator("disk")
    @classmethod
    def _inside_disk(cls, value: complex) -> complex:
        if abs(value) > 1 + 1e-12:
            raise ValueError(f"fiber coordinate {value} outside the closed unit disk")
        return value


# --- MOTION SCHEMAS ---

class MotionConfig(BaseModel):
    """Shadowing constants: radius eps, contraction lam, metric distortion ell, domain radius"""

    model_config = ConfigDict(frozen=True)

    eps: float = Field(gt=0)
    lam: float = Field(gt=0, lt=1)
    ell: float = Field(default=1.0, ge=1)
    u_radius: float = Field(gt=0)
    separation: Optional[float] = None

    @model_validator(mode="after")
    def _check_domain(self) -> "MotionConfig":
        limit = self.eps * (1 - self.lam) / (6 * self.ell)
        if self.u_radius > limit * (1 + 1e-12):
            raise ValueError(f"u_radius {self.u_radius} exceeds eps(1-lam)/(6 ell) = {limit}")
        return self

    @property
    def c0(self) -> float:
        """Lipschitz constant ell / (1 - lam)"""
        return self.ell / (1 - self.lam)

    @classmethod
    def from_eps(cls, eps: float, lam: float, ell: float = 1.0) -> "MotionConfig":
        """Largest admissible domain for the given constants"""
        return cls(eps=eps, lam=lam, ell=ell, u_radius=eps * (1 - lam) / (6 * ell))


class CurveSample(BaseModel):
    """Samples of t -> gamma^tau_c(t)"""

    model_config = ConfigDict(frozen=True)

    tau: SymbolSequence
    c: complex
    samples: List[Tuple[float, complex]]
    truncation: int
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("samples")
    @classmethod
    def _increasing(cls, value: List[Tuple[float, complex]]) -> List[Tuple[float, complex]]:
        ts = [t for t, _ in value]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("sample parameters must be strictly increasing")
        return value

    @property
    def t(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples], dtype=float)

    @property
    def z(self) -> np.ndarray:
        return np.array([z for _, z in self.samples], dtype=complex)


# --- RENDER SCHEMAS ---

class Viewport(BaseModel):
    """Rectangular window of the plane sampled on an nx x ny pixel grid"""

    model_config = ConfigDict(frozen=True)

    center: complex = 0j
    width: float = Field(gt=0)
    height: float = Field(gt=0)
    nx: int = Field(ge=1)
    ny: int = Field(ge=1)

    @classmethod
    def square(cls, side: float, pixels: int, center: complex = 0j) -> "Viewport":
        return cls(center=center, width=side, height=side, nx=pixels, ny=pixels)

    @property
    def pixel_width(self) -> float:
        return self.width / self.nx

    @property
    def pixel_height(self) -> float:
        return self.height / self.ny

    @property
    def half_diagonal(self) -> float:
        return 0.5 * math.hypot(self.pixel_width, self.pixel_height)

    def row_centers(self, row: int) -> np.ndarray:
        """Pixel centers of one row, row 0 at the top"""
        x = self.center.real - self.width / 2 + (np.arange(self.nx) + 0.5) * self.pixel_width
        y = self.center.imag + self.height / 2 - (row + 0.5) * self.pixel_height
        return x + 1j * y

    def centers(self) -> np.ndarray:
        """(ny, nx) array of pixel centers, row-major from the top-left"""
        return np.vstack([self.row_centers(j) for j in range(self.ny)])

    def pixel_of(self, z: complex) -> Optional[Tuple[int, int]]:
        """(row, col) of the pixel containing z, None outside"""
        col = math.floor((z.real - (self.center.real - self.width / 2)) / self.pixel_width)
        row = math.floor(((self.center.imag + self.height / 2) - z.imag) / self.pixel_height)
        if 0 <= row < self.ny and 0 <= col < self.nx:
            return row, col
        return None


class RasterGrid(BaseModel):
    """Per-pixel byte data over a viewport"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    viewport: Viewport
    data: np.ndarray
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_shape(self) -> "RasterGrid":
        if self.data.shape != (self.viewport.ny, self.viewport.nx) or self.data.dtype != np.uint8:
            raise ValueError("data must be a uint8 array of shape (ny, nx)")
        return self

    @property
    def surviving(self) -> np.ndarray:
        return self.data == 255
