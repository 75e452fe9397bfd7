"""
Runtime configuration
Environment settings (CORRDYN_*) and the per-run configuration used by the CLI
"""
import math
import re
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

_COMPLEX_RE = re.compile(r"^[0-9eE.+-]*i?$")


def parse_complex(text: Any) -> complex:
    """
    Parse a complex number written as a+bi (no spaces).

    Accepts "1", "-0.5", "0.2i", "0+0.2i", "-1-2.5e-3i". Numbers pass through.
    """
    if isinstance(text, (int, float, complex)) and not isinstance(text, bool):
        return complex(text)
    if not isinstance(text, str) or not _COMPLEX_RE.match(text):
        raise ValueError(f"invalid complex number {text!r}, expected a+bi without spaces")
    if text.endswith("i"):
        try:
            return complex(text[:-1] + "j")
        except ValueError:
            raise ValueError(f"invalid complex number {text!r}") from None
    try:
        return complex(float(text))
    except ValueError:
        raise ValueError(f"invalid complex number {text!r}") from None


def format_complex(value: complex) -> str:
    """Inverse of parse_complex, 17 significant digits"""
    return f"{value.real:.17g}{value.imag:+.17g}i"


class Settings(BaseSettings):
    """Environment-level settings with documented defaults"""

    model_config = SettingsConfigDict(
        env_prefix="CORRDYN_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    threads: Optional[int] = Field(default=None, description="Worker cap; default is available cores")
    log_level: str = Field(default="WARNING")
    log_file: Optional[str] = Field(default=None)
    periodic_point_cap: int = Field(default=10**6, description="Largest p^n - q^n for the c=0 census")
    torus_cap: int = Field(default=200_000, description="Largest solid-torus cloud")
    truncation_depth: int = Field(default=40, description="Default series truncation N")
    shadow_buffer: int = Field(default=20, description="Extra orbit length absorbed by the shadow sweep")

    def validate_runtime(self) -> None:
        """Raise ValueError listing every invalid setting"""
        errors = []
        if self.threads is not None and self.threads < 1:
            errors.append("CORRDYN_THREADS must be >= 1")
        if self.periodic_point_cap < 1:
            errors.append("CORRDYN_PERIODIC_POINT_CAP must be >= 1")
        if self.torus_cap < 1:
            errors.append("CORRDYN_TORUS_CAP must be >= 1")
        if self.truncation_depth < 1:
            errors.append("CORRDYN_TRUNCATION_DEPTH must be >= 1")
        if self.shadow_buffer < 0:
            errors.append("CORRDYN_SHADOW_BUFFER must be >= 0")
        if errors:
            raise ValueError("Configuration validation failed:\n" + "\n".join(f"  - {e}" for e in errors))


settings = Settings()


_COMPLEX_FIELDS = ("c", "center", "cycle_seed", "target_c", "base_c")


class RunConfig(BaseModel):
    """
    Options of one CLI run.

    Sources merge as defaults < key=value file < command-line flags.
    """

    model_config = ConfigDict(extra="forbid")

    # correspondence
    p: int = Field(default=6, description="exponent of z")
    q: int = Field(default=2, description="exponent of (w - c)")
    c: complex = Field(default=0j, description="parameter, a+bi")

    # reproducibility / resources
    seed: int = Field(default=0, description="random stream seed")
    threads: Optional[int] = Field(default=None, description="worker cap (falls back to CORRDYN_THREADS)")
    out: Optional[str] = Field(default=None, description="output path")

    # render-julia
    size: int = Field(default=512, description="pixels per side")
    depth: int = Field(default=24, description="survival depth")
    tol: float = Field(default=0.01, description="relative annulus fattening")
    view_width: Optional[float] = Field(default=None, description="viewport side; default 2.2*s_c")
    center: complex = Field(default=0j, description="viewport center")

    # sample-julia / dual-julia
    n_points: int = Field(default=10000, description="points to emit")
    burn_in: int = Field(default=1000, description="discarded leading points")
    max_period: int = Field(default=2, description="longest symbol word in the attracting search")
    grid: int = Field(default=16, description="seeds per side of the [-1,1]^2 search grid")

    # cycles
    period: Optional[int] = Field(default=None, description="c=0 census period")
    symbols: Optional[str] = Field(default=None, description="comma separated branch word")
    cycle_seed: complex = Field(default=1 + 0j, description="Newton seed")
    target_c: Optional[complex] = Field(default=None, description="continuation target")
    max_step: float = Field(default=0.01, description="continuation step cap")
    cache: Optional[str] = Field(default=None, description="JSON-lines cycle cache")

    # solenoid
    mode: str = Field(default="torus", description="torus | symbolic")
    iterations: int = Field(default=6, description="torus iterations")
    samples: int = Field(default=64, description="seed points / random addresses")
    tau: str = Field(default="0", description="comma separated address, extended by zeros")
    truncation: int = Field(default_factory=lambda: settings.truncation_depth, description="series truncation N")
    buffer: int = Field(default_factory=lambda: settings.shadow_buffer, description="shadow buffer")

    # curve / motion-check
    t0: float = Field(default=0.0)
    t1: float = Field(default=math.pi / 2)
    points: int = Field(default=400, description="curve samples M")
    eps: Optional[float] = Field(default=None, description="shadowing radius override")
    base_c: complex = Field(default=0j, description="base parameter of the motion")

    @field_validator(*_COMPLEX_FIELDS, mode="before")
    @classmethod
    def _parse_complex(cls, value: Any) -> Any:
        if value is None:
            return None
        return parse_complex(value)

    @model_validator(mode="after")
    def _check_ranges(self) -> "RunConfig":
        if not self.p > self.q >= 1:
            raise ValueError("need p > q >= 1")
        if self.mode not in ("torus", "symbolic"):
            raise ValueError("mode must be torus or symbolic")
        if self.size < 1 or self.depth < 1 or self.points < 2:
            raise ValueError("size, depth must be >= 1 and points >= 2")
        return self

    @classmethod
    def from_sources(cls, flags: Dict[str, Any], config_file: Optional[str] = None) -> "RunConfig":
        """Merge a key=value file with flags (flags win, None means unset)"""
        values: Dict[str, Any] = {}
        if config_file:
            path = Path(config_file)
            if not path.exists():
                raise ValueError(f"config file not found: {config_file}")
            values.update({k: v for k, v in dotenv_values(path).items() if v is not None})
        values.update({k: v for k, v in flags.items() if v is not None})
        return cls.model_validate(values)


def parse_word(text: Optional[str]) -> list:
    """Parse a comma separated symbol word such as "1,0,0" """
    if not text:
        return []
    try:
        return [int(s) for s in text.split(",") if s.strip() != ""]
    except ValueError:
        raise ValueError(f"invalid symbol word {text!r}") from None
