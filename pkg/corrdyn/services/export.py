"""
File formats
JSON-lines for cycles and bundle points, CSV (17 significant digits) for point clouds and curves
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from corrdyn.schemas import BundlePoint, CorrespondenceParams, CurveSample, Cycle, CycleKind

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
CSV_FORMAT = "%.17g"


def _pair(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


def _unpair(values: Sequence[float]) -> complex:
    return complex(values[0], values[1])


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


# --- cycles ---

def cycle_to_dict(cycle: Cycle, params: Optional[CorrespondenceParams] = None) -> Dict[str, Any]:
    record: Dict[str, Any] = {
        "period": cycle.period,
        "symbols": list(cycle.symbols),
        "points": [_pair(z) for z in cycle.points],
        "multiplier": _pair(cycle.multiplier),
        "kind": cycle.kind.value,
    }
    if params is not None:
        record.update({"p": params.p, "q": params.q, "c": _pair(params.c)})
    if cycle.provenance:
        record["provenance"] = cycle.provenance
    return record


def cycle_from_dict(record: Dict[str, Any]) -> Cycle:
    return Cycle(
        points=[_unpair(v) for v in record["points"]],
        symbols=record["symbols"],
        multiplier=_unpair(record["multiplier"]),
        kind=CycleKind(record["kind"]),
        provenance=record.get("provenance"),
    )


def write_cycles(
    path: PathLike,
    cycles: Sequence[Cycle],
    params: Optional[CorrespondenceParams] = None,
    append: bool = False,
) -> None:
    """One cycle per line; floats keep their shortest round-trip representation"""
    path = _prepare(path)
    with path.open("a" if append else "w", encoding="utf-8") as fh:
        for cycle in cycles:
            fh.write(json.dumps(cycle_to_dict(cycle, params)) + "\n")
    logger.debug("write_cycles: %d cycles to %s", len(cycles), path)


def read_cycles(path: PathLike, params: Optional[CorrespondenceParams] = None) -> List[Cycle]:
    """Cycles of a JSON-lines file, restricted to (p, q, c) when params are given"""
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            if params is not None and (
                record.get("p") != params.p
                or record.get("q") != params.q
                or _unpair(record.get("c", [0.0, 0.0])) != params.c
            ):
                continue
            out.append(cycle_from_dict(record))
    return out


def find_cached_cycle(path: PathLike, params: CorrespondenceParams, symbols: Sequence[int]) -> Optional[Cycle]:
    """Last cached cycle for (p, q, c, symbols), if any"""
    path = Path(path)
    if not path.exists():
        return None
    matches = [c for c in read_cycles(path, params) if c.symbols == list(symbols)]
    return matches[-1] if matches else None


# --- bundle points ---

def bundle_point_to_dict(x: BundlePoint) -> Dict[str, Any]:
    return {
        "base": _pair(x.base),
        "series": _pair(x.series),
        "tail_bound": x.tail_bound,
        "direction": x.direction.value,
        "orbit": {
            "points": [_pair(z) for z in x.orbit.points],
            "symbols": list(x.orbit.symbols),
        },
    }


def write_bundle_points(path: PathLike, points: Sequence[BundlePoint]) -> None:
    path = _prepare(path)
    with path.open("w", encoding="utf-8") as fh:
        for x in points:
            fh.write(json.dumps(bundle_point_to_dict(x)) + "\n")


# --- CSV ---

def _savetxt(path: PathLike, columns: Sequence[np.ndarray], header: str) -> None:
    path = _prepare(path)
    table = np.column_stack([np.asarray(col, dtype=float) for col in columns])
    np.savetxt(path, table, fmt=CSV_FORMAT, delimiter=",", header=header, comments="")


def write_points(path: PathLike, points: Sequence[complex]) -> None:
    """CSV "z_re,z_im" """
    z = np.asarray(points, dtype=complex)
    _savetxt(path, [z.real, z.imag], "z_re,z_im")


def read_points(path: PathLike) -> np.ndarray:
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return table[:, 0] + 1j * table[:, 1]


def write_torus(path: PathLike, t: np.ndarray, disk: np.ndarray) -> None:
    """CSV "t,disk_re,disk_im" """
    disk = np.asarray(disk, dtype=complex)
    _savetxt(path, [np.asarray(t, dtype=float), disk.real, disk.imag], "t,disk_re,disk_im")


def write_c2(path: PathLike, rows: Sequence[Tuple[complex, complex]]) -> None:
    """CSV "z_re,z_im,w_re,w_im" """
    z = np.asarray([a for a, _ in rows], dtype=complex)
    w = np.asarray([b for _, b in rows], dtype=complex)
    _savetxt(path, [z.real, z.imag, w.real, w.imag], "z_re,z_im,w_re,w_im")


def curve_header(curve: CurveSample) -> str:
    tau = "".join(str(k) for k in curve.tau) or "0"
    c = curve.c
    eps = curve.metadata.get("eps", float("nan"))
    lam = curve.metadata.get("lambda", float("nan"))
    return f"# tau={tau}, c={c.real:.17g}{c.imag:+.17g}i, N={curve.truncation}, eps={eps:.17g}, lambda={lam:.17g}"


def write_curve(path: PathLike, curve: CurveSample) -> None:
    """Metadata line, then CSV "t,z_re,z_im" """
    z = curve.z
    _savetxt(path, [curve.t, z.real, z.imag], curve_header(curve) + "\nt,z_re,z_im")
