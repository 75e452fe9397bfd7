#!/usr/bin/env python3
"""
Figure reproduction script
Renders the Julia sets of (w - c)^2 = z^6 at c = 0.2i and c = 0.35i, overlays the dual
Julia samples in red and checks that both skeletons are nonempty, annular and distinct
"""
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from corrdyn.config import settings  # noqa: E402
from corrdyn.logging_config import setup_logging  # noqa: E402
from corrdyn.parallel import resolve_workers  # noqa: E402
from corrdyn.schemas import CorrespondenceParams  # noqa: E402
from corrdyn.services.correspondence import annulus_bounds  # noqa: E402
from corrdyn.services.render import (  # noqa: E402
    default_viewport,
    dual_ifs_sample,
    membership_grid,
    overlay,
    rasterize_points,
    write_color_image,
    write_image,
)

OUT_DIR = Path("figures")
SIZE = 512
DEPTH = 24
TOL = 0.01
PARAMETERS = (0.2j, 0.35j)


def render(c, workers):
    """Render one panel and write its PGM and overlay PPM"""
    params = CorrespondenceParams(p=6, q=2, c=c)
    bounds = annulus_bounds(params)
    vp = default_viewport(bounds, SIZE)
    grid = membership_grid(params, vp, DEPTH, bounds, TOL, workers=workers)
    tag = f"c{c.imag:.2f}i".replace(".", "_")
    write_image(grid, OUT_DIR / f"julia_{tag}.pgm")

    dual = dual_ifs_sample(params, 20000, seed=0, workers=workers)
    write_color_image(overlay(grid, rasterize_points(dual, vp)), OUT_DIR / f"julia_dual_{tag}.ppm")
    return grid, bounds


def check_nonempty(grid):
    """Skeleton has surviving pixels"""
    count = int(grid.surviving.sum())
    if count == 0:
        return False, "no surviving pixels"
    return True, f"{count} surviving pixels"


def check_contained(grid, bounds):
    """Every surviving pixel center lies in the fattened annulus"""
    vp = grid.viewport
    moduli = np.abs(vp.centers())[grid.surviving]
    lo = bounds.R_c * (1 - TOL) - vp.half_diagonal
    hi = bounds.s_c * (1 + TOL) + vp.half_diagonal
    outside = int(np.sum((moduli < lo) | (moduli > hi)))
    if outside:
        return False, f"{outside} surviving pixels outside [{lo:.4f}, {hi:.4f}]"
    return True, f"contained in [{lo:.4f}, {hi:.4f}]"


def check_distinct(a, b):
    """The two panels differ on more than 1% of pixels"""
    share = float(np.mean(a.surviving != b.surviving))
    if share <= 0.01:
        return False, f"only {share:.2%} of pixels differ"
    return True, f"{share:.2%} of pixels differ"


def main():
    """Render both panels and report"""
    setup_logging(settings.log_level, settings.log_file)
    workers = resolve_workers()

    print("\n" + "=" * 60)
    print("FIGURE REPRODUCTION  (w - c)^2 = z^6")
    print("=" * 60 + "\n")

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    panels = [render(c, workers) for c in PARAMETERS]

    checks = []
    for c, (grid, bounds) in zip(PARAMETERS, panels):
        checks.append((f"Nonempty skeleton c={c}", check_nonempty(grid)))
        checks.append((f"Annulus containment c={c}", check_contained(grid, bounds)))
    checks.append(("Panels differ", check_distinct(panels[0][0], panels[1][0])))

    all_passed = True
    for name, (passed, message) in checks:
        status = "✅" if passed else "❌"
        print(f"{status} {name}")
        print(f"   {message}\n")
        if not passed:
            all_passed = False

    print("=" * 60)
    if all_passed:
        print(f"✅ FIGURES WRITTEN TO {OUT_DIR}/")
        print("=" * 60 + "\n")
        return 0
    print("❌ FIGURE CHECKS FAILED")
    print("=" * 60 + "\n")
    return 1


if __name__ == "__main__":
    sys.exit(main())
