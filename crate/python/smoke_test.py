#!/usr/bin/env python3
"""Smoke test for the freeknot_py extension module.

Builds the cdylib with cargo if needed, loads it from the target directory,
and runs a handful of end-to-end checks. Exits nonzero on any failure.
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def find_or_build_extension() -> Path:
    candidates = []
    for profile in ("release", "debug"):
        for suffix in ("so", "dylib"):
            candidates.append(REPO_ROOT / "target" / profile / f"libfreeknot_py.{suffix}")
    existing = [p for p in candidates if p.exists()]
    if not existing:
        subprocess.run(
            ["cargo", "build", "-p", "freeknot-py", "--release"],
            cwd=REPO_ROOT,
            check=True,
        )
        existing = [p for p in candidates if p.exists()]
    if not existing:
        raise RuntimeError("could not find or build the freeknot_py cdylib")
    return max(existing, key=lambda p: p.stat().st_mtime)


def load_module(tmp_dir: str):
    library = find_or_build_extension()
    target = Path(tmp_dir) / "freeknot_py.so"
    shutil.copyfile(library, target)
    sys.path.insert(0, tmp_dir)
    import freeknot_py

    return freeknot_py


def approx_equal(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp_dir:
        fk = load_module(tmp_dir)

        # basis evaluation on the expanded vector [0, 0, 1, 2, 2]
        knots = fk.KnotSequence(1, 0.0, 2.0, [1.0])
        assert knots.basis_count == 3
        assert approx_equal(knots.basis_value(0, 0.5), 0.5)
        assert approx_equal(knots.basis_value(2, 0.5), 0.0)
        row = knots.basis_row(0.5)
        assert approx_equal(sum(row), 1.0, 1e-12)

        uniform = fk.KnotSequence.equidistant(0.0, 1.0, 1, 3)
        assert all(
            approx_equal(k, e) for k, e in zip(uniform.interior, [0.25, 0.5, 0.75])
        )

        # error-bounded placement on t^2: spans of 0.2 certify 0.08 <= 0.09
        grid = [i / 10 for i in range(11)]
        quadratic = [t * t for t in grid]
        placed, forced = fk.place_knots(grid, [quadratic], 1, 0.09)
        assert forced == 0
        assert all(
            approx_equal(k, e, 1e-12)
            for k, e in zip(placed.interior, [0.2, 0.4, 0.6, 0.8])
        ), placed.interior

        envelope = fk.derivative_envelope(grid, [quadratic], 1)
        assert all(approx_equal(c, 2.0, 1e-9) for c in envelope)

        all_pass, spans = fk.verify_bound(placed, grid, [quadratic], 0.09)
        assert all_pass and len(spans) == 5
        assert all(delta <= 0.08 + 1e-12 for (_, _, _, delta, _) in spans)

        # least squares reproduces linear data exactly
        line_knots = fk.KnotSequence(1, 0.0, 1.0, [])
        line_grid = [0.0, 0.25, 0.5, 0.75, 1.0]
        spline = fk.fit_spline(line_grid, [line_grid], line_knots)
        coeffs = spline.coefficients[0]
        assert approx_equal(coeffs[0], 0.0, 1e-12) and approx_equal(coeffs[1], 1.0, 1e-12)
        assert approx_equal(spline.evaluate(0, 0.3), 0.3, 1e-12)

        assert approx_equal(fk.rmse([0.0, 0.0], [3.0, 4.0]), math.sqrt(12.5), 1e-12)
        assert approx_equal(fk.max_abs_error([0.0, 0.0], [0.5, -1.0]), 1.0)

        # identity regression pipeline on cubic curves
        panel_grid = [i / 29 for i in range(30)]
        panel = []
        for s in range(12):
            a, b = 0.3 + 0.05 * s, 1.0 - 0.04 * s
            panel.append([a + b * t - 0.4 * t * t + 0.2 * t**3 for t in panel_grid])
        model = fk.train_m2p(panel_grid, panel, panel_grid, panel)
        out_grid, predicted = model.predict(panel_grid, panel[0])
        assert out_grid == panel_grid
        worst = max(abs(p - a) for p, a in zip(predicted, panel[0]))
        assert worst <= 1e-4, f"identity prediction error {worst}"

        # model documents survive a save/load round trip
        model_path = str(Path(tmp_dir) / "m2p.json")
        model.save(model_path)
        reloaded = fk.M2PModel.load(model_path)
        _, again = reloaded.predict(panel_grid, panel[0])
        assert again == predicted

        knots_path = str(Path(tmp_dir) / "knots.json")
        placed.save(knots_path)
        assert fk.KnotSequence.load(knots_path).interior == placed.interior

        # domain violations surface as ValueError
        try:
            knots.basis_value(0, 5.0)
        except ValueError:
            pass
        else:
            raise AssertionError("out-of-domain evaluation should raise ValueError")

        # numerical failures surface as RuntimeError: basis 1 of this
        # degree-0 sequence has no support on the three-point grid
        empty_support = fk.KnotSequence(0, 0.0, 1.0, [0.4, 0.45])
        try:
            fk.fit_spline([0.0, 0.5, 1.0], [[1.0, 2.0, 3.0]], empty_support)
        except RuntimeError as err:
            assert "basis function 1" in str(err)
        else:
            raise AssertionError("empty-support fit should raise RuntimeError")

    print("smoke test OK")
    return 0


if __name__ == "__main__":
    sys.exit(main())
