#!/usr/bin/env python3
"""Smoke test for the shiftfem_py extension module.

Builds the cdylib with cargo if needed, loads it, and checks a few
end-to-end results.  Run from anywhere:

    python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    lib = None
    for profile in ("release", "debug"):
        cand = ROOT / "target" / profile / "libshiftfem_py.so"
        if cand.exists():
            lib = cand
            break
    if lib is None:
        subprocess.run(
            ["cargo", "build", "-p", "shiftfem-py"], cwd=ROOT, check=True
        )
        lib = ROOT / "target" / "debug" / "libshiftfem_py.so"
    tmp = Path(tempfile.mkdtemp(prefix="shiftfem_py_"))
    shutil.copy(lib, tmp / "shiftfem_py.so")
    sys.path.insert(0, str(tmp))
    import shiftfem_py

    return shiftfem_py


def main():
    sf = load_module()

    # mesh: translation symmetry and the transition point
    nodes = sf.mesh_nodes("shishkin", 64, 1e-4, sigma=2.0, alpha=1.0)
    assert len(nodes) == 65
    assert nodes[32] == 1.0
    for i in range(33):
        assert nodes[i + 32] == 1.0 + nodes[i]
    lam = 2.0 * 1e-4 * math.log(64.0)
    assert abs(nodes[8] - lam) < 1e-15
    print("mesh_nodes: ok")

    # weight validation: balanced weight satisfies the three conditions
    report = sf.validate_weight("balanced", 1e-4, math.sqrt(2.0))
    assert report["pass"]
    assert report["min_value"] >= 1.0 - 1e-12
    assert abs(report["integral"] - (2.0 + 4.0 / math.sqrt(2.0))) < 1e-6
    print("validate_weight: ok")

    # stationary solve: boundary values and a boundary layer at x = 0
    xs, us = sf.solve_stationary_example(64, k=1, epsilon=1e-4, weight="balanced")
    assert abs(us[0]) < 1e-12 and abs(us[-1]) < 1e-12
    interior = max(abs(u) for u in us)
    assert interior > 0.1, "solution unexpectedly flat"
    print("solve_stationary_example: ok")

    # convergence study: first-order rates for k = 1 / q = 0
    table = sf.study("parabolic", [64, 128, 256], k=1, epsilon=1e-4)
    rates = [r for r in table["l2_rates"] if r is not None]
    assert all(0.90 <= r <= 1.05 for r in rates), rates
    assert table["csv"].startswith("N,")
    print("study: ok (rates %s)" % ["%.3f" % r for r in rates])

    print("all smoke tests passed")


if __name__ == "__main__":
    main()
