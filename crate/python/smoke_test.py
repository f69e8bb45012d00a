#!/usr/bin/env python3
"""Smoke test for the aslab Python extension.

Uses an installed ``aslab`` module if one is importable. Otherwise it loads
the shared library built by

    cargo build --release -p aslab-py --features extension-module

from ``target/release`` (or the path in ``ASLAB_PY_LIB``).
"""

import atexit
import importlib.util
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    try:
        import aslab  # noqa: F401

        return sys.modules["aslab"]
    except ImportError:
        pass
    candidates = []
    if os.environ.get("ASLAB_PY_LIB"):
        candidates.append(Path(os.environ["ASLAB_PY_LIB"]))
    for profile in ("release", "debug"):
        for name in ("libaslab_py.so", "libaslab_py.dylib", "aslab_py.dll"):
            candidates.append(ROOT / "target" / profile / name)
    lib = next((c for c in candidates if c.is_file()), None)
    if lib is None:
        sys.exit(
            "aslab extension not found; build it with "
            "`cargo build --release -p aslab-py --features extension-module`"
        )
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    tmp = Path(tempfile.mkdtemp(prefix="aslab-py-"))
    atexit.register(shutil.rmtree, tmp, ignore_errors=True)
    target = tmp / f"aslab{suffix}"
    shutil.copy(lib, target)
    spec = importlib.util.spec_from_file_location("aslab", target)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    sys.modules["aslab"] = module
    return module


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    aslab = load_module()
    checks = []

    def check(name, ok):
        checks.append((name, bool(ok)))
        print(f"{'ok  ' if ok else 'FAIL'} {name}")

    k = aslab.KleinianParams(0.6, 1, 1)
    s = k.spectrum("set", "assouad")
    check("kleinian set spectrum", close(s(0.25), 0.6 + 0.4 / 3, 1e-12) and s(0.75) == 1.0)
    check("kleinian phase transition", s.phase_transition == 0.5)
    check("kleinian dims", close(k.dims()["lower_measure"], 0.2, 1e-12))

    j = aslab.JuliaParams(1.4, 1, 4)
    lower = j.spectrum("set", "lower")
    check("julia set lower spectrum", close(lower(0.1), 1.4 - 0.4 * 4 / 9, 1e-12))
    check("julia measure assouad", close(j.dims()["assouad_measure"], 3.0, 1e-12))

    try:
        aslab.JuliaParams(0.5, 1, 2)
        check("invalid params rejected", False)
    except ValueError:
        check("invalid params rejected", True)

    cloud = aslab.PointCloud.decreasing_sequence(1.0, 20000)
    check("sequence cloud size", len(cloud) == 20001 and cloud.dim == 1)
    est = aslab.Estimator(cloud)
    box = est.box_dimension()
    check(f"sequence box dimension {box.value:.3f}", close(box.value, 0.5, 0.1))
    a = est.assouad_spectrum(0.5)
    check(f"sequence assouad spectrum {a.value:.3f}", close(a.value, 1.0, 0.15))
    try:
        est.assouad_spectrum(0.999)
        check("narrow window raises WindowError", False)
    except aslab.WindowError:
        check("narrow window raises WindowError", True)

    lattice = aslab.PointCloud.generate("zlattice1", n=2000)
    check("preset generation", len(lattice) == 4001 and not lattice.cap_exceeded)

    oracle = aslab.MeasureOracle.kleinian(aslab.KleinianParams(1.2, 1, 2))
    m = oracle.measure_spectrum(0.3, "assouad")
    want = aslab.KleinianParams(1.2, 1, 2).spectrum("measure", "assouad")(0.3)
    check(f"oracle round trip {m.value:.4f} vs {want:.4f}", close(m.value, want, 0.05))

    kl, ju = aslab.parameter_sweep(200, 1)
    report = aslab.sullivan_dictionary_report(kl, ju)
    check(
        "dictionary report",
        report["violations"] == 0
        and report["julia"]["L<H<A"] == 0
        and report["kleinian"]["L<H<A"] > 0,
    )

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "cloud.csv")
        cloud.save_csv(path)
        back = aslab.PointCloud.load(path)
        check("csv round trip", len(back) == len(cloud) and back.point(5) == cloud.point(5))

    check("theta grid", len(aslab.default_theta_grid()) == 33)
    check(
        "phase transition form",
        math.isclose(aslab.phase_transition_form(0.6, 1.0, 0.5, 0.25), s(0.25), abs_tol=1e-12),
    )

    failed = [n for n, ok in checks if not ok]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
