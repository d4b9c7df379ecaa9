"""Acceptance criteria 1-9, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -s`` (or ``python3 tests/test_acceptance.py``)
to see the summary lines.
"""
import math
import time

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from oracles import minus_projection_onto_summand
from twistlab import pipelines
from twistlab.complex_core import (conjugate, density_split, elementary_complex, euler_identity,
                                   homotopy_dilation_check, inclusion_projection, morse_partial_sums, random_complex)
from twistlab.geometry import FlatTorusGrid, genus_surface, harmonic_twist
from twistlab.complex_core import cohomology_ranks
from twistlab.morse import ModelOperator, model_eigenvalues, model_kernel_trace, normal_form_sample, oscillator_oracle
from twistlab.twisted_spectral import (MultiplierModel, anticommutator_check, assemble_twisted_laplacian,
                                       exact_flat_density, gauge_check, lambda0, ns_fit, poincare_check,
                                       vanishing_and_semicontinuity)
from twistlab.vn_core import AMap, HilbertianModule, VNAlgebra

GENERIC = np.array([0.83, -0.41, 0.57, 0.29])


def _verdict(number, title, ok, detail, elapsed, limit=None):
    within = limit is None or elapsed <= limit
    status = "PASS" if ok and within else "FAIL"
    budget = f" (limit {limit:g} s)" if limit else ""
    line = f"criterion {number} {status}: {title}; {detail}; {elapsed:.2f} s{budget}"
    print("\n" + line)
    assert ok, line
    assert within, line


def test_criterion_1_circle_spectrum():
    t0 = time.perf_counter()
    exact_err = max(abs(lambda0(MultiplierModel(1, 1.0, 0, s)) - s * s) for s in (0.5, 1.0, 2.0))
    cc = FlatTorusGrid(1, 512).cell_complex()
    tw = harmonic_twist(cc, np.array([1.0]))
    grid_err = max(abs(lambda0(assemble_twisted_laplacian(cc, tw, 0, s)) - s * s) / (s * s) for s in (0.5, 1.0, 2.0))
    ok = exact_err <= 1e-12 and grid_err <= 0.01
    _verdict(1, "circle lambda_0 = s^2", ok, f"exact err {exact_err:.2e}, N=512 rel err {grid_err:.2e}",
             time.perf_counter() - t0, 10)


def test_criterion_2_ns_exponent():
    t0 = time.perf_counter()
    slopes = [ns_fit(exact_flat_density(n, [0.0] * n), 0.0).slope for n in (1, 2, 3)]
    flags = [ns_fit(exact_flat_density(2, [r, 0.0]), 0.0).gap_flag for r in (0.5, 1.0)]
    ok = all(abs(a - n / 2) <= 0.02 for a, n in zip(slopes, (1, 2, 3))) and all(flags)
    _verdict(2, "flat torus NS exponent n/2 and gap flag", ok,
             f"slopes {[round(a, 6) for a in slopes]}, gap flags {flags}", time.perf_counter() - t0, 10)


def test_criterion_3_torus_gap():
    t0 = time.perf_counter()
    exact = lambda0(MultiplierModel(2, (3.0, 4.0)))
    cc = FlatTorusGrid(2, 128).cell_complex()
    L = assemble_twisted_laplacian(cc, harmonic_twist(cc, np.array([3.0, 4.0])), 0)
    # direct shift-invert solve on the assembled operator, not the separable shortcut
    op = L.operator.blocks[0]
    grid = float(np.min(spla.eigsh(op.tocsc(), k=3, sigma=-1e-3, which="LM", return_eigenvectors=False)))
    ok = abs(exact - 25) <= 1e-12 and abs(grid - 25) / 25 <= 0.02 and abs(grid - lambda0(L)) <= 1e-8
    _verdict(3, "flat torus gap lambda_0 = |theta|^2", ok, f"exact {exact!r}, 128^2 grid {grid:.6f}",
             time.perf_counter() - t0, 300)


def test_criterion_4_surface_tower():
    t0 = time.perf_counter()
    rep, data = pipelines.genus2_tower(range(1, 9), GENERIC)
    exact_b = all(b == [0.0, 2.0, 0.0] for b in data["twisted"])
    ok = rep.passed and exact_b and data["bounds"][1] == 2 and data["morse_numbers"][1] >= 2
    _verdict(4, "genus-2 tower b = (0, 2, 0), m_1 >= 2", ok,
             f"k=1..8 exact ranks {exact_b}, bound m_1 >= {data['bounds'][1]}, bundled m = {data['morse_numbers']}",
             time.perf_counter() - t0, 120)


def test_criterion_5_witten_clustering():
    t0 = time.perf_counter()
    cfg = {"model": {"resolution": 48}, "sweep": {"s_min": 2.0, "s_max": 200.0, "ratio": 1.5}}
    rep, _ = pipelines.run_witten(cfg)
    eq = [c for c in rep.checks if "equality" in c.name]
    ok = rep.passed and rep.data["morse_numbers"] == [1, 2, 1] and bool(eq) and all(c.passed for c in eq)
    gap = rep.data["model_gap"]
    _verdict(5, "Witten counts stabilize at (1, 2, 1)", ok,
             f"s* = {rep.data['s_star']}, eps = {rep.data['epsilon']:.4f} = 0.4 x {gap:.4f}",
             time.perf_counter() - t0, 900)


def test_criterion_6_model_operator():
    t0 = time.perf_counter()
    worst, kernel_ok = 0.0, True
    for n in (1, 2, 3):
        for k in range(n + 1):
            h = normal_form_sample(k, n).hessian
            for j in range(n + 1):
                ref = oscillator_oracle(h, j, 20)
                worst = max(worst, float(np.max(np.abs(model_eigenvalues(ModelOperator([h]), j, 20) - ref))))
            for dim_E in (1.0, 2.0, 0.5):
                m = ModelOperator([h], dim_E)
                traces = [model_kernel_trace(m, j) for j in range(n + 1)]
                kernel_ok &= traces == [dim_E if j == k else 0.0 for j in range(n + 1)]
    ok = worst <= 1e-6 and kernel_ok
    _verdict(6, "model operator vs oscillator oracle", ok, f"max deviation {worst:.2e}, kernel traces {kernel_ok}",
             time.perf_counter() - t0)


def _random_automorphisms(c, rng):
    out = []
    for m in c.modules:
        blocks = [np.eye(r) + 0.3 * (rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r)))
                  for r in m.ranks]
        out.append(AMap(m, m, blocks))
    return out


def test_criterion_7_abstract_complexes():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    algebras = [VNAlgebra.random(rng, n_blocks=b) for b in (1, 2, 3)]
    failures = 0
    for i in range(100):
        alg = algebras[i % 3]
        c = random_complex(alg, rng, int(rng.integers(2, 5)))
        ok = euler_identity(c).passed and morse_partial_sums(c).passed
        ok &= all(density_split(c, k).report.passed for k in range(c.n + 1))
        k = int(rng.integers(0, c.n))
        E = elementary_complex(HilbertianModule.random(alg, rng), c.n, k)
        total, f, g = inclusion_projection(c, E)
        ok &= homotopy_dilation_check(c, total, f, g).passed
        T = [None] * (c.n + 2)
        T[k + 1] = minus_projection_onto_summand(c, E, total, k)
        ok &= homotopy_dilation_check(total, c, g, f, T).passed
        A = _random_automorphisms(c, rng)
        inv = [AMap(a.target, a.source, [np.linalg.inv(b) for b in a.blocks]) for a in A]
        c2 = conjugate(c, A)
        ok &= homotopy_dilation_check(c, c2, A, inv).passed and homotopy_dilation_check(c2, c, inv, A).passed
        failures += not ok
    _verdict(7, "100 random complexes over 3 algebras", failures == 0, f"{failures} failures",
             time.perf_counter() - t0)


def test_criterion_8_dualities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    torus = FlatTorusGrid(2, 16).cell_complex()
    surf = genus_surface(2).cell_complex()
    reps = [poincare_check(torus, harmonic_twist(torus, np.array([0.7, -1.2]))),
            poincare_check(surf, harmonic_twist(surf, GENERIC)),
            gauge_check(surf, harmonic_twist(surf, GENERIC), 0.3 * rng.standard_normal(surf.n_vertices)),
            gauge_check(torus, harmonic_twist(torus, np.array([0.4, 0.9])), 0.3 * rng.standard_normal(256))]
    for _ in range(5):
        reps.append(anticommutator_check(MultiplierModel(2, (0.0, 0.0), int(rng.integers(0, 3))),
                                         rng.standard_normal(2), rng.standard_normal(2), tol=1e-10))
    fails = [c.name for r in reps for c in r.failures()]
    _verdict(8, "Poincare duality, gauge and anticommutator", not fails,
             f"{sum(len(r.checks) for r in reps)} checks, failures {fails}", time.perf_counter() - t0)


def test_criterion_9_vanishing_semicontinuity():
    t0 = time.perf_counter()
    grid = [(a, b) for a in (-1.0, 0.0, 1.0) for b in (-1.0, 0.0, 1.0)]
    r1 = vanishing_and_semicontinuity(grid, MultiplierModel(2, (0.0, 0.0)))
    cc = genus_surface(2).cell_complex()
    scan = [t * GENERIC for t in (-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0)]
    r2 = vanishing_and_semicontinuity(scan, lambda c: cohomology_ranks(cc.complex(harmonic_twist(cc, c))),
                                      reference=[3])
    ok = r1.passed and r2.passed and r2.data["jumps"] == [3]
    b1 = [row[1] for row in r2.data["values"]]
    _verdict(9, "vanishing and semicontinuity", ok, f"9-point grid ok {r1.passed}, surface b1 along scan {b1}",
             time.perf_counter() - t0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
