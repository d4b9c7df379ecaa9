"""Experiment pipelines: pure functions from a validated config to (report, artifacts).

Artifacts are returned as ``{suffix: text}``; only the CLI writes files.
"""
from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from . import complex_core as cx
from . import geometry as geo
from . import morse as mo
from . import twisted_spectral as ts
from .report import Report
from .vn_core import HilbertianModule, VNAlgebra, dim_tau

LIMITS = {"circle": 200_000, "torus": 256, "refine": 3, "genus": 4, "fold": 16, "witten": 96}


class InputError(ValueError):
    """Config problems detected before any computation (exit code 1)."""


def n_threads() -> int:
    raw = os.environ.get("TWISTLAB_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        raise InputError(f"TWISTLAB_THREADS must be an integer, got {raw!r}")


def pmap(fn: Callable, items) -> list:
    """Order-preserving map on the runner's worker pool."""
    items = list(items)
    workers = n_threads()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# descriptors


def build_fiber(desc: dict | None) -> HilbertianModule:
    if not desc:
        return HilbertianModule(VNAlgebra.trivial(), 1)
    if "algebra" in desc:
        alg = VNAlgebra.from_dict(desc["algebra"])
    else:
        alg = VNAlgebra.matrix(int(desc.get("matrix_dim", 1)))
    mult = int(desc.get("multiplicity", 1))
    ranks = desc.get("ranks")
    if ranks is None:
        return HilbertianModule(alg, mult)
    proj = []
    for d, r in zip(alg.dims, ranks):
        if not 0 <= r <= mult * d:
            raise InputError(f"fiber rank {r} outside 0..{mult * d}")
        p = np.zeros((mult * d, mult * d), dtype=complex)
        p[:r, :r] = np.eye(r)
        proj.append(p)
    return HilbertianModule(alg, mult, proj)


def build_model(desc: dict):
    """Cell complex (and surface when triangulated) from a model descriptor."""
    t = desc["type"]
    if t == "torus":
        n = int(desc.get("n", 2))
        res = int(desc["resolution"])
        limit = LIMITS["circle"] if n == 1 else LIMITS["torus"]
        if res > limit:
            raise InputError(f"resolution {res} exceeds the solver limit {limit} for n={n}")
        try:
            grid = geo.FlatTorusGrid(n, res)
        except ValueError as e:
            raise InputError(str(e))
        return grid.cell_complex(), None
    if t == "surface":
        g = int(desc["genus"])
        if not 1 <= g <= LIMITS["genus"]:
            raise InputError(f"genus must be in 1..{LIMITS['genus']}")
        lvl = int(desc.get("refine", 0))
        if not 0 <= lvl <= LIMITS["refine"]:
            raise InputError(f"refinement level must be in 0..{LIMITS['refine']}")
        surf = geo.genus_surface(g, int(desc.get("segments", 3))).refine(lvl)
        return surf.cell_complex(), surf
    raise InputError(f"model type {t!r} needs a cell complex")


def build_twist(cc: geo.CellComplex, desc: dict | None) -> geo.OneCocycle:
    if not desc:
        return geo.OneCocycle.zero(cc)
    cls = np.asarray(desc.get("class", [0.0] * len(cc.loops)), dtype=float)
    if "phase" in desc:
        cls = cls + 1j * np.asarray(desc["phase"], dtype=float)
    if cls.shape != (len(cc.loops),):
        raise InputError(f"twist class needs {len(cc.loops)} coordinates")
    tw = geo.harmonic_twist(cc, cls)
    return tw.scaled(float(desc.get("scale", 1.0)))


# ---------------------------------------------------------------------------
# kinds


def run_spectrum(cfg: dict) -> tuple[Report, dict]:
    rep = Report("spectrum")
    model = cfg["model"]
    if model["type"] == "multiplier":
        m = ts.MultiplierModel(int(model["n"]), cfg.get("twist", {}).get("class", [0.0]),
                               int(cfg.get("degree", 0)), float(cfg.get("twist", {}).get("scale", 1.0)))
        lam = ts.lambda0(m)
        rep.add("lambda_0 = s^2 |theta|^2", abs(lam - m.gap()) <= 1e-12, lam, m.gap(), 1e-12)
        return rep, {"csv": _rows_csv(["degree", "lambda0"], [(m.j, lam)])}
    cc, _ = build_model(model)
    tw = build_twist(cc, cfg.get("twist"))
    fiber = build_fiber(cfg.get("fiber"))
    rows = []
    for j in range(cc.n + 1):
        L = ts.assemble_twisted_laplacian(cc, tw, j, 1.0, fiber)
        lam = ts.lambda0(L)
        lam_ex = ts.lambda0(L, exclude_kernel=True)
        rows.append((j, lam, lam_ex))
        rep.add(f"Delta_{j} positive semidefinite", lam >= -1e-10, lam, ">= -1e-10")
    exp = cfg.get("expect", {})
    if "lambda0" in exp:
        want, rtol = float(exp["lambda0"]), float(exp.get("rtol", 0.01))
        rep.add("lambda_0 (degree 0) matches expectation", abs(rows[0][1] - want) <= rtol * max(abs(want), 1e-300),
                rows[0][1], want, rtol)
    rep.data["lambda0"] = [r[1] for r in rows]
    return rep, {"csv": _rows_csv(["degree", "lambda0", "lambda0_above_kernel"], rows)}


def _density_for(cfg: dict):
    model = cfg["model"]
    j = int(cfg.get("degree", 0))
    if model["type"] == "multiplier":
        tw = cfg.get("twist", {})
        m = ts.MultiplierModel(int(model["n"]), tw.get("class", [0.0] * int(model["n"])), j,
                               float(tw.get("scale", 1.0)))
        return ts.twisted_density(m), None
    cc, _ = build_model(model)
    L = ts.assemble_twisted_laplacian(cc, build_twist(cc, cfg.get("twist")), j, 1.0,
                                      build_fiber(cfg.get("fiber")))
    h = 1.0 / int(model["resolution"]) if model["type"] == "torus" else None
    return ts.twisted_density(L), h


def run_density(cfg: dict) -> tuple[Report, dict]:
    rep = Report("density")
    N, _ = _density_for(cfg)
    grid = cfg.get("lambda_grid", {"min": 1e-3, "max": 1e3, "points": 61})
    lams = np.geomspace(float(grid["min"]), float(grid["max"]), int(grid["points"]))
    vals = np.asarray(N(lams), dtype=float)
    rep.add("N nondecreasing", bool(np.all(np.diff(vals) >= -1e-12)), None, None)
    rep.data["kernel_mass"] = N.kernel_mass()
    return rep, {"csv": N.to_csv(lams)}


def run_ns_fit(cfg: dict) -> tuple[Report, dict]:
    rep = Report("ns-fit")
    N, h = _density_for(cfg)
    window = cfg.get("window")
    if window is None:
        window = ts.default_window(h) if h is not None else (1e-6, 1e-2)
    fit = ts.ns_fit(N, None, window)
    exp = cfg.get("expect", {})
    if "alpha" in exp:
        tol = float(exp.get("tol", 0.02))
        ok = fit.slope is not None and abs(fit.slope - float(exp["alpha"])) <= tol
        rep.add("alpha matches expectation", ok, fit.slope, float(exp["alpha"]), tol)
    if exp.get("gap_flag") is not None:
        rep.add("gap flag", fit.gap_flag == bool(exp["gap_flag"]), fit.gap_flag, bool(exp["gap_flag"]))
    rep.data["fit"] = fit.to_dict()
    lams = np.geomspace(*window, 41)
    return rep, {"json:fit": fit.to_json(), "csv": N.to_csv(lams)}


def run_exact(cfg: dict) -> tuple[Report, dict]:
    rep = Report("exact")
    n = int(cfg["model"].get("n", 1))
    tw = cfg.get("twist", {})
    theta = tw.get("class", [0.0] * n)
    s = float(tw.get("scale", 1.0))
    j = int(cfg.get("degree", 0))
    N = ts.exact_flat_density(n, theta, j, s)
    grid = cfg.get("lambda_grid", {"min": 1e-2, "max": 1e3, "points": 51})
    lams = np.geomspace(float(grid["min"]), float(grid["max"]), int(grid["points"]))
    gap = s * s * float(np.dot(theta, theta))
    # independent evaluation: volume of the ball of radius sqrt(lam - gap) / (2 pi)
    r = np.sqrt(np.clip(lams - gap, 0, None)) / (2 * math.pi)
    vol = {1: 2 * r, 2: math.pi * r ** 2, 3: 4 * math.pi / 3 * r ** 3}[n] * math.comb(n, j)
    err = float(np.max(np.abs(np.asarray(N(lams)) - vol)))
    rep.add("closed form = band volume", err <= 1e-12 * max(1.0, float(vol.max())), err, 0.0, 1e-12)
    fit = ts.ns_fit(N, 0.0)
    if gap > 0:
        rep.add("gap flag for nonzero class", fit.gap_flag, fit.gap_flag, True)
    else:
        rep.add("alpha = n/2", abs(fit.slope - n / 2) <= 0.02, fit.slope, n / 2, 0.02)
    return rep, {"csv": N.to_csv(lams), "json:fit": fit.to_json()}


def run_morse(cfg: dict) -> tuple[Report, dict]:
    rep = Report("morse")
    form = mo.MorseOneForm.from_dict(cfg["form"]) if "form" in cfg else mo.cos_cos_form()
    data = mo.find_zeros(form)
    m = data.morse_numbers
    rep.add("sum (-1)^j m_j = chi(T^n) = 0", data.euler_sum == 0, data.euler_sum, 0)
    if "expect" in cfg and "morse_numbers" in cfg["expect"]:
        want = list(cfg["expect"]["morse_numbers"])
        rep.add("Morse numbers", m == want, m, want)
    rows = [(i, z.index, *z.location, *z.hessian) for i, z in enumerate(data.zeros)]
    header = ["zero", "index"] + [f"x{i}" for i in range(form.n)] + [f"a{i}" for i in range(form.n)]
    rep.data["morse"] = data.to_dict()
    return rep, {"csv": _rows_csv(header, rows)}


def run_witten(cfg: dict) -> tuple[Report, dict]:
    rep = Report("witten-sweep")
    form = mo.MorseOneForm.from_dict(cfg["form"]) if "form" in cfg else mo.cos_cos_form()
    sweep = cfg.get("sweep", {})
    res = int(cfg.get("model", {}).get("resolution", 48))
    if res > LIMITS["witten"]:
        raise InputError(f"sweep resolution {res} exceeds the solver limit {LIMITS['witten']}")
    if res < geo.MIN_RESOLUTION:
        raise InputError(f"resolution must be >= {geo.MIN_RESOLUTION}")
    s_values = sweep.get("s_values")
    if s_values is None:
        s_values = mo.geometric_s_grid(float(sweep.get("s_min", 2.0)), float(sweep.get("s_max", 200.0)),
                                       float(sweep.get("ratio", 1.5))).tolist()
    fiber_dim = dim_tau(build_fiber(cfg.get("fiber")))
    est = mo.WittenSweep(s_values, sweep.get("epsilon"), res, fiber_dim)
    est.fit(form)
    m = est.morse_numbers_
    rep.add("counts stabilize at m_j dim E", est.stable_, est.s_star_, [x * fiber_dim for x in m])
    rep.add("stable over a decade of s", est.stable_decades() >= 1.0, est.stable_decades(), 1.0)
    n = form.n
    # the universal cover of T^n has vanishing twisted L2 Betti numbers for every class
    zero_b = [0.0] * (n + 1)
    rep.extend(mo.strong_morse_check(zero_b, m, 1.0), prefix="strong ")
    rep.extend(mo.asymptotic_morse_check(lambda s: [fiber_dim * ts.MultiplierModel(n, [0.0] * n, j, s).kernel_dim()
                                                    for j in range(n + 1)], m, s_values[-3:], fiber_dim),
               prefix="asymptotic ")
    rep.data.update(s_star=est.s_star_, epsilon=est.epsilon_, morse_numbers=m,
                    model_gap=est.model_gap_)
    return rep, {"csv": est.to_csv()}


def tower_betti(cc: geo.CellComplex, twist: geo.OneCocycle, k: int, direction) -> list[float]:
    """Normalized Betti numbers of the k-fold cyclic cover by integer rank computation."""
    cover = geo.build_cover(cc, k, direction)
    C = cover.complex.complex(cover.lift(twist))
    return [b / k for b in cx.cohomology_ranks(C)]


def generic_pl_morse(surf, tw: geo.OneCocycle, seed: int = 7) -> list[int]:
    """PL Morse numbers of the real part of ``tw`` after a tiny exact perturbation."""
    cc = surf.cell_complex()
    h = 1e-3 * np.random.default_rng(seed).standard_normal(cc.n_vertices)
    pert = geo.OneCocycle(cc, np.real(tw.values)) + geo.OneCocycle.exact(cc, h)
    return mo.pl_morse_data(surf, geo.OneCocycle(cc, pert.values))


def run_tower(cfg: dict) -> tuple[Report, dict]:
    rep = Report("tower")
    model = dict(cfg["model"])
    if "genus" not in model:
        raise InputError("tower model needs 'genus'")
    model["type"] = "surface"
    cc, surf = build_model(model)
    covers = [int(k) for k in model.get("covers", [1, 2, 4, 8])]
    if any(k < 1 or k > LIMITS["fold"] for k in covers):
        raise InputError(f"cover folds must be in 1..{LIMITS['fold']}")
    direction = model.get("direction", [1] + [0] * (len(cc.loops) - 1))
    tw = build_twist(cc, cfg.get("twist"))
    chi = cc.euler_characteristic
    results = pmap(lambda k: tower_betti(cc, tw, k, direction), covers)
    rows = []
    generic = bool(np.any(np.abs(tw.values) > 0))
    for k, b in zip(covers, results):
        rows.append((k, *b))
        rep.add(f"k={k}: sum (-1)^j b_j = chi", abs(b[0] - b[1] + b[2] - chi) <= 1e-8, b[0] - b[1] + b[2], chi, 1e-8)
        if generic:
            rep.add(f"k={k}: b = (0, -chi, 0)", np.allclose(b, [0, -chi, 0], atol=1e-9), b, [0, -chi, 0], 1e-9)
    if generic:
        m = generic_pl_morse(surf, tw, int(cfg.get("seed", 7)))
        # finite covers have discrete spectrum, so every degree has a gap at zero
        gr = mo.gap_report([math.inf] * 3, m, results[-1], 1.0)
        rep.extend(gr, prefix="gap ")
        rep.add("Euler: sum (-1)^j m_j = chi", m[0] - m[1] + m[2] == chi, m[0] - m[1] + m[2], chi)
        rep.data["morse_numbers"] = m
    rep.data["betti"] = {str(k): b for k, b in zip(covers, results)}
    return rep, {"csv": _rows_csv(["k", "b0", "b1", "b2"], rows)}


def run_dualities(cfg: dict) -> tuple[Report, dict]:
    rep = Report("dualities")
    cc, _ = build_model(cfg["model"])
    tw = build_twist(cc, cfg.get("twist"))
    rep.extend(ts.poincare_check(cc, tw), prefix="poincare ")
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    h = 0.3 * rng.standard_normal(cc.n_vertices)
    rep.extend(ts.gauge_check(cc, tw, h), prefix="gauge ")
    n = cc.n
    rep.extend(ts.anticommutator_check(ts.MultiplierModel(n, [0.0] * n, min(1, n)),
                                       rng.standard_normal(n), rng.standard_normal(n)),
               prefix="anticommutator ")
    return rep, {"csv": _rows_csv(["check", "passed", "measured"],
                                  [(c.name, int(c.passed), c.measured if isinstance(c.measured, float) else "")
                                   for c in rep.checks])}


KINDS: dict[str, Callable[[dict], tuple[Report, dict]]] = {
    "spectrum": run_spectrum,
    "density": run_density,
    "ns-fit": run_ns_fit,
    "exact": run_exact,
    "morse": run_morse,
    "witten-sweep": run_witten,
    "tower": run_tower,
    "dualities": run_dualities,
}


# ---------------------------------------------------------------------------
# reproduction suites


def suite_circle() -> Report:
    rep = Report("suite circle")
    for s in (0.5, 1.0, 2.0):
        m = ts.MultiplierModel(1, (1.0,), 0, s)
        lam = ts.lambda0(m)
        rep.add(f"[exact] lambda_0(s={s}) = s^2", abs(lam - s * s) <= 1e-12, lam, s * s, 1e-12)
        cc = geo.FlatTorusGrid(1, 512).cell_complex()
        L = ts.assemble_twisted_laplacian(cc, geo.harmonic_twist(cc, np.array([1.0])), 0, s)
        lg = ts.lambda0(L)
        rep.add(f"[grid N=512] lambda_0(s={s}) ~ s^2", abs(lg - s * s) / (s * s) <= 0.01, lg, s * s, 0.01)
    N = ts.exact_flat_density(1, 0.0)
    rep.add("[exact] N_0(pi^2) = 1", abs(N(math.pi ** 2) - 1) <= 1e-12, N(math.pi ** 2), 1.0, 1e-12)
    th = ts.theta_function(N, 1.0)
    rep.add("[exact] Theta_0(1) = 1/(2 sqrt(pi))", abs(th - 0.5 / math.sqrt(math.pi)) <= 1e-12, th,
            0.5 / math.sqrt(math.pi), 1e-12)
    return rep


def suite_torus() -> Report:
    rep = Report("suite torus")
    for n in (1, 2, 3):
        fit = ts.ns_fit(ts.exact_flat_density(n, 0.0), 0.0)
        rep.add(f"[exact] alpha_0 slope n={n}", abs(fit.slope - n / 2) <= 0.02, fit.slope, n / 2, 0.02)
    for norm in (0.5, 1.0):
        fit = ts.ns_fit(ts.exact_flat_density(2, (norm, 0.0)), 0.0)
        rep.add(f"[exact] gap flag |theta|={norm}", fit.gap_flag, fit.gap, norm ** 2)
    m = ts.MultiplierModel(2, (3.0, 4.0))
    rep.add("[exact] lambda_0 theta=(3,4)", abs(ts.lambda0(m) - 25) <= 1e-12, ts.lambda0(m), 25.0, 1e-12)
    cc = geo.FlatTorusGrid(2, 128).cell_complex()
    L = ts.assemble_twisted_laplacian(cc, geo.harmonic_twist(cc, np.array([3.0, 4.0])), 0)
    lg = ts.lambda0(L)
    rep.add("[grid 128^2] lambda_0 theta=(3,4)", abs(lg - 25) / 25 <= 0.02, lg, 25.0, 0.02)
    return rep


def genus2_tower(k_values=range(1, 9), coords=(0.83, -0.41, 0.57, 0.29)) -> tuple[Report, dict]:
    rep = Report("genus-2 tower")
    cc = geo.genus_surface(2).cell_complex()
    tw = geo.harmonic_twist(cc, np.asarray(coords))
    zero = geo.OneCocycle.zero(cc)
    ks = list(k_values)
    twisted = pmap(lambda k: tower_betti(cc, tw, k, [1, 0, 0, 0]), ks)
    untwisted = pmap(lambda k: tower_betti(cc, zero, k, [1, 0, 0, 0]), ks)
    for k, b, b0 in zip(ks, twisted, untwisted):
        rep.add(f"[rank] k={k}: b = (0,2,0)", np.allclose(b, [0, 2, 0], atol=1e-12), b, [0, 2, 0], 0.0)
        rep.add(f"[rank] k={k}: untwisted b1 = 2 + 2/k", abs(b0[1] - (2 + 2 / k)) <= 1e-12, b0[1], 2 + 2 / k, 0.0)
    surface, theta, m = mo.genus2_morse_form()
    gr = mo.gap_report([math.inf] * 3, m, twisted[-1], 1.0)
    rep.extend(gr, prefix="[bound] ")
    rep.add("[PL] bundled form m_1 >= 2", m[1] >= 2, m[1], 2)
    rep.add("[PL] sum (-1)^j m_j = -2", m[0] - m[1] + m[2] == -2, m[0] - m[1] + m[2], -2)
    return rep, {"twisted": twisted, "untwisted": untwisted, "morse_numbers": m, "bounds": gr.data["bounds"]}


def suite_genus2() -> Report:
    return genus2_tower()[0]


def suite_inequalities(seed: int = 0, n_complexes: int = 30) -> Report:
    rep = Report("suite inequalities")
    rng = np.random.default_rng(seed)
    fails = 0
    for i in range(n_complexes):
        alg = VNAlgebra.random(rng)
        c = cx.random_complex(alg, rng, int(rng.integers(2, 5)))
        ok = cx.euler_identity(c).passed and cx.morse_partial_sums(c).passed
        ok &= all(cx.density_split(c, k).report.passed for k in range(c.n + 1))
        fails += not ok
    rep.add(f"[identity] {n_complexes} random complexes", fails == 0, fails, 0)
    rep.extend(mo.strong_morse_check([0, 0, 0], [1, 2, 1]), prefix="[torus] ")
    rep.extend(mo.strong_morse_check([0, 2, 0], mo.genus2_morse_form()[2]), prefix="[genus2] ")
    data = mo.find_zeros(mo.cos_cos_form())
    rep.extend(mo.euler_morse_check([0, 0, 0], data.morse_numbers, 0), prefix="[torus] ")
    return rep


SUITES = {"circle": suite_circle, "torus": suite_torus, "genus2": suite_genus2,
          "inequalities": suite_inequalities}


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0
