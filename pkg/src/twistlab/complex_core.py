"""Finite Hilbertian A-complexes: Laplacians, reduced cohomology and density bookkeeping."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .report import Report
from .validation import KERNEL_TOL, check_degree
from .vn_core import (
    AMap,
    DilationReport,
    HilbertianModule,
    SpectralDensity,
    StepDensity,
    VNAlgebra,
    _dense,
    _max_abs,
    commutant_trace,
    dilation_compare,
    dim_tau,
    spectral_density,
)


class FiniteComplex:
    """``0 -> L_0 -> L_1 -> ... -> L_n -> 0`` with bounded A-morphisms."""

    def __init__(self, modules: Sequence[HilbertianModule], differentials: Sequence[AMap]):
        modules = tuple(modules)
        differentials = tuple(differentials)
        if len(differentials) != len(modules) - 1:
            raise ValueError(f"{len(modules)} modules need {len(modules) - 1} differentials, "
                             f"got {len(differentials)}")
        for j, d in enumerate(differentials):
            if d.source != modules[j] or d.target != modules[j + 1]:
                raise ValueError(f"differential d_{j} does not map L_{j} -> L_{j + 1}")
        self.modules = modules
        self.differentials = differentials

    @property
    def n(self) -> int:
        return len(self.modules) - 1

    @property
    def algebra(self) -> VNAlgebra:
        return self.modules[0].algebra

    def d(self, j: int) -> AMap:
        """``d_j : L_j -> L_{j+1}``; zero outside ``0..n-1``."""
        if 0 <= j < self.n:
            return self.differentials[j]
        if j == -1:
            return AMap.zero(HilbertianModule(self.algebra, 0), self.modules[0])
        if j == self.n:
            return AMap.zero(self.modules[self.n], HilbertianModule(self.algebra, 0))
        raise ValueError(f"no differential d_{j}")

    def dims(self) -> list[float]:
        return [dim_tau(m) for m in self.modules]

    def to_dict(self) -> dict:
        return {"modules": [m.to_dict() for m in self.modules],
                "differentials": [d.to_dict() for d in self.differentials]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "FiniteComplex":
        modules = [HilbertianModule.from_dict(m) for m in data["modules"]]
        diffs = []
        for j, dd in enumerate(data["differentials"]):
            tmp = AMap.from_dict(dd)
            diffs.append(AMap(modules[j], modules[j + 1], tmp.blocks))
        return cls(modules, diffs)

    @classmethod
    def from_json(cls, text: str) -> "FiniteComplex":
        return cls.from_dict(json.loads(text))


def validate_complex(c: FiniteComplex, tol: float = 1e-10) -> Report:
    """Check ``d_{j+1} d_j = 0``; equivariance holds by the block structure."""
    report = Report("validate_complex")
    worst = 0.0
    for j in range(c.n - 1):
        comp = c.differentials[j + 1] @ c.differentials[j]
        err = max((_op_norm_est(b) for b in comp.blocks), default=0.0)
        worst = max(worst, err)
        report.add(f"d_{j + 1} d_{j} = 0", err <= tol, err, 0.0, tol)
    report.add("equivariance (block-diagonal commutant form)", True, 0.0, 0.0, tol)
    report.data["max_violation"] = worst
    return report


def _op_norm_est(m) -> float:
    if min(m.shape) == 0:
        return 0.0
    if sp.issparse(m):
        # ||A||_2 <= sqrt(||A||_1 ||A||_inf)
        a = abs(m)
        return float(math.sqrt(a.sum(axis=0).max() * a.sum(axis=1).max()))
    return float(np.linalg.norm(m, 2))


def laplacian(c: FiniteComplex, k: int) -> AMap:
    """``Delta_k = d_{k-1} d_{k-1}^* + d_k^* d_k``."""
    k = check_degree(k, c.n)
    lower, upper = c.d(k - 1), c.d(k)
    blocks = []
    for a, b in zip(lower.blocks, upper.blocks):
        terms = [m for m in (a @ a.conj().T if a.shape[1] else None,
                             b.conj().T @ b if b.shape[0] else None) if m is not None]
        if not terms:
            blocks.append(np.zeros((a.shape[0], a.shape[0])))
        elif len(terms) == 1:
            blocks.append(terms[0])
        elif sp.issparse(terms[0]) or sp.issparse(terms[1]):
            blocks.append(sp.csr_matrix(terms[0]) + sp.csr_matrix(terms[1]))
        else:
            blocks.append(terms[0] + terms[1])
    return AMap(c.modules[k], c.modules[k], blocks)


def laplacian_density(c: FiniteComplex, k: int, **kw) -> StepDensity:
    return spectral_density(laplacian(c, k), psd=True, **kw)


@dataclass(frozen=True)
class BettiReport:
    betti: float
    gap: float
    gap_ratio: float
    near_threshold: bool


def betti_report(c: FiniteComplex, k: int, tol: float = KERNEL_TOL) -> BettiReport:
    dens = laplacian_density(c, k)
    b = dens.kernel_mass(tol)
    gap = dens.gap(tol)
    ratio = gap / tol
    # eigenvalues within a factor 100 of the threshold on either side are flagged
    near = bool(np.any((dens.eigenvalues > tol / 100) & (dens.eigenvalues < tol * 100)))
    return BettiReport(b, gap, ratio, near)


def l2_betti(c: FiniteComplex, k: int, tol: float = KERNEL_TOL) -> float:
    """Trace of the projection onto ``Ker Delta_k``."""
    return betti_report(c, k, tol).betti


def cohomology_ranks(c: FiniteComplex, rtol: float = 1e-9) -> list[float]:
    """Reduced Betti numbers via numerical ranks: ``dim L_k - rank d_k - rank d_{k-1}``."""
    ranks = []
    for j in range(-1, c.n + 1):
        d = c.d(j)
        total = 0.0
        for (dd, w), m in zip(c.algebra.blocks, d.blocks):
            if min(m.shape) == 0:
                continue
            s = np.linalg.svd(_dense(m), compute_uv=False)
            total += w / dd * int(np.sum(s > rtol * max(1.0, s[0])))
        ranks.append(total)
    dims = c.dims()
    return [dims[k] - ranks[k + 1] - ranks[k] for k in range(c.n + 1)]


def _singular_density(d: AMap, tol: float = KERNEL_TOL) -> StepDensity:
    """Trace-weighted squared nonzero singular values of ``d``."""
    evs, wts = [], []
    for (dd, w), m in zip(d.source.algebra.blocks, d.blocks):
        if min(m.shape) == 0:
            continue
        s2 = np.linalg.svd(_dense(m), compute_uv=False) ** 2
        s2 = s2[s2 > tol]
        evs.append(s2)
        wts.append(np.full(s2.shape, w / dd))
    if not evs:
        return StepDensity([], [])
    return StepDensity(np.concatenate(evs), np.concatenate(wts))


def _range_density(d: AMap, tol: float = KERNEL_TOL) -> StepDensity:
    """Nonzero spectrum of ``d d^*`` (on the closure of the image)."""
    evs, wts = [], []
    for (dd, w), m in zip(d.source.algebra.blocks, d.blocks):
        if min(m.shape) == 0:
            continue
        m = _dense(m)
        vals = np.linalg.eigvalsh(m @ m.conj().T)
        vals = vals[vals > tol]
        evs.append(vals)
        wts.append(np.full(vals.shape, w / dd))
    if not evs:
        return StepDensity([], [])
    return StepDensity(np.concatenate(evs), np.concatenate(wts))


def F_density(c: FiniteComplex, k: int) -> StepDensity:
    """``F_k``: spectral density of ``d_k^* d_k`` on ``(Ker d_k)^perp`` (sqrt-lambda convention)."""
    return _singular_density(c.d(k))


def G_density(c: FiniteComplex, k: int) -> StepDensity:
    """``G_k``: spectral density of ``d_{k-1} d_{k-1}^*`` on ``cl(Im d_{k-1})``."""
    return _range_density(c.d(k - 1))


@dataclass
class DensitySplit:
    k: int
    F_prev: StepDensity
    b: float
    F: StepDensity
    N: StepDensity
    G: StepDensity
    report: Report

    def to_csv(self) -> str:
        lams = sorted({lam for lam, _ in self.N.jumps} | {lam for lam, _ in self.F.jumps}
                      | {lam for lam, _ in self.F_prev.jumps})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "lambda", "F_prev", "b", "F", "N"])
        for lam in lams:
            w.writerow([self.k, repr(float(lam)), repr(float(self.F_prev(lam))), repr(self.b),
                        repr(float(self.F(lam))), repr(float(self.N(lam)))])
        return buf.getvalue()


def _probe_points(*densities: StepDensity) -> np.ndarray:
    pts = np.unique(np.concatenate([d.eigenvalues for d in densities] + [np.zeros(1)]))
    if pts.size == 0:
        return np.array([0.5])
    mids = (pts[:-1] + pts[1:]) / 2
    gaps = np.diff(pts)
    # skip midpoints of numerically coincident eigenvalues
    keep = gaps > 1e-8 * np.maximum(1.0, pts[1:])
    return np.r_[-1.0, mids[keep], pts[-1] * 2 + 1.0]


def same_jumps(a: StepDensity, b: StepDensity, rtol: float = 1e-10) -> tuple[bool, float]:
    """Equal nonzero spectra with equal trace weights (jump positions within rtol)."""
    if a.eigenvalues.size != b.eigenvalues.size:
        return False, math.inf
    if a.eigenvalues.size == 0:
        return True, 0.0
    scale = np.maximum(1.0, np.abs(a.eigenvalues))
    err = float(np.max(np.abs(a.eigenvalues - b.eigenvalues) / scale))
    ok = err <= rtol and np.allclose(np.sort(a.weights), np.sort(b.weights), atol=1e-12)
    return bool(ok), err


def density_split(c: FiniteComplex, k: int, tol: float = 1e-10) -> DensitySplit:
    """``N_k = F_{k-1} + b_k + F_k`` with ``F_j = G_{j+1}`` checked."""
    k = check_degree(k, c.n)
    N = laplacian_density(c, k)
    b = N.kernel_mass(KERNEL_TOL)
    F_prev = F_density(c, k - 1) if k > 0 else StepDensity([], [])
    F = F_density(c, k)
    G = G_density(c, k)
    report = Report(f"density_split(k={k})")
    pts = _probe_points(N, F_prev, F)
    lhs = np.asarray(N(pts))
    rhs = np.asarray(F_prev(pts)) + np.where(pts >= 0, b, 0.0) + np.asarray(F(pts))
    err = float(np.max(np.abs(lhs - rhs))) if pts.size else 0.0
    report.add("N_k = F_{k-1} + b_k + F_k", err <= tol, err, 0.0, tol)
    ok, jerr = same_jumps(F_prev, G, rtol=tol)
    report.add("F_{k-1} = G_k", ok, jerr, 0.0, tol)
    return DensitySplit(k, F_prev, b, F, N, G, report)


def brute_force_F(c: FiniteComplex, k: int, lam: float) -> float:
    """Coordinate-subspace search for ``F_k(lam)`` (small modules only).

    Searches every coordinate subspace of the reduced module, maps it to the
    quotient by ``Ker d_k`` and keeps the largest trace-dimension satisfying
    ``||d w|| <= sqrt(lam) ||w||_q``.  Exact when ``d_k`` is diagonal in the
    coordinates; a lower bound in general.
    """
    d = c.d(k)
    best = 0.0
    per_block = []
    for (dd, w), m in zip(c.algebra.blocks, d.blocks):
        m = _dense(m)
        r = m.shape[1]
        if r > 6:
            raise ValueError("brute-force oracle limited to blocks of dimension <= 6")
        u, s, vh = np.linalg.svd(m) if min(m.shape) else (None, np.zeros(0), np.eye(r))
        rank = int(np.sum(s ** 2 > KERNEL_TOL))
        coimage = vh[:rank].conj().T  # orthonormal basis of (Ker d)^perp
        block_best = 0
        for size in range(1, r + 1):
            for subset in itertools.combinations(range(r), size):
                x = coimage.conj().T[:, list(subset)]  # quotient coordinates
                if x.size == 0:
                    continue
                uq, sq, _ = np.linalg.svd(x, full_matrices=False)
                q_rank = int(np.sum(sq > 1e-12))
                if q_rank == 0:
                    continue
                q = coimage @ uq[:, :q_rank]
                top = np.linalg.norm(m @ q, 2) ** 2
                if top <= lam * (1 + 1e-12) and q_rank > block_best:
                    block_best = q_rank
        per_block.append(w / dd * block_best)
    best = sum(per_block)
    return float(best)


def euler_identity(c: FiniteComplex, tol: float = 1e-8) -> Report:
    report = Report("euler_identity")
    m = c.dims()
    b = [l2_betti(c, k) for k in range(c.n + 1)]
    lhs = sum((-1) ** j * x for j, x in enumerate(m))
    rhs = sum((-1) ** j * x for j, x in enumerate(b))
    report.add("sum (-1)^j m_j = sum (-1)^j b_j", abs(lhs - rhs) <= tol, rhs, lhs, tol)
    report.data.update(m=m, b=b)
    return report


def morse_partial_sums(c: FiniteComplex, tol: float = 1e-8) -> Report:
    report = Report("morse_partial_sums")
    m = c.dims()
    b = [l2_betti(c, k) for k in range(c.n + 1)]
    for p in range(c.n + 1):
        lhs = sum((-1) ** (p - j) * m[j] for j in range(p + 1))
        rhs = sum((-1) ** (p - j) * b[j] for j in range(p + 1))
        report.add(f"p={p}", lhs >= rhs - tol, rhs, lhs, tol, note="alternating b <= alternating m")
    report.data.update(m=m, b=b)
    return report


# ---------------------------------------------------------------------------
# chain maps and homotopies


def _zero_or(maps, k, source, target):
    if maps is None or k < 0 or k >= len(maps) or maps[k] is None:
        return AMap.zero(source, target)
    return maps[k]


def homotopy_dilation_check(c1: FiniteComplex, c2: FiniteComplex, f: Sequence[AMap],
                            g: Sequence[AMap], T: Sequence[AMap | None] | None = None,
                            lam0: float | None = None, tol: float = 1e-8,
                            constants=None) -> Report:
    """Verify ``g f ~ Id`` through ``T`` and compare ``F_k`` and ``b_k`` of both complexes.

    ``T[k] : L_k(c1) -> L_{k-1}(c1)`` with ``g_k f_k - Id = T_{k+1} d_k + d_{k-1} T_k``.
    """
    if c1.n != c2.n:
        raise ValueError("complexes of different length")
    report = Report("homotopy_dilation_check")
    zero1 = HilbertianModule(c1.algebra, 0)
    for k in range(c1.n):
        err = (f[k + 1] @ c1.d(k) - c2.d(k) @ f[k]).norm()
        report.add(f"f chain map at {k}", err <= tol, err, 0.0, tol)
        err = (g[k + 1] @ c2.d(k) - c1.d(k) @ g[k]).norm()
        report.add(f"g chain map at {k}", err <= tol, err, 0.0, tol)
    for k in range(c1.n + 1):
        Lk = c1.modules[k]
        Lkm1 = c1.modules[k - 1] if k > 0 else zero1
        Lkp1 = c1.modules[k + 1] if k < c1.n else zero1
        Tk = _zero_or(T, k, Lk, Lkm1)
        Tk1 = _zero_or(T, k + 1, Lkp1, Lk)
        lhs = g[k] @ f[k] - AMap.identity(Lk)
        rhs = Tk1 @ c1.d(k) + (c1.d(k - 1) @ Tk if k > 0 else AMap.zero(Lk, Lk))
        err = (lhs - rhs).norm()
        report.add(f"gf - Id = Td + dT at {k}", err <= tol, err, 0.0, tol)
    if not report.passed:
        raise ValueError("supplied maps fail the chain/homotopy identities: "
                         + "; ".join(c.name for c in report.failures()))
    kw = {} if constants is None else {"constants": constants}
    # domination is a statement about small lambda; a nonzero homotopy only
    # controls the spectrum below roughly 1 / ||T||^2
    t_norm = max([t.op_norm() for t in (T or []) if t is not None] + [0.0])
    for k in range(c1.n + 1):
        F1, F2 = F_density(c1, k), F_density(c2, k)
        top = max([1.0] + [x for x in np.r_[F1.eigenvalues, F2.eigenvalues]])
        default = 2.0 * top if t_norm == 0 else min(2.0 * top, 0.25 / t_norm ** 2)
        rep: DilationReport = dilation_compare(F1, F2, lam0 or default, **kw)
        report.add(f"F_{k}(c1) <<= F_{k}(c2)", rep.dominated, rep.constant, None, None)
        b1, b2 = l2_betti(c1, k), l2_betti(c2, k)
        report.add(f"b_{k}(c1) <= b_{k}(c2)", b1 <= b2 + tol, b1, b2, tol)
        report.data[f"C_{k}"] = rep.constant
    return report


def direct_sum(c1: FiniteComplex, c2: FiniteComplex) -> FiniteComplex:
    mods = [a.direct_sum(b) for a, b in zip(c1.modules, c2.modules)]
    diffs = []
    for j in range(c1.n):
        blocks = []
        for a, b in zip(c1.d(j).blocks, c2.d(j).blocks):
            blocks.append(np.block([[_dense(a), np.zeros((a.shape[0], b.shape[1]))],
                                   [np.zeros((b.shape[0], a.shape[1])), _dense(b)]]))
        diffs.append(AMap(mods[j], mods[j + 1], blocks))
    return FiniteComplex(mods, diffs)


def elementary_complex(module: HilbertianModule, n: int, k: int) -> FiniteComplex:
    """Contractible complex ``module --Id--> module`` in degrees k, k+1 (zero elsewhere)."""
    if not 0 <= k < n:
        raise ValueError("elementary complex needs 0 <= k < n")
    zero = HilbertianModule(module.algebra, 0)
    mods = [module if j in (k, k + 1) else zero for j in range(n + 1)]
    diffs = [AMap.identity(module) if j == k else AMap.zero(mods[j], mods[j + 1]) for j in range(n)]
    return FiniteComplex(mods, diffs)


def _block_diag_maps(a: AMap, b: AMap, source, target) -> AMap:
    blocks = []
    for x, y in zip(a.blocks, b.blocks):
        x, y = _dense(x), _dense(y)
        blocks.append(np.block([[x, np.zeros((x.shape[0], y.shape[1]))],
                                [np.zeros((y.shape[0], x.shape[1])), y]]))
    return AMap(source, target, blocks)


def inclusion_projection(c1: FiniteComplex, c2: FiniteComplex):
    """Chain maps ``c1 -> c1 (+) c2 -> c1`` of a direct sum, returned with the sum."""
    total = direct_sum(c1, c2)
    f, g = [], []
    for j in range(c1.n + 1):
        a, b, s = c1.modules[j], c2.modules[j], total.modules[j]
        fb, gb = [], []
        for ra, rb in zip(a.ranks, b.ranks):
            inc = np.vstack([np.eye(ra), np.zeros((rb, ra))])
            fb.append(inc)
            gb.append(inc.T)
        f.append(AMap(a, s, fb))
        g.append(AMap(s, a, gb))
    return total, f, g


def conjugate(c: FiniteComplex, A: Sequence[AMap]) -> FiniteComplex:
    """Complex with ``d'_k = A_{k+1} d_k A_k^{-1}`` (a change of admissible scalar product)."""
    inv = [AMap(a.target, a.source, [np.linalg.inv(_dense(m)) for m in a.blocks]) for a in A]
    diffs = [A[k + 1] @ c.d(k) @ inv[k] for k in range(c.n)]
    return FiniteComplex(c.modules, diffs)


def random_complex(algebra: VNAlgebra, rng: np.random.Generator, length: int = 4,
                   max_multiplicity: int = 3) -> FiniteComplex:
    """Random finite complex with projective modules and random-rank differentials."""
    n = length - 1
    mods = [HilbertianModule.random(algebra, rng, int(rng.integers(1, max_multiplicity + 1)))
            for _ in range(length)]
    # per block: choose ranks rho_j with rho_{j-1} + rho_j <= r_j and rho_j <= r_{j+1} - rho_{j+1}
    blocks_per_deg = [[] for _ in range(n)]
    for b in range(len(algebra.blocks)):
        r = [m.ranks[b] for m in mods]
        rho = [0] * n
        used = [0] * (n + 1)  # dimension already claimed in each degree
        for j in range(n):
            cap = min(r[j] - used[j], r[j + 1])
            rho[j] = int(rng.integers(0, cap + 1)) if cap > 0 else 0
            used[j] += rho[j]
            used[j + 1] += rho[j]
        q = []
        for j in range(n + 1):
            z = rng.standard_normal((r[j], r[j])) + 1j * rng.standard_normal((r[j], r[j]))
            q.append(np.linalg.qr(z)[0] if r[j] else np.zeros((0, 0)))
        for j in range(n):
            lo = rho[j - 1] if j > 0 else 0
            src = q[j][:, lo:lo + rho[j]]
            tgt = q[j + 1][:, :rho[j]]
            s = rng.standard_normal((rho[j], rho[j])) + 1j * rng.standard_normal((rho[j], rho[j]))
            s += 2 * np.eye(rho[j])
            blocks_per_deg[j].append(tgt @ s @ src.conj().T)
    diffs = [AMap(mods[j], mods[j + 1], blocks_per_deg[j]) for j in range(n)]
    return FiniteComplex(mods, diffs)


# ---------------------------------------------------------------------------
# extended cohomology


@dataclass
class ExtendedClass:
    projective_dim: float
    torsion_density: SpectralDensity
    torsion_present: bool
    near_threshold: bool = False

    @property
    def is_zero(self) -> bool:
        return self.projective_dim <= 1e-12 and not self.torsion_present


def extended_decompose(d_in, Z: AMap | None = None, gap_threshold: float = KERNEL_TOL,
                       tol: float = 1e-8) -> ExtendedClass:
    """Split ``(d_in : C^{i-1} -> Z^i)`` into projective and torsion parts.

    ``Z`` is the isometric inclusion of the cocycle module into ``C^i``
    (``None``: all of ``C^i``).  ``d_in`` may also be a multiplier model
    exposing ``torsion_density()`` and ``kernel_dim()``.
    """
    if hasattr(d_in, "torsion_density"):
        dens = d_in.torsion_density()
        present = bool(np.asarray(dens(gap_threshold)) > 0 or
                       np.asarray(dens(max(gap_threshold, 1e-8))) > 0)
        return ExtendedClass(float(d_in.kernel_dim()), dens, present)
    if Z is None:
        Z = AMap.identity(d_in.target)
    if Z.target != d_in.target:
        raise ValueError("cocycle module does not sit in the target of d_in")
    proj_dim = dim_tau(Z.source)
    img_dim = 0.0
    for (dd, w), dm, zm in zip(d_in.source.algebra.blocks, d_in.blocks, Z.blocks):
        dm, zm = _dense(dm), _dense(zm)
        if dm.size:
            leak = dm - zm @ (zm.conj().T @ dm)
            if np.abs(leak).max() > tol * max(1.0, np.abs(dm).max()):
                raise ValueError("image of d_in is not contained in Z")
            s = np.linalg.svd(dm, compute_uv=False)
            img_dim += w / dd * int(np.sum(s ** 2 > gap_threshold))
    dens = _singular_density(d_in, tol=0.0)
    nonzero = StepDensity(dens.eigenvalues[dens.eigenvalues > 0], dens.weights[dens.eigenvalues > 0])
    present = bool(nonzero(gap_threshold) > 0)
    near = bool(np.any((nonzero.eigenvalues > gap_threshold) & (nonzero.eigenvalues < 100 * gap_threshold)))
    return ExtendedClass(proj_dim - img_dim, nonzero, present, near)


def cocycle_inclusion(c: FiniteComplex, i: int) -> AMap:
    """Isometric inclusion of ``Ker d_i`` into ``L_i``."""
    d = c.d(i)
    bases = []
    for m in d.blocks:
        m = _dense(m)
        r = m.shape[1]
        if r == 0:
            bases.append(np.zeros((0, 0)))
            continue
        _, s, vh = np.linalg.svd(m) if m.shape[0] else (None, np.zeros(0), np.eye(r))
        rank = int(np.sum(s ** 2 > KERNEL_TOL))
        bases.append(vh[rank:].conj().T)
    alg = c.algebra
    # kernel module in reduced coordinates: ranks = kernel dimensions
    kmod = _reduced_module(alg, [b.shape[1] for b in bases])
    return AMap(kmod, c.modules[i], bases)


def _reduced_module(algebra: VNAlgebra, ranks: Sequence[int]) -> HilbertianModule:
    """Some module with prescribed block ranks (embedded in a large enough free module)."""
    k = max([math.ceil(r / d) for r, d in zip(ranks, algebra.dims)] + [0])
    proj = []
    for r, d in zip(ranks, algebra.dims):
        p = np.zeros((k * d, k * d), dtype=complex)
        p[:r, :r] = np.eye(r)
        proj.append(p)
    return HilbertianModule(algebra, k, proj)


def extended_cohomology(c: FiniteComplex, i: int) -> ExtendedClass:
    return extended_decompose(c.d(i - 1), cocycle_inclusion(c, i))


@dataclass(frozen=True)
class MuBounds:
    lower: float
    factor_value: int | None
    exact: int | None


def mu_bounds(e: ExtendedClass, algebra_is_factor: bool) -> MuBounds:
    """Bounds on the minimal number of generators of an extended class."""
    if e.is_zero:
        return MuBounds(0.0, None, 0)
    factor_value = 1 if (algebra_is_factor and e.torsion_present) else None
    return MuBounds(float(e.projective_dim), factor_value, None)
