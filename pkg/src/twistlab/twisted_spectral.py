"""Twisted Laplacians, spectral densities, theta functions and Novikov-Shubin fits.

Two backends:

* grid/mesh models from :mod:`geometry` (finite complexes, step densities);
* :class:`MultiplierModel`, the exact Fourier description of ``d + s theta ^``
  on ``R^n`` with a constant covector ``theta``; per unit cell its spectral
  density is a power law with gap ``s^2 |theta|^2``.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from sklearn.base import BaseEstimator

from .complex_core import FiniteComplex, betti_report, laplacian
from .geometry import CellComplex, OneCocycle
from .report import Report
from .validation import KERNEL_TOL, check_degree, check_is_fitted, check_lambda_grid, check_window
from .vn_core import (
    DEFAULT_CONSTANTS,
    AMap,
    HilbertianModule,
    PowerLawDensity,
    SpectralDensity,
    StepDensity,
    VNAlgebra,
    _dense,
    dilation_compare,
    dim_tau,
    spectral_density,
)

BALL_VOLUME = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}


# ---------------------------------------------------------------------------
# exterior algebra on C^n


def _subsets(n: int, j: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(n), j))


def exterior_multiplication(v, j: int) -> np.ndarray:
    """Matrix of ``e(v) : Lambda^j -> Lambda^{j+1}`` in the subset basis."""
    v = np.asarray(v, dtype=complex)
    n = v.size
    src, tgt = _subsets(n, j), _subsets(n, j + 1)
    index = {s: i for i, s in enumerate(tgt)}
    m = np.zeros((len(tgt), len(src)), dtype=complex)
    for c, s in enumerate(src):
        for i in range(n):
            if i in s:
                continue
            new = tuple(sorted(s + (i,)))
            sign = (-1) ** sum(1 for x in s if x < i)
            m[index[new], c] += sign * v[i]
    return m


def _e(v, j, n):
    if j < 0 or j >= n:
        return np.zeros((math.comb(n, j + 1) if 0 <= j + 1 <= n else 0,
                         math.comb(n, j) if 0 <= j <= n else 0), dtype=complex)
    return exterior_multiplication(v, j)


def symbol_laplacian(w, j: int) -> np.ndarray:
    """``e(w) e(w)^* + e(w)^* e(w)`` on ``Lambda^j`` (assembled, not simplified)."""
    w = np.asarray(w, dtype=complex)
    n = w.size
    lower = _e(w, j - 1, n) if j > 0 else np.zeros((math.comb(n, j), 0))
    upper = _e(w, j, n) if j < n else np.zeros((0, math.comb(n, j)))
    return lower @ lower.conj().T + upper.conj().T @ upper


# ---------------------------------------------------------------------------
# Fourier multiplier backend


@dataclass(frozen=True)
class MultiplierModel:
    """``Delta_{s theta, j}`` on ``R^n`` with ``Z^n`` acting by translations.

    The Fourier transform turns ``d + s theta ^`` into ``e(2 pi i xi + s theta)``
    and the Laplacian into the symbol ``(|2 pi xi|^2 + s^2 |theta|^2) Id``.
    """

    n: int
    theta: tuple[float, ...]
    j: int = 0
    s: float = 1.0
    fiber_dim: float = 1.0
    base: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n not in BALL_VOLUME:
            raise ValueError(f"multiplier model supports n in {{1,2,3}}, got {self.n}")
        theta = tuple(float(x) for x in np.broadcast_to(np.atleast_1d(self.theta), (self.n,)))
        object.__setattr__(self, "theta", theta)
        if self.base is not None:
            object.__setattr__(self, "base", tuple(float(x) for x in np.atleast_1d(self.base)))
        check_degree(self.j, self.n)
        if not self.fiber_dim > 0:
            raise ValueError("fiber dimension must be positive")

    @property
    def total_twist(self) -> np.ndarray:
        base = np.zeros(self.n) if self.base is None else np.asarray(self.base)
        return base + self.s * np.asarray(self.theta)

    def symbol(self, xi) -> np.ndarray:
        w = 2j * math.pi * np.asarray(xi, dtype=float) + self.total_twist
        return symbol_laplacian(w, self.j)

    def gap(self) -> float:
        return float(np.dot(self.total_twist, self.total_twist))

    def density(self) -> PowerLawDensity:
        return exact_flat_density(self.n, self.total_twist, self.j, 1.0, self.fiber_dim)

    def kernel_dim(self) -> float:
        # absolutely continuous spectrum: no L2 kernel for any class
        return 0.0

    def torsion_density(self) -> SpectralDensity:
        """Nonzero spectrum of ``d_{j-1}^* d_{j-1}`` (rank binom(n-1, j-1) of the symbol)."""
        if self.j == 0:
            return StepDensity([], [])
        coef = math.comb(self.n - 1, self.j - 1) * BALL_VOLUME[self.n] / (2 * math.pi) ** self.n
        return PowerLawDensity(coef * self.fiber_dim, self.n / 2, self.gap())

    def with_s(self, s: float) -> "MultiplierModel":
        return MultiplierModel(self.n, self.theta, self.j, s, self.fiber_dim, self.base)


def exact_flat_density(n: int, theta, j: int = 0, s: float = 1.0,
                       fiber_dim: float = 1.0) -> PowerLawDensity:
    """``N_j(lam) = binom(n,j) vol{xi : |2 pi xi|^2 + s^2 |theta|^2 <= lam}`` per unit cell."""
    if n not in BALL_VOLUME:
        raise ValueError(f"unsupported dimension n={n}")
    check_degree(j, n)
    theta = np.broadcast_to(np.atleast_1d(np.asarray(theta, dtype=float)), (n,))
    gap = float(s * s * np.dot(theta, theta))
    coef = math.comb(n, j) * BALL_VOLUME[n] / (2 * math.pi) ** n * fiber_dim
    return PowerLawDensity(coef, n / 2, gap)


# ---------------------------------------------------------------------------
# assembled twisted Laplacians


@dataclass
class TwistedLaplacian:
    cell_complex: CellComplex
    twist: OneCocycle
    j: int
    s: float
    complex: FiniteComplex
    operator: AMap
    base: OneCocycle | None = None
    fiber: HilbertianModule | None = None

    @property
    def separable_periods(self) -> np.ndarray | None:
        """Axis periods when the model is a flat grid with a constant twist."""
        cc = self.cell_complex
        if not cc.name.startswith(("circle", "torus")) or "cover" in cc.name or cc.coords is None:
            return None
        tot = self.total_twist.values
        if cc.n == 1:
            return np.array([tot.sum()]) if np.allclose(tot, tot[0], rtol=0, atol=1e-14) else None
        V = cc.n_vertices
        if np.allclose(tot[:V], tot[0], atol=1e-14) and np.allclose(tot[V:], tot[V], atol=1e-14):
            return np.array([tot[:V].sum() / len(cc.loops[1]), tot[V:].sum() / len(cc.loops[0])])
        return None

    @property
    def total_twist(self) -> OneCocycle:
        t = self.twist.scaled(self.s)
        return t if self.base is None else self.base + t

    def matrix(self, block: int = 0):
        return self.operator.blocks[block]


def assemble_twisted_laplacian(c, theta=None, j: int = 0, s: float = 1.0,
                               fiber: HilbertianModule | None = None,
                               base: OneCocycle | None = None):
    """``Delta_{beta + s theta, j}`` on a cell complex, or a rescaled multiplier model."""
    if isinstance(c, MultiplierModel):
        m = c if theta is None else MultiplierModel(c.n, theta, c.j, c.s, c.fiber_dim, c.base)
        return MultiplierModel(m.n, m.theta, j, s, m.fiber_dim, m.base)
    if not isinstance(c, CellComplex):
        raise TypeError("expected a CellComplex or MultiplierModel")
    j = check_degree(j, c.n)
    theta = OneCocycle.zero(c) if theta is None else theta
    total = theta.scaled(s) if base is None else base + theta.scaled(s)
    fc = c.complex(total, fiber)
    return TwistedLaplacian(c, theta, j, s, fc, laplacian(fc, j), base, fiber)


def _circle_spectrum(N: int, h: float, period: float) -> np.ndarray:
    """Eigenvalues of the twisted circle Laplacian (constant per-edge twist)."""
    t = period / N
    kappa = 2 * math.pi * np.arange(N) / N
    return (2 * np.cosh(t) - 2 * np.cos(kappa)) / h ** 2 if np.isrealobj(t) else None


def _separable_eigenvalues(L: TwistedLaplacian, periods: np.ndarray) -> np.ndarray:
    cc = L.cell_complex
    if cc.n == 1:
        N = cc.n_vertices
        h = 1.0 / math.sqrt(cc.masses[1][0] / cc.masses[0][0])
        return np.sort(_circle_spectrum(N, h, periods[0]))
    nx, ny = len(cc.loops[0]), len(cc.loops[1])
    hx = math.sqrt(cc.masses[0][0] / cc.masses[1][0])
    hy = math.sqrt(cc.masses[0][0] / cc.masses[1][-1])
    ax = _circle_spectrum(nx, hx, periods[0])
    ay = _circle_spectrum(ny, hy, periods[1])
    grid = np.add.outer(ax, ay).ravel()
    return np.sort(np.r_[grid, grid] if L.j == 1 else grid)


def twisted_density(L, exact_separable: bool = True) -> SpectralDensity:
    """``N_j(lam) = Tr_tau(E_lam)``; closed form for multiplier models.

    Flat grids with constant real twist are tensor products of twisted
    circles, whose spectra are known in closed form; this exact shortcut is
    used when ``exact_separable`` is set.
    """
    if isinstance(L, MultiplierModel):
        return L.density()
    periods = L.separable_periods if exact_separable else None
    if periods is not None and np.isrealobj(periods):
        ev = _separable_eigenvalues(L, periods)
        fiber = L.fiber or HilbertianModule(VNAlgebra.trivial(), 1)
        return StepDensity(ev, np.full(ev.shape, dim_tau(fiber)))
    return spectral_density(L.operator, psd=True)


def lambda0(L, exclude_kernel: bool = False, tol: float = KERNEL_TOL) -> float:
    """Bottom of the spectrum (optionally the smallest value above the kernel threshold)."""
    if isinstance(L, MultiplierModel):
        return L.gap()
    periods = L.separable_periods
    if periods is not None and np.isrealobj(periods):
        ev = _separable_eigenvalues(L, periods)
    else:
        ev = _lowest_eigenvalues(L.operator, exclude_kernel, tol)
    if exclude_kernel:
        ev = ev[ev > tol]
        return float(ev[0]) if ev.size else math.inf
    return float(ev[0])


def _lowest_eigenvalues(op: AMap, exclude_kernel: bool, tol: float, k0: int = 6) -> np.ndarray:
    vals = []
    for m in op.blocks:
        n = m.shape[0]
        if n == 0:
            continue
        if n <= 1500:
            vals.append(scipy.linalg.eigvalsh(_dense(m)))
            continue
        k = min(k0, n - 2)
        a = sp.csc_matrix(m)
        while True:
            v = np.sort(spla.eigsh(a, k=k, sigma=-1e-3, which="LM", return_eigenvectors=False).real)
            if not exclude_kernel or v[-1] > tol or k >= n - 2:
                break
            k = min(2 * k, n - 2)
        vals.append(v)
    return np.sort(np.concatenate(vals)) if vals else np.zeros(0)


def density_csv(N: SpectralDensity, lams) -> str:
    return N.to_csv(check_lambda_grid(lams))


# ---------------------------------------------------------------------------
# theta functions


def theta_function(N: SpectralDensity, t):
    """``Theta(t) = int_{0+}^inf e^{-t lam} dN(lam)`` (the kernel jump is excluded)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("theta function needs t > 0")
    return N.theta(t)


def theta_csv(N: SpectralDensity, ts) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "theta"])
    for t in ts:
        w.writerow([repr(float(t)), repr(float(theta_function(N, float(t))))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Novikov-Shubin fits


def _ls_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), resid


class NovikovShubinFit(BaseEstimator):
    """Power-law exponent of ``N(lam) - b`` from samples on a geometric window.

    ``fit(X, y)`` takes sample points ``X`` (lambda values) and density values
    ``y``.  ``alpha_``/``alpha_bar_`` are the smallest/largest log-log slopes
    over the whole window and its two halves; ``slope_`` is the whole-window
    least-squares slope.  When ``y - b`` vanishes on the window the fit sets
    ``gap_flag_`` and leaves the exponents ``None`` (the exponent is infinite).
    """

    def __init__(self, b: float = 0.0, zero_tol: float = 1e-12, min_points: int = 4):
        self.b = b
        self.zero_tol = zero_tol
        self.min_points = min_points

    def fit(self, X, y):
        lam = np.asarray(X, dtype=float).ravel()
        val = np.asarray(y, dtype=float).ravel() - self.b
        if lam.size != val.size or lam.size < 2:
            raise ValueError("X and y must be matching 1-d samples with at least two points")
        if np.any(lam <= 0):
            raise ValueError("sample points must be positive")
        order = np.argsort(lam)
        lam, val = lam[order], val[order]
        self.window_ = (float(lam[0]), float(lam[-1]))
        pos = val > self.zero_tol
        self.gap_flag_ = bool(not pos.any())
        if self.gap_flag_:
            self.alpha_ = self.alpha_bar_ = self.slope_ = None
            self.residual_ = 0.0
            self.coef_ = 0.0
            return self
        x, yv = np.log(lam[pos]), np.log(val[pos])
        if x.size < self.min_points:
            raise ValueError(f"only {x.size} points with N - b > 0 in the window")
        self.slope_, self.residual_ = _ls_slope(x, yv)
        self.coef_ = float(np.exp(np.mean(yv - self.slope_ * x)))
        half = x.size // 2
        slopes = [self.slope_]
        for xs, ys in ((x[:half + 1], yv[:half + 1]), (x[half:], yv[half:])):
            if xs.size >= 2:
                slopes.append(_ls_slope(xs, ys)[0])
        self.alpha_ = float(min(slopes))
        self.alpha_bar_ = float(max(slopes))
        return self

    def predict(self, X):
        check_is_fitted(self, "gap_flag_")
        lam = np.asarray(X, dtype=float).ravel()
        if self.gap_flag_:
            return np.full(lam.shape, self.b)
        return self.b + self.coef_ * lam ** self.slope_


@dataclass
class NSFit:
    alpha: float | None
    alpha_bar: float | None
    window: tuple[float, float]
    residual: float
    gap_flag: bool
    gap: float | None = None
    slope: float | None = None

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "alpha_bar": self.alpha_bar, "window": list(self.window),
                "residual": self.residual, "gap_flag": self.gap_flag, "gap": self.gap,
                "slope": self.slope}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def default_window(h: float) -> tuple[float, float]:
    """Grid default ``[4 h^2, 100 h^2]``."""
    return 4.0 * h * h, 100.0 * h * h


def ns_fit(N: SpectralDensity, b: float | None = None, window=(1e-6, 1e-2),
           n_points: int = 60) -> NSFit:
    lo, hi = check_window(window)
    b = N.kernel_mass() if b is None else b
    lams = np.geomspace(lo, hi, n_points)
    est = NovikovShubinFit(b=b).fit(lams, np.asarray(N(lams), dtype=float))
    gap = None
    if est.gap_flag_:
        g = N.gap()
        gap = float(g) if math.isfinite(g) else None
    return NSFit(est.alpha_, est.alpha_bar_, est.window_, est.residual_, est.gap_flag_, gap, est.slope_)


def theta_exponent(N: SpectralDensity, t_window=(1e2, 1e6), n_points: int = 40) -> float | None:
    """Large-time decay exponent of ``Theta``: minus the log-log slope."""
    lo, hi = check_window(t_window)
    ts = np.geomspace(lo, hi, n_points)
    vals = np.asarray(theta_function(N, ts), dtype=float)
    if np.all(vals <= 0):
        return None
    pos = vals > 0
    slope, _ = _ls_slope(np.log(ts[pos]), np.log(vals[pos]))
    return -slope


def tauberian_check(N: SpectralDensity, b: float, window, t_window, tol: float = 0.1) -> Report:
    rep = Report("tauberian_check")
    fit = ns_fit(N, b, window)
    a_theta = theta_exponent(N, t_window)
    if fit.gap_flag:
        rep.add("density gap matches theta decay", a_theta is None or a_theta > 5, a_theta, "inf")
    else:
        rep.add("alpha(N) vs alpha(Theta)", abs(fit.slope - a_theta) <= tol, a_theta, fit.slope, tol)
    rep.data.update(ns=fit.to_dict(), theta_alpha=a_theta)
    return rep


# ---------------------------------------------------------------------------
# identities


def anticommutator_check(model, alpha, beta, j: int | None = None, n_xi: int = 7,
                         seed: int = 0, tol: float = 1e-10) -> Report:
    """``Delta_{beta+s alpha} = Delta_beta + s (L + L^* + 2<alpha,beta>) + s^2 |alpha|^2``.

    The s-coefficients are extracted from the family at ``s in {0, 1, -1}``
    and compared with the independently assembled Lie-derivative terms at
    random frequencies.  Models without an exact adjoint pairing report
    "not applicable".
    """
    rep = Report("anticommutator_check")
    if not isinstance(model, MultiplierModel):
        rep.add("anticommutator identity", True, None, None, None, note="not applicable")
        rep.data["applicable"] = False
        return rep
    n = model.n
    j = model.j if j is None else check_degree(j, n)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (n,))
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (n,))
    rng = np.random.default_rng(seed)
    err1 = err2 = 0.0
    for _ in range(n_xi):
        xi = rng.uniform(-3, 3, n)
        u = 2j * math.pi * xi

        def fam(s):
            return symbol_laplacian(u + beta + s * alpha, j)

        F0, F1, Fm = fam(0.0), fam(1.0), fam(-1.0)
        c1 = (F1 - Fm) / 2
        c2 = (F1 + Fm) / 2 - F0
        # Lie derivative symbol {e(u), i(V)} with i(V) = e(alpha)^*, in degree j
        eu_lo, eu_hi = _e(u, j - 1, n), _e(u, j, n)
        ea_lo, ea_hi = _e(alpha, j - 1, n), _e(alpha, j, n)
        Lv = np.zeros((math.comb(n, j),) * 2, dtype=complex)
        if j > 0:
            Lv += eu_lo @ ea_lo.conj().T
        if j < n:
            Lv += ea_hi.conj().T @ eu_hi
        expect1 = Lv + Lv.conj().T + 2 * float(alpha @ beta) * np.eye(Lv.shape[0])
        expect2 = float(alpha @ alpha) * np.eye(Lv.shape[0])
        err1 = max(err1, float(np.abs(c1 - expect1).max()))
        err2 = max(err2, float(np.abs(c2 - expect2).max()))
    rep.add("first-order coefficient = L + L* + 2<alpha,beta>", err1 <= tol, err1, 0.0, tol)
    rep.add("second-order coefficient = |alpha|^2 Id", err2 <= tol, err2, 0.0, tol)
    rep.data["applicable"] = True
    return rep


def _cell_means(cc: CellComplex, h: np.ndarray) -> list[np.ndarray]:
    out = [h, (h[cc.edges[:, 0]] + h[cc.edges[:, 1]]) / 2]
    if cc.n == 2:
        out.append(np.array([np.mean([h[v] for v in cc._face_vertices(f)]) for f in cc.faces]))
    return out


def gauge_check(cc: CellComplex, theta: OneCocycle, h, fiber: HilbertianModule | None = None,
                tol: float = 1e-10, betti_tol: float = 1e-8) -> Report:
    """``theta' = theta + dh`` conjugates the coboundary by ``e^{h}`` (cell-mean frames)."""
    h = np.asarray(h, dtype=float)
    if h.shape != (cc.n_vertices,):
        raise ValueError("h must be a vertex function")
    rep = Report("gauge_check")
    theta2 = theta + OneCocycle.exact(cc, h)
    D1 = cc.orthonormal_coboundaries(theta)
    D2 = cc.orthonormal_coboundaries(theta2)
    hbar = _cell_means(cc, h)
    for j in range(cc.n):
        pred = sp.diags(np.exp(-hbar[j + 1])) @ D1[j] @ sp.diags(np.exp(hbar[j]))
        scale = max(1.0, float(abs(D2[j]).max()))
        err = float(abs(pred - D2[j]).max()) / scale
        rep.add(f"d'_{j} = e^-h d_{j} e^h", err <= tol, err, 0.0, tol)
    C1, C2 = cc.complex(theta, fiber), cc.complex(theta2, fiber)
    osc = float(h.max() - h.min())
    bound = math.exp(2 * osc)
    constants = sorted(set(DEFAULT_CONSTANTS) | set(np.geomspace(1.0, bound, 25).tolist()))
    for j in range(cc.n + 1):
        b1, b2 = betti_report(C1, j).betti, betti_report(C2, j).betti
        rep.add(f"b_{j} equal", abs(b1 - b2) <= betti_tol, b2, b1, betti_tol)
        N1 = spectral_density(laplacian(C1, j), psd=True)
        N2 = spectral_density(laplacian(C2, j), psd=True)
        lam0 = 2.0 * max(N1.eigenvalues.max(initial=1.0), N2.eigenvalues.max(initial=1.0))
        r12 = dilation_compare(N2, N1, lam0, constants=constants, tol=1e-9)
        r21 = dilation_compare(N1, N2, lam0, constants=constants, tol=1e-9)
        ok = r12.dominated and r21.dominated and max(r12.constant, r21.constant) <= bound * (1 + 1e-12)
        rep.add(f"N_{j} dilatationally equivalent (C <= e^(2 osc h))", ok,
                None if not ok else max(r12.constant, r21.constant), bound)
    rep.data["osc"] = osc
    return rep


def poincare_check(cc: CellComplex, theta: OneCocycle, tol: float = 1e-8,
                   use_dual: bool | None = None) -> Report:
    """Isospectrality of ``Delta_{theta,j}`` and ``Delta_{-theta,n-j}``.

    Self-dual cubical tori are compared primal-to-primal; other meshes use the
    dual cell structure built by :meth:`CellComplex.dual`.
    """
    from .geometry import dual_complex

    rep = Report("poincare_check")
    primal = cc.complex(theta)
    if use_dual is None:
        use_dual = not cc.name.startswith(("circle", "torus"))
    if use_dual:
        _, other = dual_complex(cc, theta)
    else:
        other = cc.complex(-theta)
    for j in range(cc.n + 1):
        a = spectral_density(laplacian(primal, j), psd=True).eigenvalues
        b = spectral_density(laplacian(other, cc.n - j), psd=True).eigenvalues
        err = float(np.abs(np.sort(a) - np.sort(b)).max()) if a.size == b.size else math.inf
        scale = max(1.0, float(np.abs(a).max(initial=0.0)))
        rep.add(f"spectrum Delta_(theta,{j}) = spectrum Delta_(-theta,{cc.n - j})", err / scale <= tol,
                err / scale, 0.0, tol)
    return rep


def metric_scaling_check(cc: CellComplex, theta: OneCocycle, c: float, tol: float = 1e-8) -> Report:
    """Rescaling lengths by ``c``: Betti numbers fixed, densities equivalent with C <= c^4."""
    rep = Report("metric_scaling_check")
    C1 = cc.complex(theta)
    C2 = cc.scaled_metric(c).complex(theta)
    bound = max(c, 1 / c) ** 4
    constants = sorted(set(DEFAULT_CONSTANTS) | set(np.geomspace(1.0, bound, 25).tolist()))
    for j in range(cc.n + 1):
        N1 = spectral_density(laplacian(C1, j), psd=True)
        N2 = spectral_density(laplacian(C2, j), psd=True)
        rep.add(f"b_{j} fixed", abs(N1.kernel_mass() - N2.kernel_mass()) <= tol,
                N2.kernel_mass(), N1.kernel_mass(), tol)
        lam0 = 2.0 * max(N1.eigenvalues.max(initial=1.0), N2.eigenvalues.max(initial=1.0))
        r1 = dilation_compare(N1, N2, lam0, constants=constants, tol=1e-9)
        r2 = dilation_compare(N2, N1, lam0, constants=constants, tol=1e-9)
        ok = r1.dominated and r2.dominated and max(r1.constant, r2.constant) <= bound * (1 + 1e-12)
        rep.add(f"N_{j} equivalent with C <= c^4", ok,
                max(r1.constant, r2.constant) if ok else None, bound)
    return rep


# ---------------------------------------------------------------------------
# vanishing and semicontinuity


def vanishing_and_semicontinuity(scan: Sequence, model, reference: Sequence[int] = (),
                                 tol: float = 1e-6) -> Report:
    """Vanishing of the extreme Betti numbers and upper semicontinuity along a scan.

    ``model`` is either a :class:`MultiplierModel` (any class gives an
    absolutely continuous spectrum, hence ``b^0 = b^n = 0``) or a callable
    ``class -> [b_0, ..., b_n]`` (cover towers, surfaces).  ``scan`` is an
    ordered list of classes along a path; ``reference`` lists the indices
    where upward jumps are allowed.
    """
    rep = Report("vanishing_and_semicontinuity")
    values = []
    for cls in scan:
        if isinstance(model, MultiplierModel):
            n = model.n
            bs = [MultiplierModel(n, cls, j, 1.0, model.fiber_dim).kernel_dim() for j in range(n + 1)]
            rep.add(f"b^0 = b^{n} = 0 at {np.round(np.atleast_1d(cls), 6).tolist()}",
                    abs(bs[0]) <= tol and abs(bs[n]) <= tol, (bs[0], bs[n]), (0.0, 0.0), tol)
        else:
            bs = list(model(cls))
        values.append(bs)
    values = np.asarray(values, dtype=float)
    jumps = []
    for i in range(len(values)):
        for j in range(values.shape[1]):
            nb = [values[k, j] for k in (i - 1, i + 1) if 0 <= k < len(values)]
            if nb and values[i, j] > max(nb) + tol:
                jumps.append((i, j))
            # upper semicontinuity: value at i >= limsup of neighbours along the path
    jump_points = sorted({i for i, _ in jumps})
    rep.add("upward jumps only at reference classes", set(jump_points) <= set(reference),
            jump_points, list(reference))
    for i in reference:
        for j in range(values.shape[1]):
            nb = [values[k, j] for k in (i - 1, i + 1) if 0 <= k < len(values)]
            if nb:
                rep.add(f"b^{j} at reference {i} >= neighbours", values[i, j] >= max(nb) - tol,
                        values[i, j], max(nb), tol)
    rep.data["values"] = values.tolist()
    rep.data["jumps"] = jump_points
    return rep
