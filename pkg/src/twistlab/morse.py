"""Morse 1-forms, the harmonic-oscillator model operator and Witten deformation sweeps."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from sklearn.base import BaseEstimator

from .complex_core import ExtendedClass, laplacian
from .geometry import CellComplex, FlatTorusGrid, OneCocycle, TriangulatedSurface
from .report import Report
from .validation import KERNEL_TOL, check_is_fitted
from .vn_core import HilbertianModule, VNAlgebra, dim_tau

DET_TOL = 1e-8


class NotMorseError(ValueError):
    """Raised for degenerate zeros."""


# ---------------------------------------------------------------------------
# analytic 1-forms on T^n


@dataclass(frozen=True)
class TrigTerm:
    coef: float
    kind: str  # "cos" or "sin"
    k: tuple[int, ...]


class MorseOneForm:
    """``theta = sum_i c_i dx_i + df`` on ``R^n / Z^n`` with trigonometric ``f``.

    ``f(x) = sum coef * cos|sin(2 pi k.x)``.
    """

    def __init__(self, periods: Sequence[float], terms: Sequence[TrigTerm | dict | tuple] = ()):
        self.periods = np.asarray(periods, dtype=float).ravel()
        self.n = self.periods.size
        if self.n not in (1, 2, 3):
            raise ValueError("forms are supported on T^1, T^2, T^3")
        parsed = []
        for t in terms:
            if isinstance(t, dict):
                t = TrigTerm(float(t["coef"]), t["kind"], tuple(int(v) for v in t["k"]))
            elif not isinstance(t, TrigTerm):
                t = TrigTerm(float(t[0]), t[1], tuple(int(v) for v in t[2]))
            if t.kind not in ("cos", "sin") or len(t.k) != self.n:
                raise ValueError(f"bad trigonometric term {t}")
            parsed.append(t)
        self.terms = tuple(parsed)
        self._K = np.array([t.k for t in self.terms], dtype=float).reshape(-1, self.n)
        self._a = np.array([t.coef if t.kind == "cos" else 0.0 for t in self.terms])
        self._b = np.array([t.coef if t.kind == "sin" else 0.0 for t in self.terms])

    # f = sum a cos(2pi k.x) + b sin(2pi k.x)
    def primitive(self, x) -> np.ndarray:
        """Exact part ``f`` (the multivalued harmonic part is not included)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ph = 2 * np.pi * x @ self._K.T
        return np.cos(ph) @ self._a + np.sin(ph) @ self._b

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ph = 2 * np.pi * x @ self._K.T
        g = (-np.sin(ph) * self._a + np.cos(ph) * self._b) @ (2 * np.pi * self._K)
        return self.periods[None, :] + g

    def jacobian(self, x) -> np.ndarray:
        """``d theta_j / d x_i`` at one point (the Hessian of a local primitive)."""
        x = np.asarray(x, dtype=float).ravel()
        ph = 2 * np.pi * self._K @ x
        w = -(np.cos(ph) * self._a + np.sin(ph) * self._b) * (2 * np.pi) ** 2
        return (self._K.T * w) @ self._K

    def closedness_error(self, points) -> float:
        """Asymmetry of the Jacobian, via central differences of the components."""
        err = 0.0
        h = 1e-6
        for x in np.atleast_2d(points):
            J = np.zeros((self.n, self.n))
            for i in range(self.n):
                e = np.zeros(self.n)
                e[i] = h
                J[i] = (self(x + e)[0] - self(x - e)[0]) / (2 * h)
            err = max(err, float(np.abs(J - J.T).max()))
        return err

    def scaled(self, s: float) -> "MorseOneForm":
        return MorseOneForm(s * self.periods, [TrigTerm(s * t.coef, t.kind, t.k) for t in self.terms])

    def __add__(self, other: "MorseOneForm") -> "MorseOneForm":
        return MorseOneForm(self.periods + other.periods, self.terms + other.terms)

    def cocycle(self, cc: CellComplex) -> OneCocycle:
        """Edge integrals on a flat torus grid (exact for the harmonic and exact parts)."""
        if cc.coords is None or cc.coords.shape[1] != self.n:
            raise ValueError("form and grid dimensions differ")
        f = self.primitive(cc.coords)
        # harmonic part: constant covector times the (periodically unwrapped) edge vector
        vec = cc.coords[cc.edges[:, 1]] - cc.coords[cc.edges[:, 0]]
        vec -= np.round(vec)
        vals = vec @ self.periods + f[cc.edges[:, 1]] - f[cc.edges[:, 0]]
        return OneCocycle(cc, vals)

    def to_dict(self) -> dict:
        return {"periods": self.periods.tolist(),
                "primitive": {"terms": [{"coef": t.coef, "kind": t.kind, "k": list(t.k)}
                                        for t in self.terms]}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "MorseOneForm":
        return cls(data["periods"], data.get("primitive", {}).get("terms", []))

    @classmethod
    def from_json(cls, text: str) -> "MorseOneForm":
        return cls.from_dict(json.loads(text))


def cos_cos_form() -> MorseOneForm:
    """``d(cos 2 pi x + cos 2 pi y)`` on the 2-torus."""
    return MorseOneForm([0.0, 0.0], [TrigTerm(1.0, "cos", (1, 0)), TrigTerm(1.0, "cos", (0, 1))])


# ---------------------------------------------------------------------------
# zeros and Morse data


@dataclass(frozen=True)
class Zero:
    location: tuple[float, ...]
    index: int
    hessian: tuple[float, ...]


@dataclass
class MorseData:
    n: int
    zeros: list[Zero]

    @property
    def morse_numbers(self) -> list[int]:
        m = [0] * (self.n + 1)
        for z in self.zeros:
            m[z.index] += 1
        return m

    @property
    def euler_sum(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.morse_numbers))

    def to_dict(self) -> dict:
        return {"n": self.n, "morse_numbers": self.morse_numbers,
                "zeros": [{"location": list(z.location), "index": z.index,
                           "hessian": list(z.hessian)} for z in self.zeros]}


def _torus_dist(a, b) -> float:
    d = np.asarray(a) - np.asarray(b)
    d -= np.round(d)
    return float(np.linalg.norm(d))


def find_zeros(theta: MorseOneForm, seeds: int = 12, tol: float = 1e-12, max_iter: int = 50,
               dedup: float = 1e-6) -> MorseData:
    """Newton iteration from a ``seeds^n`` grid; indices from the local Hessian."""
    n = theta.n
    axes = [np.arange(seeds) / seeds + 0.5 / seeds] * n
    starts = np.array(list(itertools.product(*axes)))
    found: list[np.ndarray] = []
    for x in starts:
        x = x.copy()
        for _ in range(max_iter):
            g = theta(x)[0]
            if np.linalg.norm(g) < tol:
                break
            J = theta.jacobian(x)
            step = np.linalg.lstsq(J, g, rcond=None)[0]
            # damped step keeps Newton from jumping across the torus
            nrm = np.linalg.norm(step)
            if nrm > 0.1:
                step *= 0.1 / nrm
            x = x - step
        if np.linalg.norm(theta(x)[0]) < 1e-10:
            x = x % 1.0
            x[(x > 1.0 - 1e-12) | (x < 1e-12)] = 0.0
            if all(_torus_dist(x, y) > dedup for y in found):
                found.append(x)
    zeros = []
    for x in sorted(found, key=lambda v: tuple(np.round(v, 9))):
        H = theta.jacobian(x)
        if abs(np.linalg.det(H)) <= DET_TOL:
            raise NotMorseError(f"not a Morse form: degenerate zero at {np.round(x, 9).tolist()}")
        eig = np.linalg.eigvalsh((H + H.T) / 2)
        zeros.append(Zero(tuple(float(v) for v in x), int(np.sum(eig < 0)), tuple(float(v) for v in eig)))
    return MorseData(n, zeros)


@dataclass(frozen=True)
class LocalForm:
    """Quadratic model ``sum_i a_i u_i du_i`` on a chart of ``R^n``."""

    hessian: tuple[float, ...]

    def __call__(self, u) -> np.ndarray:
        return np.atleast_2d(u) * np.asarray(self.hessian)

    def zeros(self) -> MorseData:
        a = np.asarray(self.hessian)
        if abs(np.prod(a)) <= DET_TOL:
            raise NotMorseError("not a Morse form: degenerate quadratic model")
        return MorseData(a.size, [Zero((0.0,) * a.size, int(np.sum(a < 0)), tuple(float(v) for v in np.sort(a)))])


def normal_form_sample(k: int, n: int) -> LocalForm:
    """``-sum_{j<=k} u_j du_j + sum_{j>k} u_j du_j`` (unique zero of index k)."""
    if not 0 <= k <= n:
        raise ValueError(f"index {k} outside 0..{n}")
    return LocalForm(tuple([-1.0] * k + [1.0] * (n - k)))


def perturb_to_morse(theta: MorseOneForm, rng: np.random.Generator, scale: float = 1e-3,
                     attempts: int = 20) -> tuple[MorseOneForm, MorseData]:
    """Add a small random harmonic + exact term until every zero is nondegenerate."""
    for _ in range(attempts):
        extra = MorseOneForm(scale * rng.standard_normal(theta.n),
                             [TrigTerm(scale * rng.standard_normal(), kind, k)
                              for kind in ("cos", "sin")
                              for k in itertools.product((0, 1), repeat=theta.n) if any(k)])
        cand = theta + extra
        try:
            return cand, find_zeros(cand)
        except NotMorseError:
            continue
    raise NotMorseError("no nondegenerate perturbation found")


# ---------------------------------------------------------------------------
# model operator


@dataclass
class ModelOperator:
    """Direct sum over zeros of quadratic oscillator models, tensored with the fiber."""

    hessians: list[tuple[float, ...]]
    dim_E: float = 1.0

    def __post_init__(self):
        for a in self.hessians:
            if any(abs(v) <= DET_TOL for v in a) or abs(np.prod(a)) <= DET_TOL:
                raise NotMorseError("not a Morse form: degenerate Hessian in model data")

    @classmethod
    def from_morse_data(cls, data: MorseData, dim_E: float = 1.0) -> "ModelOperator":
        return cls([z.hessian for z in data.zeros], dim_E)

    @property
    def n(self) -> int:
        return len(self.hessians[0]) if self.hessians else 0

    def smallest_nonzero(self, tol: float = 1e-9) -> float:
        best = math.inf
        for j in range(self.n + 1):
            for lam, _ in model_spectrum(self, j, 4):
                if lam > tol:
                    best = min(best, lam)
                    break
        return best


def _zero_spectrum(a: np.ndarray, j: int, cap: float) -> list[float]:
    out = []
    n = a.size
    absa = np.abs(a)
    for S in itertools.combinations(range(n), j):
        shift = sum(a[i] for i in S) - sum(a[i] for i in range(n) if i not in S)
        base = absa.sum() + shift
        if base > cap:
            continue
        limits = [int((cap - base) / (2 * absa[i])) for i in range(n)]
        for nu in itertools.product(*[range(l + 1) for l in limits]):
            val = base + 2 * float(np.dot(absa, nu))
            if val <= cap:
                out.append(val)
    return out


def model_spectrum(m: ModelOperator, j: int, count: int = 20, rtol: float = 1e-9) -> list[tuple[float, float]]:
    """Lowest ``count`` eigenvalues of ``K_(j)`` with trace multiplicities.

    Per zero with Hessian eigenvalues ``a``: ``sum |a_i|(1 + 2 nu_i) + sum_{S} a_i
    - sum_{not S} a_i`` over ``nu in N^n`` and ``|S| = j``.
    """
    if not 0 <= j <= max(m.n, 0):
        raise ValueError(f"degree {j} outside 0..{m.n}")
    if not m.hessians:
        return []
    vals: list[float] = []
    cap = max(sum(abs(v) for v in a) for a in m.hessians) * 2
    while True:
        vals = []
        for a in m.hessians:
            vals += _zero_spectrum(np.asarray(a, dtype=float), j, cap)
        if len(vals) >= count:
            break
        cap *= 2
    vals.sort()
    # distinct values below the cap are complete; keep the lowest ``count`` (with multiplicity)
    vals = vals[:count]
    out: list[list[float]] = []
    for v in vals:
        if out and abs(v - out[-1][0]) <= rtol * max(1.0, abs(v)):
            out[-1][1] += m.dim_E
        else:
            out.append([v, m.dim_E])
    return [(float(a), float(b)) for a, b in out]


def model_eigenvalues(m: ModelOperator, j: int, count: int = 20) -> np.ndarray:
    """Lowest ``count`` values of ``K_(j)`` repeated by (scalar) multiplicity."""
    out = []
    for v, mult in model_spectrum(m, j, count):
        out += [v] * int(round(mult / m.dim_E))
    return np.asarray(out[:count])


def oscillator_1d(a: float, sign: float, n_levels: int, half_width: float = 12.0,
                  points: int = 256) -> np.ndarray:
    """Fourier pseudospectral eigenvalues of ``-d^2/du^2 + a^2 u^2 + sign*a`` on a periodic box."""
    L = 2 * half_width
    u = -half_width + L * np.arange(points) / points
    k = 2 * np.pi * np.fft.fftfreq(points, d=L / points)
    F = np.fft.fft(np.eye(points), axis=0)
    D2 = np.real(np.fft.ifft(-(k ** 2)[:, None] * F, axis=0))
    H = -D2 + np.diag(a * a * u * u + sign * a)
    H = (H + H.T) / 2
    return np.linalg.eigvalsh(H)[:n_levels]


def oscillator_oracle(hessian: Sequence[float], j: int, count: int = 20, **kw) -> np.ndarray:
    """Numerical spectrum of the degree-j model at one zero from 1-D box diagonalizations."""
    a = np.asarray(hessian, dtype=float)
    n = a.size
    levels = count + 2
    one_d = {(i, s): oscillator_1d(a[i], s, levels, **kw) for i in range(n) for s in (1.0, -1.0)}
    vals = []
    for S in itertools.combinations(range(n), j):
        lists = [one_d[(i, 1.0 if i in S else -1.0)] for i in range(n)]
        acc = np.zeros(1)
        for lst in lists:
            acc = np.sort(np.add.outer(acc, lst).ravel())[:levels * 4]
        vals.append(acc)
    return np.sort(np.concatenate(vals))[:count]


def model_kernel_trace(m: ModelOperator, j: int, tol: float = 1e-9) -> float:
    return float(sum(mult for v, mult in model_spectrum(m, j, 4 * max(1, len(m.hessians))) if abs(v) <= tol))


# ---------------------------------------------------------------------------
# Witten sweep


def _count_small(op, eps: float, k0: int) -> tuple[int, float]:
    """Number of eigenvalues in ``[0, eps]`` and the next eigenvalue."""
    n = op.shape[0]
    if n <= 600:
        v = np.linalg.eigvalsh(op.toarray() if sp.issparse(op) else op)
        c = int(np.sum(v <= eps))
        return c, float(v[c]) if c < n else math.inf
    a = sp.csc_matrix(op)
    k = min(k0, n - 2)
    while True:
        v = np.sort(spla.eigsh(a, k=k, sigma=-1e-3, which="LM", return_eigenvectors=False).real)
        if v[-1] > eps or k >= n - 2:
            break
        k = min(2 * k, n - 2)
    c = int(np.sum(v <= eps))
    return c, float(v[c]) if c < v.size else math.inf


def geometric_s_grid(s0: float, s1: float, ratio: float = 1.5) -> np.ndarray:
    n = int(math.floor(math.log(s1 / s0) / math.log(ratio))) + 1
    return s0 * ratio ** np.arange(n)


class WittenSweep(BaseEstimator):
    """Small-eigenvalue counts of ``(1/s) Delta_{s theta, j}`` on a flat torus grid.

    ``fit(theta)`` takes a :class:`MorseOneForm`.  ``epsilon=None`` uses 0.4
    times the smallest nonzero model eigenvalue; values above half of it are
    refused.  Counts are trace-weighted by the fiber (trivial local system on
    the fiber, so every block has the same spectrum).
    """

    def __init__(self, s_values=None, epsilon: float | None = None, resolution: int = 48,
                 fiber_dim: float = 1.0, stable_run: int = 3, extra: int = 6):
        self.s_values = s_values
        self.epsilon = epsilon
        self.resolution = resolution
        self.fiber_dim = fiber_dim
        self.stable_run = stable_run
        self.extra = extra

    def fit(self, theta: MorseOneForm, y=None):
        s_values = geometric_s_grid(2.0, 200.0) if self.s_values is None else np.asarray(self.s_values, float)
        if np.any(np.diff(s_values) <= 0) or np.any(s_values <= 0):
            raise ValueError("s values must be positive and increasing")
        data = find_zeros(theta)
        self.morse_data_ = data
        self.morse_numbers_ = data.morse_numbers
        model = ModelOperator.from_morse_data(data, self.fiber_dim)
        self.model_gap_ = model.smallest_nonzero() if data.zeros else math.inf
        if self.epsilon is None:
            if not math.isfinite(self.model_gap_):
                raise ValueError("no zeros: epsilon must be given explicitly")
            eps = 0.4 * self.model_gap_
        else:
            eps = float(self.epsilon)
            if eps > 0.5 * self.model_gap_:
                raise ValueError(f"epsilon {eps:g} exceeds half the model gap {self.model_gap_:g}")
        self.epsilon_ = eps
        n = theta.n
        cc = FlatTorusGrid(n, self.resolution).cell_complex()
        cocycle = theta.cocycle(cc)
        counts = np.zeros((len(s_values), n + 1))
        ratios = np.zeros((len(s_values), n + 1))
        for i, s in enumerate(s_values):
            C = cc.complex(cocycle, None, float(s))
            for j in range(n + 1):
                op = laplacian(C, j).blocks[0] / s
                c, nxt = _count_small(op, eps, self.morse_numbers_[j] + self.extra)
                counts[i, j] = c * self.fiber_dim
                ratios[i, j] = nxt / eps
        self.s_values_ = s_values
        self.counts_ = counts
        self.gap_ratios_ = ratios
        target = np.asarray(self.morse_numbers_, dtype=float) * self.fiber_dim
        hit = np.all(np.abs(counts - target) <= 1e-9, axis=1)
        self.s_star_ = None
        for i in range(len(s_values) - self.stable_run + 1):
            if hit[i:].all() and len(hit[i:]) >= self.stable_run:
                self.s_star_ = float(s_values[i])
                break
        self.stable_ = self.s_star_ is not None
        return self

    def stable_decades(self) -> float:
        check_is_fitted(self, "stable_")
        if not self.stable_:
            return 0.0
        return float(math.log10(self.s_values_[-1] / self.s_star_))

    def to_csv(self) -> str:
        check_is_fitted(self, "counts_")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "j", "count", "gap_ratio"])
        for i, s in enumerate(self.s_values_):
            for j in range(self.counts_.shape[1]):
                w.writerow([repr(float(s)), j, repr(float(self.counts_[i, j])),
                            repr(float(self.gap_ratios_[i, j]))])
        return buf.getvalue()


def witten_sweep(theta: MorseOneForm, s_values=None, epsilon=None, resolution: int = 48,
                 fiber_dim: float = 1.0) -> WittenSweep:
    return WittenSweep(s_values, epsilon, resolution, fiber_dim).fit(theta)


# ---------------------------------------------------------------------------
# inequality checkers


def _alt(v, k):
    return sum((-1) ** (k - j) * v[j] for j in range(k + 1))


def strong_morse_check(b, m, dim_E: float = 1.0, tol: float = 1e-8) -> Report:
    """``dim_E^-1 sum_{j<=k} (-1)^{k-j} b_j <= sum_{j<=k} (-1)^{k-j} m_j``, equality at top."""
    rep = Report("strong_morse_check")
    b = [x / dim_E for x in b]
    n = len(m) - 1
    if len(b) != len(m):
        raise ValueError("Betti and Morse lists differ in length")
    for k in range(n + 1):
        lhs, rhs = _alt(b, k), _alt(m, k)
        if k == n:
            rep.add(f"k={k} (equality)", abs(lhs - rhs) <= tol, lhs, rhs, tol)
        else:
            rep.add(f"k={k}", lhs <= rhs + tol, lhs, rhs, tol)
    return rep


def asymptotic_morse_check(betti_of_s: Callable[[float], Sequence[float]], m, s_values,
                           dim_E: float = 1.0, tol: float = 1e-8) -> Report:
    """Strong inequalities for ``b(s theta)`` over a tail of s values; reports the onset s*."""
    rep = Report("asymptotic_morse_check")
    onset = None
    ok_run = []
    for s in s_values:
        sub = strong_morse_check(betti_of_s(float(s)), m, dim_E, tol)
        ok_run.append(sub.passed)
        rep.extend(sub, prefix=f"s={float(s):g} ")
    for i in range(len(ok_run)):
        if all(ok_run[i:]):
            onset = float(s_values[i])
            break
    rep.data["onset"] = onset
    return rep


def euler_morse_check(b, m, chi: int, dim_E: float = 1.0, tol: float = 1e-6) -> Report:
    rep = Report("euler_morse_check")
    lhs = sum((-1) ** j * x for j, x in enumerate(b)) / dim_E
    rhs = sum((-1) ** j * x for j, x in enumerate(m))
    rep.add("dim_E^-1 sum (-1)^j b_j = chi", abs(lhs - chi) <= tol, lhs, chi, tol)
    rep.add("sum (-1)^j m_j = chi", abs(rhs - chi) <= tol, rhs, chi, tol)
    return rep


def gap_report(lambda0s, m, extended: Sequence[ExtendedClass | float], dim_E: float = 1.0,
               free_fiber: bool = True, threshold: float = KERNEL_TOL) -> Report:
    """Lower bounds on Morse numbers from gap data and extended cohomology, per degree.

    * no gap at zero (``lambda_0 <= threshold``): ``m_j > 0`` and, for free
      fibers, the strict bound ``m_j >= floor(b_j / dim_E) + 1``;
    * gap with ``b_j > 0``: the projective bound ``m_j >= ceil(b_j / dim_E)``;
    * gap with ``b_j = 0``: no conclusion.
    """
    rep = Report("gap_report")
    m = m.morse_numbers if isinstance(m, MorseData) else list(m)
    bounds = []
    for j, lam in enumerate(lambda0s):
        e = extended[j]
        b = e.projective_dim if isinstance(e, ExtendedClass) else float(e)
        ratio = b / dim_E
        if lam <= threshold:
            bound = math.floor(ratio + 1e-9) + 1 if free_fiber else 1
            rep.add(f"degree {j}: no gap => m_{j} >= {bound}", m[j] >= bound, m[j], bound,
                    note="no gap at zero")
        elif ratio > 1e-9:
            bound = math.ceil(ratio - 1e-9)
            rep.add(f"degree {j}: m_{j} >= {bound}", m[j] >= bound, m[j], bound,
                    note="projective part")
        else:
            bound = None
            rep.add(f"degree {j}: no conclusion", True, m[j], None, note="no conclusion")
        bounds.append(bound)
    rep.data["bounds"] = bounds
    return rep


# ---------------------------------------------------------------------------
# piecewise-linear Morse data on triangulated surfaces


def _vertex_links(surface: TriangulatedSurface) -> list[list[int]]:
    """Cyclic (CCW) neighbour order around each vertex."""
    nxt: list[dict[int, int]] = [dict() for _ in range(surface.n_vertices)]
    for a, b, c in surface.faces:
        nxt[a][b] = c
        nxt[b][c] = a
        nxt[c][a] = b
    links = []
    for v in range(surface.n_vertices):
        succ = nxt[v]
        start = min(succ)
        cyc, cur = [start], succ[start]
        while cur != start:
            cyc.append(cur)
            cur = succ[cur]
        if len(cyc) != len(succ):
            raise ValueError(f"link of vertex {v} is not a single cycle")
        links.append(cyc)
    return links


def pl_morse_data(surface: TriangulatedSurface, theta: OneCocycle, tol: float = 1e-12) -> list[int]:
    """Morse numbers of a generic closed 1-cocycle read from sign changes in vertex links.

    All outgoing values positive: local minimum of the primitive (index 0);
    all negative: maximum (index 2); ``2k >= 4`` sign changes: a saddle of
    multiplicity ``k - 1``.
    """
    cc_edges = surface.edge_index
    m = [0, 0, 0]
    for v, link in enumerate(_vertex_links(surface)):
        vals = []
        for w in link:
            e = cc_edges[(min(v, w), max(v, w))]
            vals.append(theta.values[e] if v < w else -theta.values[e])
        vals = np.real(np.asarray(vals))
        if np.any(np.abs(vals) <= tol):
            raise NotMorseError(f"cocycle vanishes on an edge at vertex {v}; perturb it")
        signs = np.sign(vals)
        changes = int(np.sum(signs != np.roll(signs, 1)))
        if changes == 0:
            m[0 if signs[0] > 0 else 2] += 1
        else:
            m[1] += changes // 2 - 1
    return m


def genus2_morse_form(seed: int = 7):
    """Bundled generic closed 1-form on the genus-2 surface and its PL Morse numbers."""
    from .geometry import genus_surface, harmonic_twist

    surface = genus_surface(2)
    cc = surface.cell_complex()
    rng = np.random.default_rng(seed)
    coords = np.array([0.83, -0.41, 0.57, 0.29])
    theta = harmonic_twist(cc, coords)
    h = 1e-3 * rng.standard_normal(cc.n_vertices)
    theta = theta + OneCocycle.exact(cc, h)
    theta = OneCocycle(cc, theta.values)
    return surface, theta, pl_morse_data(surface, theta)
