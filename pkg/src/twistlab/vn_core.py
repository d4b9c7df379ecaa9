"""Finite von Neumann algebras, Hilbertian modules and spectral density functions.

A finite von Neumann algebra is modelled as a finite direct sum of full matrix
blocks ``M_{d_b}(C)`` with trace ``tau(a) = sum_b w_b tr(a_b) / d_b``.  For a
free module ``l2(A) (x) C^k`` the commutant in block ``b`` is ``M_{k d_b}(C)``
(acting on the right tensor factor), so every ``A``-morphism is stored as one
matrix per block.  Projective modules are carried in *reduced* coordinates:
block ``b`` of the module is the range of the projection ``p_b``, of complex
dimension ``r_b``, and morphisms are ``r_b x r_b'`` matrices in orthonormal
bases of those ranges.  The commutant trace of a reduced endomorphism is
``sum_b w_b tr(f_b) / d_b``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .validation import KERNEL_TOL, as_block_list, check_self_adjoint

DENSE_LIMIT = 20000
N_LOW = 200


# ---------------------------------------------------------------------------
# algebra


@dataclass(frozen=True)
class VNAlgebra:
    """Multi-matrix algebra ``(+)_b M_{d_b}(C)`` with normalized trace weights."""

    blocks: tuple[tuple[int, float], ...]

    def __post_init__(self):
        blocks = tuple((int(d), float(w)) for d, w in self.blocks)
        if not blocks:
            raise ValueError("algebra needs at least one block")
        for d, w in blocks:
            if d < 1 or not w > 0:
                raise ValueError(f"invalid block (dim={d}, weight={w})")
        total = sum(w for _, w in blocks)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"block weights must sum to 1, got {total!r}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def trivial(cls) -> "VNAlgebra":
        return cls(((1, 1.0),))

    @classmethod
    def matrix(cls, d: int) -> "VNAlgebra":
        """The factor ``M_d(C)``."""
        return cls(((d, 1.0),))

    @classmethod
    def cyclic_group(cls, n: int) -> "VNAlgebra":
        """Group von Neumann algebra of Z/n in its Fourier picture (n characters)."""
        return cls(tuple((1, 1.0 / n) for _ in range(n)))

    @classmethod
    def random(cls, rng: np.random.Generator, n_blocks: int | None = None,
               max_dim: int = 3) -> "VNAlgebra":
        n_blocks = n_blocks or int(rng.integers(1, 4))
        dims = rng.integers(1, max_dim + 1, size=n_blocks)
        weights = rng.dirichlet(np.ones(n_blocks))
        weights[-1] = 1.0 - weights[:-1].sum()
        return cls(tuple(zip(dims.tolist(), weights.tolist())))

    @property
    def dims(self) -> list[int]:
        return [d for d, _ in self.blocks]

    @property
    def weights(self) -> list[float]:
        return [w for _, w in self.blocks]

    @property
    def is_factor(self) -> bool:
        return len(self.blocks) == 1

    def identity(self) -> list[np.ndarray]:
        return [np.eye(d, dtype=complex) for d in self.dims]

    def random_element(self, rng: np.random.Generator) -> list[np.ndarray]:
        return [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
                for d in self.dims]

    def group_element(self, coefficients: Sequence[complex]) -> list[np.ndarray]:
        """Element ``sum_g c_g g`` of C[Z/n] in the character (block) picture."""
        n = len(self.blocks)
        if len(coefficients) != n or any(d != 1 for d in self.dims):
            raise ValueError("group_element requires the cyclic group algebra of matching order")
        c = np.asarray(coefficients, dtype=complex)
        chars = np.exp(2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
        return [np.array([[v]]) for v in chars @ c]

    def to_dict(self) -> dict:
        return {"blocks": [{"dim": d, "weight": w} for d, w in self.blocks]}

    @classmethod
    def from_dict(cls, data: dict) -> "VNAlgebra":
        return cls(tuple((b["dim"], b["weight"]) for b in data["blocks"]))


def trace_tau(algebra: VNAlgebra, a: Sequence[np.ndarray]) -> complex:
    """Normalized trace ``tau(a) = sum_b w_b tr(a_b) / d_b``."""
    a = list(a)
    if len(a) != len(algebra.blocks):
        raise ValueError(f"element has {len(a)} blocks, algebra has {len(algebra.blocks)}")
    total = 0j
    for (d, w), blk in zip(algebra.blocks, a):
        blk = np.asarray(blk)
        if blk.shape != (d, d):
            raise ValueError(f"block of shape {blk.shape} does not match dimension {d}")
        total += w * np.trace(blk) / d
    return complex(total)


# ---------------------------------------------------------------------------
# modules and morphisms


def _range_basis(p: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    vals, vecs = np.linalg.eigh(p)
    return vecs[:, vals > 0.5] if vals.size else vecs[:, :0]


class HilbertianModule:
    """Finitely generated Hilbertian module ``p (l2(A) (x) C^k)``.

    ``projection`` is ``None`` for the free module, otherwise one
    ``k d_b x k d_b`` self-adjoint idempotent per block.
    """

    def __init__(self, algebra: VNAlgebra, multiplicity: int, projection=None):
        if multiplicity < 0:
            raise ValueError("multiplicity must be nonnegative")
        self.algebra = algebra
        self.multiplicity = int(multiplicity)
        if projection is None:
            self._projection = None
            self.ranks = tuple(self.multiplicity * d for d in algebra.dims)
        else:
            blocks = as_block_list(projection, len(algebra.blocks))
            checked = []
            for d, p in zip(algebra.dims, blocks):
                n = self.multiplicity * d
                p = np.asarray(p, dtype=complex)
                if p.shape != (n, n):
                    raise ValueError(f"projection block shape {p.shape}, expected {(n, n)}")
                if n and (np.abs(p - p.conj().T).max() > 1e-12 or np.abs(p @ p - p).max() > 1e-12):
                    raise ValueError("projection must satisfy p = p* = p^2 within 1e-12")
                checked.append(p)
            self._projection = tuple(checked)
            self.ranks = tuple(int(round(np.trace(p).real)) for p in checked)
        self._basis = None
        self._amplified = None

    @property
    def projection(self):
        if self._amplified is not None and self._projection is None:
            n, base = self._amplified
            self._projection = tuple(np.kron(np.eye(n), p) for p in base.projection)
        return self._projection

    @property
    def is_free(self) -> bool:
        return self._projection is None and self._amplified is None

    @classmethod
    def free(cls, algebra: VNAlgebra, multiplicity: int) -> "HilbertianModule":
        return cls(algebra, multiplicity)

    @classmethod
    def random(cls, algebra: VNAlgebra, rng: np.random.Generator,
               multiplicity: int | None = None) -> "HilbertianModule":
        k = multiplicity or int(rng.integers(1, 4))
        proj = []
        for d in algebra.dims:
            n = k * d
            r = int(rng.integers(0, n + 1))
            q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
            v = q[:, :r]
            proj.append(v @ v.conj().T)
        return cls(algebra, k, proj)

    @property
    def basis(self) -> tuple[np.ndarray, ...]:
        """Orthonormal bases of the projection ranges (identity when free)."""
        if self._basis is None:
            if self.is_free:
                self._basis = tuple(np.eye(r, dtype=complex) for r in self.ranks)
            elif self._amplified is not None:
                n, base = self._amplified
                self._basis = tuple(np.kron(np.eye(n), v) for v in base.basis)
            else:
                self._basis = tuple(_range_basis(p) for p in self.projection)
        return self._basis

    @property
    def full_dims(self) -> tuple[int, ...]:
        return tuple(self.multiplicity * d for d in self.algebra.dims)

    def amplify(self, n: int) -> "HilbertianModule":
        """The module ``C^n (x) self`` (n copies)."""
        if self.is_free:
            return HilbertianModule(self.algebra, n * self.multiplicity)
        # projections are materialized only on demand (large grids never need them)
        out = HilbertianModule(self.algebra, 0)
        out.multiplicity = n * self.multiplicity
        out.ranks = tuple(n * r for r in self.ranks)
        out._projection = None
        out._amplified = (n, self)
        return out

    def direct_sum(self, other: "HilbertianModule") -> "HilbertianModule":
        if other.algebra != self.algebra:
            raise ValueError("modules over different algebras")
        if self.is_free and other.is_free:
            return HilbertianModule(self.algebra, self.multiplicity + other.multiplicity)
        blocks = []
        for d, p, q in zip(self.algebra.dims, self._full_projection(), other._full_projection()):
            blocks.append(scipy.linalg.block_diag(p, q))
        return HilbertianModule(self.algebra, self.multiplicity + other.multiplicity, blocks)

    def _full_projection(self):
        if self.is_free:
            return [np.eye(n, dtype=complex) for n in self.full_dims]
        return list(self.projection)

    def __eq__(self, other):
        if not isinstance(other, HilbertianModule):
            return NotImplemented
        return self.algebra == other.algebra and self.ranks == other.ranks

    def __hash__(self):
        return hash((self.algebra, self.ranks))

    def __repr__(self):
        return f"HilbertianModule(dim_tau={dim_tau(self):.6g}, ranks={self.ranks})"

    def to_dict(self) -> dict:
        data = self.algebra.to_dict()
        data["multiplicity"] = self.multiplicity
        if self.is_free:
            data["projection"] = None
        else:
            data["projection"] = [[[float(z.real), float(z.imag)] for z in p.ravel()]
                                  for p in self.projection]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "HilbertianModule":
        algebra = VNAlgebra.from_dict(data)
        k = data["multiplicity"]
        proj = data.get("projection")
        if proj is None:
            return cls(algebra, k)
        blocks = []
        for d, flat in zip(algebra.dims, proj):
            arr = np.array([complex(re, im) for re, im in flat]).reshape(k * d, k * d)
            blocks.append(arr)
        return cls(algebra, k, blocks)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "HilbertianModule":
        return cls.from_dict(json.loads(text))


def dim_tau(m: HilbertianModule) -> float:
    """von Neumann dimension ``Tr_tau(Id_m) = sum_b w_b r_b / d_b``."""
    return float(sum(w * r / d for (d, w), r in zip(m.algebra.blocks, m.ranks)))


def _adjoint(m):
    return m.conj().T


def _is_sparse(m) -> bool:
    return sp.issparse(m)


class AMap:
    """Morphism of Hilbertian modules, stored per block in reduced coordinates."""

    def __init__(self, source: HilbertianModule, target: HilbertianModule, blocks):
        if source.algebra != target.algebra:
            raise ValueError("source and target live over different algebras")
        blocks = as_block_list(blocks, len(source.algebra.blocks))
        out = []
        for rs, rt, m in zip(source.ranks, target.ranks, blocks):
            if not _is_sparse(m):
                m = np.asarray(m)
            if m.shape != (rt, rs):
                raise ValueError(f"block shape {m.shape}, expected {(rt, rs)}")
            out.append(m)
        self.source = source
        self.target = target
        self.blocks = tuple(out)

    @classmethod
    def from_full(cls, source: HilbertianModule, target: HilbertianModule, full_blocks,
                  tol: float = 1e-10) -> "AMap":
        """Build from commutant matrices on the ambient free modules.

        The matrices must be compressed by the projections: ``q f p = f``.
        """
        full_blocks = as_block_list(full_blocks, len(source.algebra.blocks))
        reduced = []
        for vs, vt, f in zip(source.basis, target.basis, full_blocks):
            f = np.asarray(f, dtype=complex)
            compressed = vt @ (vt.conj().T @ f @ vs) @ vs.conj().T
            if f.size and np.abs(compressed - f).max() > tol:
                raise ValueError("map is not compressed by the module projections")
            reduced.append(vt.conj().T @ f @ vs)
        return cls(source, target, reduced)

    @classmethod
    def zero(cls, source: HilbertianModule, target: HilbertianModule) -> "AMap":
        return cls(source, target, [np.zeros((rt, rs), dtype=complex)
                                    for rs, rt in zip(source.ranks, target.ranks)])

    @classmethod
    def identity(cls, module: HilbertianModule) -> "AMap":
        return cls(module, module, [np.eye(r, dtype=complex) for r in module.ranks])

    @classmethod
    def random(cls, source, target, rng: np.random.Generator) -> "AMap":
        return cls(source, target, [rng.standard_normal((rt, rs)) + 1j * rng.standard_normal((rt, rs))
                                    for rs, rt in zip(source.ranks, target.ranks)])

    def full_blocks(self) -> list[np.ndarray]:
        """Embed into the commutant of the ambient free modules."""
        return [vt @ _dense(m) @ vs.conj().T
                for vs, vt, m in zip(self.source.basis, self.target.basis, self.blocks)]

    @property
    def adjoint(self) -> "AMap":
        return AMap(self.target, self.source, [_adjoint(m) for m in self.blocks])

    @property
    def H(self) -> "AMap":
        return self.adjoint

    def __matmul__(self, other: "AMap") -> "AMap":
        if other.target != self.source:
            raise ValueError("composition of incompatible maps")
        return AMap(other.source, self.target, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __add__(self, other: "AMap") -> "AMap":
        _check_parallel(self, other)
        return AMap(self.source, self.target, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AMap") -> "AMap":
        _check_parallel(self, other)
        return AMap(self.source, self.target, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, c: complex) -> "AMap":
        return AMap(self.source, self.target, [c * a for a in self.blocks])

    __rmul__ = __mul__

    def norm(self) -> float:
        """Largest absolute entry over all blocks (cheap sup-type norm)."""
        vals = [abs(m).max() if m.shape[0] and m.shape[1] else 0.0 for m in self.blocks]
        return float(max(vals, default=0.0))

    def op_norm(self) -> float:
        vals = [np.linalg.norm(_dense(m), 2) if min(m.shape) else 0.0 for m in self.blocks]
        return float(max(vals, default=0.0))

    def is_self_adjoint(self, tol: float = 1e-10) -> bool:
        if self.source != self.target:
            return False
        return all(_max_abs(m - _adjoint(m)) <= tol for m in self.blocks)

    def to_dict(self) -> dict:
        return {"source": self.source.to_dict(), "target": self.target.to_dict(),
                "blocks": [[[float(z.real), float(z.imag)] for z in _dense(m).ravel()]
                           for m in self.blocks]}

    @classmethod
    def from_dict(cls, data: dict) -> "AMap":
        source = HilbertianModule.from_dict(data["source"])
        target = HilbertianModule.from_dict(data["target"])
        blocks = []
        for rs, rt, flat in zip(source.ranks, target.ranks, data["blocks"]):
            blocks.append(np.array([complex(a, b) for a, b in flat], dtype=complex).reshape(rt, rs))
        return cls(source, target, blocks)


AEndomorphism = AMap


def _check_parallel(a: AMap, b: AMap):
    if a.source != b.source or a.target != b.target:
        raise ValueError("maps have different source/target")


def _dense(m) -> np.ndarray:
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def _max_abs(m) -> float:
    if sp.issparse(m):
        return float(abs(m).max()) if m.nnz else 0.0
    return float(np.abs(m).max()) if m.size else 0.0


def commutant_trace(f: AMap) -> complex:
    """``Tr_tau(f) = sum_i tau(f_ii)``, evaluated blockwise."""
    if f.source != f.target:
        raise ValueError("commutant trace needs an endomorphism")
    total = 0j
    for (d, w), m in zip(f.source.algebra.blocks, f.blocks):
        total += w * m.diagonal().sum() / d
    return complex(total)


def commutant_trace_full(module: HilbertianModule, full_blocks, tol: float = 1e-10) -> complex:
    """Trace of a commutant element given on the ambient free module.

    Rejects matrices that are not compressed by the module projection.
    """
    return commutant_trace(AMap.from_full(module, module, full_blocks, tol=tol))


# ---------------------------------------------------------------------------
# spectral density functions


class SpectralDensity:
    """Right-continuous nondecreasing function ``lambda -> N(lambda)``."""

    #: total mass ``N(+inf)``; ``None`` when unknown/infinite
    total: float | None = None

    def __call__(self, lam):
        raise NotImplementedError

    def kernel_mass(self, tol: float = KERNEL_TOL) -> float:
        return float(self(tol))

    def gap(self, tol: float = KERNEL_TOL) -> float:
        """Smallest spectral value strictly above the kernel threshold."""
        raise NotImplementedError

    def to_csv(self, lams) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["lambda", "N"])
        for lam, val in zip(lams, np.atleast_1d(self(np.asarray(lams, dtype=float)))):
            writer.writerow([repr(float(lam)), repr(float(val))])
        return buf.getvalue()


class StepDensity(SpectralDensity):
    """Step density from eigenvalues with commutant-trace weights.

    ``complete=False`` marks a truncated eigenvalue list: values are exact
    only below ``valid_below``.
    """

    def __init__(self, eigenvalues, weights, complete: bool = True,
                 valid_below: float = math.inf):
        ev = np.asarray(eigenvalues, dtype=float).ravel()
        wt = np.broadcast_to(np.asarray(weights, dtype=float), ev.shape).copy()
        order = np.argsort(ev, kind="stable")
        self.eigenvalues = ev[order]
        self.weights = wt[order]
        self._cum = np.cumsum(self.weights)
        self.complete = complete
        self.valid_below = valid_below if not complete else math.inf
        self.total = float(self._cum[-1]) if (complete and ev.size) else (0.0 if complete else None)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        idx = np.searchsorted(self.eigenvalues, lam, side="right")
        cum = np.concatenate([[0.0], self._cum])
        out = cum[idx]
        return float(out) if out.ndim == 0 else out

    @property
    def jumps(self) -> list[tuple[float, float]]:
        """Sorted (lambda, cumulative trace) pairs at distinct jump points."""
        if not self.eigenvalues.size:
            return []
        lam, idx = np.unique(self.eigenvalues, return_index=True)
        last = np.r_[idx[1:], self.eigenvalues.size] - 1
        return list(zip(lam.tolist(), self._cum[last].tolist()))

    def gap(self, tol: float = KERNEL_TOL) -> float:
        above = self.eigenvalues[self.eigenvalues > tol]
        if above.size:
            return float(above[0])
        return self.valid_below if not self.complete else math.inf

    def __add__(self, other: "StepDensity") -> "StepDensity":
        return StepDensity(np.r_[self.eigenvalues, other.eigenvalues],
                           np.r_[self.weights, other.weights],
                           complete=self.complete and other.complete,
                           valid_below=min(self.valid_below, other.valid_below))

    def scaled(self, c: float) -> "StepDensity":
        """Density of ``c * f`` for ``c > 0``."""
        return StepDensity(c * self.eigenvalues, self.weights, self.complete, c * self.valid_below)

    def theta(self, t, tol: float = KERNEL_TOL):
        t = np.asarray(t, dtype=float)
        mask = self.eigenvalues > tol
        ev, wt = self.eigenvalues[mask], self.weights[mask]
        out = np.exp(-np.multiply.outer(t, ev)) @ wt
        return float(out) if out.ndim == 0 else out


class PowerLawDensity(SpectralDensity):
    """``N(lambda) = jump0 + coef * (lambda - gap)_+^power`` (``jump0`` sits at 0)."""

    def __init__(self, coef: float, power: float, gap: float = 0.0, jump0: float = 0.0):
        if coef < 0 or power <= 0 or gap < 0:
            raise ValueError("invalid power-law parameters")
        self.coef, self.power, self.gap_value, self.jump0 = coef, power, gap, jump0
        self.total = None

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.where(lam >= 0, self.jump0, 0.0) \
            + self.coef * np.clip(lam - self.gap_value, 0.0, None) ** self.power
        return float(out) if out.ndim == 0 else out

    def gap(self, tol: float = KERNEL_TOL) -> float:
        return self.gap_value

    def kernel_mass(self, tol: float = KERNEL_TOL) -> float:
        return float(self.jump0)

    def theta(self, t, tol: float = KERNEL_TOL):
        t = np.asarray(t, dtype=float)
        out = self.coef * math.gamma(self.power + 1) * np.exp(-t * self.gap_value) * t ** (-self.power)
        return float(out) if out.ndim == 0 else out


class ClosedFormDensity(SpectralDensity):
    """Density from an arbitrary callable; theta by numerical Stieltjes integration."""

    def __init__(self, func: Callable, gap: float = 0.0, jump0: float = 0.0):
        self.func, self.gap_value, self.jump0 = func, gap, jump0
        self.total = None

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.where(lam >= 0, self.jump0, 0.0) + np.where(lam >= 0, self.func(np.clip(lam, 0, None)), 0.0)
        return float(out) if out.ndim == 0 else out

    def gap(self, tol: float = KERNEL_TOL) -> float:
        return self.gap_value

    def kernel_mass(self, tol: float = KERNEL_TOL) -> float:
        return float(self.jump0)

    def theta(self, t, tol: float = KERNEL_TOL):
        from scipy.integrate import quad

        def one(tt):
            # integrate by parts: int e^{-t l} dN = t int e^{-t l} (N(l) - N(0)) dl
            base = float(self(tol))
            val, _ = quad(lambda l: math.exp(-tt * l) * (float(self(l)) - base), tol, math.inf, limit=200)
            return tt * val

        t = np.asarray(t, dtype=float)
        out = np.vectorize(one)(t)
        return float(out) if out.ndim == 0 else out


def block_eigvalsh(m, dense_limit: int = DENSE_LIMIT, n_low: int = N_LOW,
                   psd: bool = False) -> tuple[np.ndarray, bool, float]:
    """Eigenvalues of a Hermitian block.

    Dense decomposition up to ``dense_limit`` rows.  Larger positive
    semidefinite blocks fall back to shift-invert Lanczos for the lowest
    ``n_low`` eigenvalues; the returned tuple is ``(values, complete,
    valid_below)``.
    """
    n = m.shape[0]
    if n == 0:
        return np.zeros(0), True, math.inf
    if n <= dense_limit:
        return scipy.linalg.eigvalsh(_dense(m)), True, math.inf
    if not psd:
        raise ValueError(f"block of {n} rows exceeds the dense limit {dense_limit}")
    k = min(n_low, n - 2)
    vals = spla.eigsh(sp.csc_matrix(m), k=k, sigma=-1e-6, which="LM",
                      return_eigenvectors=False)
    vals = np.sort(vals)
    return vals, False, float(vals[-1])


def spectral_density(f: AMap, dense_limit: int = DENSE_LIMIT, n_low: int = N_LOW,
                     psd: bool = False) -> StepDensity:
    """``N(lambda) = Tr_tau(E_lambda)`` of a self-adjoint endomorphism."""
    if f.source != f.target:
        raise ValueError("spectral density needs an endomorphism")
    for m in f.blocks:
        check_self_adjoint(m)
    evs, wts = [], []
    complete, valid = True, math.inf
    for (d, w), m in zip(f.source.algebra.blocks, f.blocks):
        vals, comp, vb = block_eigvalsh(m, dense_limit, n_low, psd)
        evs.append(vals)
        wts.append(np.full(vals.shape, w / d))
        complete &= comp
        valid = min(valid, vb)
    ev = np.concatenate(evs) if evs else np.zeros(0)
    wt = np.concatenate(wts) if wts else np.zeros(0)
    return StepDensity(ev, wt, complete=complete, valid_below=valid)


# ---------------------------------------------------------------------------
# dilatational comparison


@dataclass(frozen=True)
class DilationReport:
    dominated: bool
    constant: float | None
    lam0: float
    n_samples: int
    constants_tried: int = field(default=0)


DEFAULT_CONSTANTS = tuple(2.0 ** k for k in range(21))


def dilation_compare(F: SpectralDensity, G: SpectralDensity, lam0: float,
                     lam_min: float | None = None, n_samples: int = 400,
                     constants: Sequence[float] = DEFAULT_CONSTANTS,
                     tol: float = 1e-12) -> DilationReport:
    """Decide ``F <<= G``: smallest sampled ``C`` with ``F(l) <= G(C l)`` on ``(0, lam0)``.

    The sample grid is geometric on ``[lam_min, lam0)``; ``lam_min`` defaults
    to ``lam0 * 2**-40`` so the comparison probes well below any constant's reach.
    """
    if not lam0 > 0:
        raise ValueError("empty sample range: lam0 must be positive")
    lam_min = lam0 * 2.0 ** -40 if lam_min is None else lam_min
    if not 0 < lam_min < lam0:
        raise ValueError("empty sample range")
    grid = np.geomspace(lam_min, lam0, n_samples, endpoint=False)
    f_vals = np.asarray(F(grid), dtype=float)
    for i, c in enumerate(sorted(constants)):
        if np.all(f_vals <= np.asarray(G(c * grid), dtype=float) + tol):
            return DilationReport(True, float(c), lam0, n_samples, i + 1)
    return DilationReport(False, None, lam0, n_samples, len(constants))


def dilation_equivalent(F: SpectralDensity, G: SpectralDensity, lam0: float, **kw) -> bool:
    return dilation_compare(F, G, lam0, **kw).dominated and dilation_compare(G, F, lam0, **kw).dominated
