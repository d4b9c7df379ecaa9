"""Cell complexes of flat tori and triangulated surfaces with twisted (local-system) coboundaries.

Cochains live on oriented cells.  A closed 1-cocycle ``theta`` defines a flat
local system with holonomy ``exp(-theta)`` along edges; inside any cell it has
a local primitive ``h`` (walk the boundary cycle from a base vertex) and each
cell carries the frame value "mean of its vertices' primitive values".  The
twisted coboundary weight of a face ``sigma`` of ``tau`` is then
``[tau:sigma] * exp(-(h_tau - h_sigma))``; on an edge ``u -> v`` this reads
``e^{theta/2} f(v) - e^{-theta/2} f(u)``, a symmetric discretization of
``d + theta ^``.  Flatness makes ``d^2 = 0`` hold identically.

Inner products are diagonal ("lumped") Hodge masses ``W_j``; differentials
are handed to :mod:`complex_core` in orthonormal coordinates
``W_{j+1}^{1/2} d W_j^{-1/2}``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

from .complex_core import FiniteComplex
from .vn_core import AMap, HilbertianModule, VNAlgebra

MIN_RESOLUTION = 8


# ---------------------------------------------------------------------------
# generic oriented cell complex (dimension <= 2)


class CellComplex:
    """Oriented cell complex of dimension 1 or 2 with diagonal Hodge masses.

    ``edges`` is an ``(E, 2)`` array of (tail, head) vertex ids; each face is a
    closed cycle of ``(edge, sign)`` pairs (sign +1 when traversed tail->head).
    ``loops`` are closed edge paths forming a basis of first homology, used to
    read off periods.
    """

    def __init__(self, n_vertices: int, edges, faces: Sequence[Sequence[tuple[int, int]]] | None,
                 masses: Sequence[np.ndarray], loops: Sequence[Sequence[tuple[int, int]]] = (),
                 coords: np.ndarray | None = None, name: str = "complex"):
        self.n_vertices = int(n_vertices)
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.faces = None if faces is None else [tuple((int(e), int(s)) for e, s in f) for f in faces]
        self.n = 1 if self.faces is None else 2
        self.masses = [np.asarray(m, dtype=float) for m in masses]
        self.loops = [tuple((int(e), int(s)) for e, s in lp) for lp in loops]
        self.coords = coords
        self.name = name
        self._frames_override = None
        self._check()

    @property
    def n_cells(self) -> list[int]:
        out = [self.n_vertices, len(self.edges)]
        if self.n == 2:
            out.append(len(self.faces))
        return out

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** j * c for j, c in enumerate(self.n_cells))

    def _check(self):
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= self.n_vertices):
            raise ValueError("edge refers to a missing vertex")
        if len(self.masses) != self.n + 1:
            raise ValueError("one mass vector per degree required")
        for j, (m, c) in enumerate(zip(self.masses, self.n_cells)):
            if m.shape != (c,) or np.any(~(m > 0)):
                raise ValueError(f"masses in degree {j} must be {c} positive numbers")
        if self.faces is not None:
            for f in self.faces:
                self._face_vertices(f)  # raises on broken cycles
            # orientability: every edge bounded by two faces with opposite signs
            count = np.zeros(len(self.edges), dtype=np.int64)
            seen = np.zeros(len(self.edges), dtype=np.int64)
            for f in self.faces:
                for e, s in f:
                    count[e] += s
                    seen[e] += 1
            if np.any(count != 0):
                raise ValueError("faces are not coherently oriented (non-orientable or inconsistent input)")
        for lp in self.loops:
            self._path_vertices(lp, closed=True)

    def _path_vertices(self, path, closed: bool) -> list[int]:
        verts = []
        for e, s in path:
            a, b = self.edges[e] if s > 0 else self.edges[e][::-1]
            if verts and verts[-1] != a:
                raise ValueError("edge path is not connected")
            if not verts:
                verts.append(int(a))
            verts.append(int(b))
        if closed and verts and verts[0] != verts[-1]:
            raise ValueError("loop is not closed")
        return verts

    def _face_vertices(self, face) -> list[int]:
        return self._path_vertices(face, closed=True)[:-1]

    def boundary(self, j: int) -> sp.csr_matrix:
        """Integer incidence matrix ``[tau : sigma]`` from degree j to j+1."""
        if j == 0:
            E = len(self.edges)
            rows = np.repeat(np.arange(E), 2)
            cols = self.edges.ravel()
            vals = np.tile([-1.0, 1.0], E)
            return sp.csr_matrix((vals, (rows, cols)), shape=(E, self.n_vertices))
        if j == 1 and self.n == 2:
            rows, cols, vals = [], [], []
            for i, f in enumerate(self.faces):
                for e, s in f:
                    rows.append(i)
                    cols.append(e)
                    vals.append(float(s))
            return sp.csr_matrix((vals, (rows, cols)), shape=(len(self.faces), len(self.edges)))
        raise ValueError(f"no boundary map from degree {j}")

    def frame_differences(self, twist: "OneCocycle") -> list[sp.csr_matrix]:
        """Per-incidence ``h_tau - h_sigma`` (same sparsity as the incidence matrices)."""
        if self._frames_override is not None:
            return self._frames_override(twist)
        t = twist.values
        E = len(self.edges)
        rows = np.repeat(np.arange(E), 2)
        cols = self.edges.ravel()
        # frame of edge u->v is theta/2; vertex frames 0 at u, theta at v
        vals = np.column_stack([t / 2, -t / 2]).ravel()
        out = [sp.csr_matrix((vals, (rows, cols)), shape=(E, self.n_vertices))]
        if self.n == 2:
            rows, cols, vals = [], [], []
            for i, f in enumerate(self.faces):
                p = [0.0 + 0j if np.iscomplexobj(t) else 0.0]
                for e, s in f:
                    p.append(p[-1] + s * t[e])
                hf = np.mean(p[:-1])
                for k, (e, s) in enumerate(f):
                    rows.append(i)
                    cols.append(e)
                    vals.append(hf - (p[k] + p[k + 1]) / 2)
            out.append(sp.csr_matrix((vals, (rows, cols)), shape=(len(self.faces), E)))
        return out

    def twisted_coboundaries(self, twist: "OneCocycle", s: float = 1.0) -> list[sp.csr_matrix]:
        """Weighted coboundaries of the local system ``exp(-s theta)`` (raw cochain coordinates)."""
        twist.check_on(self)
        scaled = twist.scaled(s)
        out = []
        for j, F in enumerate(self.frame_differences(scaled)):
            B = self.boundary(j).tocoo()
            Fc = F.tocsr()
            w = np.exp(-np.asarray(Fc[B.row, B.col]).ravel())
            out.append(sp.csr_matrix((B.data * w, (B.row, B.col)), shape=B.shape))
        return out

    def orthonormal_coboundaries(self, twist: "OneCocycle", s: float = 1.0) -> list[sp.csr_matrix]:
        out = []
        for j, D in enumerate(self.twisted_coboundaries(twist, s)):
            left = sp.diags(np.sqrt(self.masses[j + 1]))
            right = sp.diags(1.0 / np.sqrt(self.masses[j]))
            out.append((left @ D @ right).tocsr())
        return out

    def complex(self, twist: "OneCocycle | None" = None, fiber: HilbertianModule | None = None,
                s: float = 1.0) -> FiniteComplex:
        """Twisted cochain complex with coefficients in ``fiber`` (trivial algebra by default)."""
        twist = OneCocycle.zero(self) if twist is None else twist
        fiber = HilbertianModule(VNAlgebra.trivial(), 1) if fiber is None else fiber
        mods = [fiber.amplify(c) for c in self.n_cells]
        diffs = []
        for j, D in enumerate(self.orthonormal_coboundaries(twist, s)):
            blocks = [sp.kron(D, sp.identity(r), format="csr") for r in fiber.ranks]
            diffs.append(AMap(mods[j], mods[j + 1], blocks))
        return FiniteComplex(mods, diffs)

    def scaled_metric(self, c: float) -> "CellComplex":
        """Same cells with all edge lengths multiplied by ``c`` (2-d scaling of lumped masses)."""
        if self.n == 1:
            masses = [self.masses[0] * c, self.masses[1] / c]
        else:
            masses = [self.masses[0] * c ** 2, self.masses[1].copy(), self.masses[2] / c ** 2]
        return CellComplex(self.n_vertices, self.edges, self.faces, masses, self.loops, self.coords,
                           self.name)

    def dual(self) -> "CellComplex":
        """Poincare dual cell structure (degrees reversed, inverse masses).

        Dual cells keep the primal per-incidence frame differences; the dual of
        the local system of ``theta`` is the one of ``-theta``.
        """
        if self.n != 2:
            verts, edges_ = len(self.edges), []
            # dual edge of vertex v runs from its incoming edge to its outgoing edge
            inc = {}
            for e, (a, b) in enumerate(self.edges):
                inc.setdefault(int(b), [None, None])[0] = e
                inc.setdefault(int(a), [None, None])[1] = e
            for v in range(self.n_vertices):
                edges_.append(inc[v])
            masses = [1.0 / self.masses[1], 1.0 / self.masses[0]]
            out = CellComplex(verts, edges_, None, masses, (), None, self.name + "*")
        else:
            # dual vertices = faces, dual edges = edges, dual faces = vertices
            B1 = self.boundary(1).tocsc()
            dedges = []
            for e in range(len(self.edges)):
                col = B1[:, e]
                fs, ss = col.indices, col.data
                if len(fs) != 2:
                    raise ValueError("edge not shared by exactly two faces")
                # oriented from the face where e appears with +1 to the one with -1
                left, right = (fs[0], fs[1]) if ss[0] > 0 else (fs[1], fs[0])
                dedges.append((left, right))
            B0 = self.boundary(0).tocsc()
            dfaces = []
            dedges_arr = np.asarray(dedges)
            for v in range(self.n_vertices):
                col = B0[:, v]
                cyc = _cycle_from_edges(dedges_arr, col.indices)
                want = dict(zip(col.indices.tolist(), col.data.tolist()))
                flips = {int(sg * want[e]) for e, sg in cyc}
                if len(flips) != 1:
                    raise ValueError("vertex link is not coherently oriented")
                if flips == {-1}:
                    cyc = [(e, -sg) for e, sg in reversed(cyc)]
                dfaces.append(cyc)
            masses = [1.0 / self.masses[2], 1.0 / self.masses[1], 1.0 / self.masses[0]]
            out = CellComplex(len(self.faces), dedges, dfaces, masses, (), None, self.name + "*")
        primal = self

        def frames(twist_dual: OneCocycle):
            prim = OneCocycle(primal, -twist_dual.values, check=False)
            F = primal.frame_differences(prim)
            return [F[primal.n - 1 - k].T.tocsr() for k in range(primal.n)]

        out._frames_override = frames
        out._primal = primal
        return out

    # exchange format -------------------------------------------------------

    def to_mesh_dict(self) -> dict:
        data = {"vertices": self.n_vertices, "edges": self.edges.tolist(),
                "masses": [m.tolist() for m in self.masses],
                "loops": [[list(p) for p in lp] for lp in self.loops], "name": self.name}
        if self.faces is not None:
            data["faces"] = [[e for e, _ in f] for f in self.faces]
            data["orientation"] = [[s for _, s in f] for f in self.faces]
        return data

    @classmethod
    def from_mesh_dict(cls, data: dict) -> "CellComplex":
        faces = None
        if data.get("faces") is not None:
            faces = [list(zip(f, o)) for f, o in zip(data["faces"], data["orientation"])]
        return cls(data["vertices"], data["edges"], faces, data["masses"],
                   [[tuple(p) for p in lp] for lp in data.get("loops", [])], None,
                   data.get("name", "complex"))


def _cycle_from_edges(edges: np.ndarray, ids) -> list[tuple[int, int]]:
    """Order the given edges into one closed signed cycle."""
    ids = [int(i) for i in ids]
    remaining = set(ids[1:])
    first = ids[0]
    cycle = [(first, 1)]
    start, cur = edges[first]
    while cur != start or remaining:
        nxt = None
        for e in remaining:
            a, b = edges[e]
            if a == cur:
                nxt, sign, cur2 = e, 1, b
                break
            if b == cur:
                nxt, sign, cur2 = e, -1, a
                break
        if nxt is None:
            raise ValueError("edges do not form a single cycle")
        remaining.discard(nxt)
        cycle.append((nxt, sign))
        cur = cur2
        if cur == start and not remaining:
            break
    return cycle


# ---------------------------------------------------------------------------
# cocycles and local systems


class OneCocycle:
    """Per-edge values of a closed 1-form (real, or complex for unitary phases)."""

    def __init__(self, complex_: CellComplex, values, periods=None, exact_part=None,
                 check: bool = True):
        vals = np.asarray(values)
        vals = vals.astype(complex) if np.iscomplexobj(vals) else vals.astype(float)
        if vals.shape != (len(complex_.edges),):
            raise ValueError(f"cocycle needs {len(complex_.edges)} edge values, got {vals.shape}")
        if np.any(~np.isfinite(vals)):
            raise ValueError("cocycle values must be finite")
        self.complex = complex_
        self.values = vals
        self.periods = None if periods is None else np.asarray(periods)
        self.exact_part = exact_part
        if check:
            err = self.closedness_error()
            if err > 1e-12 * max(1.0, float(np.abs(vals).max(initial=0.0))) * 4:
                raise ValueError(f"twist is not closed (face sum {err:.3g})")

    @classmethod
    def zero(cls, c: CellComplex) -> "OneCocycle":
        return cls(c, np.zeros(len(c.edges)), periods=np.zeros(len(c.loops)))

    @classmethod
    def exact(cls, c: CellComplex, h) -> "OneCocycle":
        """``dh`` for a vertex function ``h``."""
        h = np.asarray(h)
        return cls(c, h[c.edges[:, 1]] - h[c.edges[:, 0]], periods=np.zeros(len(c.loops)),
                   exact_part=h)

    def closedness_error(self) -> float:
        if self.complex.faces is None:
            return 0.0
        sums = self.complex.boundary(1) @ self.values
        return float(np.abs(sums).max(initial=0.0))

    def check_on(self, c: CellComplex):
        if c is not self.complex and len(c.edges) != len(self.values):
            raise ValueError("cocycle belongs to a different complex")

    def loop_periods(self, loops=None) -> np.ndarray:
        loops = self.complex.loops if loops is None else loops
        return np.array([sum(s * self.values[e] for e, s in lp) for lp in loops])

    def scaled(self, s: complex) -> "OneCocycle":
        if s == 1:
            return self
        return OneCocycle(self.complex, s * self.values,
                          None if self.periods is None else s * self.periods, None, check=False)

    def __add__(self, other: "OneCocycle") -> "OneCocycle":
        return OneCocycle(self.complex, self.values + other.values, check=False)

    def __neg__(self) -> "OneCocycle":
        return self.scaled(-1.0)

    def holonomy(self, loop) -> complex:
        """Holonomy ``exp(-int_loop theta)`` of the local system along a closed path."""
        return complex(np.exp(-sum(s * self.values[e] for e, s in loop)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cplx = np.iscomplexobj(self.values)
        w.writerow(["edge", "tail", "head", "theta"] + (["phi"] if cplx else []))
        for i, ((a, b), v) in enumerate(zip(self.complex.edges, self.values)):
            row = [i, int(a), int(b), repr(float(np.real(v)))]
            if cplx:
                row.append(repr(float(np.imag(v))))
            w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, c: CellComplex, text: str) -> "OneCocycle":
        rows = list(csv.DictReader(io.StringIO(text)))
        vals = np.zeros(len(c.edges), dtype=complex if rows and "phi" in rows[0] else float)
        for r in rows:
            v = float(r["theta"])
            if "phi" in r:
                v = complex(v, float(r["phi"]))
            vals[int(r["edge"])] = v
        return cls(c, vals)


@dataclass
class LocalSystem:
    """Flat bundle with fiber ``E`` and scalar holonomy ``exp(-theta)`` per edge."""

    fiber: HilbertianModule
    twist: OneCocycle

    def holonomy_defect(self) -> float:
        """``max |hol(face boundary) - 1|`` over faces."""
        c = self.twist.complex
        if c.faces is None:
            return 0.0
        return float(max((abs(self.twist.holonomy(f) - 1.0) for f in c.faces), default=0.0))

    def complex(self, s: float = 1.0) -> FiniteComplex:
        return self.twist.complex.complex(self.twist, self.fiber, s)


# ---------------------------------------------------------------------------
# flat tori


@dataclass(frozen=True)
class FlatTorusGrid:
    """Cubical grid on ``R^n / Z^n`` (n = 1, 2) with constant diagonal metric."""

    n: int
    resolution: tuple[int, ...]
    lengths: tuple[float, ...] | None = None

    def __post_init__(self):
        res = tuple(int(r) for r in np.broadcast_to(np.atleast_1d(self.resolution), (self.n,)))
        if self.n not in (1, 2):
            raise ValueError("flat torus grids support n = 1 or 2")
        if min(res) < MIN_RESOLUTION:
            raise ValueError(f"resolution must be >= {MIN_RESOLUTION} per axis, got {res}")
        lengths = (1.0,) * self.n if self.lengths is None else tuple(float(x) for x in self.lengths)
        if len(lengths) != self.n or min(lengths) <= 0:
            raise ValueError("one positive length per axis required")
        object.__setattr__(self, "resolution", res)
        object.__setattr__(self, "lengths", lengths)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / N for L, N in zip(self.lengths, self.resolution))

    def cell_complex(self) -> CellComplex:
        if self.n == 1:
            (N,), (h,) = self.resolution, self.spacing
            edges = [(i, (i + 1) % N) for i in range(N)]
            loops = [[(i, 1) for i in range(N)]]
            coords = (np.arange(N) * h)[:, None]
            return CellComplex(N, edges, None, [np.full(N, h), np.full(N, 1.0 / h)], loops, coords,
                               f"circle{N}")
        (Nx, Ny), (hx, hy) = self.resolution, self.spacing
        V = Nx * Ny

        def vid(i, j):
            return (i % Nx) + Nx * (j % Ny)

        edges = []
        for j in range(Ny):
            for i in range(Nx):
                edges.append((vid(i, j), vid(i + 1, j)))
        for j in range(Ny):
            for i in range(Nx):
                edges.append((vid(i, j), vid(i, j + 1)))

        def xe(i, j):
            return vid(i, j)

        def ye(i, j):
            return V + vid(i, j)

        faces = []
        for j in range(Ny):
            for i in range(Nx):
                faces.append([(xe(i, j), 1), (ye(i + 1, j), 1), (xe(i, j + 1), -1), (ye(i, j), -1)])
        vol = hx * hy
        masses = [np.full(V, vol),
                  np.r_[np.full(V, vol / hx ** 2), np.full(V, vol / hy ** 2)],
                  np.full(V, 1.0 / vol)]
        loops = [[(xe(i, 0), 1) for i in range(Nx)], [(ye(0, j), 1) for j in range(Ny)]]
        ii, jj = np.meshgrid(np.arange(Nx), np.arange(Ny), indexing="xy")
        coords = np.column_stack([ii.ravel() * hx, jj.ravel() * hy])
        return CellComplex(V, edges, faces, masses, loops, coords, f"torus{Nx}x{Ny}")


def torus_twist(cc: CellComplex, theta: Sequence[float]) -> OneCocycle:
    """Constant (harmonic) cocycle with period ``theta_i`` along the i-th axis loop."""
    theta = np.atleast_1d(np.asarray(theta))
    if cc.coords is None or cc.coords.shape[1] != len(theta):
        raise ValueError("torus twist needs a grid complex of matching dimension")
    return harmonic_twist(cc, theta)


def build_torus_complex(grid: FlatTorusGrid, twist: OneCocycle | Sequence[float] | None = None,
                        fiber: HilbertianModule | None = None, s: float = 1.0) -> FiniteComplex:
    cc = grid.cell_complex()
    if twist is None:
        twist = OneCocycle.zero(cc)
    elif not isinstance(twist, OneCocycle):
        twist = torus_twist(cc, twist)
    elif len(twist.values) != len(cc.edges):
        raise ValueError("twist lives on a different grid")
    else:
        twist = OneCocycle(cc, twist.values)
    return cc.complex(twist, fiber, s)


# ---------------------------------------------------------------------------
# triangulated surfaces


class TriangulatedSurface:
    """Closed oriented triangulated surface with flat per-triangle metric.

    ``faces`` are CCW vertex triples, ``lengths`` maps each canonical edge (in
    :attr:`edges` order) to its length; ``loops`` are closed vertex sequences
    forming a homology basis.
    """

    def __init__(self, n_vertices: int, faces, lengths=None, loops=(), genus: int | None = None,
                 face_coords=None):
        self.n_vertices = int(n_vertices)
        self.faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        edge_index: dict[tuple[int, int], int] = {}
        edges = []
        for f in self.faces:
            if len(set(f.tolist())) != 3:
                raise ValueError("degenerate triangle")
            for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
                key = (min(a, b), max(a, b))
                if key not in edge_index:
                    edge_index[key] = len(edges)
                    edges.append(key)
        self.edge_index = edge_index
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if face_coords is not None:
            face_coords = np.asarray(face_coords, dtype=float)
            lengths = np.zeros(len(edges))
            for f, pc in zip(self.faces, face_coords):
                for k in range(3):
                    a, b = f[k], f[(k + 1) % 3]
                    lengths[edge_index[(min(a, b), max(a, b))]] = np.linalg.norm(pc[(k + 1) % 3] - pc[k])
        self.lengths = np.ones(len(edges)) if lengths is None else np.asarray(lengths, dtype=float)
        if self.lengths.shape != (len(edges),) or np.any(self.lengths <= 0):
            raise ValueError("one positive length per edge required")
        self.loops = [list(map(int, lp)) for lp in loops]
        chi = self.n_vertices - len(edges) + len(self.faces)
        if chi % 2:
            raise ValueError("odd Euler characteristic: not a closed orientable surface")
        self.genus = (2 - chi) // 2 if genus is None else int(genus)
        if chi != 2 - 2 * self.genus:
            raise ValueError(f"Euler characteristic {chi} does not match genus {self.genus}")
        used = np.zeros(self.n_vertices, dtype=bool)
        used[self.faces.ravel()] = True
        if not used.all():
            raise ValueError("isolated vertex")
        self._check_triangles()

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + len(self.faces)

    def _len(self, a, b) -> float:
        return float(self.lengths[self.edge_index[(min(a, b), max(a, b))]])

    def _check_triangles(self):
        for f in self.faces:
            l = sorted(self._len(f[k], f[(k + 1) % 3]) for k in range(3))
            if l[2] >= l[0] + l[1]:
                raise ValueError("triangle inequality violated")

    def planar(self, f) -> np.ndarray:
        """Place triangle ``f`` in the plane from its edge lengths (CCW)."""
        a, b, c = f
        lab, lbc, lca = self._len(a, b), self._len(b, c), self._len(c, a)
        x = (lab ** 2 + lca ** 2 - lbc ** 2) / (2 * lab)
        y = math.sqrt(max(lca ** 2 - x ** 2, 0.0))
        return np.array([[0.0, 0.0], [lab, 0.0], [x, y]])

    def cell_complex(self) -> CellComplex:
        V, E, F = self.n_vertices, len(self.edges), len(self.faces)
        faces = []
        vmass = np.zeros(V)
        dual_len = np.zeros(E)
        area = np.zeros(F)
        for i, f in enumerate(self.faces):
            cyc = []
            for k in range(3):
                a, b = int(f[k]), int(f[(k + 1) % 3])
                e = self.edge_index[(min(a, b), max(a, b))]
                cyc.append((e, 1 if a < b else -1))
            faces.append(cyc)
            p = self.planar(f)
            ar = 0.5 * abs((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1]))
            area[i] = ar
            vmass[f] += ar / 3
            g = p.mean(axis=0)
            for k in range(3):
                e = cyc[k][0]
                mid = (p[k] + p[(k + 1) % 3]) / 2
                dual_len[e] += np.linalg.norm(g - mid)
        masses = [vmass, dual_len / self.lengths, 1.0 / area]
        loops = [self._vertex_loop_to_edges(lp) for lp in self.loops]
        return CellComplex(V, self.edges, faces, masses, loops, None, f"genus{self.genus}")

    def _vertex_loop_to_edges(self, lp) -> list[tuple[int, int]]:
        out = []
        for a, b in zip(lp[:-1], lp[1:]):
            out.append((self.edge_index[(min(a, b), max(a, b))], 1 if a < b else -1))
        return out

    def refine(self, levels: int = 1) -> "TriangulatedSurface":
        """Barycentric refinement (each triangle into six), metric inherited."""
        if not 0 <= levels <= 3:
            raise ValueError("refinement levels must be in 0..3")
        s = self
        for _ in range(levels):
            s = s._refine_once()
        return s

    def _refine_once(self) -> "TriangulatedSurface":
        V, E = self.n_vertices, len(self.edges)
        faces, coords = [], []
        for i, f in enumerate(self.faces):
            p = self.planar(f)
            g = p.mean(axis=0)
            gid = V + E + i
            for k in range(3):
                a, b = int(f[k]), int(f[(k + 1) % 3])
                m = V + self.edge_index[(min(a, b), max(a, b))]
                pm = (p[k] + p[(k + 1) % 3]) / 2
                faces.append((a, m, gid))
                coords.append((p[k], pm, g))
                faces.append((m, b, gid))
                coords.append((pm, p[(k + 1) % 3], g))
        loops = []
        for lp in self.loops:
            new = [lp[0]]
            for a, b in zip(lp[:-1], lp[1:]):
                new += [V + self.edge_index[(min(a, b), max(a, b))], b]
            loops.append(new)
        return TriangulatedSurface(V + E + len(self.faces), faces, loops=loops, genus=self.genus,
                                   face_coords=coords)

    def to_mesh_dict(self) -> dict:
        cc = self.cell_complex()
        return {"vertices": self.n_vertices, "edges": self.edges.tolist(),
                "faces": [[e for e, _ in f] for f in cc.faces],
                "orientation": [[s for _, s in f] for f in cc.faces],
                "lengths": self.lengths.tolist(), "loops": self.loops, "genus": self.genus}

    def to_json(self) -> str:
        return json.dumps(self.to_mesh_dict())

    @classmethod
    def from_mesh_dict(cls, data: dict) -> "TriangulatedSurface":
        edges = [tuple(e) for e in data["edges"]]
        faces = []
        for fe, fo in zip(data["faces"], data["orientation"]):
            verts = []
            for e, s in zip(fe, fo):
                a, b = edges[e] if s > 0 else edges[e][::-1]
                verts.append(a)
            faces.append(verts)
        surf = cls(data["vertices"], faces, None, data.get("loops", ()), data.get("genus"))
        lengths = np.zeros(len(surf.edges))
        for (a, b), l in zip(edges, data["lengths"]):
            lengths[surf.edge_index[(min(a, b), max(a, b))]] = l
        return cls(data["vertices"], faces, lengths, data.get("loops", ()), data.get("genus"))

    @classmethod
    def from_json(cls, text: str) -> "TriangulatedSurface":
        return cls.from_mesh_dict(json.loads(text))


def genus_surface(g: int, m: int = 3, ring: float = 0.6) -> TriangulatedSurface:
    """Flat regular 4g-gon glued by ``a_1 b_1 a_1^-1 b_1^-1 ...``, triangulated.

    Every side is cut into ``m >= 3`` segments, an inner ring of ``4 g m``
    vertices and one centre vertex complete the triangulation.  All polygon
    corners become one vertex; the sides labelled ``a_i``, ``b_i`` are the
    homology basis loops.
    """
    if g < 1:
        raise ValueError("genus must be >= 1")
    if m < 3:
        raise ValueError("need at least 3 segments per side")
    nside = 4 * g
    corners = np.array([[math.cos(2 * math.pi * c / nside), math.sin(2 * math.pi * c / nside)]
                        for c in range(nside)])
    P = 0
    side_vertex = {}
    nxt = 1
    for lab in range(2 * g):
        for t in range(1, m):
            side_vertex[(lab, t)] = nxt
            nxt += 1
    nb = nside * m
    bid, bpos = [], []
    for i in range(nb):
        side, t = divmod(i, m)
        a, q = divmod(side, 4)
        pos = corners[side] + (corners[(side + 1) % nside] - corners[side]) * t / m
        bpos.append(pos)
        if t == 0:
            bid.append(P)
        elif q < 2:
            bid.append(side_vertex[(2 * a + q, t)])
        else:
            bid.append(side_vertex[(2 * a + q - 2, m - t)])
    ring_id = [nxt + i for i in range(nb)]
    centre = nxt + nb
    bpos = np.array(bpos)
    rpos = ring * bpos
    faces, coords = [], []
    for i in range(nb):
        j = (i + 1) % nb
        faces.append((bid[i], bid[j], ring_id[j]))
        coords.append((bpos[i], bpos[j], rpos[j]))
        faces.append((bid[i], ring_id[j], ring_id[i]))
        coords.append((bpos[i], rpos[j], rpos[i]))
        faces.append((centre, ring_id[i], ring_id[j]))
        coords.append((np.zeros(2), rpos[i], rpos[j]))
    for pc in coords:
        pc = np.asarray(pc)
        cross = (pc[1, 0] - pc[0, 0]) * (pc[2, 1] - pc[0, 1]) - (pc[2, 0] - pc[0, 0]) * (pc[1, 1] - pc[0, 1])
        assert cross > 0
    loops = []
    for lab in range(2 * g):
        loops.append([P] + [side_vertex[(lab, t)] for t in range(1, m)] + [P])
    return TriangulatedSurface(centre + 1, faces, loops=loops, genus=g, face_coords=coords)


def seven_vertex_torus() -> TriangulatedSurface:
    """Minimal (7-vertex) torus: the triangular lattice modulo an index-7 sublattice."""
    faces = []
    for a in range(7):
        faces.append((a, (a + 1) % 7, (a + 5) % 7))
        faces.append(((a + 1) % 7, (a + 6) % 7, (a + 5) % 7))
    loops = [[0, 1, 2, 0], [0, 6, 4, 2, 0]]
    return TriangulatedSurface(7, faces, loops=loops, genus=1)


def build_surface_complex(s: TriangulatedSurface, twist: OneCocycle | None = None,
                          fiber: HilbertianModule | None = None, s_param: float = 1.0) -> FiniteComplex:
    cc = s.cell_complex()
    if twist is not None:
        twist = OneCocycle(cc, twist.values)
    return cc.complex(twist, fiber, s_param)


# ---------------------------------------------------------------------------
# harmonic representatives


def harmonic_basis(cc: CellComplex) -> np.ndarray:
    """Harmonic 1-cochains (raw coordinates) spanning ``H^1``, one per column."""
    d = cc.orthonormal_coboundaries(OneCocycle.zero(cc))
    lap = (d[0] @ d[0].T).toarray()
    if cc.n == 2:
        lap = lap + (d[1].T @ d[1]).toarray()
    vals, vecs = np.linalg.eigh(lap)
    ker = vecs[:, vals < 1e-9 * max(1.0, vals.max())]
    return ker / np.sqrt(cc.masses[1])[:, None]


def period_matrix(cc: CellComplex, forms: np.ndarray) -> np.ndarray:
    P = np.zeros((len(cc.loops), forms.shape[1]))
    for i, lp in enumerate(cc.loops):
        for e, s in lp:
            P[i] += s * forms[e]
    return P


def harmonic_twist(cc: CellComplex, coords) -> OneCocycle:
    """Harmonic cocycle whose periods along the stored basis loops equal ``coords``."""
    coords = np.asarray(coords)
    if coords.shape != (len(cc.loops),):
        raise ValueError(f"class coordinates need {len(cc.loops)} entries")
    if np.any(~np.isfinite(coords)):
        raise ValueError("class coordinates must be finite")
    if not np.any(coords):
        return OneCocycle(cc, np.zeros(len(cc.edges), dtype=coords.dtype), periods=coords)
    if cc.coords is not None and cc.name.startswith(("circle", "torus")):
        # uniform grids: constant forms are harmonic
        vals = np.zeros(len(cc.edges), dtype=coords.dtype)
        if cc.n == 1:
            N = len(cc.edges)
            vals[:] = coords[0] / N
        else:
            V = cc.n_vertices
            nx = len(cc.loops[0])
            ny = len(cc.loops[1])
            vals[:V] = coords[0] / nx
            vals[V:] = coords[1] / ny
        return OneCocycle(cc, vals, periods=coords)
    H = harmonic_basis(cc)
    P = period_matrix(cc, H)
    coef = np.linalg.solve(P, coords)
    vals = H @ coef
    return OneCocycle(cc, vals, periods=coords)


# ---------------------------------------------------------------------------
# cyclic covers


def integer_cocycle(cc: CellComplex, c) -> np.ndarray:
    """Integer-valued cocycle with integer periods ``c`` along the basis loops."""
    c = np.asarray(c)
    if not np.allclose(c, np.round(c)):
        raise ValueError("cover direction must be an integer class")
    if not np.any(np.round(c)):
        raise ValueError("cover direction has zero period")
    w = harmonic_twist(cc, c.astype(float)).values
    # subtract a potential so that w vanishes on a spanning tree, then round
    n = cc.n_vertices
    adj = sp.csr_matrix((np.ones(len(cc.edges)), (cc.edges[:, 0], cc.edges[:, 1])), shape=(n, n))
    order, pred = csgraph.breadth_first_order(adj, 0, directed=False, return_predecessors=True)
    lookup = {}
    for e, (a, b) in enumerate(cc.edges):
        lookup.setdefault((int(a), int(b)), e)
        lookup.setdefault((int(b), int(a)), e)
    pot = np.zeros(n)
    for v in order[1:]:
        u = pred[v]
        e = lookup[(int(u), int(v))]
        a, b = cc.edges[e]
        pot[v] = pot[u] + (w[e] if (a, b) == (u, v) else -w[e])
    w = w - (pot[cc.edges[:, 1]] - pot[cc.edges[:, 0]])
    out = np.round(w).astype(np.int64)
    if np.abs(w - out).max() > 1e-6:
        raise ValueError("integer class could not be represented integrally")
    return out


@dataclass
class Cover:
    complex: CellComplex
    fold: int
    omega: np.ndarray
    base: CellComplex

    def lift(self, twist: OneCocycle) -> OneCocycle:
        """Pull back a cocycle from the base (values replicated on every sheet)."""
        return OneCocycle(self.complex, np.tile(twist.values, self.fold))


def build_cover(cc: CellComplex, k: int, direction) -> Cover:
    """k-fold cyclic cover along the integer class ``direction``.

    Cells ``(x, i)`` for sheets ``i in Z/k``; an edge ``u -> v`` on sheet ``i``
    ends on sheet ``i + omega(e)``.  Cell ids are ``base_id + sheet * count``.
    """
    if k < 1:
        raise ValueError("fold must be >= 1")
    omega = integer_cocycle(cc, direction)
    V, E = cc.n_vertices, len(cc.edges)
    edges = np.zeros((k * E, 2), dtype=np.int64)
    for i in range(k):
        edges[i * E:(i + 1) * E, 0] = cc.edges[:, 0] + i * V
        edges[i * E:(i + 1) * E, 1] = cc.edges[:, 1] + ((i + omega) % k) * V
    faces = None
    if cc.faces is not None:
        faces = []
        for i in range(k):
            for f in cc.faces:
                sheet, cyc = i, []
                for e, s in f:
                    if s > 0:
                        cyc.append((e + sheet * E, 1))
                        sheet = (sheet + omega[e]) % k
                    else:
                        sheet = (sheet - omega[e]) % k
                        cyc.append((e + sheet * E, -1))
                if sheet != i:
                    raise ValueError("face does not close up in the cover")
                faces.append(cyc)
    masses = [np.tile(m, k) for m in cc.masses]
    coords = None if cc.coords is None else np.tile(cc.coords, (k, 1))
    name = cc.name.replace("circle", "circlecover").replace("torus", "toruscover")
    out = CellComplex(k * V, edges, faces, masses, (), coords, f"{name}^{k}")
    return Cover(out, k, omega, cc)


def cover_group_complex(cover: Cover, twist: OneCocycle | None = None,
                        fiber_rank: int = 1) -> FiniteComplex:
    """The cover's complex as a free Hilbertian module over ``C[Z/k]``.

    In the Fourier picture block ``l`` is the base complex twisted by the
    extra unitary phase ``2 pi i l omega / k``; traces are normalized by ``k``.
    """
    base, k = cover.base, cover.fold
    twist = OneCocycle.zero(base) if twist is None else twist
    alg = VNAlgebra.cyclic_group(k)
    mods = [HilbertianModule(alg, fiber_rank * c) for c in base.n_cells]
    blocks_per_deg: list[list] = [[] for _ in range(base.n)]
    for l in range(k):
        phased = OneCocycle(base, twist.values + 2j * math.pi * l * cover.omega / k, check=False)
        for j, D in enumerate(base.orthonormal_coboundaries(phased)):
            blocks_per_deg[j].append(sp.kron(D, sp.identity(fiber_rank), format="csr"))
    diffs = [AMap(mods[j], mods[j + 1], blocks_per_deg[j]) for j in range(base.n)]
    return FiniteComplex(mods, diffs)


# ---------------------------------------------------------------------------
# Poincare duality


def hodge_star(cc: CellComplex, j: int) -> sp.dia_matrix:
    """Diagonal star from primal j-cochains to dual (n-j)-cochains (raw coordinates).

    In orthonormal coordinates it is the identity up to the sign
    ``(-1)^{j(n-j)}`` applied on the way back, so ``star o star = +-Id``.
    """
    if not 0 <= j <= cc.n:
        raise ValueError(f"degree {j} outside 0..{cc.n}")
    if getattr(cc, "_primal", None) is not None:
        primal = cc._primal
        sign = (-1) ** (j * (cc.n - j))
        return sp.diags(sign / primal.masses[cc.n - j])
    return sp.diags(cc.masses[j])


def dual_complex(cc: CellComplex, twist: OneCocycle, fiber: HilbertianModule | None = None
                 ) -> tuple[CellComplex, FiniteComplex]:
    """Dual cell structure with the dual local system of ``-theta``."""
    d = cc.dual()
    tw = OneCocycle(d, -twist.values, check=False)
    return d, d.complex(tw, fiber)
