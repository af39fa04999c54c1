"""Finite-difference discretization of Omega, the weight b(x), and the Dirichlet Laplacian.

Grids are tensor-product lattices of interior nodes on an interval or a rectangle.
Nodes are ordered lexicographically in C order (the last axis varies fastest), and a
discrete field ("grid function") is a flat float array with one entry per interior node.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import ndimage

from .errors import ConfigurationError, DomainError, NumericError

DIRECT_SOLVE_LIMIT = 100_000


@dataclass(frozen=True)
class Grid:
    """Uniform interior lattice on a box; ``extents[a] = (lo, hi)``, ``n[a]`` interior points."""

    extents: tuple
    n: tuple

    def __post_init__(self):
        ext = tuple((float(a), float(b)) for a, b in self.extents)
        n = tuple(int(k) for k in np.atleast_1d(self.n))
        if len(n) == 1 and len(ext) > 1:
            n = n * len(ext)
        if len(ext) not in (1, 2) or len(n) != len(ext):
            raise DomainError("grid must be 1D or 2D with one point count per axis")
        if min(n) < 1:
            raise DomainError(f"need at least one interior point per axis, got n={n}")
        if any(b <= a for a, b in ext):
            raise DomainError(f"degenerate extents {ext}")
        object.__setattr__(self, "extents", ext)
        object.__setattr__(self, "n", n)

    @classmethod
    def interval(cls, a, b, n):
        return cls(((a, b),), (n,))

    @classmethod
    def rectangle(cls, xlim, ylim, n):
        return cls((tuple(xlim), tuple(ylim)), n)

    @property
    def dim(self):
        return len(self.n)

    @property
    def shape(self):
        return self.n

    @property
    def size(self):
        return int(np.prod(self.n))

    @property
    def lengths(self):
        return tuple(b - a for a, b in self.extents)

    @property
    def h(self):
        return tuple(L / (k + 1) for L, k in zip(self.lengths, self.n))

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    @cached_property
    def axes(self):
        return tuple(a + hh * np.arange(1, k + 1) for (a, _), hh, k in zip(self.extents, self.h, self.n))

    @cached_property
    def points(self):
        """(size, dim) array of node coordinates in storage order."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def reshape(self, v):
        return np.asarray(v).reshape(self.n)

    def boundary_distance(self):
        """Distance from each node to the boundary of the box."""
        d = np.full(self.size, np.inf)
        for a, (lo, hi) in enumerate(self.extents):
            x = self.points[:, a]
            d = np.minimum(d, np.minimum(x - lo, hi - x))
        return d

    def sup_norm(self, v):
        return float(np.max(np.abs(v))) if np.size(v) else 0.0

    def l2_norm(self, v):
        return float(np.sqrt(self.cell_volume * np.sum(np.asarray(v) ** 2)))


@dataclass(frozen=True)
class SymmetricOperator:
    """Sparse symmetric matrix plus an optional diagonal potential: the discrete -Delta + V."""

    matrix: sp.csr_matrix
    potential: np.ndarray | None = None

    @property
    def shape(self):
        return self.matrix.shape

    @cached_property
    def full(self):
        if self.potential is None:
            return self.matrix.tocsr()
        return (self.matrix + sp.diags(self.potential)).tocsr()

    def __matmul__(self, v):
        return self.full @ v

    def with_potential(self, V):
        V = np.broadcast_to(np.asarray(V, dtype=float), (self.shape[0],)).copy()
        return SymmetricOperator(self.matrix, V)

    def is_symmetric(self, tol=1e-12):
        M = self.full
        diff = abs(M - M.T)
        scale = max(1.0, abs(M).max())
        return diff.nnz == 0 or diff.max() <= tol * scale

    def gershgorin_lower(self):
        M = self.full.tocsr()
        diag = M.diagonal()
        off = np.asarray(abs(M).sum(axis=1)).ravel() - np.abs(diag)
        return float(np.min(diag - off))


def assemble_laplacian(grid):
    """Standard 3-point (1D) / 5-point (2D) stencil for -Delta with zero Dirichlet data."""
    if min(grid.n) < 1:
        raise DomainError("grid has no interior nodes")
    blocks = []
    for k, hh in zip(grid.n, grid.h):
        blocks.append(sp.diags([-np.ones(k - 1), 2 * np.ones(k), -np.ones(k - 1)], [-1, 0, 1]) / hh**2)
    if grid.dim == 1:
        A = blocks[0]
    else:
        nx, ny = grid.n
        A = sp.kron(blocks[0], sp.identity(ny)) + sp.kron(sp.identity(nx), blocks[1])
    return SymmetricOperator(sp.csr_matrix(A))


def solve_spd(matrix, rhs, tol=1e-12):
    """Solve with an SPD matrix: sparse LU below DIRECT_SOLVE_LIMIT, Jacobi-PCG above."""
    matrix = sp.csc_matrix(matrix)
    if matrix.shape[0] < DIRECT_SOLVE_LIMIT:
        x = spla.spsolve(matrix, rhs)
    else:
        d = matrix.diagonal()
        M = spla.LinearOperator(matrix.shape, matvec=lambda y: y / d)
        x, info = spla.cg(matrix, rhs, rtol=tol, M=M, maxiter=20 * matrix.shape[0])
        if info != 0:
            raise NumericError(f"conjugate gradient failed (info={info})")
    if not np.all(np.isfinite(x)):
        raise NumericError("linear solve produced non-finite values")
    return x


@dataclass(frozen=True)
class WeightField:
    """Nodal values of b(x) >= 0 with the geometry of its support.

    ``refuge`` marks the nodes where b = 0, i.e. the discrete refuge Omega_{b,0}.
    """

    values: np.ndarray
    mode: str
    b0: float = 0.0
    center: tuple | None = None
    radius: float | None = None
    refuge: np.ndarray = field(default=None, repr=False)

    @property
    def support(self):
        return ~self.refuge

    @property
    def is_constant(self):
        return self.mode in ("zero", "constant")

    def scaled(self, factor):
        return WeightField(self.values * factor, self.mode, self.b0 * factor, self.center, self.radius, self.refuge)


def build_weight(grid, mode="constant", b0=1.0, center=None, radius=None):
    """Build b on the grid.

    ``mode`` is ``"zero"`` (b = 0), ``"constant"`` (b = b0) or ``"disk-bump"``
    (2D only): b0 * max(0, 1 - |x - c|^2 / radius^2)^2, positive exactly on the open disk.
    """
    N = grid.size
    if mode == "zero":
        return WeightField(np.zeros(N), "zero", 0.0, refuge=np.ones(N, dtype=bool))
    if not b0 > 0:
        raise ConfigurationError(f"b0 must be positive, got {b0}")
    if mode == "constant":
        return WeightField(np.full(N, float(b0)), "constant", float(b0), refuge=np.zeros(N, dtype=bool))
    if mode != "disk-bump":
        raise ConfigurationError(f"unknown weight mode {mode!r}")
    if grid.dim != 2:
        # an interior bump disconnects a 1D refuge
        raise ConfigurationError("refuge (bump) configurations are only supported in 2D")
    if center is None or radius is None or not radius > 0:
        raise ConfigurationError("disk-bump needs a center and a positive radius")
    c = np.asarray(center, dtype=float)
    for a, (lo, hi) in enumerate(grid.extents):
        if not (lo < c[a] - radius and c[a] + radius < hi):
            raise ConfigurationError("closed bump support must lie strictly inside the domain")
    r2 = np.sum((grid.points - c) ** 2, axis=1) / radius**2
    inside = r2 < 1.0
    vals = np.where(inside, b0 * np.maximum(0.0, 1.0 - r2) ** 2, 0.0)
    inside &= vals > 0
    return WeightField(vals, "disk-bump", float(b0), tuple(c), float(radius), refuge=~inside)


def refuge_connected(grid, mask):
    if not mask.any():
        return False
    if grid.dim == 1:
        idx = np.flatnonzero(mask)
        return bool(np.all(np.diff(idx) == 1))
    _, ncomp = ndimage.label(grid.reshape(mask))
    return ncomp == 1


def refuge_operator(grid, weight):
    """Dirichlet Laplacian restricted to refuge nodes (support nodes act as boundary)."""
    mask = weight.refuge
    if not mask.any():
        raise ConfigurationError("refuge is empty (b > 0 everywhere)")
    if not refuge_connected(grid, mask):
        raise ConfigurationError("refuge node set is not connected")
    A = assemble_laplacian(grid).matrix
    idx = np.flatnonzero(mask)
    return SymmetricOperator(A[idx][:, idx].tocsr())


def default_enlargement(grid):
    return 0.25 * max(grid.lengths)


def auxiliary_supersolution_field(grid, enlargement=None):
    """Solve -Delta e = 1 on the box padded by ``enlargement``; return e on the grid nodes.

    The padding is rounded to a whole number of cells (at least one) so the enlarged
    lattice contains the original one.
    """
    if enlargement is None:
        enlargement = default_enlargement(grid)
    if not enlargement > 0:
        raise DomainError("enlargement must be positive")
    pads = [max(1, int(round(enlargement / hh))) for hh in grid.h]
    big = Grid(
        tuple((a - m * hh, b + m * hh) for (a, b), m, hh in zip(grid.extents, pads, grid.h)),
        tuple(k + 2 * m for k, m in zip(grid.n, pads)),
    )
    e = solve_spd(assemble_laplacian(big).matrix, np.ones(big.size))
    sl = tuple(slice(m, m + k) for m, k in zip(pads, grid.n))
    return big.reshape(e)[sl].ravel()


def disk_nodes(grid, center, radius):
    return np.sum((grid.points - np.asarray(center, dtype=float)) ** 2, axis=1) <= radius**2


def write_grid_function(path, grid, values, header="value"):
    """CSV with columns index, x, [y], value."""
    cols = ["index", "x", "y"][: grid.dim + 1] + [header]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for i, (pt, v) in enumerate(zip(grid.points, np.asarray(values, dtype=float))):
            w.writerow([i, *(repr(float(c)) for c in pt), repr(float(v))])


def read_grid_function(path):
    """Return (coordinates, values) from a grid-function CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    return data[:, :-1], data[:, -1]
