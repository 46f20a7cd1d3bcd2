"""Radial mesh, weighted quadrature, and the discrete operator A_{b,V}.

Discretization conventions
--------------------------

The operator A_{b,V} = -div(|x|^b grad) + V acting on radial functions
is realized by cell-centered finite volumes on [0, r_max].  Cell faces
follow the graded law

    r_{i+1/2} = r_max * (i/N)^grading,   i = 0..N,

so grading > 1 clusters cells at the origin where the weights r^b and
r^c are singular.  Nodes sit at cell midpoints.  Cell measures are the
exact shell volumes

    mu_i = S_{n-1} * (r_{i+1/2}^n - r_{i-1/2}^n) / n,

with S_{n-1} the unit-sphere area, so that sum(mu) telescopes to the
exact ball volume and the midpoint quadrature sum(mu_i r_i^a |f_i|^q)
is second-order accurate.

The flux form of the operator integrates -div(r^b grad f) over cell i
and approximates the face flux r^{n-1+b} f' by a centered difference:

    (A f)_i = [nu_{i-1/2}(f_i - f_{i-1}) + nu_{i+1/2}(f_i - f_{i+1})]/mu_i
              + V(r_i) f_i,
    nu_{i+1/2} = S_{n-1} * r_{i+1/2}^{n-1+b} / (r_{i+1} - r_i).

The inner face weight nu_{1/2} is exactly zero (r^{n-1+b} -> 0 since
n-1+b > 0), which encodes the natural zero-flux condition at the
origin; the outer boundary is homogeneous Dirichlet, realized by a
ghost value 0 at r_max with nu_{N+1/2} = S_{n-1} r_max^{n-1+b} /
(r_max - r_N).

Because every face weight is shared by its two cells, the matrix
M = diag(mu) * A is symmetric tridiagonal, so A is exactly
self-adjoint in the weighted inner product <u,v>_mu = sum(mu u conj(v))
and <A_{b,0} f, f>_mu coincides term-by-term with the discrete
gradient seminorm

    ||grad f||^2_{b,2} = sum_faces nu_{i+1/2} |f_{i+1} - f_i|^2
                         + nu_{N+1/2} |f_N|^2.

This exact summation-by-parts identity is what makes the Cayley time
step unitary and mass conservation exact in the evolution module.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import gamma, pi

import numpy as np
from scipy.linalg import solve_banded, solveh_banded

__all__ = [
    "DiscreteOperator",
    "GridError",
    "RadialField",
    "RadialGrid",
    "apply_operator",
    "assemble_operator",
    "build_grid",
    "field_from_csv",
    "field_to_csv",
    "gradient_norm_sq",
    "inner_product",
    "solve_shifted",
    "solve_tridiagonal",
    "weighted_norm",
]


class GridError(ValueError):
    """Mesh construction or field/grid consistency failure."""


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere in R^n."""
    return 2 * pi ** (n / 2) / gamma(n / 2)


@dataclass(frozen=True)
class RadialGrid:
    """Graded radial finite-volume mesh with weights for dimension n, exponent b."""

    n: int
    b: float
    r_max: float
    N: int
    grading: float
    nodes: np.ndarray  # cell-center radii, shape (N,)
    faces: np.ndarray  # cell-face radii, shape (N+1,), faces[0] = 0
    measure_weights: np.ndarray  # mu_i, shape (N,)
    face_weights: np.ndarray  # nu_{i+1/2} interior, shape (N-1,)
    outer_face_weight: float  # nu_{N+1/2} with ghost spacing r_max - r_N

    def __eq__(self, other) -> bool:
        if not isinstance(other, RadialGrid):
            return NotImplemented
        return (
            self.n == other.n
            and self.b == other.b
            and self.r_max == other.r_max
            and self.N == other.N
            and self.grading == other.grading
        )

    def __hash__(self) -> int:
        return hash((self.n, self.b, self.r_max, self.N, self.grading))


def build_grid(
    n: int,
    b: float,
    r_max: float = 30.0,
    N: int = 4096,
    grading: float = 2.0,
) -> RadialGrid:
    """Construct the graded mesh and all quadrature/flux weights."""
    if N < 16:
        raise GridError(f"N={N} too small (need >= 16)")
    if not r_max > 0:
        raise GridError(f"r_max={r_max} must be positive")
    if grading < 1:
        raise GridError(f"grading={grading} must be >= 1")
    if not n - 1 + b > 0:
        raise GridError(f"n-1+b = {n - 1 + b} <= 0: inner flux weight would not vanish")

    i = np.arange(N + 1, dtype=float)
    faces = r_max * (i / N) ** grading
    nodes = 0.5 * (faces[:-1] + faces[1:])
    if not np.all(np.diff(faces) > 0):
        raise GridError("degenerate mesh: faces not strictly increasing")

    S = sphere_area(n)
    mu = S * (faces[1:] ** n - faces[:-1] ** n) / n
    dr = np.diff(nodes)
    nu = S * faces[1:-1] ** (n - 1 + b) / dr
    nu_out = S * faces[-1] ** (n - 1 + b) / (faces[-1] - nodes[-1])

    total = float(np.sum(mu))
    exact = S * r_max**n / n
    if abs(total - exact) > 1e-12 * exact:
        raise GridError("cell measures do not telescope to the ball volume")

    return RadialGrid(
        n=n,
        b=b,
        r_max=r_max,
        N=N,
        grading=grading,
        nodes=nodes,
        faces=faces,
        measure_weights=mu,
        face_weights=nu,
        outer_face_weight=float(nu_out),
    )


@dataclass(frozen=True)
class RadialField:
    """Complex amplitudes on the nodes of one grid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.N,):
            raise GridError(
                f"field length {values.shape} does not match grid N={self.grid.N}"
            )
        if not np.all(np.isfinite(values)):
            raise GridError("field contains non-finite values")

    def copy(self) -> "RadialField":
        return RadialField(self.grid, self.values.copy())


def inner_product(f: RadialField, g: RadialField) -> complex:
    """Weighted inner product <f,g>_mu = sum(mu f conj(g))."""
    if f.grid != g.grid:
        raise GridError("fields live on different grids")
    return complex(np.sum(f.grid.measure_weights * f.values * np.conj(g.values)))


def weighted_norm(f: RadialField, a: float, q: float) -> float:
    """Weighted Lebesgue norm (sum mu_i r_i^a |f_i|^q)^{1/q}."""
    if q < 1:
        raise ValueError(f"norm order q={q} must be >= 1")
    if not a + f.grid.n > 0:
        raise ValueError(f"weight exponent a={a} with n={f.grid.n}: not integrable at 0")
    g = f.grid
    total = float(np.sum(g.measure_weights * g.nodes**a * np.abs(f.values) ** q))
    out = total ** (1.0 / q)
    if not np.isfinite(out):
        raise ValueError("weighted norm is not finite")
    return out


def gradient_norm_sq(f: RadialField) -> float:
    """Discrete ||grad f||^2_{b,2}: face-difference sum plus the Dirichlet edge term."""
    g = f.grid
    d = np.diff(f.values)
    interior = float(np.sum(g.face_weights * np.abs(d) ** 2))
    edge = g.outer_face_weight * abs(f.values[-1]) ** 2
    return interior + edge


@dataclass(frozen=True)
class DiscreteOperator:
    """A_{b,V} stored through its symmetric form M = diag(mu) A.

    sym_diag and sym_off are the diagonal and off-diagonal of M, so
    (A f) = (M f) / mu elementwise and self-adjointness in <.,.>_mu is
    automatic.  potential holds V at the nodes (zeros when V = 0).
    """

    grid: RadialGrid
    potential: np.ndarray
    sym_diag: np.ndarray  # shape (N,)
    sym_off: np.ndarray  # shape (N-1,), equals -nu_{i+1/2}


def assemble_operator(grid: RadialGrid, potential: np.ndarray | None = None) -> DiscreteOperator:
    """Assemble A_{b,V}; potential gives V at the nodes (None means V = 0)."""
    N = grid.N
    if potential is None:
        V = np.zeros(N)
    else:
        V = np.asarray(potential, dtype=float)
        if V.shape != (N,):
            raise GridError("potential values do not match grid size")
    diag = np.zeros(N)
    diag[:-1] += grid.face_weights
    diag[1:] += grid.face_weights
    diag[-1] += grid.outer_face_weight
    diag += grid.measure_weights * V
    off = -grid.face_weights
    return DiscreteOperator(grid=grid, potential=V, sym_diag=diag, sym_off=off)


def apply_operator(op: DiscreteOperator, f: RadialField) -> RadialField:
    """Matrix-vector product A f on the operator's grid."""
    if f.grid != op.grid:
        raise GridError("field and operator grids differ")
    v = f.values
    y = op.sym_diag * v
    y[:-1] += op.sym_off * v[1:]
    y[1:] += op.sym_off * v[:-1]
    return RadialField(op.grid, y / op.grid.measure_weights)


def solve_shifted(op: DiscreteOperator, shift: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (A + shift) x = rhs for real rhs, shift > -min eigenvalue.

    Works on the symmetric form: (M + shift diag(mu)) x = mu * rhs is
    symmetric positive definite for shift > 0 and V >= 0.
    """
    mu = op.grid.measure_weights
    ab = np.zeros((2, op.grid.N))
    ab[0, 1:] = op.sym_off
    ab[1, :] = op.sym_diag + shift * mu
    return solveh_banded(ab, mu * np.asarray(rhs), lower=False)


def solve_tridiagonal(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve the (possibly complex) symmetric tridiagonal system."""
    N = diag.shape[0]
    ab = np.zeros((3, N), dtype=np.result_type(diag, off, rhs))
    ab[0, 1:] = off
    ab[1, :] = diag
    ab[2, :-1] = off
    return solve_banded((1, 1), ab, rhs)


def field_to_csv(f: RadialField, path) -> None:
    """Serialize a field as CSV rows (r, re(u), im(u)) with a header."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "re", "im"])
        for r, v in zip(f.grid.nodes, f.values):
            w.writerow([f"{r:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def field_from_csv(grid: RadialGrid, path) -> RadialField:
    """Load a field saved by field_to_csv onto a matching grid."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header[:3]] != ["r", "re", "im"]:
            raise GridError(f"unexpected field CSV header {header!r}")
        for row in reader:
            rows.append((float(row[0]), float(row[1]), float(row[2])))
    if len(rows) != grid.N:
        raise GridError(f"field file has {len(rows)} rows, grid has N={grid.N}")
    r = np.array([row[0] for row in rows])
    if not np.allclose(r, grid.nodes, rtol=1e-9, atol=1e-12 * grid.r_max):
        raise GridError("field file nodes do not match the grid")
    vals = np.array([complex(re, im) for _, re, im in rows])
    return RadialField(grid, vals)
