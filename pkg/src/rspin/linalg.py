"""Exact linear algebra over Q in Z/2-graded vector spaces.

Everything is a dense matrix of ``fractions.Fraction``; no floats, no
tolerances.  Graded spaces carry a parity per basis vector and the braiding
is the Koszul swap v (x) w -> (-1)^{|v||w|} w (x) v.  Purely even spaces
recover plain vector spaces.

Maps are stored column-convention: ``matrix[i][j]`` is the coefficient of
target basis vector i in the image of source basis vector j.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

Q = Fraction

EVEN = 0
ODD = 1


class LinAlgError(ValueError):
    pass


@dataclass(frozen=True)
class GradedSpace:
    """Finite-dimensional Z/2-graded space with a fixed ordered basis."""

    parities: tuple[int, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        if any(p not in (EVEN, ODD) for p in self.parities):
            raise LinAlgError("parities must be 0 (even) or 1 (odd)")
        if self.names is not None and len(self.names) != len(self.parities):
            raise LinAlgError("names and parities disagree in length")

    @property
    def dim(self) -> int:
        return len(self.parities)

    def name(self, i: int) -> str:
        return self.names[i] if self.names else f"e{i}"

    def is_even(self) -> bool:
        return all(p == EVEN for p in self.parities)

    def tensor(self, other: "GradedSpace") -> "GradedSpace":
        parities = tuple((p + q) % 2 for p in self.parities for q in other.parities)
        names = None
        if self.names and other.names:
            names = tuple(f"{a}(x){b}" for a in self.names for b in other.names)
        return GradedSpace(parities, names)

    def super_dimension(self) -> Fraction:
        return Q(sum(1 if p == EVEN else -1 for p in self.parities))


UNIT = GradedSpace((EVEN,), ("1",))


def tensor_spaces(*spaces: GradedSpace) -> GradedSpace:
    out = UNIT if not spaces else spaces[0]
    for s in spaces[1:]:
        out = out.tensor(s)
    return out


@dataclass(frozen=True)
class LinearMap:
    """An exact-rational linear map between graded spaces."""

    source: GradedSpace
    target: GradedSpace
    matrix: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.matrix) != self.target.dim:
            raise LinAlgError(
                f"matrix has {len(self.matrix)} rows, target dim {self.target.dim}")
        for row in self.matrix:
            if len(row) != self.source.dim:
                raise LinAlgError("ragged or mis-sized matrix")

    @staticmethod
    def from_rows(source: GradedSpace, target: GradedSpace, rows) -> "LinearMap":
        mat = tuple(tuple(Q(x) for x in row) for row in rows)
        return LinearMap(source, target, mat)

    @staticmethod
    def zero(source: GradedSpace, target: GradedSpace) -> "LinearMap":
        row = (Q(0),) * source.dim
        return LinearMap(source, target, (row,) * target.dim)

    @staticmethod
    def identity(space: GradedSpace) -> "LinearMap":
        return LinearMap(space, space, tuple(
            tuple(Q(1) if i == j else Q(0) for j in range(space.dim))
            for i in range(space.dim)))

    def parity(self) -> int | None:
        """Parity if the map is homogeneous, else None."""
        par = None
        for i, row in enumerate(self.matrix):
            for j, x in enumerate(row):
                if x:
                    p = (self.target.parities[i] + self.source.parities[j]) % 2
                    if par is None:
                        par = p
                    elif par != p:
                        return None
        return EVEN if par is None else par

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.matrix for x in row)

    def __add__(self, other: "LinearMap") -> "LinearMap":
        self._check_same_shape(other)
        return LinearMap(self.source, self.target, tuple(
            tuple(a + b for a, b in zip(r1, r2))
            for r1, r2 in zip(self.matrix, other.matrix)))

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        self._check_same_shape(other)
        return LinearMap(self.source, self.target, tuple(
            tuple(a - b for a, b in zip(r1, r2))
            for r1, r2 in zip(self.matrix, other.matrix)))

    def scale(self, c) -> "LinearMap":
        c = Q(c)
        return LinearMap(self.source, self.target, tuple(
            tuple(c * x for x in row) for row in self.matrix))

    def _check_same_shape(self, other: "LinearMap"):
        if self.source != other.source or self.target != other.target:
            raise LinAlgError("shape mismatch")

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        """Composition self . other."""
        return compose(self, other)

    def apply(self, vec: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
        if len(vec) != self.source.dim:
            raise LinAlgError("vector length mismatch")
        return tuple(sum((row[j] * vec[j] for j in range(len(vec))), Q(0))
                     for row in self.matrix)

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self.matrix)

    def power(self, k: int) -> "LinearMap":
        if self.source != self.target:
            raise LinAlgError("powers need an endomorphism")
        if k < 0:
            return invert(self).power(-k)
        out = LinearMap.identity(self.source)
        base = self
        while k:
            if k & 1:
                out = compose(base, out)
            base = compose(base, base)
            k >>= 1
        return out

    def transpose_matrix(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(tuple(self.matrix[i][j] for i in range(self.target.dim))
                     for j in range(self.source.dim))


def compose(g: LinearMap, f: LinearMap) -> LinearMap:
    if f.target.dim != g.source.dim:
        raise LinAlgError(f"cannot compose: dims {f.target.dim} != {g.source.dim}")
    if f.target.parities != g.source.parities:
        raise LinAlgError("cannot compose: parities disagree")
    rows = []
    for i in range(g.target.dim):
        grow = g.matrix[i]
        rows.append(tuple(
            sum((grow[k] * f.matrix[k][j] for k in range(f.target.dim)), Q(0))
            for j in range(f.source.dim)))
    return LinearMap(f.source, g.target, tuple(rows))


def compose_all(*maps: LinearMap) -> LinearMap:
    out = maps[0]
    for f in maps[1:]:
        out = compose(out, f)
    return out


def tensor(f: LinearMap, g: LinearMap) -> LinearMap:
    """Graded tensor product; homogeneous factors only.

    (f (x) g)(v (x) w) = (-1)^{|g||v|} f(v) (x) g(w).
    """
    pg = g.parity()
    if pg is None:
        raise LinAlgError("tensor factor is not parity-homogeneous")
    if f.parity() is None:
        raise LinAlgError("tensor factor is not parity-homogeneous")
    src = f.source.tensor(g.source)
    tgt = f.target.tensor(g.target)
    fs, gs = f.source.dim, g.source.dim
    ft, gt = f.target.dim, g.target.dim
    rows = [[Q(0)] * (fs * gs) for _ in range(ft * gt)]
    for i, k, j, l in product(range(ft), range(fs), range(gt), range(gs)):
        coeff = f.matrix[i][k] * g.matrix[j][l]
        if coeff:
            if pg == ODD and f.source.parities[k] == ODD:
                coeff = -coeff
            rows[i * gt + j][k * gs + l] = coeff
    return LinearMap(src, tgt, tuple(tuple(r) for r in rows))


def tensor_all(*maps: LinearMap) -> LinearMap:
    out = maps[0]
    for f in maps[1:]:
        out = tensor(out, f)
    return out


def braiding(v: GradedSpace, w: GradedSpace) -> LinearMap:
    """Koszul symmetry v (x) w -> w (x) v."""
    rows = [[Q(0)] * (v.dim * w.dim) for _ in range(w.dim * v.dim)]
    for i in range(v.dim):
        for j in range(w.dim):
            sign = -1 if v.parities[i] == ODD and w.parities[j] == ODD else 1
            rows[j * v.dim + i][i * w.dim + j] = Q(sign)
    return LinearMap(v.tensor(w), w.tensor(v), tuple(tuple(r) for r in rows))


def invert(f: LinearMap) -> LinearMap:
    """Exact inverse; raises LinAlgError when singular."""
    n = f.source.dim
    if f.target.dim != n:
        raise LinAlgError("only square maps can be inverted")
    aug = [list(f.matrix[i]) + [Q(1) if i == j else Q(0) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise LinAlgError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    inv = tuple(tuple(row[n:]) for row in aug)
    return LinearMap(f.target, f.source, inv)


def rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (rref rows, pivot column indices)."""
    mat = [list(r) for r in rows]
    nrows = len(mat)
    ncols = len(mat[0]) if mat else 0
    pivots = []
    row = 0
    for col in range(ncols):
        pivot = next((r for r in range(row, nrows) if mat[r][col] != 0), None)
        if pivot is None:
            continue
        mat[row], mat[pivot] = mat[pivot], mat[row]
        pv = mat[row][col]
        mat[row] = [x / pv for x in mat[row]]
        for r in range(nrows):
            if r != row and mat[r][col]:
                factor = mat[r][col]
                mat[r] = [x - factor * y for x, y in zip(mat[r], mat[row])]
        pivots.append(col)
        row += 1
        if row == nrows:
            break
    return mat, pivots


def column_space_basis(f: LinearMap) -> list[tuple[Fraction, ...]]:
    """A basis of the image: the columns of f at the rref pivot positions."""
    if f.target.dim == 0:
        return []
    _, pivots = rref([list(row) for row in f.matrix])
    return [f.column(j) for j in pivots]


def solve(f: LinearMap, target_vec: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    """One exact solution x of f(x) = target_vec; raises if inconsistent."""
    n, m = f.target.dim, f.source.dim
    aug = [[f.matrix[i][j] for j in range(m)] + [Q(target_vec[i])] for i in range(n)]
    mat, pivots = rref(aug)
    for row in mat:
        if all(x == 0 for x in row[:-1]) and row[-1] != 0:
            raise LinAlgError("inconsistent linear system")
    x = [Q(0)] * m
    for r, col in enumerate(pivots):
        if col == m:
            raise LinAlgError("inconsistent linear system")
        x[col] = mat[r][-1]
    return tuple(x)


def basis_vector(space: GradedSpace, i: int) -> tuple[Fraction, ...]:
    return tuple(Q(1) if j == i else Q(0) for j in range(space.dim))


def vector_map(space: GradedSpace, vec) -> LinearMap:
    """The map I -> space selecting the given vector."""
    return LinearMap(UNIT, space, tuple((Q(x),) for x in vec))


def scalar_of(f: LinearMap) -> Fraction:
    """The unique entry of a map I -> I."""
    if f.source.dim != 1 or f.target.dim != 1:
        raise LinAlgError("not a scalar map")
    return f.matrix[0][0]
