"""Exact rational matrices and subspaces.

Scalars are :class:`fractions.Fraction`. Matrices are immutable and indexed
0-based through ``m[i, j]``; the combinatorial helpers (pivot lists, minor
selections) use 1-based positions.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

__all__ = [
    "Scalar",
    "to_scalar",
    "scalar_to_str",
    "ExactMatrix",
    "Subspace",
    "rref",
    "rref_with_transform",
    "rank",
    "right_kernel",
    "minor",
    "det",
    "intersect",
    "span_join",
]

Scalar = Fraction


def to_scalar(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to an exact scalar")


def scalar_to_str(x: Fraction) -> str:
    return str(x)


class ExactMatrix:
    """Immutable matrix of Fractions."""

    __slots__ = ("_rows", "_shape")

    def __init__(self, rows: Iterable[Iterable]):
        data = tuple(tuple(to_scalar(x) for x in row) for row in rows)
        if not data or not data[0]:
            raise ValueError("matrix must have at least one row and one column")
        ncols = len(data[0])
        if any(len(r) != ncols for r in data):
            raise ValueError("ragged rows")
        self._rows = data
        self._shape = (len(data), ncols)

    @classmethod
    def _trusted(cls, rows: tuple) -> "ExactMatrix":
        m = object.__new__(cls)
        m._rows = rows
        m._shape = (len(rows), len(rows[0]))
        return m

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        one, zero = Fraction(1), Fraction(0)
        return cls._trusted(
            tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))
        )

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        zero = Fraction(0)
        return cls._trusted(tuple((zero,) * cols for _ in range(rows)))

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence]) -> "ExactMatrix":
        return cls(zip(*cols))

    @property
    def shape(self) -> tuple[int, int]:
        return self._shape

    @property
    def nrows(self) -> int:
        return self._shape[0]

    @property
    def ncols(self) -> int:
        return self._shape[1]

    @property
    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._rows

    def columns(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(zip(*self._rows))

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self._rows)

    def __getitem__(self, idx) -> Fraction:
        i, j = idx
        return self._rows[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, ExactMatrix) and self._rows == other._rows

    def __hash__(self) -> int:
        return hash(self._rows)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self._rows)
        return f"ExactMatrix([{body}])"

    @property
    def T(self) -> "ExactMatrix":
        return ExactMatrix._trusted(tuple(zip(*self._rows)))

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = other.columns()
        return ExactMatrix._trusted(
            tuple(
                tuple(sum((a * b for a, b in zip(r, c) if a and b), Fraction(0)) for c in cols)
                for r in self._rows
            )
        )

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return ExactMatrix._trusted(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._rows, other._rows))
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return ExactMatrix._trusted(
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._rows, other._rows))
        )

    def scale(self, c) -> "ExactMatrix":
        c = to_scalar(c)
        return ExactMatrix._trusted(tuple(tuple(c * a for a in r) for r in self._rows))

    def hstack(self, *others: "ExactMatrix") -> "ExactMatrix":
        rows = list(self._rows)
        for o in others:
            if o.nrows != self.nrows:
                raise ValueError("row count mismatch in hstack")
            rows = [a + b for a, b in zip(rows, o._rows)]
        return ExactMatrix._trusted(tuple(rows))

    def vstack(self, *others: "ExactMatrix") -> "ExactMatrix":
        rows = list(self._rows)
        for o in others:
            if o.ncols != self.ncols:
                raise ValueError("column count mismatch in vstack")
            rows.extend(o._rows)
        return ExactMatrix._trusted(tuple(rows))

    def select(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "ExactMatrix":
        """Submatrix from 0-based row/column index lists (``None`` keeps all)."""
        src = self._rows if rows is None else [self._rows[i] for i in rows]
        if cols is not None:
            src = [tuple(r[j] for j in cols) for r in src]
        return ExactMatrix._trusted(tuple(tuple(r) for r in src))

    def is_zero(self) -> bool:
        return not any(any(r) for r in self._rows)

    def rank(self) -> int:
        return rank(self)

    def det(self) -> Fraction:
        return det(self)

    def inverse(self) -> "ExactMatrix":
        n = self.nrows
        if n != self.ncols:
            raise ValueError("inverse of a non-square matrix")
        aug = self.hstack(ExactMatrix.identity(n))
        r, piv = rref(aug)
        if piv[:n] != list(range(1, n + 1)):
            raise ValueError("matrix is singular")
        return r.select(cols=range(n, 2 * n))

    def solve(self, rhs: "ExactMatrix") -> "ExactMatrix":
        """Return X with ``self @ X == rhs``; raises if no exact solution exists."""
        if rhs.nrows != self.nrows:
            raise ValueError("shape mismatch in solve")
        n = self.ncols
        aug = self.hstack(rhs)
        r, piv = rref(aug)
        if any(p > n for p in piv):
            raise ValueError("inconsistent linear system")
        sol = [[Fraction(0)] * rhs.ncols for _ in range(n)]
        for row, p in enumerate(piv):
            sol[p - 1] = list(r.rows[row][n:])
        return ExactMatrix(sol)

    def to_json(self) -> dict:
        return {
            "rows": self.nrows,
            "cols": self.ncols,
            "entries": [[str(x) for x in r] for r in self._rows],
        }

    @classmethod
    def from_json(cls, obj) -> "ExactMatrix":
        """Accept ``{rows, cols, entries}`` or a bare nested list."""
        if isinstance(obj, dict):
            entries = obj["entries"]
            m = cls(entries)
            if ("rows" in obj and obj["rows"] != m.nrows) or ("cols" in obj and obj["cols"] != m.ncols):
                raise ValueError("declared shape does not match entries")
            return m
        return cls(obj)


def _integer_rows(rows) -> list[list[int]]:
    out = []
    for r in rows:
        d = lcm(*(x.denominator for x in r)) if r else 1
        out.append([int(x * d) for x in r])
    return out


def _bareiss_det(a: list[list[int]]) -> int:
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rowk = a[k]
        for i in range(k + 1, n):
            ai = a[i]
            aik = ai[k]
            for j in range(k + 1, n):
                ai[j] = (ai[j] * akk - aik * rowk[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def _det_rows(rows) -> Fraction:
    n = len(rows)
    if n == 0:
        return Fraction(1)
    scale = 1
    ints = []
    for r in rows:
        d = lcm(*(x.denominator for x in r))
        scale *= d
        ints.append([int(x * d) for x in r])
    return Fraction(_bareiss_det(ints), scale)


def det(m: ExactMatrix) -> Fraction:
    """Determinant by fraction-free (Bareiss) elimination."""
    if m.nrows != m.ncols:
        raise ValueError("determinant of a non-square matrix")
    return _det_rows(m.rows)


def minor(m: ExactMatrix, row_sel: Sequence[int], col_sel: Sequence[int]) -> Fraction:
    """Determinant of the submatrix on 1-based, strictly increasing selections."""
    if len(row_sel) != len(col_sel):
        raise ValueError("row and column selections differ in size")
    for sel, bound in ((row_sel, m.nrows), (col_sel, m.ncols)):
        if any(b <= a for a, b in zip(sel, sel[1:])):
            raise ValueError("selection must be strictly increasing")
        if sel and (sel[0] < 1 or sel[-1] > bound):
            raise IndexError("selection out of range")
    rows = m.rows
    return _det_rows([[rows[i - 1][j - 1] for j in col_sel] for i in row_sel])


def _rref_rows(rows: list[list[Fraction]], track: list[list[Fraction]] | None = None):
    nr = len(rows)
    nc = len(rows[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        p = next((i for i in range(r, nr) if rows[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            rows[r], rows[p] = rows[p], rows[r]
            if track is not None:
                track[r], track[p] = track[p], track[r]
        inv = 1 / rows[r][c]
        if inv != 1:
            rows[r] = [x * inv for x in rows[r]]
            if track is not None:
                track[r] = [x * inv for x in track[r]]
        pr = rows[r]
        for i in range(nr):
            f = rows[i][c]
            if i != r and f != 0:
                rows[i] = [a - f * b for a, b in zip(rows[i], pr)]
                if track is not None:
                    track[i] = [a - f * b for a, b in zip(track[i], track[r])]
        pivots.append(c + 1)
        r += 1
    return rows, pivots


def rref(m: ExactMatrix) -> tuple[ExactMatrix, list[int]]:
    """Reduced row-echelon form and 1-based pivot columns."""
    rows, piv = _rref_rows([list(r) for r in m.rows])
    return ExactMatrix._trusted(tuple(tuple(r) for r in rows)), piv


def rref_with_transform(m: ExactMatrix) -> tuple[ExactMatrix, list[int], ExactMatrix]:
    """Like :func:`rref` but also returns the invertible E with ``E @ m == R``."""
    track = [list(r) for r in ExactMatrix.identity(m.nrows).rows]
    rows, piv = _rref_rows([list(r) for r in m.rows], track)
    return (
        ExactMatrix._trusted(tuple(tuple(r) for r in rows)),
        piv,
        ExactMatrix._trusted(tuple(tuple(r) for r in track)),
    )


def _int_rank(rows: list[list[int]]) -> int:
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    nc = len(rows[0])
    rk = 0
    for c in range(nc):
        p = next((i for i in range(rk, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[rk], rows[p] = rows[p], rows[rk]
        piv = rows[rk]
        a = piv[c]
        for i in range(rk + 1, len(rows)):
            b = rows[i][c]
            if b:
                rows[i] = [a * x - b * y for x, y in zip(rows[i], piv)]
        rk += 1
        if rk == len(rows):
            break
    return rk


def rank(m: ExactMatrix) -> int:
    """Exact rank (integer elimination after clearing row denominators)."""
    rows = m.rows if m.nrows <= m.ncols else m.T.rows
    return _int_rank(_integer_rows(rows))


def _kernel_columns(m: ExactMatrix) -> list[tuple[Fraction, ...]]:
    r, piv = rref(m)
    n = m.ncols
    pivset = set(piv)
    basis = []
    for free in range(1, n + 1):
        if free in pivset:
            continue
        v = [Fraction(0)] * n
        v[free - 1] = Fraction(1)
        for row, p in enumerate(piv):
            v[p - 1] = -r.rows[row][free - 1]
        basis.append(tuple(v))
    return basis


class Subspace:
    """A linear subspace of Q^n with a canonical column basis.

    The basis is the transpose of the nonzero rows of the RREF of the
    spanning vectors, so equal subspaces compare equal.
    """

    __slots__ = ("ambient_dim", "_basis")

    def __init__(self, ambient_dim: int, vectors: Iterable[Sequence] = ()):
        vecs = [tuple(to_scalar(x) for x in v) for v in vectors]
        if any(len(v) != ambient_dim for v in vecs):
            raise ValueError("vector length does not match ambient dimension")
        self.ambient_dim = ambient_dim
        if vecs:
            rows, piv = _rref_rows([list(v) for v in vecs])
            self._basis = tuple(tuple(rows[i]) for i in range(len(piv)))
        else:
            self._basis = ()

    @classmethod
    def column_span(cls, m: ExactMatrix) -> "Subspace":
        return cls(m.nrows, m.columns())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, ExactMatrix.identity(n).rows)

    @property
    def dim(self) -> int:
        return len(self._basis)

    def vectors(self) -> tuple[tuple[Fraction, ...], ...]:
        return self._basis

    @property
    def basis(self) -> ExactMatrix | None:
        """Basis vectors as matrix columns, or ``None`` for the zero subspace."""
        if not self._basis:
            return None
        return ExactMatrix._trusted(tuple(zip(*self._basis)))

    def contains(self, v: Sequence) -> bool:
        v = tuple(to_scalar(x) for x in v)
        if not any(v):
            return True
        return Subspace(self.ambient_dim, self._basis + (v,)).dim == self.dim

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self._basis == other._basis
        )

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self._basis))

    def __repr__(self) -> str:
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def right_kernel(m: ExactMatrix) -> Subspace:
    return Subspace(m.ncols, _kernel_columns(m))


def _check_ambient(u: Subspace, v: Subspace) -> None:
    if u.ambient_dim != v.ambient_dim:
        raise ValueError(f"ambient dimensions differ: {u.ambient_dim} vs {v.ambient_dim}")


def span_join(u: Subspace, v: Subspace) -> Subspace:
    _check_ambient(u, v)
    return Subspace(u.ambient_dim, u.vectors() + v.vectors())


def intersect(u: Subspace, v: Subspace) -> Subspace:
    _check_ambient(u, v)
    n = u.ambient_dim
    if u.dim == 0 or v.dim == 0:
        return Subspace(n)
    ub, vb = u.vectors(), v.vectors()
    # [U | -V] x = 0  =>  U x_u lies in both
    system = ExactMatrix(
        [[*(b[i] for b in ub), *(-b[i] for b in vb)] for i in range(n)]
    )
    out = []
    for x in _kernel_columns(system):
        coeffs = x[: len(ub)]
        out.append(tuple(sum((c * b[i] for c, b in zip(coeffs, ub)), Fraction(0)) for i in range(n)))
    return Subspace(n, out)
