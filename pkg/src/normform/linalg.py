"""Exact dense linear algebra over an exact field.

Works on lists of lists whose entries are Fraction or GaussRat (anything
with exact +, -, *, / and truthiness).  Elimination uses the first nonzero
pivot in column order, so results are deterministic; there is no floating
point anywhere, hence no tolerance and no conditioning concern.
"""

from __future__ import annotations

from typing import Optional


def rref(rows: list, ncols: int) -> tuple:
    """Reduced row echelon form restricted to the first ncols columns.

    Mutates and returns (rows, pivot_cols).  Columns past ncols ride along,
    which is how augmented systems are reduced.
    """
    pivots = []
    r = 0
    nrows = len(rows)
    width = len(rows[0]) if rows else 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if rows[i][c]:
                pr = i
                break
        if pr is None:
            continue
        if pr != r:
            rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                ri, rr = rows[i], rows[r]
                rows[i] = [a - f * b for a, b in zip(ri, rr)]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows, pivots


def rank(matrix: list, ncols: Optional[int] = None) -> int:
    if not matrix:
        return 0
    n = ncols if ncols is not None else len(matrix[0])
    _, pivots = rref([list(row) for row in matrix], n)
    return len(pivots)


def nullspace(matrix: list, ncols: int) -> list:
    """Basis of the right kernel; vectors have 1 at their free column."""
    if not matrix:
        return [_unit_vec(ncols, j) for j in range(ncols)]
    red, pivots = rref([list(row) for row in matrix], ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [0] * ncols
        v[free] = 1
        for i, pc in enumerate(pivots):
            v[pc] = -red[i][free]
        basis.append(v)
    return basis


def _unit_vec(n: int, j: int) -> list:
    v = [0] * n
    v[j] = 1
    return v


class PreparedSolver:
    """Row-reduce a matrix once, then solve A x = b for many right sides.

    Stores the elimination transform E with R = E A in reduced echelon form.
    solve() puts every free variable at zero, so repeated calls with equal
    right sides give identical answers.
    """

    def __init__(self, matrix: list, ncols: int):
        self.ncols = ncols
        self.nrows = len(matrix)
        aug = [list(row) + _unit_vec(self.nrows, i) for i, row in enumerate(matrix)]
        if self.nrows == 0:
            self.red, self.pivots = [], []
        else:
            self.red, self.pivots = rref(aug, ncols)
        self.rank = len(self.pivots)

    def transform_rhs(self, b: list) -> list:
        out = []
        n = self.ncols
        for row in self.red:
            acc = 0
            for j, bj in enumerate(b):
                e = row[n + j]
                if e and bj:
                    acc = acc + e * bj
            out.append(acc)
        return out

    def solve(self, b: list) -> Optional[list]:
        """Particular solution with free variables zero, or None."""
        c = self.transform_rhs(b)
        for i in range(self.rank, self.nrows):
            if c[i]:
                return None
        x = [0] * self.ncols
        for i, pc in enumerate(self.pivots):
            x[pc] = c[i]
        return x

    def kernel(self) -> list:
        pivot_set = set(self.pivots)
        basis = []
        for free in range(self.ncols):
            if free in pivot_set:
                continue
            v = [0] * self.ncols
            v[free] = 1
            for i, pc in enumerate(self.pivots):
                v[pc] = -self.red[i][free]
            basis.append(v)
        return basis


def solve_unique(matrix: list, b: list, ncols: int) -> Optional[list]:
    """One-shot solve; None when inconsistent.  Free variables go to zero."""
    return PreparedSolver([list(r) for r in matrix], ncols).solve(b)


def mat_mul(a: list, b: list) -> list:
    """Dense product; inner zeros are skipped to keep exact ops cheap."""
    if not a or not b:
        return []
    bcols = len(b[0])
    out = []
    for row in a:
        acc = [0] * bcols
        for k, v in enumerate(row):
            if not v:
                continue
            brow = b[k]
            for j in range(bcols):
                w = brow[j]
                if w:
                    acc[j] = acc[j] + v * w
        out.append(acc)
    return out


def mat_vec(a: list, v: list) -> list:
    out = []
    for row in a:
        acc = 0
        for x, y in zip(row, v):
            if x and y:
                acc = acc + x * y
        out.append(acc)
    return out


def vec_mat(v: list, a: list) -> list:
    if not a:
        return []
    ncols = len(a[0])
    acc = [0] * ncols
    for k, x in enumerate(v):
        if not x:
            continue
        row = a[k]
        for j in range(ncols):
            y = row[j]
            if y:
                acc[j] = acc[j] + x * y
    return acc


def identity(n: int) -> list:
    return [_unit_vec(n, i) for i in range(n)]
