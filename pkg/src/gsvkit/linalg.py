"""Exact linear algebra over the rationals.

Small dense routines (Gaussian elimination with exact Fraction
arithmetic) sized for face/dice matrices: reduced row echelon form,
rank, nullspace bases, and linear solves.  No pivot-magnitude games are
needed because arithmetic is exact; pivots are chosen first-nonzero.
"""

from __future__ import annotations

from fractions import Fraction

Matrix = list[list[Fraction]]
Vector = tuple[Fraction, ...]


def rref(rows: list[list]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (matrix, pivot column indices)."""
    mat: Matrix = [[Fraction(x) for x in row] for row in rows]
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, nrows) if mat[i][c] != 0), None)
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(nrows):
            if i != r and mat[i][c] != 0:
                factor = mat[i][c]
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return mat, pivots


def rank(rows: list[list]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: list[list], ncols: int | None = None) -> list[Vector]:
    """Basis of the right kernel {x : A x = 0}, one vector per free column.

    For an empty row list the kernel is all of Q^ncols (standard basis).
    """
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        basis = []
        for j in range(ncols):
            e = [Fraction(0)] * ncols
            e[j] = Fraction(1)
            basis.append(tuple(e))
        return basis
    ncols = len(rows[0])
    mat, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -mat[r][fc]
        basis.append(tuple(vec))
    return basis


def solve(rows: list[list], rhs: list) -> Vector | None:
    """One exact solution of A x = b, or None if inconsistent.

    Free variables are set to zero, which makes the returned solution a
    deterministic canonical choice.
    """
    if not rows:
        return None
    ncols = len(rows[0])
    aug = [list(row) + [b] for row, b in zip(rows, rhs)]
    mat, pivots = rref(aug)
    # a pivot in the appended column means b is outside the column space
    if ncols in pivots:
        return None
    sol = [Fraction(0)] * ncols
    for r, pc in enumerate(pivots):
        sol[pc] = mat[r][ncols]
    return tuple(sol)
