"""Exact rational matrix helpers backed by python-flint."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import flint
import numpy as np

from .errors import RankError


def fmpz(rows: Sequence[Sequence[int]]) -> flint.fmpz_mat:
    return flint.fmpz_mat([[int(v) for v in row] for row in rows])


def fmpq(rows) -> flint.fmpq_mat:
    if isinstance(rows, flint.fmpz_mat):
        return flint.fmpq_mat(rows)
    return flint.fmpq_mat(fmpz(rows))


def to_fractions(m: flint.fmpq_mat) -> list[list[Fraction]]:
    return [[Fraction(int(v.p), int(v.q)) for v in row] for row in m.tolist()]


def to_float(m: flint.fmpq_mat) -> np.ndarray:
    num, den = m.numer_denom()
    den = int(den)
    out = np.empty((m.nrows(), m.ncols()))
    for i, row in enumerate(num.tolist()):
        for j, v in enumerate(row):
            out[i, j] = Fraction(int(v), den).__float__()
    return out


def inverse(G: flint.fmpq_mat) -> flint.fmpq_mat:
    if G.rank() < G.nrows():
        raise RankError(f"singular {G.nrows()}x{G.nrows()} Gram matrix (rank {G.rank()})")
    return G.inv()


def pivot_columns(G: flint.fmpq_mat) -> list[int]:
    """Column indices of a maximal linearly independent column subset."""
    R, r = G.rref()
    piv = []
    for i in range(r):
        for j in range(R.ncols()):
            if R[i, j] != 0:
                piv.append(j)
                break
    return piv


def submatrix(G: flint.fmpq_mat, rows: Sequence[int], cols: Sequence[int]) -> flint.fmpq_mat:
    return flint.fmpq_mat([[G[i, j] for j in cols] for i in rows])


def pseudo_inverse(G: flint.fmpq_mat) -> flint.fmpq_mat:
    """Moore-Penrose inverse of a symmetric rational matrix, exactly.

    Uses the rank factorization G = F C with F the independent columns.
    """
    n = G.nrows()
    piv = pivot_columns(G)
    if len(piv) == n:
        return G.inv()
    F = submatrix(G, range(n), piv)
    C = submatrix(G, piv, piv).inv() * submatrix(G, piv, range(n))
    Ct = C.transpose()
    Ft = F.transpose()
    return Ct * (C * Ct).inv() * (Ft * F).inv() * Ft


__all__ = [
    "fmpz",
    "fmpq",
    "to_fractions",
    "to_float",
    "inverse",
    "pivot_columns",
    "submatrix",
    "pseudo_inverse",
]
