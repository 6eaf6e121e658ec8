"""GF(2) helpers on Python int bitsets.

A vector is an int whose bit i is coordinate i. A basis is a tuple of ints.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence


def popcount(v: int) -> int:
    return bin(v).count("1")


def rref(rows: Iterable[int]) -> tuple[int, ...]:
    """Reduced row-echelon basis of the span of rows.

    Pivots are leading (most significant) bits. Every pivot bit is cleared in
    all other rows, and rows are returned in descending order, which makes the
    result a canonical form of the subspace.
    """
    basis: dict[int, int] = {}
    for r in rows:
        for p, b in basis.items():
            if (r >> p) & 1:
                r ^= b
        if not r:
            continue
        p = r.bit_length() - 1
        for q in basis:
            if (basis[q] >> p) & 1:
                basis[q] ^= r
        basis[p] = r
    return tuple(basis[p] for p in sorted(basis, reverse=True))


def rank(rows: Iterable[int]) -> int:
    return len(rref(rows))


def reduce(v: int, basis: Sequence[int]) -> int:
    """Reduce v against an RREF basis; zero iff v is in the span."""
    for b in basis:
        p = b.bit_length() - 1
        if (v >> p) & 1:
            v ^= b
    return v


def in_span(v: int, basis: Sequence[int]) -> bool:
    return reduce(v, basis) == 0


def span(basis: Sequence[int]) -> Iterator[int]:
    """All 2^len(basis) elements of the span, in Gray-code order."""
    v = 0
    yield v
    for i in range(1, 1 << len(basis)):
        # bit that flips between gray(i-1) and gray(i)
        v ^= basis[(i & -i).bit_length() - 1]
        yield v


def orthogonal_complement(basis: Sequence[int], n: int) -> tuple[int, ...]:
    """Basis of {x in F2^n : x.b = 0 for all b} (standard dot product)."""
    rows = rref(basis)
    pivots = [r.bit_length() - 1 for r in rows]
    free = [c for c in range(n) if c not in pivots]
    out = []
    for f in free:
        # solve for pivot coordinates with x_f = 1 and other free bits 0
        x = 1 << f
        for r, p in zip(rows, pivots):
            if (r >> f) & 1:
                x |= 1 << p
        out.append(x)
    return rref(out)


def mat_vec(cols: Sequence[int], x: int) -> int:
    """Apply the matrix whose j-th column is cols[j] to x."""
    out = 0
    j = 0
    while x:
        if x & 1:
            out ^= cols[j]
        x >>= 1
        j += 1
    return out


__all__ = [
    "popcount",
    "rref",
    "rank",
    "reduce",
    "in_span",
    "span",
    "orthogonal_complement",
    "mat_vec",
]
