"""Exact linear algebra: fraction-free rank, rational kernels, and the same over Q[[q]]/(q^M).

Matrices are lists of sparse rows ``{column: value}``.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import List, Mapping, Sequence, Tuple

Row = Mapping[int, object]


def _int_row(row: Row, ncols: int) -> List[int]:
    den = 1
    for v in row.values():
        if isinstance(v, Fraction):
            den = lcm(den, v.denominator)
    out = [0] * ncols
    for c, v in row.items():
        out[c] = int(v * den)
    g = 0
    for x in out:
        g = gcd(g, x)
    if g > 1:
        out = [x // g for x in out]
    return out


def rank_fraction_free(rows: Sequence[Row], ncols: int) -> int:
    """Rank by Bareiss elimination after clearing denominators per row."""
    m = [r for r in (_int_row(row, ncols) for row in rows) if any(r)]
    nrows = len(m)
    rank = 0
    prev = 1
    for col in range(ncols):
        if rank == nrows:
            break
        piv = next((r for r in range(rank, nrows) if m[r][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        p = m[rank][col]
        top = m[rank]
        for r in range(rank + 1, nrows):
            row = m[r]
            a = row[col]
            if a:
                for j in range(col + 1, ncols):
                    row[j] = (p * row[j] - a * top[j]) // prev
            else:
                for j in range(col + 1, ncols):
                    if row[j]:
                        row[j] = (p * row[j]) // prev
            row[col] = 0
        prev = p
        rank += 1
    return rank


def nullspace_rational(rows: Sequence[Row], ncols: int) -> List[List[Fraction]]:
    """Basis of {x : A x = 0}, one vector per free column (that entry = 1)."""
    m = [[Fraction(0)] * ncols for _ in rows]
    for i, row in enumerate(rows):
        for c, v in row.items():
            m[i][c] = Fraction(v)
    pivots: List[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fcol]
        basis.append(v)
    return basis


# ---------------------------------------------------------------- Q[[q]]/(q^M)


def _val(a: List[Fraction], M: int) -> int:
    for i, x in enumerate(a):
        if x:
            return i
    return M


def _mul(a, b, M):
    out = [Fraction(0)] * M
    for i, x in enumerate(a):
        if x:
            for j in range(M - i):
                y = b[j]
                if y:
                    out[i + j] += x * y
    return out


def _inv_unit(a, M):
    inv = [Fraction(0)] * M
    inv[0] = 1 / a[0]
    for n in range(1, M):
        acc = Fraction(0)
        for j in range(1, n + 1):
            if a[j]:
                acc += a[j] * inv[n - j]
        inv[n] = -acc * inv[0]
    return inv


def _dense_series(v, M: int) -> List[Fraction]:
    """Accept a QSeries-like (has ``_c``), a mapping exp -> value, or a scalar."""
    out = [Fraction(0)] * M
    items = v._c.items() if hasattr(v, "_c") else (v.items() if isinstance(v, Mapping) else [(0, v)])
    for e, x in items:
        if e < 0:
            raise ValueError("negative q-exponents have no meaning over Q[[q]]")
        if e < M:
            out[e] = Fraction(x)
    return out


class QAdicElimination:
    """Complete-pivoting elimination over Q[[q]]/(q^M).

    Pivots are chosen with minimal q-valuation, so the pivot valuations are
    the invariant factors (Smith form) of the truncated matrix. Pivots with
    valuation >= M are indistinguishable from zero at this truncation.
    """

    def __init__(self, rows: Sequence[Row], ncols: int, M: int):
        self.M = M
        self.ncols = ncols
        self.m = []
        for row in rows:
            dense = [[Fraction(0)] * M for _ in range(ncols)]
            for c, v in row.items():
                dense[c] = _dense_series(v, M)
            self.m.append(dense)
        self.pivots: List[Tuple[int, int, int]] = []  # (row, col, valuation)
        self._run()

    def _run(self):
        M, m = self.M, self.m
        used_rows, used_cols = set(), set()
        while True:
            best = None
            for r in range(len(m)):
                if r in used_rows:
                    continue
                for c in range(self.ncols):
                    if c in used_cols:
                        continue
                    v = _val(m[r][c], M)
                    if v < M and (best is None or v < best[2]):
                        best = (r, c, v)
                        if v == 0:
                            break
                if best is not None and best[2] == 0:
                    break
            if best is None:
                return
            r0, c0, v0 = best
            used_rows.add(r0)
            used_cols.add(c0)
            self.pivots.append(best)
            piv = m[r0][c0]
            unit_inv = _inv_unit(piv[v0:] + [Fraction(0)] * v0, M)
            for r in range(len(m)):
                if r in used_rows:
                    continue
                a = m[r][c0]
                if _val(a, M) >= M:
                    continue
                # factor = (a / q^v0) * unit^{-1}; exact because val(a) >= v0
                fac = _mul(a[v0:] + [Fraction(0)] * v0, unit_inv, M)
                for c in range(self.ncols):
                    if c in used_cols and c != c0:
                        continue
                    b = m[r0][c]
                    if _val(b, M) >= M:
                        continue
                    prod_ = _mul(fac, b, M)
                    m[r][c] = [x - y for x, y in zip(m[r][c], prod_)]

    @property
    def valuations(self) -> List[int]:
        return sorted(v for _, _, v in self.pivots)

    def rank(self) -> int:
        """Number of invariant factors below q^M."""
        return len(self.pivots)

    def rank_at_zero(self) -> int:
        return sum(1 for v in self.valuations if v == 0)

    def kernel(self) -> Tuple[List[List[List[Fraction]]], int]:
        """Kernel basis mod q^(M - max pivot valuation), one vector per free column."""
        M = self.M
        pcols = {c for _, c, _ in self.pivots}
        free = [c for c in range(self.ncols) if c not in pcols]
        lost = max((v for _, _, v in self.pivots), default=0)
        basis = []
        for fcol in free:
            x = [[Fraction(0)] * M for _ in range(self.ncols)]
            x[fcol][0] = Fraction(1)
            for r0, c0, v0 in reversed(self.pivots):
                rhs = [Fraction(0)] * M
                for c in range(self.ncols):
                    if c == c0:
                        continue
                    a = self.m[r0][c]
                    if _val(a, M) >= M or _val(x[c], M) >= M:
                        continue
                    p = _mul(a, x[c], M)
                    rhs = [s - t for s, t in zip(rhs, p)]
                piv = self.m[r0][c0]
                unit_inv = _inv_unit(piv[v0:] + [Fraction(0)] * v0, M)
                shifted = rhs[v0:] + [Fraction(0)] * v0
                x[c0] = _mul(shifted, unit_inv, M)
            basis.append(x)
        return basis, M - lost
