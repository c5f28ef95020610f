"""Exact linear algebra on sparse rational matrices.

Three rank paths are provided and cross-checked by callers:
  * rank_modular   -- elimination mod a 31-bit prime (numpy int64 when dense enough)
  * rank_sparse_ff -- fraction-free integer elimination on sparse rows
  * rank_dense     -- plain Fraction Gaussian elimination (oracle, small only)
Nullspaces come from a canonical sparse RREF over Fractions.
"""
from fractions import Fraction
from math import gcd, lcm

import numpy as np

PRIME = 2147483647  # 2^31 - 1; products fit in int64
DENSE_ORACLE_LIMIT = 200


class CrossCheckError(RuntimeError):
    """Two independent rank computations disagreed."""


# helpers ----------------------------------------------------------------------
def clean(vec):
    return {k: v for k, v in vec.items() if v}


def add_scaled(acc, vec, c):
    if not c:
        return acc
    for k, v in vec.items():
        s = acc.get(k, 0) + c * v
        if s:
            acc[k] = s
        else:
            acc.pop(k, None)
    return acc


def _index_rows(rows):
    """Rows given as dicts with hashable keys -> rows keyed by column int."""
    cols = sorted({k for r in rows for k in r}, key=_sort_key)
    pos = {c: i for i, c in enumerate(cols)}
    return [{pos[k]: v for k, v in r.items() if v} for r in rows], cols


def _sort_key(k):
    return repr(k) if not isinstance(k, int) else (0, k)


def _integer_row(row):
    den = 1
    for v in row.values():
        den = lcm(den, Fraction(v).denominator)
    out = {k: int(Fraction(v) * den) for k, v in row.items()}
    g = 0
    for v in out.values():
        g = gcd(g, v)
    if g > 1:
        out = {k: v // g for k, v in out.items()}
    return {k: v for k, v in out.items() if v}


# rank paths -------------------------------------------------------------------------
def rank_dense(rows, ncols=None):
    """Fraction Gaussian elimination on a dense copy (oracle)."""
    rows, cols = _index_rows(rows)
    n = len(cols) if ncols is None else max(ncols, len(cols))
    mat = [[Fraction(r.get(j, 0)) for j in range(n)] for r in rows]
    rank = 0
    for j in range(n):
        piv = None
        for i in range(rank, len(mat)):
            if mat[i][j]:
                piv = i
                break
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        p = mat[rank][j]
        for i in range(rank + 1, len(mat)):
            f = mat[i][j]
            if f:
                f = f / p
                ri, rr = mat[i], mat[rank]
                for t in range(j, n):
                    if rr[t]:
                        ri[t] -= f * rr[t]
        rank += 1
    return rank


def rank_sparse_ff(rows):
    """Fraction-free elimination on integer-scaled sparse rows.

    Each row is kept primitive (content divided out) so entries stay small.
    Pivot choice: shortest remaining row containing the lowest column.
    """
    work = [_integer_row(r) for r in _index_rows(rows)[0]]
    work = [r for r in work if r]
    rank = 0
    # bucket rows by leading column
    by_lead = {}
    for r in work:
        by_lead.setdefault(min(r), []).append(r)
    while by_lead:
        c = min(by_lead)
        bucket = by_lead.pop(c)
        bucket.sort(key=len)
        piv = bucket[0]
        rank += 1
        p = piv[c]
        for r in bucket[1:]:
            a = r[c]
            new = {}
            for k, v in r.items():
                new[k] = p * v
            for k, v in piv.items():
                s = new.get(k, 0) - a * v
                if s:
                    new[k] = s
                else:
                    new.pop(k, None)
            if not new:
                continue
            g = 0
            for v in new.values():
                g = gcd(g, v)
                if g == 1:
                    break
            if g > 1:
                new = {k: v // g for k, v in new.items()}
            by_lead.setdefault(min(new), []).append(new)
    return rank


def _mod_rows(rows, p):
    out = []
    for r in rows:
        m = {}
        for k, v in r.items():
            v = Fraction(v)
            x = (v.numerator % p) * pow(v.denominator % p, -1, p) % p
            if x:
                m[k] = x
        if m:
            out.append(m)
    return out


def rank_modular(rows, p=PRIME):
    rows, cols = _index_rows(rows)
    mrows = _mod_rows(rows, p)
    if not mrows:
        return 0
    n = len(cols)
    if len(mrows) * n <= 4_000_000:
        mat = np.zeros((len(mrows), n), dtype=np.int64)
        for i, r in enumerate(mrows):
            for k, v in r.items():
                mat[i, k] = v
        return _rank_mod_dense(mat, p)
    return _rank_mod_sparse(mrows, p)


def _rank_mod_dense(mat, p):
    mat = mat.copy()
    nr, nc = mat.shape
    rank = 0
    for j in range(nc):
        if rank == nr:
            break
        nz = np.nonzero(mat[rank:, j])[0]
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            mat[[rank, piv]] = mat[[piv, rank]]
        inv = pow(int(mat[rank, j]), -1, p)
        mat[rank] = (mat[rank] * inv) % p
        below = mat[rank + 1:, j].copy()
        idx = np.nonzero(below)[0]
        if idx.size:
            rows = rank + 1 + idx
            mat[rows] = (mat[rows] - (below[idx, None] * mat[rank][None, :]) % p) % p
        rank += 1
    return rank


def _rank_mod_sparse(rows, p):
    by_lead = {}
    for r in rows:
        by_lead.setdefault(min(r), []).append(r)
    rank = 0
    while by_lead:
        c = min(by_lead)
        bucket = by_lead.pop(c)
        bucket.sort(key=len)
        piv = bucket[0]
        rank += 1
        inv = pow(piv[c], -1, p)
        piv = {k: v * inv % p for k, v in piv.items()}
        for r in bucket[1:]:
            a = r[c]
            new = dict(r)
            for k, v in piv.items():
                s = (new.get(k, 0) - a * v) % p
                if s:
                    new[k] = s
                else:
                    new.pop(k, None)
            if new:
                by_lead.setdefault(min(new), []).append(new)
    return rank


def checked_rank(rows, log=None, label=""):
    """Exact rank with the modular and (when small) dense cross-checks.

    log, if given, is a list that receives one record per call.
    """
    rows = [clean(r) for r in rows]
    rows = [r for r in rows if r]
    exact = rank_sparse_ff(rows)
    mod = rank_modular(rows)
    ncols = len({k for r in rows for k in r})
    dense = None
    if len(rows) <= DENSE_ORACLE_LIMIT and ncols <= DENSE_ORACLE_LIMIT:
        dense = rank_dense(rows)
    if log is not None:
        log.append({"label": label, "rows": len(rows), "cols": ncols,
                    "exact": exact, "modular": mod, "dense": dense})
    if mod != exact:
        raise CrossCheckError(f"{label}: modular rank {mod} != exact rank {exact}")
    if dense is not None and dense != exact:
        raise CrossCheckError(f"{label}: dense rank {dense} != sparse rank {exact}")
    return exact


# RREF / nullspace ---------------------------------------------------------------------
def rref(rows, col_order=None):
    """Reduced row echelon form of sparse Fraction rows.

    col_order: list of column keys fixing the pivot preference (earlier
    columns pivot first).  Returns (pivot_rows, pivot_cols) with
    pivot_rows[i][pivot_cols[i]] == 1.
    """
    if col_order is None:
        col_order = sorted({k for r in rows for k in r}, key=_sort_key)
    rank_of = {c: i for i, c in enumerate(col_order)}
    pivots = {}  # col -> row
    for r in rows:
        r = {k: Fraction(v) for k, v in r.items() if v}
        # clear every pivot column; pivot rows vanish on the other pivot
        # columns, so one pass suffices
        for c in [c for c in r if c in pivots]:
            x = r.get(c)
            if x:
                add_scaled(r, pivots[c], -x)
        if not r:
            continue
        lead = min(r, key=rank_of.__getitem__)
        inv = 1 / r[lead]
        r = {k: v * inv for k, v in r.items()}
        # back-substitute into existing pivot rows
        for c, prow in pivots.items():
            if lead in prow:
                add_scaled(prow, r, -prow[lead])
        pivots[lead] = r
    pcols = sorted(pivots, key=rank_of.__getitem__)
    return [pivots[c] for c in pcols], pcols


def nullspace(rows, cols, with_free=False):
    """Basis of {x : rows . x = 0} over the ordered column list cols.

    Basis vectors are indexed by free columns in order; each has a 1 at its
    free column and zeros at the other free columns (canonical).
    """
    prows, pcols = rref(rows, list(cols))
    pset = set(pcols)
    basis = []
    free = []
    for f in cols:
        if f in pset:
            continue
        free.append(f)
        v = {f: Fraction(1)}
        for r, c in zip(prows, pcols):
            x = r.get(f)
            if x:
                v[c] = -x
        basis.append(v)
    if with_free:
        return basis, free
    return basis


def solve(columns, target):
    """Find x with sum_j x_j columns[j] == target, or None.

    columns: list of sparse vectors; target: sparse vector.
    """
    # augment: transpose to rows over row-keys
    keys = set(target)
    for c in columns:
        keys.update(c)
    keys = sorted(keys, key=_sort_key)
    n = len(columns)
    rows = []
    for key in keys:
        r = {}
        for j, c in enumerate(columns):
            v = c.get(key)
            if v:
                r[j] = v
        t = target.get(key)
        if t:
            r[n] = t
        if r:
            rows.append(r)
    prows, pcols = rref(rows, list(range(n + 1)))
    if n in pcols:
        return None
    x = [Fraction(0)] * n
    for r, c in zip(prows, pcols):
        x[c] = r.get(n, Fraction(0))
    return x
