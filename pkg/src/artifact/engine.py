"""Coboundary D, the D-stable subcomplex and cohomology ranks.

In G-coordinates D is the Hochschild coboundary of A with coefficients in
A, with the profile variables relabelled by the coface maps:

  (DF)(g_1..g_{l+1}) = g_1 * F(g_2..)                       (vars shifted by one)
                     + sum_i (-1)^i F(.., g_i * g_{i+1}, ..)  (z_i dropped)
                     + (-1)^{l+1} F(g_1..g_l) * g_{l+1}

The fused middle term carries the factor (z_{i+1}/z_i)^{wt g_i} in the
original variables, which is what the prefactor bookkeeping absorbs.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import time

from . import linalg
from .cochains import (Cochain, CellSpec, ComplexCell, build_cell, cell_violations,
                       embed_profile, get_algebra, block_key)


def _acc(out, key, v):
    s = out.get(key, 0) + v
    if s:
        out[key] = s
    else:
        out.pop(key, None)


def push_D(vec, l, alg, normalized=True):
    """D on a sparse G-coordinate vector at level l; returns level l+1."""
    out = {}
    args = [g for g in range(alg.dim) if not (normalized and g == alg.unit)]
    allowed = set(args)
    pre = alg.preimage()
    shift = tuple(range(1, l + 1))
    ident = tuple(range(l))
    last_sign = -1 if (l + 1) % 2 else 1
    mids = []
    for i in range(1, l + 1):
        mids.append((i, tuple(j if j < i - 1 else j + 1 for j in range(l)), -1 if i % 2 else 1))
    for (t, h, prof), c in vec.items():
        p1 = embed_profile(prof, l + 1, shift)
        for g in args:
            for h2, v in alg.mul_basis(g, h).items():
                _acc(out, ((g,) + t, h2, p1), c * v)
        for i, mapping, sg in mids:
            pm = embed_profile(prof, l + 1, mapping)
            head, tail = t[:i - 1], t[i:]
            for a, b, v in pre[t[i - 1]]:
                if a in allowed and b in allowed:
                    _acc(out, (head + (a, b) + tail, h, pm), sg * c * v)
        pl = embed_profile(prof, l + 1, ident)
        for g in args:
            for h2, v in alg.mul_basis(h, g).items():
                _acc(out, (t + (g,), h2, pl), last_sign * c * v)
    return out


def coboundary(F, alg=None, normalized=None):
    """DF as a cochain one level up (k decreases by one)."""
    alg = alg or F.alg
    if normalized is None:
        normalized = F.cell.spec.normalized if F.cell is not None else _is_normalized(F)
    out = push_D(F.coeffs, F.l, alg, normalized)
    return Cochain(F.params, F.l + 1, F.k - 1, out)


def _is_normalized(F):
    unit = F.alg.unit
    return F.l >= 1 and all(unit not in t for (t, _, _) in F.coeffs)


def pole_flags(F):
    """Coordinates of DF-type results breaking POLE (o > beta); for reporting."""
    from .cochains import check_pole
    return check_pole(F)[1]


# stable subcomplex ----------------------------------------------------------------
def _blocks(cell):
    alg = cell.spec.alg
    groups = {}
    for i, v in enumerate(cell.basis):
        key = block_key(next(iter(v)), alg)
        groups.setdefault(key, []).append(i)
    return groups


def stabilize(cell, alg=None):
    """V = {F in cell : DF in cell(l+1, k-1)}; k = 0 cells are returned as is."""
    spec = cell.spec
    if spec.k == 0:
        return ComplexCell(spec, list(cell.basis), list(cell.free), stable=True,
                           info=dict(cell.info, removed=0))
    alg = alg or spec.alg
    target = spec.at(spec.l + 1, spec.k - 1)
    basis, free = [], []
    for key, idxs in sorted(_blocks(cell).items()):
        rows = {}
        for j in idxs:
            img = push_D(cell.basis[j], spec.l, alg, spec.normalized)
            for vk, v in cell_violations(target, img).items():
                rows.setdefault(vk, {})[j] = v
        if not rows:
            for j in idxs:
                basis.append(cell.basis[j])
                free.append(cell.free[j])
            continue
        ns, fr = linalg.nullspace(list(rows.values()), idxs, with_free=True)
        for xs, j in zip(ns, fr):
            vec = {}
            for i, x in xs.items():
                linalg.add_scaled(vec, cell.basis[i], x)
            basis.append(vec)
            # coefficient 1 on basis vector j and 0 on the other free ones,
            # so the cell's distinguishing coordinate of j still works
            free.append(cell.free[j])
    removed = cell.dim - len(basis)
    return ComplexCell(spec, basis, free, stable=True, info=dict(cell.info, removed=removed))


_STABLE = {}


def stable_cell(spec, alg=None):
    key = spec
    if alg is None and key in _STABLE:
        return _STABLE[key]
    c = stabilize(build_cell(spec), alg)
    if alg is None:
        _STABLE[key] = c
    return c


def stable_subcomplex(base, lmax, kmax, alg=None):
    """{(l, k): stable cell} for 0 <= l <= lmax, 0 <= k <= kmax."""
    return {(l, k): stable_cell(base.at(l, k), alg)
            for l in range(lmax + 1) for k in range(kmax + 1)}


# D^2 -------------------------------------------------------------------------------------
def dd_zero_check(cell, alg=None):
    """D(D(v)) == 0 for every basis vector; returns (ok, witness)."""
    alg = alg or cell.spec.alg
    l, norm = cell.l, cell.spec.normalized
    for i, v in enumerate(cell.basis):
        dd = push_D(push_D(v, l, alg, norm), l + 1, alg, norm)
        if dd:
            coord = min(dd)
            return False, {"basis_index": i, "coord": coord, "value": dd[coord]}
    return True, None


# ranks and cohomology -----------------------------------------------------------------
def d_rank(cell, log=None, alg=None):
    """rank of D restricted to the cell (zero when k = 0: the column terminates)."""
    if cell.k == 0 or cell.dim == 0:
        return 0
    alg = alg or cell.spec.alg
    total = 0
    all_rows = []
    for key, idxs in sorted(_blocks(cell).items()):
        rows = [push_D(cell.basis[j], cell.l, alg, cell.spec.normalized) for j in idxs]
        all_rows.extend(rows)
        total += linalg.checked_rank(rows, log, label=f"D({cell.l},{cell.k}) block {key}")
    if cell.dim <= linalg.DENSE_ORACLE_LIMIT:
        ncols = len({k for r in all_rows for k in r})
        if ncols <= 4 * linalg.DENSE_ORACLE_LIMIT:
            dense = linalg.rank_dense(all_rows)
            if log is not None:
                log.append({"label": f"D({cell.l},{cell.k}) whole", "rows": len(all_rows),
                            "cols": ncols, "exact": total, "modular": None, "dense": dense})
            if dense != total:
                raise linalg.CrossCheckError(f"D({cell.l},{cell.k}): dense {dense} != blockwise {total}")
    return total


@dataclass
class CohomologyReport:
    entries: dict = field(default_factory=dict)  # (l, k) -> dict
    truncation: dict = field(default_factory=dict)
    rank_log: list = field(default_factory=list)
    dd_checks: dict = field(default_factory=dict)

    def betti(self, l, k):
        return self.entries[(l, k)]["betti"]

    def rows(self):
        return [dict(l=l, k=k, **self.entries[(l, k)]) for (l, k) in sorted(self.entries)]


def cohomology_rank(l, k, cells, log=None):
    """Report entry at (l, k) from stable cells at (l, k) and (l-1, k+1)."""
    c = cells[(l, k)]
    inc = cells.get((l - 1, k + 1)) if l >= 1 else None
    if inc is not None and (inc.spec.params, inc.spec.E, inc.spec.axioms, inc.spec.sector,
                            inc.spec.normalized) != (c.spec.params, c.spec.E, c.spec.axioms,
                                                     c.spec.sector, c.spec.normalized):
        raise ValueError("cells were built with different truncation parameters")
    if l >= 1 and inc is None:
        raise ValueError(f"incoming cell ({l - 1},{k + 1}) missing")
    r_out = d_rank(c, log)
    r_in = d_rank(inc, log) if inc is not None else 0
    ker = c.dim - r_out
    betti = ker - r_in
    if betti < 0:
        raise linalg.CrossCheckError(f"negative Betti number at ({l},{k})")
    return {"cell_dim": c.info.get("frame_dim", None) or None, "stable_dim": c.dim,
            "rank_out": r_out, "dim_ker": ker, "dim_im": r_in, "betti": betti}


def cohomology(base, lmax, kmax, check_dd=True):
    """Betti table for 0 <= l <= lmax, 0 <= k <= kmax on the stable subcomplex."""
    t0 = time.perf_counter()
    cells = stable_subcomplex(base, lmax, kmax + 1)
    rep = CohomologyReport(truncation=base.describe())
    for l in range(lmax + 1):
        for k in range(kmax + 1):
            entry = cohomology_rank(l, k, cells, rep.rank_log)
            entry["cell_dim"] = build_cell(base.at(l, k)).dim
            rep.entries[(l, k)] = entry
            if check_dd:
                ok, wit = dd_zero_check(cells[(l, k)])
                rep.dd_checks[(l, k)] = ok
                if not ok:
                    raise linalg.CrossCheckError(f"D^2 != 0 at ({l},{k}): {wit}")
    rep.truncation["seconds"] = round(time.perf_counter() - t0, 3)
    return rep
