"""Invariant classes [(D Phi) * Phi], exactness certificates, Frobenius-type solves."""
from dataclasses import dataclass, field
from fractions import Fraction
import random

from . import linalg
from .cochains import Cochain, CellSpec, block_key, build_cell, get_algebra
from .engine import coboundary, push_D, stable_cell
from .star import star, cup, StarResult

# (l, k) of Phi for the three shipped scenarios; t1 is the classical case
PRESETS = {
    "l1k2": {"l": 1, "k": 2, "label": "(l,k)=(1,2)"},
    "l0k3": {"l": 0, "k": 3, "label": "(l,k)=(0,3)"},
    "t1": {"l": 1, "k": 1, "label": "(l,k)=(1,1), t=1: classical Godbillon-Vey analogue"},
}


class NoSolution(Exception):
    def __init__(self, msg, data=None):
        super().__init__(msg)
        self.data = data or {}


@dataclass
class InvariantClass:
    representative: StarResult
    cell: tuple                        # bidegree of the representative
    source: tuple                      # bidegree of Phi
    spec: CellSpec
    closed: bool = False
    closed_residual: dict = field(default_factory=dict)
    certificate: object = None

    @property
    def nonzero(self):
        return not self.representative.is_zero()

    def to_json(self):
        return {"cell": list(self.cell), "source": list(self.source), "closed": self.closed,
                "nonzero": self.nonzero,
                "closed_residual": {str(m): n for m, n in self.closed_residual.items()},
                "representative": self.representative.to_json()}


def invariant_class(Phi, Lambda=None):
    """(D Phi) * Phi with a closedness diagnostic per lambda-order."""
    if Phi.cell is None:
        raise ValueError("Phi must come from a cell")
    spec = Phi.cell.spec
    Lambda = Phi.params.M if Lambda is None else Lambda
    dPhi = coboundary(Phi)
    rep = star([dPhi, Phi], Lambda=Lambda)
    residual = {}
    for m, c in rep.coefficients.items():
        d = push_D(c.coeffs, c.l, Phi.alg, spec.normalized)
        if d:
            residual[m] = len(d)
    return InvariantClass(rep, (rep.l, rep.k), (Phi.l, Phi.k), spec, not residual, residual)


def _solve_exact(diff, level, spec, alg):
    """X at `level` (ambient KG+POLE frame, no SHUFFLE) with D X == diff, or None."""
    if not diff:
        return {}
    if level < 0:
        return None
    by_block = {}
    for coord, v in diff.items():
        by_block.setdefault(block_key(coord, alg), {})[coord] = v
    sol = {}
    ambient_axioms = frozenset(a for a in spec.axioms if a in ("KG", "POLE"))
    for (s, orders), target in sorted(by_block.items()):
        amb = CellSpec(spec.params, level, 0, ambient_axioms, spec.E, s, spec.normalized)
        cols = [c for c in amb.frame() if block_key(c, alg) == (s, orders)]
        images = [push_D({c: Fraction(1)}, level, alg, spec.normalized) for c in cols]
        x = linalg.solve(images, target)
        if x is None:
            return None
        for c, v in zip(cols, x):
            if v:
                sol[c] = v
    return sol


def class_equal(c1, c2):
    """(equal, certificate): certificate X has D X = rep1 - rep2 in every lambda-order."""
    if c1.cell != c2.cell:
        raise ValueError("classes live in different cells")
    alg = get_algebra(c1.spec.params)
    diff = c1.representative - c2.representative
    cert = {}
    level = c1.cell[0] - 1
    for m, c in sorted(diff.coefficients.items()):
        x = _solve_exact(c.coeffs, level, c1.spec, alg)
        if x is None:
            return False, None
        if x:
            cert[m] = Cochain(c1.spec.params, level, c1.cell[1] + 1, x)
    return True, cert


def verify_certificate(c1, c2, cert):
    diff = c1.representative - c2.representative
    for m, c in diff.coefficients.items():
        x = cert.get(m)
        img = coboundary(x).coeffs if x is not None else {}
        if img != c.coeffs:
            return False
    return True


def _check_bidegree(n0, m0, n, m, n1, m1, r, t):
    if n0 + 1 != n + n1 - r or m0 - 1 != m + m1 - t:
        raise ValueError(f"bidegree bookkeeping violated: ({n0}+1, {m0}-1) vs ({n}+{n1}-{r}, {m}+{m1}-{t})")
    if n1 < 0 or m1 < 0:
        raise ValueError(f"infeasible target bidegree ({n1}, {m1})")


def solve_cup(left, target, cell):
    """x in cell with cup(left, x) == target; returns Cochain or raises NoSolution."""
    alg = left.alg
    cols = [cup([left, b], (), alg)[0] for b in cell.cochains()]
    x = linalg.solve(cols, target.coeffs)
    if x is None:
        raise NoSolution("no solution in the target cell",
                         {"cell_dim": cell.dim, "rank": linalg.checked_rank([c for c in cols if c])})
    return Cochain(cell.params, cell.l, cell.k, cell.combine(x), cell)


def frobenius_solve(F0, r=0, t=1):
    """F2 with D F0 = F0 * F2 (all lambda-orders); F2 lives in (1 + r, t - 1)."""
    n0, m0 = F0.l, F0.k
    n1, m1 = 1 + r, t - 1
    _check_bidegree(n0, m0, n0, m0, n1, m1, r, t)
    if r:
        raise NotImplementedError("merged slots are not supported in the solver")
    spec = F0.cell.spec if F0.cell is not None else CellSpec(F0.params, n0, m0, sector=None)
    cell = build_cell(spec.at(n1, m1))
    dF0 = coboundary(F0)
    if dF0.is_zero():
        return Cochain(F0.params, n1, m1, {}, cell)
    return solve_cup(F0, dF0, cell)


def ogromno_chain(Phi0, Phi, max_steps=3, r=0, t=1):
    """Successive solves of D Phi_i = D Phi * Phi_{i+1}; returns a list of step records."""
    steps = []
    dPhi0 = coboundary(Phi0)
    ortho = cup([Phi, dPhi0])[0]
    if ortho:
        return [{"step": 0, "status": "orthogonality fails", "relation": "Phi * D Phi0 = 0",
                 "residual_terms": len(ortho)}]
    n, m = Phi.l, Phi.k
    spec = Phi.cell.spec if Phi.cell is not None else CellSpec(Phi.params, n, m, sector=None)
    dPhi = coboundary(Phi)
    cur = Phi0
    ni, mi = Phi0.l, Phi0.k
    for i in range(max_steps):
        d = coboundary(cur)
        if d.is_zero():
            steps.append({"step": i, "status": "terminated", "reason": "D Phi_i = 0, Phi_{i+1} = 0 admissible",
                          "indices": [ni, mi]})
            return steps
        nn, mm = ni - n + r, mi - m + t
        if nn < 0 or mm < 0:
            steps.append({"step": i, "status": "index infeasible", "indices": [nn, mm]})
            return steps
        cell = build_cell(spec.at(nn, mm))
        try:
            nxt = solve_cup(dPhi, d, cell) if cell.dim else None
        except NoSolution as exc:
            steps.append({"step": i, "status": "unsolvable", "indices": [nn, mm], **exc.data})
            return steps
        if nxt is None:
            steps.append({"step": i, "status": "unsolvable", "indices": [nn, mm], "cell_dim": 0})
            return steps
        steps.append({"step": i, "status": "solved", "indices": [nn, mm], "solution": nxt})
        cur, ni, mi = nxt, nn, mm
    return steps


# scenario helpers ------------------------------------------------------------------------
def preset_spec(name, params=None, E=6):
    from .algebra import ModelParams
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    p = PRESETS[name]
    return CellSpec(params or ModelParams(), p["l"], p["k"], sector=None, E=E)


def gv_scenario(name, seeds=range(10), psi_seeds=range(5), params=None, Lambda=None):
    """Non-vanishing search over seeds and representative-shift certificates."""
    from .cochains import random_cochain
    spec = preset_spec(name, params)
    cell = stable_cell(spec)
    out = {"preset": name, "label": PRESETS[name]["label"], "cell_dim": cell.dim, "seeds": []}
    witness = None
    for s in seeds:
        Phi = random_cochain(cell, s)
        cls = invariant_class(Phi, Lambda)
        out["seeds"].append({"seed": s, "nonzero": cls.nonzero, "closed": cls.closed})
        if witness is None and cls.nonzero:
            witness = (s, Phi, cls)
    out["nonvanishing"] = witness is not None
    shifts = []
    if witness is not None:
        s, Phi, cls = witness
        if spec.l >= 1:
            inc = stable_cell(spec.at(spec.l - 1, spec.k + 1))
        else:
            inc = None
        for ps in psi_seeds:
            if inc is None or inc.dim == 0:
                Psi_img = Cochain(Phi.params, Phi.l, Phi.k, {})
                expected = None
            else:
                Psi = random_cochain(inc, 1000 + ps)
                Psi_img = coboundary(Psi)
                expected = Psi
            shifted = Cochain(Phi.params, Phi.l, Phi.k, (Phi + Psi_img).coeffs, Phi.cell)
            cls2 = invariant_class(shifted, Lambda)
            eq, cert = class_equal(cls2, cls)
            ok = eq and verify_certificate(cls2, cls, cert)
            shifts.append({"psi_seed": ps, "equal": eq, "certificate_verified": ok,
                           "certificate_terms": sum(len(c.coeffs) for c in cert.values()) if cert else 0,
                           "incoming_dim": 0 if inc is None else inc.dim})
    out["shifts"] = shifts
    out["witness_seed"] = witness[0] if witness else None
    return out
