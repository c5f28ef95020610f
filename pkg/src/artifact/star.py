"""Star multiplication of cochains, Cauchy bounds, permutations, Leibniz.

The lambda-coefficient of order m of F_1 * ... * F_q is

    sum_{n_1 + .. + n_q = m}  pi_{n_1}(F_1) cup ... cup pi_{n_q}(F_q)

where pi_n keeps the part of a cochain in sector n (output weight minus
total argument weight).  pi_n is computed by contracting outputs against a
graded basis and its dual, so any graded basis gives the same answer.
The cup product multiplies values in A and concatenates arguments and
variables.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
import random

from . import linalg
from .cochains import Cochain, get_algebra, push_coord, check_KG, check_compose, CellSpec, cell_violations
from .engine import coboundary


# graded dual pairs -------------------------------------------------------------------
class DualPairs:
    """A graded basis of A (per-weight matrix `mix`) and its dual under a pairing.

    mix[w] is a square matrix (list of rows) expressing new basis vectors of
    weight w in the PBW monomials of weight w.  gram, if given, is the
    pairing matrix {(i, j): value}; the default is PBW-orthonormal.
    """

    def __init__(self, alg, mix=None, gram=None):
        self.alg = alg
        self.by_weight = {}
        for i, w in enumerate(alg.weights):
            self.by_weight.setdefault(w, []).append(i)
        self.pairs = {}
        for w, idx in self.by_weight.items():
            n = len(idx)
            B = mix[w] if mix and w in mix else [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
            G = [[Fraction(gram.get((a, b), 0)) if gram else Fraction(int(a == b)) for b in idx] for a in idx]
            # dual vectors d_j with (b_i, d_j) = delta_ij:  B G D^T = I  ->  D = (B G)^{-T}
            BG = _matmul(B, G)
            D = _transpose(_inverse(BG))
            self.pairs[w] = (idx, B, D)

    def contract(self, vec, w):
        """sum_i (vec, d_i) b_i for a weight-w vector {basis index: coeff}."""
        idx, B, D = self.pairs[w]
        x = [Fraction(vec.get(i, 0)) for i in idx]
        out = {}
        for brow, drow in zip(B, D):
            c = sum((a * b for a, b in zip(x, drow) if a and b), Fraction(0))
            if c:
                for i, v in zip(idx, brow):
                    if v:
                        out[i] = out.get(i, 0) + c * v
        return {i: v for i, v in out.items() if v}


def random_mix(alg, seed):
    """Seeded invertible per-weight basis change (unit lower-triangular times a permutation)."""
    rng = random.Random(seed)
    mix = {}
    for w in sorted(set(alg.weights)):
        n = alg.weights.count(w)
        L = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            L[i][i] = Fraction(rng.choice([1, 2, -1, 3]))
            for j in range(i):
                L[i][j] = Fraction(rng.randint(-3, 3), rng.randint(1, 4))
        perm = list(range(n))
        rng.shuffle(perm)
        mix[w] = [L[p] for p in perm]
    return mix


def _matmul(A, B):
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in zip(*B)] for row in A]


def _transpose(A):
    return [list(r) for r in zip(*A)]


def _inverse(A):
    n = len(A)
    M = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(A)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c]), None)
        if p is None:
            raise ValueError("basis change is singular")
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [r[n:] for r in M]


def sector_projection(F, n, pairs=None):
    """pi_n(F) via dual-pair contraction of the outputs."""
    alg = F.alg
    pairs = pairs or DualPairs(alg)
    grouped = {}
    for (t, h, prof), c in F.coeffs.items():
        w = alg.weights[h]
        if w - sum(alg.weights[i] for i in t) != n:
            continue
        grouped.setdefault((t, prof, w), {})[h] = c
    out = {}
    for (t, prof, w), vec in grouped.items():
        for h, c in pairs.contract(vec, w).items():
            out[(t, h, prof)] = c
    return Cochain(F.params, F.l, F.k, out)


def sectors(F):
    alg = F.alg
    return sorted({alg.weights[h] - sum(alg.weights[i] for i in t) for (t, h, _) in F.coeffs})


# cup product ---------------------------------------------------------------------------------
def _parse_ident(ident):
    """'1.z2=2.z1' or ((1, 2), (2, 1)) -> ((0, 1), (1, 0)) zero-based (factor, slot)."""
    if isinstance(ident, str):
        left, right = ident.split("=")

        def one(s):
            f, z = s.strip().split(".")
            return int(f) - 1, int(z.strip().lstrip("zx")) - 1
        return one(left), one(right)
    (f1, s1), (f2, s2) = ident
    return (f1 - 1, s1 - 1), (f2 - 1, s2 - 1)


def _merge_plan(ls, identifications):
    """Slot layout after identifications: list of global positions and the merge map."""
    offsets = [sum(ls[:i]) for i in range(len(ls))]
    total = sum(ls)
    parent = list(range(total))
    for ident in identifications:
        (f1, s1), (f2, s2) = _parse_ident(ident)
        for f, s in ((f1, s1), (f2, s2)):
            if not (0 <= f < len(ls) and 0 <= s < ls[f]):
                raise ValueError(f"identification {ident!r} names a missing slot")
        if f1 == f2:
            raise ValueError(f"identification {ident!r} merges two variables of the same factor")
        a, b = offsets[f1] + s1, offsets[f2] + s2
        a, b = min(a, b), max(a, b)
        if parent[b] != b or parent[a] != a:
            raise ValueError(f"identification {ident!r} reuses an already merged slot")
        parent[b] = a
    keep = [g for g in range(total) if parent[g] == g]
    newpos = {g: i for i, g in enumerate(keep)}
    where = [newpos[parent[g]] for g in range(total)]
    return where, len(keep), len(identifications)


def cup(Fs, identifications=(), alg=None):
    """Ordered product F_1 cup ... cup F_q in G-coordinates, with merged slots."""
    alg = alg or Fs[0].alg
    ls = [F.l for F in Fs]
    where, new_l, r = _merge_plan(ls, identifications)
    offsets = [sum(ls[:i]) for i in range(len(ls))]
    w = alg.weights
    # fold factors left to right; state: (args by global slot, h, e list, pairs)
    states = {((), None, (), ()): Fraction(1)}
    for fi, F in enumerate(Fs):
        new_states = {}
        for (targs, h, e, pairs), c in states.items():
            for (t, h2, (e2, p2)), c2 in F.coeffs.items():
                off = offsets[fi]
                hs = {h2: Fraction(1)} if h is None else alg.mul_basis(h, h2)
                if not hs:
                    continue
                shifted = tuple((a + off, b + off, o) for a, b, o in p2)
                key_base = (targs + t, e + e2, pairs + shifted)
                for hh, v in hs.items():
                    key = (key_base[0], hh, key_base[1], key_base[2])
                    s = new_states.get(key, 0) + c * c2 * v
                    if s:
                        new_states[key] = s
                    else:
                        new_states.pop(key, None)
        states = new_states
    out = {}
    for (targs, h, e, pairs), c in states.items():
        nt = [None] * new_l
        ne = [0] * new_l
        ok = True
        for g, (a, x) in enumerate(zip(targs, e)):
            p = where[g]
            if nt[p] is None:
                nt[p] = a
                ne[p] = x
            elif nt[p] != a:
                ok = False  # merged slots see a single argument
                break
            else:
                ne[p] += x - w[a]  # one prefactor z^{-wt} too many
        if not ok:
            continue
        npairs = []
        used = set()
        for a, b, o in pairs:
            a2, b2 = where[a], where[b]
            if a2 in used or b2 in used:
                raise ValueError("identification makes two pole pairs overlap")
            used.update((a2, b2))
            npairs.append((a2, b2, o))
        for a2, b2, o in npairs:
            if ne[a2] or ne[b2]:
                raise ValueError("identification puts a monomial factor on a paired variable")
        coord = (tuple(nt), h, (tuple(ne), tuple(sorted(npairs))))
        out[coord] = out.get(coord, 0) + c
    return {k: v for k, v in out.items() if v}, new_l, r


# star -----------------------------------------------------------------------------------
@dataclass
class StarResult:
    coefficients: dict            # m -> Cochain
    Lambda: int
    l: int
    k: int
    r: int = 0
    t: int = 0
    identifications: tuple = ()
    radii: tuple = ()

    def coefficient(self, m):
        c = self.coefficients.get(m)
        return c

    def is_zero(self):
        return all(c.is_zero() for c in self.coefficients.values())

    def __sub__(self, other):
        ms = sorted(set(self.coefficients) | set(other.coefficients))
        out = {}
        for m in ms:
            a = self.coefficients.get(m)
            b = other.coefficients.get(m)
            if a is None:
                out[m] = -b
            elif b is None:
                out[m] = a
            else:
                out[m] = a - b
        return StarResult(out, self.Lambda, self.l, self.k, self.r, self.t, self.identifications, self.radii)

    def scale(self, c):
        return StarResult({m: v.scale(c) for m, v in self.coefficients.items()}, self.Lambda,
                          self.l, self.k, self.r, self.t, self.identifications, self.radii)

    def to_json(self):
        return {"schema": "star/1", "Lambda": self.Lambda, "l": self.l, "k": self.k,
                "r": self.r, "t": self.t, "identifications": [str(i) for i in self.identifications],
                "radii": [str(x) for x in self.radii],
                "coefficients": {str(m): c.to_json() for m, c in sorted(self.coefficients.items())}}


def star(Fs, identifications=(), Lambda=None, t=0, pairs=None, radii=()):
    if not Fs:
        raise ValueError("star needs at least one factor")
    params = Fs[0].params
    for F in Fs:
        if F.params != params:
            raise ValueError("all factors must share the model parameters")
    alg = get_algebra(params)
    if Lambda is None:
        Lambda = params.M
    pairs = pairs or DualPairs(alg)
    proj = []
    for F in Fs:
        proj.append({n: sector_projection(F, n, pairs) for n in sectors(F)})
    identifications = tuple(identifications)
    _, new_l, r = _merge_plan([F.l for F in Fs], identifications)
    k = sum(F.k for F in Fs) - t
    coeffs = {m: {} for m in range(-Lambda, Lambda + 1)}
    for combo in product(*[sorted(p) for p in proj]):
        m = sum(combo)
        if abs(m) > Lambda:
            continue
        vec, _, _ = cup([proj[i][n] for i, n in enumerate(combo)], identifications, alg)
        linalg.add_scaled(coeffs[m], vec, 1)
    out = {m: Cochain(params, new_l, k, v) for m, v in coeffs.items()}
    return StarResult(out, Lambda, new_l, k, r, t, identifications, tuple(radii))


def commutator(F, G, Lambda=None):
    return star([F, G], Lambda=Lambda) - star([G, F], Lambda=Lambda)


def permute(F, sigma):
    """(sigma F)(x_1..x_l) = F(x_sigma(1)..x_sigma(l)), arguments and variables together."""
    sigma = tuple(sigma)
    if sorted(sigma) != list(range(F.l)):
        raise ValueError(f"permutation {sigma} does not act on {F.l} slots")
    out = {}
    for coord, c in F.coeffs.items():
        nc, s = push_coord(coord, sigma)
        out[nc] = out.get(nc, 0) + s * c
    return F.with_coeffs(out)


# Cauchy bounds ---------------------------------------------------------------------------
def cauchy_bound(Mi, Ri, m, n):
    """M R^{-m+n+1} with M = min(Mi), R = max(Ri)."""
    Ri = [Fraction(r) for r in Ri]
    if not Ri or any(r <= 0 for r in Ri):
        raise ValueError("radii must be positive")
    M = min(Fraction(x) for x in Mi)
    R = max(Ri)
    return M * R ** (-m + n + 1)


def sample_grid(R, points=4):
    R = Fraction(R)
    out = []
    for j in range(1, points + 1):
        out.extend([R * j / points, -R * j / points])
    return sorted(out)


def factor_norm(F, R, points=4, pairs=None):
    """sup over the grid |zeta| <= R of || sum_n pi_n(F) zeta^n ||."""
    best = Fraction(0)
    projs = {n: sector_projection(F, n, pairs) for n in sectors(F)}
    for z in sample_grid(R, points):
        acc = {}
        for n, P in projs.items():
            linalg.add_scaled(acc, P.coeffs, z ** n)
        v = max((abs(x) for x in acc.values()), default=Fraction(0))
        best = max(best, v)
    return best


def bound_check(res, factors, radii, points=4):
    """Every coefficient obeys ||c_mu|| <= M R^{-mu} (mu = m - n - 1 with n = 0)."""
    Mi = [factor_norm(F, R, points) for F, R in zip(factors, radii)]
    report = {"M": [str(x) for x in Mi], "R": [str(Fraction(x)) for x in radii], "violations": [],
              "checked": 0}
    for mu, c in sorted(res.coefficients.items()):
        bound = cauchy_bound(Mi, radii, mu + 1, 0)
        nrm = c.norm()
        report["checked"] += 1
        if nrm > bound:
            report["violations"].append({"order": mu, "norm": str(nrm), "bound": str(bound)})
    return not report["violations"], report


# Leibniz -------------------------------------------------------------------------------------------
def leibniz_check(F, G, Lambda=3):
    for X in (F, G):
        if X.cell is None or not X.cell.stable:
            raise ValueError("leibniz_check needs cochains from stable cells; build them with engine.stable_cell")
    lhs = star([F, G], Lambda=Lambda)
    dF, dG = coboundary(F), coboundary(G)
    a = star([dF, G], Lambda=Lambda)
    b = star([F, dG], Lambda=Lambda)
    sign = -1 if F.l % 2 else 1
    residual = {}
    for m in range(-Lambda, Lambda + 1):
        d = coboundary(lhs.coefficients[m], normalized=F.cell.spec.normalized)
        rhs = a.coefficients[m].coeffs.copy()
        linalg.add_scaled(rhs, b.coefficients[m].coeffs, sign)
        diff = dict(d.coeffs)
        linalg.add_scaled(diff, rhs, -1)
        if diff:
            residual[m] = len(diff)
    return not residual, residual


def membership(res, spec):
    """Does every coefficient lie in the given cell description? returns (ok, failing orders)."""
    bad = []
    for m, c in res.coefficients.items():
        s = spec if spec.sector is None else CellSpec(spec.params, spec.l, spec.k, spec.axioms,
                                                      spec.E, m, spec.normalized)
        if cell_violations(s, c.coeffs):
            bad.append(m)
    return not bad, bad
