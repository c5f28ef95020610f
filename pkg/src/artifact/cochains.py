"""Cochains as sparse coefficient tables and the cells C^l_k.

A cochain F in C^l is stored in "G-coordinates":

    F(g_1..g_l; z) = prod_j z_j^{-wt g_j} * sum c[t, h, P] * h * P(z)

where t is a tuple of basis indices (the arguments), h a basis index (the
output) and P a profile.  A profile is (e, pairs): a monomial z^e times a
product of pole atoms on disjoint variable pairs,

    u_o(z_a, z_b) = (z_a z_b)^{o//2} (z_a + z_b)^{o%2} / (z_a - z_b)^o.

u_o is homogeneous of degree 0 with pole order exactly o, and swapping
its variables multiplies it by (-1)^o.  Paired variables carry e = 0, which
keeps the frame linearly independent.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product, combinations
import random

from .algebra import Algebra, ModelParams, mono_str
from .laurent import LaurentElem
from . import linalg

AXIOMS = ("KG", "TG", "SHUFFLE", "POLE", "COMPOSE")
DEFAULT_AXIOMS = frozenset({"KG", "SHUFFLE", "POLE", "COMPOSE"})


@lru_cache(maxsize=None)
def get_algebra(params):
    return Algebra(params)


def parse_axioms(spec):
    """'KG,SHUFFLE,POLE' or an iterable -> frozenset of axiom names."""
    if isinstance(spec, str):
        items = [s.strip() for s in spec.split(",") if s.strip()]
    else:
        items = list(spec)
    out = set()
    for a in items:
        name = a.upper()
        if name.startswith("COMPOSE"):
            name = "COMPOSE"
        if name not in AXIOMS:
            raise ValueError(f"unknown axiom {a!r}; expected one of {', '.join(AXIOMS)}")
        out.add(name)
    return frozenset(out)


def var_names(l, prefix="z"):
    return tuple(f"{prefix}{i + 1}" for i in range(l))


# profiles ----------------------------------------------------------------------------
def empty_profile(l):
    return ((0,) * l, ())


@lru_cache(maxsize=None)
def matchings(l):
    """All sets of disjoint pairs (a < b) on range(l), as sorted tuples."""
    out = []

    def rec(start, used, acc):
        out.append(tuple(acc))
        for a in range(start, l):
            if a in used:
                continue
            for b in range(a + 1, l):
                if b in used:
                    continue
                rec(a + 1, used | {a, b}, acc + [(a, b)])

    rec(0, frozenset(), [])
    return tuple(sorted(set(out)))


@lru_cache(maxsize=None)
def atom(o, vars, a, b):
    """u_o(z_a, z_b) as a LaurentElem over vars."""
    n = len(vars)
    num = LaurentElem.const(vars, 1)
    if o // 2:
        e = [0] * n
        e[a] = e[b] = o // 2
        num = LaurentElem.monomial(vars, e)
    if o % 2:
        ea = [0] * n
        ea[a] = 1
        eb = [0] * n
        eb[b] = 1
        num = num * (LaurentElem.monomial(vars, ea) + LaurentElem.monomial(vars, eb))
    return num * LaurentElem.diff_pole(vars, a, b, o)


@lru_cache(maxsize=None)
def profile_value(prof, vars):
    e, pairs = prof
    val = LaurentElem.monomial(vars, e)
    for a, b, o in pairs:
        val = val * atom(o, vars, a, b)
    return val


def profile_degree(prof):
    return sum(prof[0])


def push_profile(prof, sigma):
    """Move position j to sigma[j]; returns (new profile, sign)."""
    e, pairs = prof
    ne = [0] * len(e)
    for j, x in enumerate(e):
        ne[sigma[j]] = x
    sign = 1
    npairs = []
    for a, b, o in pairs:
        a2, b2 = sigma[a], sigma[b]
        if a2 > b2:
            a2, b2 = b2, a2
            if o % 2:
                sign = -sign
        npairs.append((a2, b2, o))
    return (tuple(ne), tuple(sorted(npairs))), sign


def push_coord(coord, sigma):
    t, h, prof = coord
    nt = [0] * len(t)
    for j, x in enumerate(t):
        nt[sigma[j]] = x
    nprof, sign = push_profile(prof, sigma)
    return (tuple(nt), h, nprof), sign


def embed_profile(prof, new_l, mapping):
    """Relabel variables: old variable j becomes mapping[j] in new_l slots."""
    e, pairs = prof
    ne = [0] * new_l
    for j, x in enumerate(e):
        ne[mapping[j]] = x
    npairs = tuple(sorted((mapping[a], mapping[b], o) for a, b, o in pairs))
    return (tuple(ne), npairs)


def inverse(sigma):
    inv = [0] * len(sigma)
    for j, s in enumerate(sigma):
        inv[s] = j
    return tuple(inv)


def perm_sign(sigma):
    sign = 1
    seen = [False] * len(sigma)
    for i in range(len(sigma)):
        if seen[i]:
            continue
        j, n = i, 0
        while not seen[j]:
            seen[j] = True
            j = sigma[j]
            n += 1
        if n % 2 == 0:
            sign = -sign
    return sign


@lru_cache(maxsize=None)
def shuffles(l, p):
    """Sh(p, l-p): sigma with sigma[0]<..<sigma[p-1], sigma[p]<..<sigma[l-1]."""
    out = []
    for first in combinations(range(l), p):
        rest = [i for i in range(l) if i not in first]
        out.append(tuple(first) + tuple(rest))
    return tuple(out)


# the cell description -------------------------------------------------------------
@dataclass(frozen=True)
class CellSpec:
    """Everything that fixes the ambient frame of a cell."""
    params: ModelParams
    l: int
    k: int
    axioms: frozenset = DEFAULT_AXIOMS
    E: int = 6
    sector: object = 0          # None -> all sectors
    normalized: bool = True     # l >= 1: no unit arguments

    def __post_init__(self):
        if self.l < 0 or self.k < 0:
            raise ValueError("cell indices must be non-negative")
        if self.E < 0:
            raise ValueError("window E must be non-negative")

    @property
    def alg(self):
        return get_algebra(self.params)

    def at(self, l, k):
        return CellSpec(self.params, l, k, self.axioms, self.E, self.sector, self.normalized)

    def describe(self):
        return {"l": self.l, "k": self.k, "axioms": sorted(self.axioms), "E": self.E,
                "sector": self.sector, "normalized": self.normalized,
                "model": self.params.as_dict()}

    # pole bounds ------------------------------------------------------------
    def beta(self, t, a, b):
        w = self.alg.weights
        return w[t[a]] + w[t[b]] + self.params.B0

    def pole_cap(self, t, a, b):
        cap = self.E
        if "COMPOSE" in self.axioms:
            cap = min(cap, self.beta(t, a, b) - self.k)
        elif "POLE" in self.axioms:
            cap = min(cap, self.beta(t, a, b))
        return cap

    def e_range(self):
        lo = 0 if ({"POLE", "COMPOSE"} & self.axioms) else -self.E
        return range(lo, self.E + 1)

    # frame ----------------------------------------------------------------------
    def arg_tuples(self):
        alg = self.alg
        idx = range(alg.dim)
        if self.normalized and self.l >= 1:
            idx = [i for i in idx if i != alg.unit]
        return list(product(idx, repeat=self.l))

    def outputs(self, t):
        alg = self.alg
        if self.sector is None:
            return list(range(alg.dim))
        s = self.sector + sum(alg.weights[i] for i in t)
        return [h for h in range(alg.dim) if alg.weights[h] == s]

    def profiles(self, t):
        l = self.l
        out = []
        kg = "KG" in self.axioms
        er = list(self.e_range())
        for match in matchings(l):
            paired = {v for pr in match for v in pr}
            free = [j for j in range(l) if j not in paired]
            caps = [self.pole_cap(t, a, b) for a, b in match]
            if any(c < 1 for c in caps):
                continue
            order_choices = product(*[range(1, c + 1) for c in caps])
            for orders in order_choices:
                pairs = tuple((a, b, o) for (a, b), o in zip(match, orders))
                for ev in product(er, repeat=len(free)):
                    if kg and sum(ev) != 0:
                        continue
                    e = [0] * l
                    for j, x in zip(free, ev):
                        e[j] = x
                    out.append((tuple(e), pairs))
        return out

    def frame(self):
        return _frame(self)

    def in_frame(self, coord):
        """Coordinate allowed by window, sector, normalization, KG and pole caps."""
        t, h, (e, pairs) = coord
        alg = self.alg
        if len(t) != self.l:
            return False
        if self.normalized and self.l >= 1 and alg.unit in t:
            return False
        if self.sector is not None and alg.weights[h] - sum(alg.weights[i] for i in t) != self.sector:
            return False
        er = self.e_range()
        if any(x < er.start or x >= er.stop for x in e):
            return False
        if "KG" in self.axioms and sum(e) != 0:
            return False
        for a, b, o in pairs:
            if e[a] or e[b] or o > self.pole_cap(t, a, b) or o < 1:
                return False
        return True


@lru_cache(maxsize=64)
def _frame(spec):
    coords = []
    prof_cache = {}
    w = spec.alg.weights
    for t in spec.arg_tuples():
        outs = spec.outputs(t)
        if not outs:
            continue
        key = tuple(w[i] for i in t)
        profs = prof_cache.get(key)
        if profs is None:
            profs = spec.profiles(t)
            prof_cache[key] = profs
        for h in outs:
            for p in profs:
                coords.append((t, h, p))
    coords.sort()
    return tuple(coords)


def block_key(coord, alg):
    """(sector, sorted pole orders): preserved by D, permutations and shuffles."""
    t, h, (e, pairs) = coord
    s = alg.weights[h] - sum(alg.weights[i] for i in t)
    return (s, tuple(sorted(o for _, _, o in pairs)))


# cochains -----------------------------------------------------------------------------
class Cochain:
    """Element of C^l_k as {(t, h, profile): Fraction}."""

    __slots__ = ("params", "l", "k", "coeffs", "cell")

    def __init__(self, params, l, k, coeffs=None, cell=None):
        self.params = params
        self.l = l
        self.k = k
        self.coeffs = {c: Fraction(v) for c, v in (coeffs or {}).items() if v}
        self.cell = cell

    @property
    def alg(self):
        return get_algebra(self.params)

    def is_zero(self):
        return not self.coeffs

    def with_coeffs(self, coeffs, k=None):
        return Cochain(self.params, self.l, self.k if k is None else k, coeffs, self.cell)

    def __add__(self, other):
        self._compat(other)
        out = dict(self.coeffs)
        linalg.add_scaled(out, other.coeffs, 1)
        return Cochain(self.params, self.l, self.k, out, self.cell)

    def __sub__(self, other):
        self._compat(other)
        out = dict(self.coeffs)
        linalg.add_scaled(out, other.coeffs, -1)
        return Cochain(self.params, self.l, self.k, out, self.cell)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = Fraction(c)
        return Cochain(self.params, self.l, self.k, {k: v * c for k, v in self.coeffs.items()}, self.cell)

    __rmul__ = scale

    def __mul__(self, c):
        return self.scale(c)

    def _compat(self, other):
        if self.params != other.params or self.l != other.l:
            raise ValueError("cochains live in different spaces")

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        return self.params == other.params and self.l == other.l and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.l, frozenset(self.coeffs.items())))

    def __repr__(self):
        return f"Cochain(l={self.l}, k={self.k}, terms={len(self.coeffs)})"

    def norm(self):
        """max |coefficient| over the frame."""
        return max((abs(v) for v in self.coeffs.values()), default=Fraction(0))

    # values ----------------------------------------------------------------------
    def g_values(self, vars=None):
        """{(t, h): LaurentElem} without the prod z^{-wt} prefactor."""
        vars = vars or var_names(self.l)
        out = {}
        for (t, h, prof), c in self.coeffs.items():
            key = (t, h)
            val = profile_value(prof, vars).scale(c)
            out[key] = out[key] + val if key in out else val
        return {k: v for k, v in out.items() if not v.is_zero()}

    def values(self, vars=None):
        """{(t, h): LaurentElem} of F itself (prefactor included)."""
        vars = vars or var_names(self.l)
        w = self.alg.weights
        out = {}
        for (t, h), v in self.g_values(vars).items():
            pre = LaurentElem.monomial(vars, tuple(-w[i] for i in t))
            out[(t, h)] = pre * v
        return out

    def table(self):
        """Readable view: {argument monomials: {output monomial: LaurentElem}}."""
        basis = self.alg.basis
        out = {}
        for (t, h), v in sorted(self.values().items()):
            out.setdefault(tuple(basis[i] for i in t), {})[basis[h]] = v
        return out

    # serialization ------------------------------------------------------------------
    def to_json(self):
        basis = self.alg.basis
        rows = []
        for (t, h), v in sorted(self.values().items()):
            rows.append({"l": self.l, "k": self.k,
                         "tuple": [list(basis[i]) for i in t],
                         "out_monomial": list(basis[h]),
                         "value": v.to_json()})
        coords = []
        for (t, h, (e, pairs)), c in sorted(self.coeffs.items()):
            coords.append({"tuple": [list(basis[i]) for i in t], "out_monomial": list(basis[h]),
                           "e": list(e), "pairs": [list(p) for p in pairs],
                           "num": str(c.numerator), "den": str(c.denominator)})
        return {"schema": "cochain/1", "model": self.params.as_dict(), "l": self.l, "k": self.k,
                "rows": rows, "coords": coords}

    @classmethod
    def from_json(cls, data):
        params = ModelParams(**data["model"])
        alg = get_algebra(params)
        l, k = data["l"], data["k"]
        coeffs = {}
        if "coords" in data:
            for r in data["coords"]:
                t = tuple(alg.index[tuple(m)] for m in r["tuple"])
                h = alg.index[tuple(r["out_monomial"])]
                prof = (tuple(r["e"]), tuple(sorted(tuple(p) for p in r["pairs"])))
                coeffs[(t, h, prof)] = Fraction(int(r["num"]), int(r["den"]))
            return cls(params, l, k, coeffs)
        # fall back to decomposing the values over a window-6 frame
        spec = CellSpec(params, l, k, frozenset(), E=6, sector=None, normalized=False)
        F = cls(params, l, k)
        for r in data["rows"]:
            t = tuple(alg.index[tuple(m)] for m in r["tuple"])
            h = alg.index[tuple(r["out_monomial"])]
            val = LaurentElem.from_json(r["value"])
            F = F + decompose_value(spec, t, h, val)
        return F


def decompose_value(spec, t, h, value):
    """Cochain supported on (t, h) whose value equals `value` (raises if outside the frame)."""
    alg = spec.alg
    vars = var_names(spec.l)
    value = value.rename(vars) if value.vars != vars else value
    pre = LaurentElem.monomial(vars, tuple(alg.weights[i] for i in t))
    g = pre * value
    cands = [(t, h, p) for p in spec.profiles(t)]
    cols = [_linear_coords(profile_value(p, vars), spec) for (_, _, p) in cands]
    x = linalg.solve(cols, _linear_coords(g, spec))
    if x is None:
        raise ValueError("value is not representable in the profile frame")
    return Cochain(spec.params, spec.l, spec.k, {c: v for c, v in zip(cands, x) if v})


def _linear_coords(val, spec, extra=1):
    """Numerator coefficients of val * prod (z_a - z_b)^(E+extra): a linear embedding."""
    vars = val.vars
    n = len(vars)
    lifted = val
    for a in range(n):
        for b in range(a + 1, n):
            d = [0] * n
            d[a] = 1
            da = LaurentElem.monomial(vars, d)
            d = [0] * n
            d[b] = 1
            db = LaurentElem.monomial(vars, d)
            lifted = lifted * ((da - db) ** (spec.E + extra))
    if lifted.poles:
        raise ValueError("pole order exceeds the window")
    return dict(lifted.terms)


# predicates -------------------------------------------------------------------------
def check_KG(F):
    """Homogeneity: Laurent degree of F(g; z) equals -sum wt(g_i) in every entry."""
    bad = [c for c in F.coeffs if profile_degree(c[2]) != 0]
    return (not bad, bad)


def _pole_violations(F, cap):
    alg = F.alg
    B0 = F.params.B0
    bad = []
    for coord in F.coeffs:
        t, h, (e, pairs) = coord
        if any(x < 0 for x in e):
            bad.append(coord)
            continue
        for a, b, o in pairs:
            if o > alg.weights[t[a]] + alg.weights[t[b]] + B0 - cap:
                bad.append(coord)
                break
    return bad


def check_pole(F):
    bad = _pole_violations(F, 0)
    return (not bad, bad)


def check_compose(F, k):
    """Pole orders leave room for k further insertions: o <= beta - k."""
    if k < 0:
        raise ValueError("k must be non-negative")
    bad = _pole_violations(F, k)
    return (not bad, bad)


def shuffle_residual(F, p):
    l = F.l
    if not 1 <= p <= l - 1:
        raise ValueError(f"shuffle index p={p} out of range for l={l}")
    out = {}
    for sigma in shuffles(l, p):
        sg = perm_sign(sigma)
        inv = inverse(sigma)
        for coord, c in F.coeffs.items():
            nc, s = push_coord(coord, inv)
            v = out.get(nc, 0) + sg * s * c
            if v:
                out[nc] = v
            else:
                out.pop(nc, None)
    return out


def check_shuffle(F, p):
    r = shuffle_residual(F, p)
    return (not r, sorted(r))


def tg_residual(F):
    """sum_i d/dz_i F - sum_i F(.., T_G g_i, ..), as {(t, h): LaurentElem} (nonzero only)."""
    alg = F.alg
    vars = var_names(F.l)
    vals = F.values(vars)
    out = {}

    def acc(key, v):
        if key in out:
            out[key] = out[key] + v
        else:
            out[key] = v

    for (t, h), v in vals.items():
        d = LaurentElem(vars)
        for x in vars:
            d = d + v.differentiate(x)
        acc((t, h), d)
    # right side: F(.., T g_i, ..) contributes to the tuple with g_i in slot i
    for coord, c in F.coeffs.items():
        t, h, prof = coord
        pv = profile_value(prof, vars)
        for i in range(F.l):
            # find source s with T(s) containing t[i]
            for src, coef in _tg_pre(alg)[t[i]]:
                t2 = t[:i] + (src,) + t[i + 1:]
                pre = [-alg.weights[j] for j in t2]
                pre[i] -= 1  # T raises weight by one
                val = LaurentElem.monomial(vars, pre) * pv
                acc((t2, h), val.scale(-c * coef))
    return {k: v for k, v in out.items() if not v.is_zero()}


@lru_cache(maxsize=None)
def _tg_pre_cached(params):
    alg = get_algebra(params)
    pre = [[] for _ in range(alg.dim)]
    for s in range(alg.dim):
        for k, c in alg.derivation_on_basis(s, alg.tg_gen).items():
            pre[k].append((s, c))
    return pre


def _tg_pre(alg):
    return _tg_pre_cached(alg.params)


def check_TG(F):
    r = tg_residual(F)
    return (not r, sorted(r))


# cells ---------------------------------------------------------------------------------
@dataclass
class ComplexCell:
    spec: CellSpec
    basis: list                    # sparse vectors {coord: Fraction}
    free: list                     # one distinguishing coordinate per basis vector
    stable: bool = False
    info: dict = field(default_factory=dict)

    @property
    def l(self):
        return self.spec.l

    @property
    def k(self):
        return self.spec.k

    @property
    def params(self):
        return self.spec.params

    @property
    def dim(self):
        return len(self.basis)

    @property
    def axioms(self):
        return self.spec.axioms

    def frame(self):
        return self.spec.frame()

    def cochain(self, i):
        return Cochain(self.params, self.l, self.k, self.basis[i], self)

    def cochains(self):
        return [self.cochain(i) for i in range(self.dim)]

    def coordinates(self, vec):
        """Coefficients of vec in this basis (vec must lie in the span)."""
        return [vec.get(f, Fraction(0)) for f in self.free]

    def combine(self, xs):
        out = {}
        for x, b in zip(xs, self.basis):
            linalg.add_scaled(out, b, x)
        return out

    def contains(self, vec):
        return not cell_violations(self.spec, vec)


def cell_violations(spec, vec):
    """Linear violation vector of vec against the cell predicates (empty iff member)."""
    out = {}
    for coord, c in vec.items():
        if not spec.in_frame(coord):
            out[("frame", coord)] = c
    if "SHUFFLE" in spec.axioms and spec.l >= 2:
        F = Cochain(spec.params, spec.l, spec.k, vec)
        for p in range(1, spec.l):
            for coord, c in shuffle_residual(F, p).items():
                out[("shuffle", p, coord)] = c
    if "TG" in spec.axioms:
        F = Cochain(spec.params, spec.l, spec.k, vec)
        for (t, h), v in tg_residual(F).items():
            for e, c in _linear_coords(v, spec, extra=2).items():
                out[("tg", t, h, e)] = c
    return out


def _orbit_key(coord, l):
    best = None
    for sigma in permutations(range(l)):
        nc, _ = push_coord(coord, sigma)
        if best is None or nc < best:
            best = nc
    return best


def build_cell_basis(l, k, axioms=DEFAULT_AXIOMS, params=None, E=6, sector=0, normalized=True):
    """Basis of the cell: frame filtered by KG/POLE/COMPOSE, then SHUFFLE (and TG) solved exactly."""
    params = params or ModelParams()
    spec = CellSpec(params, l, k, parse_axioms(axioms), E, sector, normalized)
    return build_cell(spec)


@lru_cache(maxsize=128)
def build_cell(spec):
    frame = spec.frame()
    axioms = spec.axioms
    if "TG" in axioms:
        basis, free = _solve_dense(spec, frame)
    elif "SHUFFLE" in axioms and spec.l >= 2:
        basis, free = _solve_shuffle(spec, frame)
    else:
        basis = [{c: Fraction(1)} for c in frame]
        free = list(frame)
    return ComplexCell(spec, basis, free, stable=False,
                       info={"frame": len(frame)})


def _solve_shuffle(spec, frame):
    l = spec.l
    orbits = {}
    for c in frame:
        orbits.setdefault(_orbit_key(c, l), []).append(c)
    basis, free = [], []
    for key in sorted(orbits):
        cols = sorted(orbits[key])
        rows = {}
        for col in cols:
            F = Cochain(spec.params, l, spec.k, {col: 1})
            for p in range(1, l):
                for rc, v in shuffle_residual(F, p).items():
                    rows.setdefault((p, rc), {})[col] = v
        ns, fr = linalg.nullspace(list(rows.values()), cols, with_free=True)
        basis.extend(ns)
        free.extend(fr)
    return basis, free


def _solve_dense(spec, frame):
    cols = list(frame)
    rows = {}
    for col in cols:
        for key, v in cell_violations(spec, {col: Fraction(1)}).items():
            rows.setdefault(key, {})[col] = v
    return linalg.nullspace(list(rows.values()), cols, with_free=True)


def random_cochain(cell, seed, coeff_range=3, den_range=3):
    """Seeded rational combination of basis cochains; coefficients in [-range, range]/[1..den]."""
    if cell.dim == 0:
        raise ValueError("cannot draw a random cochain from a zero-dimensional cell")
    rng = random.Random(seed)
    xs = [Fraction(rng.randint(-coeff_range, coeff_range), rng.randint(1, den_range))
          for _ in range(cell.dim)]
    if not any(xs):
        xs[rng.randrange(cell.dim)] = Fraction(1)
    return Cochain(cell.params, cell.l, cell.k, cell.combine(xs), cell)


def describe_coord(coord, alg):
    t, h, (e, pairs) = coord
    args = ",".join(mono_str(alg.basis[i]) for i in t)
    prof = "*".join([f"z{j + 1}^{x}" for j, x in enumerate(e) if x] +
                    [f"u{o}(z{a + 1},z{b + 1})" for a, b, o in pairs]) or "1"
    return f"({args}) -> {mono_str(alg.basis[h])} * {prof}"
