"""Cech-de Rham double complex of a codimension-one foliation atlas.

Sections are rational intervals with coordinate t; holonomies are polynomial
maps h: U -> U'.  Every section carries its identity holonomy.  A cochain of
bidegree (k, l) assigns to each chain U_0 -h1-> U_1 ... -hk-> U_k a
polynomial l-form on U_0 (l in {0, 1}: f or f dt).

Conventions:
  vertical    (-1)^k d
  horizontal  delta = sum_{i=0}^{k+1} (-1)^i delta_i with
              delta_0 = h_1^* w(h_2..), delta_i = w(.., h_{i+1} h_i, ..), delta_{k+1} = w(h_1..h_k)
  product     (w eta)(h_1..h_{k+k'}) = (-1)^{k k'} w(h_1..h_k) (h_k..h_1)^* eta(h_{k+1}..)
Products and pullbacks are exact (no degree cap); Dmax only bounds the
finite spaces used for cohomology, which is a subcomplex for affine holonomy.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import json
import random

from . import linalg


# polynomials in t as tuples c0, c1, ... ----------------------------------------------
def p_trim(p):
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return tuple(Fraction(c) for c in p)


def p_add(a, b):
    n = max(len(a), len(b))
    return p_trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def p_scale(a, c):
    return p_trim([c * x for x in a])


def p_mul(a, b):
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return p_trim(out)


def p_deriv(a):
    return p_trim([i * a[i] for i in range(1, len(a))])


def p_compose(a, h):
    """a(h(t))."""
    out = ()
    for c in reversed(a):
        out = p_add(p_mul(out, h), (c,))
    return out


def p_eval(a, x):
    s = Fraction(0)
    for c in reversed(a):
        s = s * x + c
    return s


IDENTITY = (Fraction(0), Fraction(1))


# atlas -----------------------------------------------------------------------------------
@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    poly: tuple


class AtlasError(ValueError):
    pass


@dataclass
class FoliationAtlas:
    sections: dict                      # id -> (a, b)
    edges: dict = field(default_factory=dict)   # id -> Edge
    name: str = ""

    def __post_init__(self):
        self.sections = {s: (Fraction(a), Fraction(b)) for s, (a, b) in self.sections.items()}
        for s in sorted(self.sections):
            eid = f"id_{s}"
            if eid not in self.edges:
                self.edges[eid] = Edge(eid, s, s, IDENTITY)
        for e in self.edges.values():
            self._validate(e)
        self._chains = {}

    def _validate(self, e):
        for s in (e.src, e.dst):
            if s not in self.sections:
                raise AtlasError(f"holonomy {e.id}: unknown section {s!r}")
        a, b = self.sections[e.src]
        dp = p_deriv(e.poly)
        # orientation preserving: h' > 0 on a fine grid including endpoints
        for j in range(17):
            x = a + (b - a) * Fraction(j, 16)
            if p_eval(dp, x) <= 0:
                raise AtlasError(f"holonomy {e.id}: h' <= 0 at t = {x}")

    @classmethod
    def from_json(cls, data, name=""):
        if isinstance(data, str):
            data = json.loads(data)
        try:
            sections = {str(s["id"]): tuple(s["interval"]) for s in data["sections"]}
        except (KeyError, TypeError) as exc:
            raise AtlasError(f"sections: malformed entry ({exc})") from None
        edges = {}
        for i, h in enumerate(data.get("holonomies", [])):
            eid = str(h.get("id", f"h{i}"))
            try:
                edges[eid] = Edge(eid, str(h["from"]), str(h["to"]), p_trim(Fraction(c) for c in h["poly"]))
            except KeyError as exc:
                raise AtlasError(f"holonomies[{i}]: missing field {exc}") from None
        return cls(sections, edges, name or data.get("name", ""))

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh), name=str(path))

    def to_json(self):
        return {"name": self.name,
                "sections": [{"id": s, "interval": [str(a), str(b)]} for s, (a, b) in sorted(self.sections.items())],
                "holonomies": [{"id": e.id, "from": e.src, "to": e.dst, "poly": [str(c) for c in e.poly]}
                               for e in sorted(self.edges.values(), key=lambda e: e.id)
                               if not e.id.startswith("id_")]}

    def section_ids(self):
        return sorted(self.sections)

    def chains(self, k):
        """Composable k-chains as tuples of edge ids; k = 0 chains are (section,)."""
        if k in self._chains:
            return self._chains[k]
        if k == 0:
            out = [(s,) for s in self.section_ids()]
        else:
            out = []
            for prev in (self.chains(k - 1) if k > 1 else [()]):
                last = self.edges[prev[-1]].dst if prev else None
                for eid in sorted(self.edges):
                    if last is None or self.edges[eid].src == last:
                        out.append(prev + (eid,))
        self._chains[k] = out
        return out

    def source(self, chain):
        if len(chain) == 1 and chain[0] in self.sections:
            return chain[0]
        return self.edges[chain[0]].src

    def target(self, chain):
        if len(chain) == 1 and chain[0] in self.sections:
            return chain[0]
        return self.edges[chain[-1]].dst

    def compose(self, first, second):
        """Edge id of (second o first); AtlasError when the atlas lacks it."""
        e1, e2 = self.edges[first], self.edges[second]
        poly = p_compose(e2.poly, e1.poly)
        for eid in sorted(self.edges):
            e = self.edges[eid]
            if e.src == e1.src and e.dst == e2.dst and e.poly == poly:
                return eid
        raise AtlasError(f"missing composite edge {second}.{first}: {e1.src} -> {e2.dst}")

    def composite_poly(self, chain):
        poly = IDENTITY
        for eid in chain:
            poly = p_compose(self.edges[eid].poly, poly)
        return poly

    def is_affine(self):
        return all(len(e.poly) <= 2 for e in self.edges.values())


def pullback_form(poly, l, h):
    """h^* of f (l = 0) or f dt (l = 1)."""
    f = p_compose(poly, h)
    if l == 1:
        f = p_mul(f, p_deriv(h))
    return f


# forms ---------------------------------------------------------------------------------------
@dataclass
class CechForm:
    atlas: FoliationAtlas
    k: int
    l: int
    values: dict = field(default_factory=dict)   # chain -> poly

    def __post_init__(self):
        if self.l not in (0, 1):
            raise ValueError("codimension one: l must be 0 or 1")
        vals = {}
        for c, p in self.values.items():
            c = tuple(c)
            if (len(c) != self.k) if self.k else (len(c) != 1 or c[0] not in self.atlas.sections):
                raise ValueError(f"chain {c} does not have length {self.k}")
            p = p_trim(p)
            if p:
                vals[c] = p
        self.values = vals

    @property
    def bidegree(self):
        return (self.k, self.l)

    def get(self, chain):
        return self.values.get(tuple(chain), ())

    def is_zero(self):
        return not self.values

    def _same(self, other):
        if other.atlas is not self.atlas or other.bidegree != self.bidegree:
            raise ValueError("forms live in different spaces")

    def __add__(self, other):
        self._same(other)
        vals = dict(self.values)
        for c, p in other.values.items():
            vals[c] = p_add(vals.get(c, ()), p)
        return CechForm(self.atlas, self.k, self.l, vals)

    def scale(self, c):
        return CechForm(self.atlas, self.k, self.l, {ch: p_scale(p, c) for ch, p in self.values.items()})

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return (isinstance(other, CechForm) and other.atlas is self.atlas
                and other.bidegree == self.bidegree and other.values == self.values)

    def max_degree(self):
        return max((len(p) - 1 for p in self.values.values()), default=-1)

    def to_json(self):
        return {"k": self.k, "l": self.l,
                "values": [{"chain": list(c), "poly": [str(x) for x in p]} for c, p in sorted(self.values.items())]}


def zero_form(atlas, k, l):
    return CechForm(atlas, k, l, {})


def vertical_d(w):
    """(-1)^k d; a 1-form goes to zero (top degree)."""
    if w.l == 1:
        return zero_form(w.atlas, w.k, 1)
    sign = -1 if w.k % 2 else 1
    return CechForm(w.atlas, w.k, 1, {c: p_scale(p_deriv(p), sign) for c, p in w.values.items()})


def horizontal_delta(w):
    atlas, k = w.atlas, w.k
    out = {}
    for chain in atlas.chains(k + 1):
        acc = ()
        # i = 0: pull back along h_1 the value on the tail chain
        h1 = atlas.edges[chain[0]]
        tail = chain[1:] if k else (h1.dst,)
        acc = p_add(acc, pullback_form(w.get(tail), w.l, h1.poly))
        for i in range(1, k + 1):
            fused = atlas.compose(chain[i - 1], chain[i])
            mid = chain[:i - 1] + (fused,) + chain[i + 1:]
            acc = p_add(acc, p_scale(w.get(mid), -1 if i % 2 else 1))
        head = chain[:k] if k else (h1.src,)
        acc = p_add(acc, p_scale(w.get(head), -1 if (k + 1) % 2 else 1))
        if acc:
            out[chain] = acc
    return CechForm(atlas, k + 1, w.l, out)


def total_d(w):
    """delta + (-1)^k d as a pair of forms (bidegrees (k+1, l) and (k, l+1))."""
    return horizontal_delta(w), vertical_d(w)


def cup_product(w, eta):
    if w.atlas is not eta.atlas:
        raise ValueError("forms on different atlases")
    if w.l + eta.l > 1:
        return zero_form(w.atlas, w.k + eta.k, 1)
    atlas = w.atlas
    k, k2 = w.k, eta.k
    n = k + k2
    sign = -1 if (k * k2) % 2 else 1
    out = {}
    for chain in atlas.chains(n):
        if n == 0:
            a, b, pb = chain, chain, IDENTITY
        else:
            a = chain[:k] if k else (atlas.source(chain),)
            b = chain[k:] if k2 else (atlas.target(chain),)
            pb = atlas.composite_poly(chain[:k])
        left = w.get(a)
        if not left:
            continue
        right = pullback_form(eta.get(b), eta.l, pb)
        val = p_scale(p_mul(left, right), sign)
        if val:
            out[chain] = val
    return CechForm(atlas, n, w.l + eta.l, out)


def leibniz_residual(w, eta):
    """Residual of the product rule satisfied by the signed product:

      delta(w eta)     = (-1)^{k'} (delta w) eta + w (delta eta)
      d_v(w eta)       = (-1)^{k'} (d_v w) eta + (-1)^k w (d_v eta)

    with d_v = (-1)^k d.  Both follow from the unsigned cup rule after moving
    the (-1)^{k k'} factor through.  Returns (horizontal, vertical) residuals.
    """
    k, k2 = w.k, eta.k
    a = -1 if k2 % 2 else 1
    b = -1 if k % 2 else 1
    prod = cup_product(w, eta)
    rh = horizontal_delta(prod) - cup_product(horizontal_delta(w), eta).scale(a) \
        - cup_product(w, horizontal_delta(eta))
    rv = vertical_d(prod) - cup_product(vertical_d(w), eta).scale(a) \
        - cup_product(w, vertical_d(eta)).scale(b)
    return rh, rv


def random_form(atlas, k, l, seed, dmax=3, density=1.0):
    rng = random.Random(seed)
    vals = {}
    top = dmax - l
    for c in atlas.chains(k):
        if rng.random() <= density:
            vals[c] = tuple(Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(top + 1))
    return CechForm(atlas, k, l, vals)


# finite complex and cohomology -----------------------------------------------------------------
def _coords(atlas, k, l, dmax):
    top = dmax - l
    return [(c, j) for c in atlas.chains(k) for j in range(top + 1)]


def _unit(atlas, k, l, coord):
    c, j = coord
    return CechForm(atlas, k, l, {c: (0,) * j + (1,)})


def _vec(w, dmax):
    top = dmax - w.l
    if w.max_degree() > top:
        raise ValueError("form leaves the degree window; holonomy is not affine")
    return {(w.k, w.l, c, j): x for c, p in w.values.items() for j, x in enumerate(p) if x}


def total_matrix(atlas, n, dmax):
    """Rows = images of the basis of total degree n under delta + (-1)^k d."""
    rows = []
    for k in range(n + 1):
        l = n - k
        if l > 1:
            continue
        for coord in _coords(atlas, k, l, dmax):
            h, v = total_d(_unit(atlas, k, l, coord))
            r = _vec(h, dmax)
            if l == 0:
                r.update(_vec(v, dmax))
            rows.append(r)
    return rows


def total_dim(atlas, n, dmax):
    return sum(len(_coords(atlas, k, n - k, dmax)) for k in range(n + 1) if n - k <= 1)


def cdr_cohomology(atlas, kmax=2, dmax=3, log=None):
    """Betti numbers of the total complex for total degrees 0..kmax.

    Returns {n: {"dim", "rank_out", "rank_in", "betti"}}.
    """
    if not atlas.is_affine():
        raise AtlasError("cohomology on the degree window needs affine holonomy")
    ranks = {}
    for n in range(kmax + 1):
        rows = total_matrix(atlas, n, dmax)
        ranks[n] = linalg.checked_rank(rows, log, label=f"cech total degree {n}")
    out = {}
    for n in range(kmax + 1):
        dim = total_dim(atlas, n, dmax)
        r_in = ranks[n - 1] if n >= 1 else 0
        out[n] = {"dim": dim, "rank_out": ranks[n], "rank_in": r_in, "betti": dim - ranks[n] - r_in}
    return out


def square_checks(atlas, kmax=2, dmax=3):
    """d^2, delta^2 and d delta + delta d on every basis form with k <= kmax."""
    bad = []
    for k in range(kmax + 1):
        for l in (0, 1):
            for coord in _coords(atlas, k, l, dmax):
                w = _unit(atlas, k, l, coord)
                if not vertical_d(vertical_d(w)).is_zero():
                    bad.append(("dd", k, l, coord))
                if not horizontal_delta(horizontal_delta(w)).is_zero():
                    bad.append(("delta delta", k, l, coord))
                mixed = vertical_d(horizontal_delta(w)) + horizontal_delta(vertical_d(w))
                if not mixed.is_zero():
                    bad.append(("d delta + delta d", k, l, coord))
    return bad


def refine(atlas, base, new_id=None):
    """Add a redundant copy of section `base` joined by identity holonomy both ways."""
    new_id = new_id or f"{base}'"
    sections = dict(atlas.sections)
    sections[new_id] = atlas.sections[base]
    edges = {e.id: e for e in atlas.edges.values() if not e.id.startswith("id_")}
    edges[f"r_{base}"] = Edge(f"r_{base}", base, new_id, IDENTITY)
    edges[f"r_{base}_inv"] = Edge(f"r_{base}_inv", new_id, base, IDENTITY)
    # close under composition with the existing holonomy through the copy
    for e in list(edges.values()):
        if e.id.startswith("r_"):
            continue
        if e.dst == base:
            edges[f"{e.id}>{new_id}"] = Edge(f"{e.id}>{new_id}", e.src, new_id, e.poly)
        if e.src == base:
            edges[f"{new_id}>{e.id}"] = Edge(f"{new_id}>{e.id}", new_id, e.dst, e.poly)
        if e.src == base and e.dst == base:
            edges[f"{new_id}>{e.id}>{new_id}"] = Edge(f"{new_id}>{e.id}>{new_id}", new_id, new_id, e.poly)
    return FoliationAtlas(sections, edges, name=f"{atlas.name} + {new_id}")


# dictionary skeleton ---------------------------------------------------------------------------
def dictionary_map(F, atlas, edge_labels, points, output=None):
    """Structural translation of an l-cochain to a bidegree (l, 0) form.

    edge_labels: edge id -> algebra basis index (h_i ~ g_i).  points: section id ->
    base point p.  Along a chain the formal variables are the transported base
    points z_1 = p, z_{j+1} = h_j(z_j).  output: basis index whose coefficient is
    read off (default: the unit).  The value on a chain is a constant on its
    first section; chains that hit a pole are skipped and listed in `skipped`.
    This is a skeleton of the correspondence, not a chain map.
    """
    l = F.l
    out_idx = F.alg.unit if output is None else output
    values = F.values()
    vals = {}
    skipped = []
    if l == 0:
        const = sum((val.evaluate(()) for (t, h), val in values.items() if h == out_idx), Fraction(0))
        for s in atlas.section_ids():
            vals[(s,)] = (const,)
        form = CechForm(atlas, 0, 0, vals)
        form.skipped = skipped
        return form
    for chain in atlas.chains(l):
        if any(e not in edge_labels for e in chain):
            continue
        t = tuple(edge_labels[e] for e in chain)
        val = values.get((t, out_idx))
        if val is None:
            continue
        z = [Fraction(points[atlas.source(chain)])]
        for e in chain[:-1]:
            z.append(p_eval(atlas.edges[e].poly, z[-1]))
        try:
            vals[chain] = (val.evaluate(z),)
        except ZeroDivisionError:
            skipped.append(chain)
    form = CechForm(atlas, l, 0, vals)
    form.skipped = skipped
    return form
