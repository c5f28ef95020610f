"""Truncated enveloping algebra of the positive Witt slice.

Generators L_1..L_N with [L_i, L_j] = (j - i) L_{i+j} (zero past N).  PBW
monomials are non-decreasing index tuples; weight(L_i) = i.  Monomials of
weight > M or length > Lmax are quotiented out.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .laurent import LaurentElem


@dataclass(frozen=True)
class ModelParams:
    N: int = 3
    M: int = 6
    B0: int = 2
    Lmax: int = 3

    def __post_init__(self):
        for name in ("N", "M", "Lmax"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"model.{name} must be a non-negative integer, got {v!r}")
        if self.N < 1:
            raise ValueError("model.N must be positive")
        if not isinstance(self.B0, int) or self.B0 < 0:
            raise ValueError(f"model.B0 must be a non-negative integer, got {self.B0!r}")

    def as_dict(self):
        return {"N": self.N, "M": self.M, "B0": self.B0, "Lmax": self.Lmax}


def weight(mono):
    return sum(mono)


def enumerate_basis(params):
    """PBW monomials ordered by weight, then length, then lexicographically."""
    out = []

    def rec(prefix, start, wt):
        out.append(tuple(prefix))
        if len(prefix) == params.Lmax:
            return
        for i in range(start, params.N + 1):
            if wt + i > params.M:
                break
            prefix.append(i)
            rec(prefix, i, wt + i)
            prefix.pop()

    rec([], 1, 0)
    out.sort(key=lambda m: (sum(m), len(m), m))
    return out


def mono_str(mono):
    if not mono:
        return "1"
    return "".join(f"L{i}" for i in mono)


class Algebra:
    """Finite presentation of A: basis, structure constants, operators.

    Products are memoized per ordered pair of basis monomials; all tables
    are built lazily and never mutated afterwards.
    """

    def __init__(self, params=None, bracket=None):
        self.params = params or ModelParams()
        # bracket(i, j) -> coefficient c with [L_i, L_j] = c L_{i+j}; hook for mutation tests
        self._bracket = bracket or (lambda i, j: j - i)
        self.basis = enumerate_basis(self.params)
        self.index = {m: k for k, m in enumerate(self.basis)}
        self.weights = [sum(m) for m in self.basis]
        self.dim = len(self.basis)
        self.unit = self.index[()]
        self._table = {}
        self._preimage = None
        self._word_cache = {}

    # normal ordering ------------------------------------------------------
    def _normal_order(self, word):
        cached = self._word_cache.get(word)
        if cached is not None:
            return cached
        N = self.params.N
        res = {}
        for i in range(len(word) - 1):
            a, b = word[i], word[i + 1]
            if a > b:
                # L_a L_b = L_b L_a + [L_a, L_b]
                swapped = word[:i] + (b, a) + word[i + 2:]
                for m, c in self._normal_order(swapped).items():
                    res[m] = res.get(m, 0) + c
                c0 = self._bracket(a, b)
                if c0 and a + b <= N:
                    fused = word[:i] + (a + b,) + word[i + 2:]
                    for m, c in self._normal_order(fused).items():
                        res[m] = res.get(m, 0) + c0 * c
                break
        else:
            res = {word: 1}
        res = {m: c for m, c in res.items() if c}
        self._word_cache[word] = res
        return res

    def reduce_word(self, word):
        """Normal-ordered image of a generator word, as {basis index: coeff}."""
        word = tuple(word)
        if sum(word) > self.params.M:
            return {}
        out = {}
        for m, c in self._normal_order(word).items():
            if len(m) <= self.params.Lmax:
                k = self.index[m]
                out[k] = out.get(k, 0) + Fraction(c)
        return {k: c for k, c in out.items() if c}

    def mul_basis(self, i, j):
        key = (i, j)
        t = self._table.get(key)
        if t is None:
            t = self.reduce_word(self.basis[i] + self.basis[j])
            self._table[key] = t
        return t

    def preimage(self):
        """preimage[k] = [(a, b, coeff of basis k in a*b)] over all pairs."""
        if self._preimage is None:
            pre = [[] for _ in range(self.dim)]
            for a in range(self.dim):
                for b in range(self.dim):
                    for k, c in self.mul_basis(a, b).items():
                        pre[k].append((a, b, c))
            self._preimage = pre
        return self._preimage

    # derivations -------------------------------------------------------------
    def derivation_on_basis(self, i, gen_map):
        """Extend gen_map: generator -> {generator: coeff} as a derivation."""
        word = self.basis[i]
        out = {}
        for pos, g in enumerate(word):
            for g2, c in gen_map(g).items():
                new = word[:pos] + (g2,) + word[pos + 1:]
                for k, v in self.reduce_word(new).items():
                    out[k] = out.get(k, 0) + c * v
        return {k: c for k, c in out.items() if c}

    def tg_gen(self, g):
        if g + 1 > self.params.N or g == 1:
            return {}
        return {g + 1: g - 1}

    def raising_gen(self, k, c=-1):
        def f(g):
            coef = g + c * k
            if g + k > self.params.N or not coef:
                return {}
            return {g + k: coef}
        return f

    # elements -------------------------------------------------------------------
    def elem(self, terms=None):
        return AlgebraElem(self, terms)

    def gen(self, i):
        return self.elem({self.index[(i,)]: 1})

    def one(self):
        return self.elem({self.unit: 1})

    def mono(self, mono, c=1):
        return self.elem({self.index[tuple(mono)]: c})

    def __eq__(self, other):
        return isinstance(other, Algebra) and self.params == other.params and self._bracket is other._bracket

    def __hash__(self):
        return hash(self.params)


class AlgebraElem:
    """Sparse combination {basis index: Fraction} in a fixed Algebra."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg, terms=None):
        self.alg = alg
        t = {}
        for k, c in (terms or {}).items():
            if isinstance(k, tuple):
                k = alg.index[k]
            c = Fraction(c)
            if c:
                t[k] = t.get(k, 0) + c
        self.terms = {k: c for k, c in t.items() if c}

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, AlgebraElem):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{mono_str(self.alg.basis[k])}" for k, c in sorted(self.terms.items()))

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return AlgebraElem(self.alg, out)

    def __neg__(self):
        return AlgebraElem(self.alg, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, AlgebraElem):
            return multiply(self, other)
        return AlgebraElem(self.alg, {k: c * other for k, c in self.terms.items()})

    def __rmul__(self, other):
        return AlgebraElem(self.alg, {k: c * other for k, c in self.terms.items()})

    def weight_components(self):
        ws = sorted({self.alg.weights[k] for k in self.terms})
        return [(w, project(self, w)) for w in ws]

    def to_json(self):
        return [{"mono": list(self.alg.basis[k]), "num": str(c.numerator), "den": str(c.denominator)}
                for k, c in sorted(self.terms.items())]


def multiply(a, b):
    alg = a.alg
    out = {}
    for i, ci in a.terms.items():
        for j, cj in b.terms.items():
            for k, c in alg.mul_basis(i, j).items():
                out[k] = out.get(k, 0) + ci * cj * c
    return AlgebraElem(alg, out)


def project(a, m):
    return AlgebraElem(a.alg, {k: c for k, c in a.terms.items() if a.alg.weights[k] == m})


def apply_TG(a):
    alg = a.alg
    out = {}
    for i, c in a.terms.items():
        for k, v in alg.derivation_on_basis(i, alg.tg_gen).items():
            out[k] = out.get(k, 0) + c * v
    return AlgebraElem(alg, out)


def apply_raising(a, k, c=-1):
    """T^(k): L_i -> (i + c k) L_{i+k}, extended as a derivation."""
    alg = a.alg
    gen = alg.raising_gen(k, c)
    out = {}
    for i, ci in a.terms.items():
        for j, v in alg.derivation_on_basis(i, gen).items():
            out[j] = out.get(j, 0) + ci * v
    return AlgebraElem(alg, out)


def pairing(a, b, gram=None):
    """Bilinear pairing; PBW basis orthonormal unless a Gram matrix is given."""
    if gram is None:
        return sum((c * b.terms[k] for k, c in a.terms.items() if k in b.terms), Fraction(0))
    s = Fraction(0)
    for i, ci in a.terms.items():
        for j, cj in b.terms.items():
            g = gram.get((i, j), 0)
            if g:
                s += ci * cj * g
    return s


@dataclass(frozen=True)
class NuForm:
    element: AlgebraElem
    variable: str
    components: tuple  # ((weight, AlgebraElem), ...)

    def expansion(self):
        """{basis index: LaurentElem in the single variable}."""
        out = {}
        for w, part in self.components:
            for k, c in part.terms.items():
                out[k] = LaurentElem.monomial((self.variable,), (-w,), c)
        return out

    def weight_tags(self):
        return [w for w, _ in self.components]


def nu_form(g, var):
    comps = tuple((w, p) for w, p in g.weight_components() if not p.is_zero())
    return NuForm(g, var, comps)


def nu_hat(g, var):
    return nu_form(g, var).expansion()


def check_associativity(alg):
    """First failing basis triple (i, j, k) or None."""
    for i in range(alg.dim):
        for j in range(alg.dim):
            ab = alg.mul_basis(i, j)
            for k in range(alg.dim):
                left = {}
                for m, c in ab.items():
                    for n, v in alg.mul_basis(m, k).items():
                        left[n] = left.get(n, 0) + c * v
                right = {}
                for m, c in alg.mul_basis(j, k).items():
                    for n, v in alg.mul_basis(i, m).items():
                        right[n] = right.get(n, 0) + c * v
                left = {n: c for n, c in left.items() if c}
                right = {n: c for n, c in right.items() if c}
                if left != right:
                    return (i, j, k)
    return None
