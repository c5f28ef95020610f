"""Exact multivariate Laurent expressions with poles on variable differences.

An element is N(z) / prod_{i<j} (z_i - z_j)^{o_ij} where N is a Laurent
polynomial with rational coefficients.  Poles at z_i = 0 live in the
(negative) exponents of N; diff-poles are kept separately and reduced
eagerly, so pole orders can be read off directly.
"""
from fractions import Fraction
from math import comb


def _gbinom(n, k):
    # generalized binomial coefficient C(n, k) for integer n (possibly negative)
    if k < 0:
        return 0
    if n >= 0:
        return comb(n, k)
    return (-1) ** k * comb(k - n - 1, k)


def _add_into(acc, exp, c):
    v = acc.get(exp, 0) + c
    if v:
        acc[exp] = v
    else:
        acc.pop(exp, None)


def _poly_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            _add_into(out, e, ca * cb)
    return out


def _diff_factor(n, i, j, power):
    """(z_i - z_j)^power as a polynomial dict, power >= 0."""
    out = {}
    for k in range(power + 1):
        e = [0] * n
        e[i] = power - k
        e[j] = k
        out[tuple(e)] = Fraction((-1) ** k * comb(power, k))
    return out


def _divide_diff(num, i, j):
    """Divide num by (z_i - z_j) if exact; return quotient or None."""
    # divisibility: num(z_i = z_j) == 0
    test = {}
    for e, c in num.items():
        f = list(e)
        f[j] += f[i]
        f[i] = 0
        _add_into(test, tuple(f), c)
    if test:
        return None
    # synthetic division in z_i; coefficients are Laurent in the other vars
    quot = {}
    # represent num as sum_k C_k(z') z_i^k; work on a dict {k: {e': c}}
    coeffs = {}
    for e, c in num.items():
        k = e[i]
        rest = e[:i] + (0,) + e[i + 1:]
        coeffs.setdefault(k, {})[rest] = c
    ks = sorted(coeffs)
    lo, hi = ks[0], ks[-1]
    carry = {}
    # q_{k-1} = c_k + z_j q_k, from the top degree down
    for k in range(hi, lo, -1):
        ck = coeffs.get(k, {})
        q = dict(ck)
        for e, c in carry.items():
            f = list(e)
            f[j] += 1
            _add_into(q, tuple(f), c)
        for e, c in q.items():
            f = list(e)
            f[i] = k - 1
            quot[tuple(f)] = c
        carry = q
    return quot


class LaurentElem:
    """Immutable exact Laurent expression in an ordered list of variables.

    terms: {exponent tuple: Fraction}; poles: {(i, j): order} with i < j.
    """

    __slots__ = ("vars", "terms", "poles")

    def __init__(self, vars, terms=None, poles=None, _reduced=False):
        self.vars = tuple(vars)
        n = len(self.vars)
        t = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != n:
                raise ValueError("exponent length does not match variable set")
            c = Fraction(c)
            if c:
                t[e] = t.get(e, 0) + c
                if not t[e]:
                    del t[e]
        p = {}
        for (i, j), o in (poles or {}).items():
            if not (0 <= i < j < n):
                raise ValueError(f"bad pole pair {(i, j)}")
            if o < 0:
                raise ValueError("pole order must be non-negative")
            if o:
                p[(i, j)] = int(o)
        if not t:
            p = {}
        elif not _reduced:
            t, p = self._reduce(n, t, p)
        self.terms = t
        self.poles = p

    @staticmethod
    def _reduce(n, terms, poles):
        for pair in sorted(poles):
            i, j = pair
            while poles.get(pair, 0) > 0:
                q = _divide_diff(terms, i, j)
                if q is None:
                    break
                terms = q
                poles[pair] -= 1
            if not poles.get(pair):
                poles.pop(pair, None)
        return terms, poles

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, vars):
        return cls(vars)

    @classmethod
    def const(cls, vars, c):
        return cls(vars, {(0,) * len(vars): c})

    @classmethod
    def monomial(cls, vars, exp, c=1):
        return cls(vars, {tuple(exp): c})

    @classmethod
    def diff_pole(cls, vars, i, j, order=1):
        """(z_i - z_j)^(-order)."""
        if i > j:
            i, j = j, i
            c = (-1) ** order
        else:
            c = 1
        return cls(vars, {(0,) * len(vars): c}, {(i, j): order})

    # basic queries -------------------------------------------------------
    def is_zero(self):
        return not self.terms

    def index(self, var):
        if isinstance(var, int) and not isinstance(var, bool):
            if 0 <= var < len(self.vars):
                return var
            raise KeyError(f"unknown variable index {var}")
        try:
            return self.vars.index(var)
        except ValueError:
            raise KeyError(f"unknown variable {var!r}; cell is misconfigured") from None

    def pole_order(self, i, j):
        if i > j:
            i, j = j, i
        return self.poles.get((i, j), 0)

    def degrees(self):
        """Set of total degrees (numerator degree minus pole degree)."""
        shift = sum(self.poles.values())
        return {sum(e) - shift for e in self.terms}

    def __eq__(self, other):
        if not isinstance(other, LaurentElem):
            return NotImplemented
        if self.vars != other.vars:
            return False
        return self.terms == other.terms and self.poles == other.poles

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items()), frozenset(self.poles.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms):
            c = self.terms[e]
            mono = "*".join(f"{v}^{x}" if x != 1 else str(v)
                            for v, x in zip(self.vars, e) if x)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        s = " + ".join(parts)
        if self.poles:
            den = "*".join(f"({self.vars[i]}-{self.vars[j]})^{o}"
                           for (i, j), o in sorted(self.poles.items()))
            s = f"({s})/({den})"
        return s

    # arithmetic ----------------------------------------------------------
    def _lift(self, vars):
        if vars == self.vars:
            return self
        pos = []
        for v in self.vars:
            pos.append(vars.index(v))
        n = len(vars)
        terms = {}
        for e, c in self.terms.items():
            f = [0] * n
            for k, x in zip(pos, e):
                f[k] = x
            terms[tuple(f)] = c
        poles = {}
        for (i, j), o in self.poles.items():
            a, b = pos[i], pos[j]
            if a < b:
                poles[(a, b)] = o
            else:
                # (z_i - z_j) = -(z_b - z_a)
                poles[(b, a)] = o
                if o % 2:
                    terms = {e: -c for e, c in terms.items()}
        return LaurentElem(vars, terms, poles, _reduced=True)

    def _common(self, other):
        if self.vars == other.vars:
            return self, other
        vars = list(self.vars)
        for v in other.vars:
            if v not in vars:
                vars.append(v)
        vars = tuple(vars)
        return self._lift(vars), other._lift(vars)

    def _raise_poles(self, target):
        """Same element written over the larger denominator `target`."""
        n = len(self.vars)
        num = dict(self.terms)
        for pair, o in target.items():
            extra = o - self.poles.get(pair, 0)
            if extra > 0:
                num = _poly_mul(num, _diff_factor(n, pair[0], pair[1], extra))
        return num

    def __add__(self, other):
        if not isinstance(other, LaurentElem):
            other = LaurentElem.const(self.vars, other)
        a, b = self._common(other)
        if not a.terms:
            return b
        if not b.terms:
            return a
        if a.poles == b.poles:
            num = dict(a.terms)
            for e, c in b.terms.items():
                _add_into(num, e, c)
            return LaurentElem(a.vars, num, dict(a.poles))
        den = dict(a.poles)
        for pair, o in b.poles.items():
            den[pair] = max(den.get(pair, 0), o)
        num = a._raise_poles(den)
        for e, c in b._raise_poles(den).items():
            _add_into(num, e, c)
        return LaurentElem(a.vars, num, den)

    __radd__ = __add__

    def __neg__(self):
        return LaurentElem(self.vars, {e: -c for e, c in self.terms.items()},
                           dict(self.poles), _reduced=True)

    def __sub__(self, other):
        if not isinstance(other, LaurentElem):
            other = LaurentElem.const(self.vars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = Fraction(c)
        if not c:
            return LaurentElem(self.vars)
        return LaurentElem(self.vars, {e: v * c for e, v in self.terms.items()},
                           dict(self.poles), _reduced=True)

    def __mul__(self, other):
        if not isinstance(other, LaurentElem):
            return self.scale(other)
        a, b = self._common(other)
        if not a.terms or not b.terms:
            return LaurentElem(a.vars)
        num = _poly_mul(a.terms, b.terms)
        den = dict(a.poles)
        for pair, o in b.poles.items():
            den[pair] = den.get(pair, 0) + o
        return LaurentElem(a.vars, num, den)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers are not closed in this ring")
        out = LaurentElem.const(self.vars, 1)
        for _ in range(k):
            out = out * self
        return out

    # calculus --------------------------------------------------------------
    def differentiate(self, var):
        v = self.index(var)
        n = len(self.vars)
        dnum = {}
        for e, c in self.terms.items():
            if e[v]:
                f = list(e)
                f[v] -= 1
                _add_into(dnum, tuple(f), c * e[v])
        out = LaurentElem(self.vars, dnum, dict(self.poles))
        for (i, j), o in self.poles.items():
            if v not in (i, j):
                continue
            sgn = 1 if v == i else -1
            den = dict(self.poles)
            den[(i, j)] = o + 1
            num = {e: -o * sgn * c for e, c in self.terms.items()}
            out = out + LaurentElem(self.vars, num, den)
        return out

    def shift_expand(self, var, offset, order, region_ok=False):
        """Expand var -> var + offset, keeping total offset-degree <= order.

        Negative powers of var or diff-poles involving var are expanded as
        geometric series; that requires |offset| small compared with them,
        which the caller must declare with region_ok=True.
        """
        if order < 0:
            raise ValueError("order must be non-negative")
        v = self.index(var)
        if offset in self.vars:
            raise ValueError("offset must be a fresh variable")
        singular = any(e[v] < 0 for e in self.terms) or any(v in p for p in self.poles)
        if singular and not region_ok:
            raise ValueError("expansion around a pole requires a declared region (region_ok=True)")
        vars = self.vars + (offset,)
        n = len(vars)
        w = n - 1
        # each numerator monomial: z^e -> sum_k C(e,k) z^(e-k) w^k
        num = {}
        for e, c in self.terms.items():
            for k in range(order + 1):
                b = _gbinom(e[v], k)
                if not b:
                    continue
                f = list(e) + [k]
                f[v] -= k
                _add_into(num, tuple(f), c * b)
        out = LaurentElem(vars, num)
        for (i, j), o in self.poles.items():
            if v == i or v == j:
                sgn = 1 if v == i else -1
                # (d + sgn*w)^(-o) = sum_k C(-o,k) sgn^k w^k d^(-o-k)
                series = LaurentElem(vars)
                for k in range(order + 1):
                    f = [0] * n
                    f[w] = k
                    series = series + LaurentElem(vars, {tuple(f): _gbinom(-o, k) * sgn ** k},
                                                  {(i, j): o + k})
                out = out * series
            else:
                out = out * LaurentElem(vars, {(0,) * n: 1}, {(i, j): o})
        return out.truncate_in(w, order)

    def truncate_in(self, var, order):
        """Drop numerator terms whose exponent in var exceeds order.

        Only meaningful when no diff-pole involves var.
        """
        v = self.index(var)
        if any(v in p for p in self.poles):
            raise ValueError("cannot truncate in a variable carrying diff-poles")
        terms = {e: c for e, c in self.terms.items() if e[v] <= order}
        return LaurentElem(self.vars, terms, dict(self.poles))

    def truncate_degree(self, max_degree):
        """Keep homogeneous components of total degree <= max_degree."""
        shift = sum(self.poles.values())
        terms = {e: c for e, c in self.terms.items() if sum(e) - shift <= max_degree}
        return LaurentElem(self.vars, terms, dict(self.poles))

    def homogeneous_part(self, degree):
        shift = sum(self.poles.values())
        terms = {e: c for e, c in self.terms.items() if sum(e) - shift == degree}
        return LaurentElem(self.vars, terms, dict(self.poles))

    def evaluate(self, point):
        """Exact value at a rational point (sequence aligned with vars)."""
        pt = [Fraction(x) for x in point]
        if len(pt) != len(self.vars):
            raise ValueError("point has wrong length")
        den = Fraction(1)
        for (i, j), o in self.poles.items():
            d = pt[i] - pt[j]
            if d == 0:
                raise ZeroDivisionError("evaluation on a diagonal pole")
            den *= d ** o
        s = Fraction(0)
        for e, c in self.terms.items():
            t = c
            for x, k in zip(pt, e):
                if k:
                    if x == 0 and k < 0:
                        raise ZeroDivisionError("evaluation at a pole z=0")
                    t *= x ** k
            s += t
        return s / den

    def rename(self, vars):
        """Same element with the variables relabelled positionally."""
        if len(vars) != len(self.vars):
            raise ValueError("rename needs the same number of variables")
        return LaurentElem(vars, dict(self.terms), dict(self.poles), _reduced=True)

    # serialization ------------------------------------------------------------
    def to_json(self):
        terms = []
        for e in sorted(self.terms):
            c = self.terms[e]
            terms.append({"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)})
        poles = [{"i": i, "j": j, "ord": o} for (i, j), o in sorted(self.poles.items())]
        return {"vars": list(self.vars), "terms": terms, "poles": poles}

    @classmethod
    def from_json(cls, data):
        vars = data["vars"]
        terms = {}
        for t in data.get("terms", []):
            terms[tuple(t["exp"])] = Fraction(int(t["num"]), int(t.get("den", 1)))
        poles = {(p["i"], p["j"]): p["ord"] for p in data.get("poles", [])}
        return cls(vars, terms, poles)


# functional spellings used across the package
def lp_mul(a, b):
    return a * b


def lp_differentiate(a, var):
    return a.differentiate(var)


def lp_shift_expand(a, var, offset, order, region_ok=False):
    return a.shift_expand(var, offset, order, region_ok=region_ok)


def lp_pole_order(a, i, j):
    return a.pole_order(i, j)
