"""Formal coordinate changes rho(z) = a_1 z + a_2 z^2 + ... and their action.

Unipotent changes (a_1 = 1) are written as the time-one flow of the vector
field v = sum_k beta_k z^{k+1} d/dz.  A general change is the scaling
z -> a_1 z composed with a unipotent one.

On cochains the pullback acts on the weighted differentials
F(g; z) prod dz_j^{wt g_j}; transform_cochain undoes the flow part with
exp(-L_v), so what is left is the scaling, which acts trivially exactly
on K_G-homogeneous cochains.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
import random
import re

from .algebra import apply_raising
from .cochains import var_names
from .laurent import LaurentElem, _gbinom


@dataclass(frozen=True)
class FormalAuto:
    """rho(z) = sum_{k>=1} coeffs[k-1] z^k, truncated at len(coeffs)."""
    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs or Fraction(self.coeffs[0]) == 0:
            raise ValueError("linear coefficient a_1 must be nonzero")
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    @property
    def order(self):
        return len(self.coeffs)

    def a(self, k):
        return self.coeffs[k - 1] if 1 <= k <= len(self.coeffs) else Fraction(0)

    @classmethod
    def identity(cls, order=1):
        return cls((1,) + (0,) * (order - 1))

    @classmethod
    def parse(cls, text, order=None):
        """'z + 1/2*z^2 - 3*z^3' -> FormalAuto."""
        s = text.replace(" ", "").replace("**", "^")
        if not s:
            raise ValueError("empty automorphism")
        terms = re.findall(r"[+-]?[^+-]+", s)
        coeffs = {}
        for term in terms:
            m = re.fullmatch(r"([+-]?)(?:(\d+(?:/\d+)?)\*?)?z(?:\^(\d+))?", term)
            if not m:
                raise ValueError(f"cannot parse term {term!r} in {text!r}")
            sign, c, p = m.groups()
            val = Fraction(c) if c else Fraction(1)
            if sign == "-":
                val = -val
            k = int(p) if p else 1
            if k < 1:
                raise ValueError("automorphisms have no constant term")
            coeffs[k] = coeffs.get(k, 0) + val
        n = max(max(coeffs), order or 1)
        return cls(tuple(coeffs.get(k, 0) for k in range(1, n + 1)))

    def truncate(self, order):
        c = list(self.coeffs[:order]) + [Fraction(0)] * max(0, order - len(self.coeffs))
        return FormalAuto(tuple(c))

    def __str__(self):
        parts = []
        for k, c in enumerate(self.coeffs, start=1):
            if c:
                parts.append(f"{c}*z^{k}")
        return " + ".join(parts)


def _poly_compose(outer, inner, order):
    """outer(inner(z)) mod z^{order+1}; both as coefficient lists from z^1."""
    res = [Fraction(0)] * (order + 1)
    power = [Fraction(0)] * (order + 1)
    power[0] = Fraction(1)
    for k in range(1, order + 1):
        # power <- power * inner
        new = [Fraction(0)] * (order + 1)
        for i, x in enumerate(power):
            if not x:
                continue
            for j, y in enumerate(inner, start=1):
                if i + j > order:
                    break
                new[i + j] += x * y
        power = new
        c = outer[k - 1] if k - 1 < len(outer) else 0
        if c:
            for i in range(order + 1):
                res[i] += c * power[i]
    return res[1:]


def compose(r1, r2, order=None):
    """(r1 o r2)(z) = r1(r2(z)) to the given order."""
    order = order or max(r1.order, r2.order)
    return FormalAuto(tuple(_poly_compose(r1.coeffs, r2.coeffs, order)))


def invert(rho, order=None):
    order = order or rho.order
    a1 = rho.a(1)
    inv = [1 / a1] + [Fraction(0)] * (order - 1)
    for k in range(2, order + 1):
        c = _poly_compose(rho.coeffs, inv, order)
        inv[k - 1] = -c[k - 1] / a1
    return FormalAuto(tuple(inv))


def solve_torsor(r1, r2, order=None):
    """The unique mu with r1 o mu = r2 to order (solved coefficient by coefficient)."""
    order = order or max(r1.order, r2.order)
    a1 = r1.a(1)
    mu = [Fraction(0)] * order
    for k in range(1, order + 1):
        c = _poly_compose(r1.coeffs, mu, order)
        mu[k - 1] = (r2.a(k) - c[k - 1]) / a1
    return FormalAuto(tuple(mu))


def random_unipotent(seed, order=3, scale=3):
    rng = random.Random(seed)
    c = [Fraction(1)] + [Fraction(rng.randint(-scale, scale), rng.randint(1, scale)) for _ in range(order - 1)]
    return FormalAuto(tuple(c))


# exponential presentation -------------------------------------------------------------
def _apply_field(beta, f, order):
    """v(f) for v = sum beta_k z^{k+1} d/dz on a coefficient list f (index = power)."""
    out = [Fraction(0)] * (order + 1)
    for p, c in enumerate(f):
        if not c or p == 0:
            continue
        for k, b in enumerate(beta, start=1):
            if b and p + k <= order:
                out[p + k] += b * p * c
    return out


def exp_field_on_z(beta, order):
    """exp(v) z as coefficients of z^1..z^order."""
    f = [Fraction(0)] * (order + 1)
    f[1] = Fraction(1)
    total = list(f)
    term = f
    for n in range(1, order + 1):
        term = [x / n for x in _apply_field(beta, term, order)]
        if not any(term):
            break
        total = [a + b for a, b in zip(total, term)]
    return total[1:]


def rho_exp_coeffs(rho, order=None, allow_scaling=False):
    """beta_1..beta_{order-1} with exp(sum beta_k z^{k+1} d/dz) z = rho(z) mod z^{order+1}."""
    order = order or rho.order
    a1 = rho.a(1)
    if a1 != 1:
        if not allow_scaling:
            raise ValueError("a_1 != 1: split off the scaling first (allow_scaling=True)")
        rho = FormalAuto(tuple(c / a1 for c in rho.coeffs))
    beta = [Fraction(0)] * (order - 1)
    for k in range(1, order):
        cur = exp_field_on_z(beta, order)
        beta[k - 1] = rho.a(k + 1) - cur[k]
    return tuple(beta)


def reconstruct(beta, order):
    return FormalAuto(tuple(exp_field_on_z(list(beta), order)))


def R_action(beta, g, c=-1):
    """exp(sum_k beta_k T^(k)) g; the sum is finite because T^(k) raises weight by k."""
    out = g
    term = g
    n = 1
    while True:
        nxt = None
        for k, b in enumerate(beta, start=1):
            if not b:
                continue
            piece = apply_raising(term, k, c) * b
            nxt = piece if nxt is None else nxt + piece
        if nxt is None or nxt.is_zero():
            break
        term = nxt * Fraction(1, n)
        out = out + term
        n += 1
    return out


# pullback on Laurent values ------------------------------------------------------------
def _unit_series(vars, j, coeffs, order):
    """(c_0 + c_1 z_j + ... ) as LaurentElem truncated at z_j-degree order."""
    n = len(vars)
    terms = {}
    for p, c in enumerate(coeffs[:order + 1]):
        if c:
            e = [0] * n
            e[j] = p
            terms[tuple(e)] = c
    return LaurentElem(vars, terms)


def _binomial_power(base, expo, order):
    """base^expo for base = 1 + x (x of positive degree), truncated at degree order."""
    one = LaurentElem.const(base.vars, 1)
    x = base - one
    out = one
    xp = one
    for n in range(1, order + 1):
        xp = (xp * x).truncate_degree(order)
        if xp.is_zero():
            break
        out = out + xp.scale(_gbinom(expo, n))
    return out.truncate_degree(order)


def _ratio_coeffs(rho):
    """rho(z)/(a_1 z) as coefficients from z^0."""
    a1 = rho.a(1)
    return [c / a1 for c in rho.coeffs]


def _deriv_coeffs(rho):
    a1 = rho.a(1)
    return [k * c / a1 for k, c in enumerate(rho.coeffs, start=1)]


def _diff_quotient(vars, a, b, rho, order):
    """(rho(z_a) - rho(z_b)) / (a_1 (z_a - z_b)) truncated at degree order."""
    n = len(vars)
    a1 = rho.a(1)
    terms = {}
    for k, c in enumerate(rho.coeffs, start=1):
        if not c or k - 1 > order:
            continue
        for i in range(k):
            e = [0] * n
            e[a] += i
            e[b] += k - 1 - i
            terms[tuple(e)] = terms.get(tuple(e), 0) + c / a1
    return LaurentElem(vars, terms)


def pullback_value(val, rho, weights, order):
    """rho^*(val prod dz^w): val(rho(z)) prod rho'(z_j)^{w_j}, degree-truncated.

    The same rho acts on every variable (diagonal convention), so diagonal
    poles stay on the diagonals.
    """
    vars = val.vars
    if val.is_zero():
        return val
    a1 = rho.a(1)
    ratio = [_unit_series(vars, j, _ratio_coeffs(rho), order) for j in range(len(vars))]
    deriv = [_unit_series(vars, j, _deriv_coeffs(rho), order) for j in range(len(vars))]
    shift = sum(val.poles.values())
    dmin = min(sum(e) for e in val.terms) - shift
    # numerator: sum c z^e prod ratio_j^{e_j}; powers cached per (j, e)
    cache = {}
    num = LaurentElem(vars)
    for e, c in val.terms.items():
        s = LaurentElem.monomial(vars, e, c * a1 ** sum(e))
        for j, x in enumerate(e):
            if x:
                key = (j, x)
                if key not in cache:
                    cache[key] = _binomial_power(ratio[j], x, order)
                s = s * cache[key]
        num = num + s
    out = num
    for (i, j), o in val.poles.items():
        q = _binomial_power(_diff_quotient(vars, i, j, rho, order), -o, order)
        out = out * q * LaurentElem.diff_pole(vars, i, j, o).scale(a1 ** (-o))
    for j, w in enumerate(weights):
        if w:
            out = out * _binomial_power(deriv[j], w, order).scale(a1 ** w)
    return out.truncate_degree(dmin + order)


def lie_derivative(val, beta, weights):
    """L_v on val prod dz^w: sum_j v(z_j) d_j val + w_j v'(z_j) val."""
    vars = val.vars
    n = len(vars)
    out = LaurentElem(vars)
    for j in range(n):
        dj = val.differentiate(j)
        for k, b in enumerate(beta, start=1):
            if not b:
                continue
            e = [0] * n
            e[j] = k + 1
            out = out + (LaurentElem.monomial(vars, e, b) * dj)
            if weights[j]:
                e = [0] * n
                e[j] = k
                out = out + LaurentElem.monomial(vars, e, b * weights[j] * (k + 1)) * val
    return out


def exp_lie(val, beta, weights, order, sign=1):
    """exp(sign L_v) val truncated at (min degree + order)."""
    if val.is_zero():
        return val
    shift = sum(val.poles.values())
    cap = min(sum(e) for e in val.terms) - shift + order
    out = val
    term = val
    for n in range(1, order + 1):
        term = lie_derivative(term, beta, weights).scale(Fraction(sign, n)).truncate_degree(cap)
        if term.is_zero():
            break
        out = out + term
    return out.truncate_degree(cap)


# cochains -------------------------------------------------------------------------------------
def _check_rho(rho, F):
    if isinstance(rho, (list, tuple)):
        rhos = list(rho)
        if len(rhos) != F.l:
            raise ValueError("one automorphism per variable expected")
        if any(r != rhos[0] for r in rhos):
            raise ValueError("variables linked by diagonal poles must share their automorphism")
        return rhos[0] if rhos else FormalAuto.identity()
    return rho


def pullback_cochain(rho, F, order, window=None):
    """{(t, h): LaurentElem} of rho^* F through the truncation order."""
    if window is not None and order > window:
        raise ValueError(f"order {order} exceeds the window {window}")
    rho = _check_rho(rho, F)
    w = F.alg.weights
    vars = var_names(F.l)
    out = {}
    for (t, h), val in F.values(vars).items():
        out[(t, h)] = pullback_value(val, rho, [w[i] for i in t], order)
    return out


def transform_cochain(rho, F, order, window=None):
    """exp(-L_v) rho^* F with v the flow part of rho; values {(t, h): LaurentElem}."""
    rho = _check_rho(rho, F)
    beta = rho_exp_coeffs(rho, order + 1, allow_scaling=True)
    w = F.alg.weights
    pulled = pullback_cochain(rho, F, order, window)
    out = {}
    for (t, h), val in pulled.items():
        res = exp_lie(val, beta, [w[i] for i in t], order, sign=-1)
        if not res.is_zero():
            out[(t, h)] = res
    return out


def invariance_check(F, rho, order, window=None):
    """transform_cochain(rho, F) == F through the order; returns (ok, residual)."""
    got = transform_cochain(rho, F, order, window)
    want = F.values()
    residual = []
    for key in sorted(set(got) | set(want)):
        a = got.get(key, LaurentElem(var_names(F.l)))
        b = want.get(key, LaurentElem(var_names(F.l)))
        if b.is_zero():
            cap = None
        else:
            cap = min(sum(e) for e in b.terms) - sum(b.poles.values()) + order
        d = a - b
        if cap is not None:
            d = d.truncate_degree(cap)
        if not d.is_zero():
            residual.append({"tuple": key[0], "out": key[1], "difference": d})
    return not residual, residual
