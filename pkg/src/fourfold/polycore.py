"""Exact homogeneous polynomial algebra in the projective variables x, y, z, t.

Coefficients are exact rationals.  The numeric pipeline converts to double
precision at call sites through :class:`PolyJet`, which bundles vectorized
evaluators for a polynomial, its gradient, and its Hessian.
"""

from __future__ import annotations

import re
from fractions import Fraction

import numpy as np

from .errors import NotHomogeneous, ParseError, SingularMatrix

VARS = ("x", "y", "z", "t")

_TOKEN_RE = re.compile(r"(?P<num>\d+)|(?P<var>[xyzt])|(?P<op>[-+*^/=])|(?P<bad>\S)")


class HomoPoly:
    """Homogeneous polynomial: map from exponent 4-tuples to nonzero Fractions.

    Instances are immutable after construction.  Every stored exponent tuple
    sums to ``degree``; zero coefficients are dropped.
    """

    __slots__ = ("degree", "terms", "_arrays")

    def __init__(self, degree, terms):
        clean = {}
        for exp, coef in terms.items():
            coef = Fraction(coef)
            if coef == 0:
                continue
            exp = tuple(int(a) for a in exp)
            if len(exp) != 4 or min(exp) < 0:
                raise ValueError(f"bad exponent tuple {exp!r}")
            if sum(exp) != degree:
                raise ValueError(f"exponent {exp!r} does not sum to degree {degree}")
            clean[exp] = coef
        object.__setattr__(self, "degree", int(degree))
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_arrays", None)

    def __setattr__(self, name, value):
        raise AttributeError("HomoPoly is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, HomoPoly)
            and self.degree == other.degree
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.degree, tuple(sorted(self.terms.items()))))

    def __str__(self):
        return poly_to_string(self)

    def __repr__(self):
        return f"HomoPoly({poly_to_string(self)!r})"

    def is_zero(self):
        return not self.terms

    def arrays(self):
        """(exponents, coefficients) as numpy arrays for float evaluation."""
        cached = object.__getattribute__(self, "_arrays")
        if cached is None:
            if self.terms:
                exps = np.array(sorted(self.terms), dtype=np.int64)
                coefs = np.array([float(self.terms[tuple(e)]) for e in exps])
            else:
                exps = np.zeros((0, 4), dtype=np.int64)
                coefs = np.zeros(0)
            cached = (exps, coefs)
            object.__setattr__(self, "_arrays", cached)
        return cached


def _monomial_str(exp, coef):
    factors = [f"{v}^{k}" if k > 1 else v for v, k in zip(VARS, exp) if k]
    mono = "*".join(factors)
    mag = abs(coef)
    if not mono:
        return str(mag)
    if mag == 1:
        return mono
    return f"{mag}*{mono}"


def poly_to_string(P):
    """Canonical text form: monomials in descending lex order on (a, b, c, e)."""
    if not P.terms:
        return "0"
    parts = []
    for exp in sorted(P.terms, reverse=True):
        coef = P.terms[exp]
        sign = "-" if coef < 0 else "+"
        parts.append((sign, _monomial_str(exp, coef)))
    head_sign, head = parts[0]
    out = ("-" if head_sign == "-" else "") + head
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


class _Parser:
    """Recursive descent over the flat grammar (no parentheses, explicit *)."""

    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse_side(self):
        terms = {}
        sign = 1
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        self._parse_term(terms, sign)
        while True:
            kind, val = self.peek()
            if kind is None or (kind == "op" and val == "="):
                return terms
            if kind == "op" and val in "+-":
                self.take()
                self._parse_term(terms, -1 if val == "-" else 1)
            else:
                raise ParseError(f"expected '+' or '-' before {val!r}")

    def _parse_term(self, terms, sign):
        coef = Fraction(sign)
        exp = [0, 0, 0, 0]
        while True:
            coef, exp = self._parse_factor(coef, exp)
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.take()
                continue
            if kind in (None, "op") and val in (None, "+", "-", "="):
                break
            raise ParseError(
                f"implicit multiplication is not allowed (found {val!r}; use '*')"
            )
        key = tuple(exp)
        total = terms.get(key, Fraction(0)) + coef
        if total == 0:
            terms.pop(key, None)
        else:
            terms[key] = total

    def _parse_factor(self, coef, exp):
        kind, val = self.take()
        if kind == "num":
            num = Fraction(val)
            kind2, val2 = self.peek()
            if kind2 == "op" and val2 == "/":
                self.take()
                kind3, den = self.take()
                if kind3 != "num":
                    raise ParseError("expected integer denominator after '/'")
                if den == 0:
                    raise ParseError("zero denominator")
                num = Fraction(val, den)
            return coef * num, exp
        if kind == "var":
            i = VARS.index(val)
            power = 1
            kind2, val2 = self.peek()
            if kind2 == "op" and val2 == "^":
                self.take()
                kind3, val3 = self.take()
                if kind3 != "num" or val3 < 1:
                    raise ParseError("'^' requires a positive integer exponent")
                power = val3
            exp = list(exp)
            exp[i] += power
            return coef, exp
        raise ParseError(f"expected coefficient or variable, found {val!r}")


def _tokenize(text):
    text = text.replace("−", "-").replace("–", "-")
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        if m.group("bad"):
            raise ParseError(f"unexpected character {m.group('bad')!r}")
        if m.group("num") is not None:
            tokens.append(("num", int(m.group("num"))))
        elif m.group("var") is not None:
            tokens.append(("var", m.group("var")))
        else:
            tokens.append(("op", m.group("op")))
    return tokens


def parse_poly(text):
    """Parse the grammar of External Interfaces into a canonical HomoPoly.

    ``LHS = RHS`` is normalized to ``LHS - RHS``.  Raises ParseError for
    malformed text and NotHomogeneous for mixed total degrees.
    """
    lines = [ln for ln in text.splitlines() if not ln.lstrip().startswith("#")]
    parser = _Parser(_tokenize(" ".join(lines)))
    if parser.peek() == (None, None):
        raise ParseError("empty input")
    terms = parser.parse_side()
    kind, val = parser.peek()
    if kind == "op" and val == "=":
        parser.take()
        rhs = parser.parse_side()
        if parser.peek() != (None, None):
            raise ParseError("more than one '=' in input")
        for exp, coef in rhs.items():
            total = terms.get(exp, Fraction(0)) - coef
            if total == 0:
                terms.pop(exp, None)
            else:
                terms[exp] = total
    if not terms:
        raise ParseError("polynomial is identically zero")
    degrees = sorted({sum(exp) for exp in terms})
    if len(degrees) > 1:
        offenders = [
            _monomial_str(exp, terms[exp])
            for exp in sorted(terms)
            if sum(exp) != degrees[-1]
        ]
        raise NotHomogeneous(
            f"mixed total degrees {degrees}; offending monomials: {offenders}",
            offenders=offenders,
        )
    if degrees[0] == 0:
        raise ParseError("degree 0: a constant defines no surface")
    return HomoPoly(degrees[0], terms)


def evaluate(P, p):
    """Value of P at p; exact Fraction when all entries are rational."""
    if all(isinstance(c, (int, Fraction)) for c in p):
        total = Fraction(0)
        for exp, coef in P.terms.items():
            m = coef
            for c, a in zip(p, exp):
                m *= Fraction(c) ** a
            total += m
        return total
    exps, coefs = P.arrays()
    if len(coefs) == 0:
        return 0.0
    v = np.asarray(p, dtype=float)
    return float(np.prod(v[None, :] ** exps, axis=1) @ coefs)


def evaluate_many(P, V):
    """Float values of P at the rows of V."""
    exps, coefs = P.arrays()
    V = np.asarray(V, dtype=float)
    if len(coefs) == 0:
        return np.zeros(len(V))
    return np.prod(V[:, None, :] ** exps[None, :, :], axis=2) @ coefs


def differentiate(P, i):
    """Partial derivative with respect to variable i, degree drops by one."""
    terms = {}
    for exp, coef in P.terms.items():
        if exp[i] == 0:
            continue
        new = list(exp)
        new[i] -= 1
        terms[tuple(new)] = coef * exp[i]
    return HomoPoly(max(P.degree - 1, 0), terms)


def gradient(P):
    """The four partial derivatives, each homogeneous of degree d-1."""
    if P.degree < 1:
        raise ValueError("gradient needs degree >= 1")
    return tuple(differentiate(P, i) for i in range(4))


def hessian_exact(P, p):
    """4x4 matrix of second partials at a rational point, exact Fractions."""
    grads = gradient(P)
    return [
        [evaluate(differentiate(grads[i], j), p) for j in range(4)] for i in range(4)
    ]


def hessian_at(P, p):
    """4x4 symmetric float matrix of second partials of P evaluated at p."""
    grads = gradient(P)
    H = np.empty((4, 4))
    for i in range(4):
        for j in range(i, 4):
            H[i, j] = H[j, i] = evaluate(differentiate(grads[i], j), tuple(map(float, p)))
    return H


def _poly_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            total = out.get(key, Fraction(0)) + ca * cb
            if total == 0:
                out.pop(key, None)
            else:
                out[key] = total
    return out


def _poly_pow(a, n):
    result = {(0, 0, 0, 0): Fraction(1)}
    base = dict(a)
    while n > 0:
        if n & 1:
            result = _poly_mul(result, base)
        n >>= 1
        if n:
            base = _poly_mul(base, base)
    return result


def _det4(M):
    # exact cofactor expansion, fine for 4x4
    import itertools

    total = Fraction(0)
    for perm in itertools.permutations(range(4)):
        sign = 1
        seen = list(perm)
        for i in range(4):
            for j in range(i + 1, 4):
                if seen[i] > seen[j]:
                    sign = -sign
        prod = Fraction(sign)
        for i in range(4):
            prod *= M[i][perm[i]]
        total += prod
    return total


def act_linear(P, M):
    """Composition P(M v): substitute x_i -> sum_j M[i][j] * var_j.

    M must be invertible; entries are converted exactly to Fractions (float
    entries are taken at their exact binary values).
    """
    M = [[Fraction(x) for x in row] for row in M]
    if _det4(M) == 0:
        raise SingularMatrix("coordinate change matrix is singular")
    unit_exps = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    forms = []
    for i in range(4):
        forms.append({unit_exps[j]: M[i][j] for j in range(4) if M[i][j] != 0})
    out = {}
    for exp, coef in P.terms.items():
        mono = {(0, 0, 0, 0): coef}
        for i, a in enumerate(exp):
            if a:
                mono = _poly_mul(mono, _poly_pow(forms[i], a))
        for key, val in mono.items():
            total = out.get(key, Fraction(0)) + val
            if total == 0:
                out.pop(key, None)
            else:
                out[key] = total
    return HomoPoly(P.degree, out)


def rescale(P, c):
    """The polynomial c*P (same zero set for nonzero rational c)."""
    c = Fraction(c)
    if c == 0:
        raise ValueError("rescaling by zero")
    return HomoPoly(P.degree, {e: c * v for e, v in P.terms.items()})


class PolyJet:
    """Vectorized float evaluators for F, grad F, and Hess F.

    Numeric evaluations are scaled by 1/max|coef| of F so residual tolerances
    are meaningful regardless of the input's coefficient scale.
    """

    def __init__(self, P):
        self.poly = P
        scale = max(abs(c) for c in P.terms.values())
        self.coef_scale = float(scale)
        Pn = rescale(P, Fraction(1, 1) / scale)
        self.scaled = Pn
        self.grad_polys = gradient(Pn)
        self.hess_polys = [
            [differentiate(self.grad_polys[i], j) for j in range(4)] for i in range(4)
        ]
        self._gdata = [g.arrays() for g in self.grad_polys]
        self._hdata = [
            [self.hess_polys[i][j].arrays() for j in range(4)] for i in range(4)
        ]
        self._fdata = Pn.arrays()

    def value(self, v):
        return self.values(np.asarray(v, dtype=float)[None, :])[0]

    def values(self, V):
        exps, coefs = self._fdata
        return np.prod(V[:, None, :] ** exps[None], axis=2) @ coefs

    def grad(self, v):
        return self.grads(np.asarray(v, dtype=float)[None, :])[0]

    def grads(self, V):
        out = np.empty((len(V), 4))
        for i in range(4):
            exps, coefs = self._gdata[i]
            if len(coefs) == 0:
                out[:, i] = 0.0
            else:
                out[:, i] = np.prod(V[:, None, :] ** exps[None], axis=2) @ coefs
        return out

    def hess(self, v):
        return self.hesses(np.asarray(v, dtype=float)[None, :])[0]

    def hesses(self, V):
        out = np.empty((len(V), 4, 4))
        for i in range(4):
            for j in range(i, 4):
                exps, coefs = self._hdata[i][j]
                if len(coefs) == 0:
                    vals = np.zeros(len(V))
                else:
                    vals = np.prod(V[:, None, :] ** exps[None], axis=2) @ coefs
                out[:, i, j] = vals
                out[:, j, i] = vals
        return out
