"""Sparse multivariate polynomials over the Gaussian rationals or floating complex numbers.

Variables are always ``x1 .. xn``.  A polynomial is *exact* when every
coefficient is a :class:`GaussianRational`; it is *numeric* when the
coefficients are Python ``complex`` or ``mpmath.mpc`` values.  The two modes
never mix implicitly: call :meth:`Polynomial.to_numeric` to cross over.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import mpmath

__all__ = [
    "GaussianRational",
    "Polynomial",
    "PolynomialSystem",
    "ParseError",
    "parse_system",
    "parse_polynomial",
    "evaluate",
    "support",
    "jacobian",
    "is_exact_scalar",
]


class GaussianRational:
    """Complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            re, im = re.re, re.im + Fraction(im)
        if not isinstance(re, (int, Fraction)) or not isinstance(im, (int, Fraction)):
            raise TypeError(f"GaussianRational needs rational parts, got {re!r}, {im!r}")
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def coerce(x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
            return GaussianRational(x)
        if isinstance(x, Rational) and not isinstance(x, bool):
            return GaussianRational(Fraction(x.numerator, x.denominator))
        return None

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        if not self.im and not o.im:
            return GaussianRational(self.re * o.re)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        if not o:
            raise ZeroDivisionError("division by zero")
        if not o.im:
            return GaussianRational(self.re / o.re, self.im / o.re)
        d = o.re * o.re + o.im * o.im
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d
        )

    def __rtruediv__(self, other):
        o = GaussianRational.coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussianRational(1) / (self ** (-k))
        result = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __abs__(self):
        return abs(complex(self))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = GaussianRational.coerce(other)
        if o is None:
            if isinstance(other, (complex, float)):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def is_real(self):
        return not self.im

    def to_mpc(self):
        return mpmath.mpc(mpmath.mpf(self.re.numerator) / self.re.denominator,
                          mpmath.mpf(self.im.numerator) / self.im.denominator)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return _format_coefficient(self)


def is_exact_scalar(x) -> bool:
    return GaussianRational.coerce(x) is not None


def _is_zero(c) -> bool:
    if isinstance(c, GaussianRational):
        return not c
    return c == 0


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _float_str(x: float) -> str:
    return repr(float(x))


def _format_coefficient(c) -> str:
    """Coefficient text that the parser reads back to the same value."""
    if isinstance(c, GaussianRational):
        re_, im_ = c.re, c.im
        if not im_:
            return _frac_str(re_)
        imag = "i" if im_ == 1 else "-i" if im_ == -1 else f"{_frac_str(im_)}*i"
        if not re_:
            return imag
        sign = "-" if im_ < 0 else "+"
        mag = "i" if abs(im_) == 1 else f"{_frac_str(abs(im_))}*i"
        return f"({_frac_str(re_)}{sign}{mag})"
    z = complex(c)
    if z.imag == 0:
        return _float_str(z.real)
    sign = "-" if z.imag < 0 else "+"
    return f"({_float_str(z.real)}{sign}{_float_str(abs(z.imag))}*i)"


def _negative_real(c) -> bool:
    if isinstance(c, GaussianRational):
        return not c.im and c.re < 0
    z = complex(c)
    return z.imag == 0 and z.real < 0


def _monomial_str(exp: Sequence[int]) -> str:
    parts = []
    for j, e in enumerate(exp):
        if e == 1:
            parts.append(f"x{j + 1}")
        elif e > 1:
            parts.append(f"x{j + 1}^{e}")
    return "*".join(parts)


def _grlex_key(exp):
    return (-sum(exp), tuple(-e for e in exp))


class Polynomial:
    """Immutable sparse polynomial ``sum c_a x^a`` in ``nvars`` variables."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, terms: Mapping[Sequence[int], object], nvars: int):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        clean = {}
        exact = None
        for exp, c in terms.items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} has length {len(exp)}, expected {nvars}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            g = GaussianRational.coerce(c)
            if g is not None:
                c = g
            elif isinstance(c, (int, float)):
                c = complex(c)
            this_exact = g is not None
            if exact is None:
                exact = this_exact
            elif exact != this_exact:
                raise TypeError("cannot mix exact and numeric coefficients in one polynomial")
            if _is_zero(c):
                continue
            if exp in clean:
                c = clean[exp] + c
                if _is_zero(c):
                    del clean[exp]
                    continue
            clean[exp] = c
        self.nvars = nvars
        self.terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls({}, nvars)

    @classmethod
    def constant(cls, c, nvars: int) -> "Polynomial":
        return cls({(0,) * nvars: c}, nvars)

    @classmethod
    def variable(cls, j: int, nvars: int) -> "Polynomial":
        """The polynomial ``x_{j+1}`` (``j`` is zero-based)."""
        exp = [0] * nvars
        exp[j] = 1
        return cls({tuple(exp): GaussianRational(1)}, nvars)

    @classmethod
    def monomial(cls, exp: Sequence[int], c=1) -> "Polynomial":
        return cls({tuple(exp): c}, len(exp))

    # properties
    @property
    def exact(self) -> bool:
        return all(isinstance(c, GaussianRational) for c in self.terms.values())

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, j: int) -> int:
        return max((e[j] for e in self.terms), default=-1)

    def coefficient(self, exp: Sequence[int]):
        c = self.terms.get(tuple(exp))
        if c is None:
            return GaussianRational(0) if self.exact else 0j
        return c

    def ordered_terms(self):
        """Terms in graded lexicographic order, highest first."""
        return sorted(self.terms.items(), key=lambda kv: _grlex_key(kv[0]))

    def support(self):
        if not self.terms:
            raise ValueError("the zero polynomial has empty support")
        return frozenset(self.terms)

    def variables(self) -> set:
        """Zero-based indices of the variables that occur."""
        return {j for exp in self.terms for j, e in enumerate(exp) if e}

    # arithmetic
    def _check(self, other: "Polynomial"):
        if self.nvars != other.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
        if self.terms and other.terms and self.exact != other.exact:
            raise TypeError("cannot combine exact and numeric polynomials; use to_numeric()")

    def _lift(self, other):
        if isinstance(other, Polynomial):
            return other
        return Polynomial.constant(other, self.nvars)

    def __add__(self, other):
        other = self._lift(other)
        self._check(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            out[exp] = out[exp] + c if exp in out else c
        return Polynomial(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for e, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            if _is_zero(other):
                return Polynomial.zero(self.nvars)
            probe = Polynomial.constant(other, self.nvars)
            self._check(probe)
            c0 = probe.terms[(0,) * self.nvars]
            return Polynomial({e: c * c0 for e, c in self.terms.items()}, self.nvars)
        self._check(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                out[e] = out[e] + c if e in out else c
        return Polynomial(out, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers need a non-negative integer exponent")
        one = GaussianRational(1) if (self.exact or not self.terms) else 1 + 0j
        result = Polynomial.constant(one, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            if is_exact_scalar(other) or isinstance(other, (complex, float)):
                return self == self._lift(other)
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def derivative(self, j: int) -> "Polynomial":
        """Partial derivative with respect to ``x_{j+1}``."""
        out = {}
        for exp, c in self.terms.items():
            if exp[j]:
                e = list(exp)
                e[j] -= 1
                out[tuple(e)] = c * exp[j]
        return Polynomial(out, self.nvars)

    def map_exponents(self, fn, nvars: int | None = None) -> "Polynomial":
        out = {}
        for exp, c in self.terms.items():
            e = tuple(fn(exp))
            out[e] = out[e] + c if e in out else c
        return Polynomial(out, self.nvars if nvars is None else nvars)

    def substitute(self, values: Mapping[int, "Polynomial"]) -> "Polynomial":
        """Replace variables (zero-based index) by polynomials in the same ring."""
        result = Polynomial.zero(self.nvars)
        cache = {}
        for exp, c in self.terms.items():
            keep = [0] * self.nvars
            term = None
            for j, e in enumerate(exp):
                if not e:
                    continue
                if j in values:
                    key = (j, e)
                    if key not in cache:
                        cache[key] = values[j] ** e
                    term = cache[key] if term is None else term * cache[key]
                else:
                    keep[j] = e
            mono = Polynomial({tuple(keep): c}, self.nvars)
            result = result + (mono if term is None else mono * term)
        return result

    def to_numeric(self, precision: int = 53) -> "Polynomial":
        """Floating copy: ``complex`` at 53 bits, ``mpmath.mpc`` above."""
        if precision <= 53:
            conv = complex
        else:
            def conv(c):
                with mpmath.workprec(precision):
                    return c.to_mpc() if isinstance(c, GaussianRational) else mpmath.mpc(c)
        return Polynomial({e: conv(c) for e, c in self.terms.items()}, self.nvars)

    def evaluate(self, point, precision: int = 53):
        return evaluate(self, point, precision)

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for k, (exp, c) in enumerate(self.ordered_terms()):
            mono = _monomial_str(exp)
            neg = _negative_real(c)
            if neg:
                c = -c
            cstr = _format_coefficient(c)
            if mono:
                if cstr == "1":
                    body = mono
                else:
                    body = f"{cstr}*{mono}"
            else:
                body = cstr
            if k == 0:
                pieces.append(("-" if neg else "") + body)
            else:
                pieces.append((" - " if neg else " + ") + body)
        return "".join(pieces)

    def __repr__(self):
        return f"Polynomial({str(self)!r}, nvars={self.nvars})"


class PolynomialSystem:
    """Ordered tuple of polynomials sharing one variable count."""

    __slots__ = ("polys", "nvars")

    def __init__(self, polys: Iterable[Polynomial], nvars: int | None = None):
        polys = tuple(polys)
        if nvars is None:
            if not polys:
                raise ValueError("empty system needs an explicit nvars")
            nvars = polys[0].nvars
        for p in polys:
            if p.nvars != nvars:
                raise ValueError(f"polynomial in {p.nvars} variables in a {nvars}-variable system")
        self.polys = polys
        self.nvars = nvars

    def __iter__(self):
        return iter(self.polys)

    def __len__(self):
        return len(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def __eq__(self, other):
        if not isinstance(other, PolynomialSystem):
            return NotImplemented
        return self.nvars == other.nvars and self.polys == other.polys

    def __hash__(self):
        return hash((self.nvars, self.polys))

    @property
    def exact(self) -> bool:
        return all(p.exact for p in self.polys)

    def is_curve_shaped(self) -> bool:
        return len(self.polys) == self.nvars - 1

    def to_numeric(self, precision: int = 53) -> "PolynomialSystem":
        return PolynomialSystem([p.to_numeric(precision) for p in self.polys], self.nvars)

    def evaluate(self, point, precision: int = 53):
        return [evaluate(p, point, precision) for p in self.polys]

    def serialize(self) -> str:
        return "".join(f"{p};\n" for p in self.polys)

    def __str__(self):
        return self.serialize()

    def __repr__(self):
        return f"PolynomialSystem({[str(p) for p in self.polys]!r}, nvars={self.nvars})"


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<var>x\d+)
  | (?P<imag>i(?![A-Za-z0-9_]))
  | (?P<pow>\*\*|\^)
  | (?P<op>[-+*/();])
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"<{self.kind} {self.text!r} @{self.line}:{self.col}>"


def _tokenize(text: str):
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            tokens.append(_Token("sep", "\n", line, col))
            line, col = line + 1, 1
        elif kind in ("ws", "comment"):
            col += len(s)
        else:
            if kind == "op" and s == ";":
                kind = "sep"
            elif kind == "op" and s in "()":
                kind = s
            tokens.append(_Token(kind, s, line, col))
            col += len(s)
        pos = m.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    """Recursive descent over the token list; builds expanded polynomials."""

    def __init__(self, tokens, nvars):
        self.toks = tokens
        self.i = 0
        self.n = nvars

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def system(self):
        polys = []
        while True:
            while self.peek().kind == "sep":
                self.take()
            if self.peek().kind == "eof":
                break
            polys.append(self.expr())
            tok = self.peek()
            if tok.kind not in ("sep", "eof"):
                self.error(f"unexpected {tok.text!r}")
        return polys

    def expr(self):
        result = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            self._skip_newlines()
            rhs = self.term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def _skip_newlines(self):
        while self.peek().kind == "sep" and self.peek().text == "\n":
            self.take()

    def term(self):
        result = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take()
            self._skip_newlines()
            if op.text == "*":
                result = result * self.unary()
            else:
                rhs_tok = self.peek()
                rhs = self.unary()
                if rhs.degree() > 0:
                    self.error("division by a non-constant", rhs_tok)
                if rhs.is_zero():
                    self.error("division by zero", rhs_tok)
                c = rhs.coefficient((0,) * self.n)
                result = result * (GaussianRational(1) / c)
        return result

    def unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.take()
            inner = self.unary()
            return -inner if tok.text == "-" else inner
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().kind == "pow":
            self.take()
            tok = self.peek()
            negative = False
            if tok.kind == "op" and tok.text in "+-":
                negative = tok.text == "-"
                self.take()
                tok = self.peek()
            if tok.kind != "num" or not tok.text.isdigit():
                self.error("exponent must be a non-negative integer", tok)
            self.take()
            if negative and int(tok.text) != 0:
                self.error("negative exponent", tok)
            base = base ** int(tok.text)
        return base

    def atom(self):
        tok = self.take()
        if tok.kind == "num":
            return Polynomial.constant(GaussianRational(Fraction(tok.text)), self.n)
        if tok.kind == "imag":
            return Polynomial.constant(GaussianRational(0, 1), self.n)
        if tok.kind == "var":
            idx = int(tok.text[1:])
            if idx == 0:
                raise ParseError("variable index 0 (variables start at x1)", tok.line, tok.col)
            return Polynomial.variable(idx - 1, self.n)
        if tok.kind == "(":
            inner = self.expr_in_parens()
            close = self.take()
            if close.kind != ")":
                self.error("expected ')'", close)
            return inner
        if tok.kind == "eof":
            self.error("unexpected end of input", tok)
        self.error(f"unexpected {tok.text!r}", tok)

    def expr_in_parens(self):
        self._skip_newlines()
        e = self.expr()
        self._skip_newlines()
        return e


def parse_system(text: str, nvars: int | None = None) -> PolynomialSystem:
    """Parse ``;``- or newline-separated polynomials in ``x1 .. xn``.

    The variable count is the highest index used unless ``nvars`` is given.
    Raises :class:`ParseError` (with line and column) on malformed input or
    an empty system.
    """
    tokens = _tokenize(text)
    used = [int(t.text[1:]) for t in tokens if t.kind == "var"]
    n = max(used, default=0)
    if nvars is not None:
        if nvars < n:
            raise ValueError(f"input uses x{n} but nvars={nvars}")
        n = nvars
    polys = _Parser(tokens, n).system()
    if not polys:
        last = tokens[-1]
        raise ParseError("no polynomials in input", last.line, last.col)
    return PolynomialSystem(polys, n)


def parse_polynomial(text: str, nvars: int | None = None) -> Polynomial:
    s = parse_system(text, nvars)
    if len(s) != 1:
        raise ValueError(f"expected one polynomial, found {len(s)}")
    return s[0]


# ---------------------------------------------------------------- evaluation

def _all_exact(values) -> bool:
    return all(is_exact_scalar(v) for v in values)


def evaluate(p: Polynomial, point, precision: int = 53):
    """Value of ``p`` at ``point``.

    Exact (a :class:`GaussianRational`) when ``p`` and the point are exact,
    otherwise ``complex`` for ``precision <= 53`` and ``mpmath.mpc`` above.
    """
    point = list(point)
    if len(point) != p.nvars:
        raise ValueError(f"point has {len(point)} coordinates, polynomial has {p.nvars} variables")
    if p.exact and _all_exact(point):
        xs = [GaussianRational.coerce(v) for v in point]
        total = GaussianRational(0)
        for exp, c in p.terms.items():
            term = c
            for x, e in zip(xs, exp):
                if e:
                    term = term * x ** e
            total = total + term
        return total
    if precision <= 53:
        xs = [complex(v) for v in point]
        total = 0j
        for exp, c in p.terms.items():
            term = complex(c)
            for x, e in zip(xs, exp):
                if e:
                    term *= x ** e
            total += term
        return total
    with mpmath.workprec(precision):
        xs = [_to_mpc(v) for v in point]
        total = mpmath.mpc(0)
        for exp, c in p.terms.items():
            term = _to_mpc(c)
            for x, e in zip(xs, exp):
                if e:
                    term *= x ** e
            total += term
        return total


def _to_mpc(v):
    if isinstance(v, GaussianRational):
        return v.to_mpc()
    g = GaussianRational.coerce(v)
    if g is not None:
        return g.to_mpc()
    return mpmath.mpc(v)


def support(p: Polynomial) -> frozenset:
    """Exponent vectors carrying a nonzero coefficient."""
    return p.support()


def jacobian(s: PolynomialSystem) -> list[list[Polynomial]]:
    """Matrix of partial derivatives, entry ``[i][j] = d polys[i] / d x_{j+1}``."""
    return [[p.derivative(j) for j in range(s.nvars)] for p in s.polys]
