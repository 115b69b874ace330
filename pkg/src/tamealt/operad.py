"""Free-operad terms and elements of the graded free algebra.

A term is either a variable leaf, stored as a plain ``int`` (the variable
index), or an internal node stored as a tuple ``(op_name, child_1, ...)``.
Terms are hashable, so elements of the free algebra are dictionaries mapping
terms to exact rational coefficients.

Text format::

    3/5*m(x1, x2) + x1 - t(x0, x1, x1)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping, Union

import numpy as np

Term = Union[int, tuple]
DEFAULT_DEGREE_CAP = 8
OP_NAME_POOL = "mtuvwyz"


@dataclass(frozen=True)
class Signature:
    """Finite list of named operations with arities >= 1."""

    ops: tuple[tuple[str, int], ...]

    def __post_init__(self):
        ops = tuple((str(n), int(a)) for n, a in self.ops)
        object.__setattr__(self, "ops", ops)
        names = [n for n, _ in ops]
        if len(set(names)) != len(names):
            raise ValueError("operation names must be unique")
        for name, a in ops:
            if a < 1:
                raise ValueError(f"operation {name!r} has arity {a}; constants are not allowed")
            if re.fullmatch(r"x\d+", name) or not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
                raise ValueError(f"bad operation name {name!r}")

    @classmethod
    def parse(cls, text: str) -> Signature:
        """Parse the compact form ``b2,t3,a5`` (binary, ternary, arity 5).

        Operations are named ``m, t, u, v, ...`` in order of appearance.
        """
        ops = []
        for i, tok in enumerate(t.strip() for t in text.split(",") if t.strip()):
            m = re.fullmatch(r"([bta])(\d+)", tok)
            if not m:
                raise ValueError(f"bad signature token {tok!r}")
            kind, arity = m.group(1), int(m.group(2))
            if kind == "b" and arity != 2 or kind == "t" and arity != 3:
                raise ValueError(f"token {tok!r}: 'b' means arity 2 and 't' arity 3")
            name = OP_NAME_POOL[i] if i < len(OP_NAME_POOL) else f"s{i}"
            ops.append((name, arity))
        if not ops:
            raise ValueError("empty signature")
        return cls(tuple(ops))

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.ops]

    @property
    def max_arity(self) -> int:
        return max(a for _, a in self.ops)

    def arity(self, name: str) -> int:
        for n, a in self.ops:
            if n == name:
                return a
        raise KeyError(name)

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def to_json(self) -> list[dict]:
        return [{"name": n, "arity": a} for n, a in self.ops]

    @classmethod
    def from_json(cls, data) -> Signature:
        return cls(tuple((d["name"], d["arity"]) for d in data))


# -- terms ------------------------------------------------------------------


def node(name: str, *children: Term) -> Term:
    return (name, *children)


def is_leaf(t: Term) -> bool:
    return not isinstance(t, tuple)


@lru_cache(maxsize=1 << 16)
def leaf_count(t: Term) -> int:
    if is_leaf(t):
        return 1
    return sum(leaf_count(c) for c in t[1:])


def term_variables(t: Term) -> set[int]:
    if is_leaf(t):
        return {t}
    out = set()
    for c in t[1:]:
        out |= term_variables(c)
    return out


def leaves(t: Term) -> list[int]:
    if is_leaf(t):
        return [t]
    return [x for c in t[1:] for x in leaves(c)]


def _preorder(t: Term):
    if is_leaf(t):
        yield (1, t)
    else:
        yield (0, t[0])
        for c in t[1:]:
            yield from _preorder(c)


@lru_cache(maxsize=1 << 16)
def term_key(t: Term):
    """Canonical sort key: degree first, then preorder of labels."""
    return (leaf_count(t), tuple(_preorder(t)))


def check_term(t: Term, sig: Signature | None = None) -> None:
    if is_leaf(t):
        if not isinstance(t, (int, np.integer)) or t < 0:
            raise ValueError(f"bad leaf {t!r}")
        return
    name, children = t[0], t[1:]
    if sig is not None and sig.arity(name) != len(children):
        raise ValueError(f"{name} expects {sig.arity(name)} children, got {len(children)}")
    if not children:
        raise ValueError("operations of arity 0 are not allowed")
    for c in children:
        check_term(c, sig)


def term_str(t: Term) -> str:
    if is_leaf(t):
        return f"x{t}"
    return f"{t[0]}({', '.join(term_str(c) for c in t[1:])})"


def relabel(t: Term, mapping) -> Term:
    if is_leaf(t):
        return mapping(t)
    return (t[0], *(relabel(c, mapping) for c in t[1:]))


def graft(outer: Term, i: int, inner: Term) -> Term:
    """Operadic partial composition: plug ``inner`` into the leaf labelled ``i``.

    Both trees are operad elements with leaves labelled ``1..m`` (each label
    used once).  Labels of ``inner`` are shifted by ``i - 1`` and labels of
    ``outer`` above ``i`` by ``leaf_count(inner) - 1``.
    """
    m, n = leaf_count(outer), leaf_count(inner)
    for t, cnt in ((outer, m), (inner, n)):
        if sorted(leaves(t)) != list(range(1, cnt + 1)):
            raise ValueError("operad elements must carry leaf labels 1..n, each once")
    if not 1 <= i <= m:
        raise ValueError(f"graft position {i} out of range 1..{m}")

    def go(t):
        if is_leaf(t):
            if t == i:
                return relabel(inner, lambda j: j + i - 1)
            return t if t < i else t + n - 1
        return (t[0], *(go(c) for c in t[1:]))

    return go(outer)


def left_to_right(t: Term) -> Term:
    """Renumber the leaves of ``t`` as 1, 2, ... from left to right."""
    counter = iter(range(1, leaf_count(t) + 1))
    return relabel(t, lambda _: next(counter))


# -- free algebra elements --------------------------------------------------


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


class FreeElement:
    """Finite linear combination of terms with rational coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[Term, object] | None = None):
        out = {}
        if terms:
            for t, c in terms.items():
                c = _frac(c)
                if c:
                    out[t] = c
        self.terms: dict[Term, Fraction] = out
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> FreeElement:
        e = cls.__new__(cls)
        e.terms = terms
        e._hash = None
        return e

    @classmethod
    def var(cls, i: int) -> FreeElement:
        return cls._raw({int(i): Fraction(1)})

    @classmethod
    def of(cls, t: Term, c=1) -> FreeElement:
        return cls({t: c})

    @classmethod
    def zero(cls) -> FreeElement:
        return cls._raw({})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, FreeElement):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def add_scaled(self, other: FreeElement, c=1) -> FreeElement:
        c = _frac(c)
        if not c:
            return self
        out = dict(self.terms)
        for t, v in other.terms.items():
            s = out.get(t, 0) + c * v
            if s:
                out[t] = s
            else:
                out.pop(t, None)
        return FreeElement._raw(out)

    def __add__(self, other):
        return self.add_scaled(other, 1)

    def __sub__(self, other):
        return self.add_scaled(other, -1)

    def __neg__(self):
        return FreeElement._raw({t: -c for t, c in self.terms.items()})

    def __mul__(self, c):
        c = _frac(c)
        if not c:
            return FreeElement.zero()
        return FreeElement._raw({t: c * v for t, v in self.terms.items()})

    __rmul__ = __mul__

    def degree(self) -> int | None:
        """Largest leaf count among the terms; ``None`` for the zero element."""
        if not self.terms:
            return None
        return max(leaf_count(t) for t in self.terms)

    def min_degree(self) -> int | None:
        if not self.terms:
            return None
        return min(leaf_count(t) for t in self.terms)

    def variables(self) -> set[int]:
        out = set()
        for t in self.terms:
            out |= term_variables(t)
        return out

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.terms.values())

    def items(self) -> list[tuple[Term, Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: term_key(kv[0]))

    def truncate(self, cap: int) -> FreeElement:
        return FreeElement._raw({t: c for t, c in self.terms.items() if leaf_count(t) <= cap})

    def __str__(self):
        return format_element(self)

    def __repr__(self):
        return f"FreeElement({format_element(self)!r})"


def operate(name: str, args: list[FreeElement], cap: int | None = None) -> tuple[FreeElement, bool]:
    """Multilinear product ``name(args...)``, dropping terms of degree > cap.

    Returns the product and whether anything was dropped.
    """
    by_degree = []
    for a in args:
        groups: dict[int, list] = {}
        for t, c in a.terms.items():
            groups.setdefault(leaf_count(t), []).append((t, c))
        by_degree.append(sorted(groups.items()))
    if any(not g for g in by_degree):
        return FreeElement.zero(), False
    mins = [g[0][0] for g in by_degree]
    tail_min = [sum(mins[i:]) for i in range(len(mins) + 1)]
    out: dict[Term, Fraction] = {}
    dropped = False

    def rec(i, deg, children, coef):
        nonlocal dropped
        if i == len(by_degree):
            t = (name, *children)
            s = out.get(t, 0) + coef
            if s:
                out[t] = s
            else:
                out.pop(t, None)
            return
        for d, group in by_degree[i]:
            if cap is not None and deg + d + tail_min[i + 1] > cap:
                dropped = True
                break
            for t, c in group:
                rec(i + 1, deg + d, children + (t,), coef * c)

    rec(0, 0, (), Fraction(1))
    return FreeElement._raw(out), dropped


def degree(e: FreeElement) -> int | None:
    return e.degree()


# -- substitution -----------------------------------------------------------


class Endomorphism:
    """Endomorphism of the free algebra on ``x_0..x_{n-1}``, given by images.

    ``cap`` bounds the degree kept in every computed element; ``None`` keeps
    everything.  ``truncated`` records whether any term was ever discarded.
    """

    __slots__ = ("images", "cap", "truncated")

    def __init__(self, images: Iterable[FreeElement], cap: int | None = DEFAULT_DEGREE_CAP, truncated=False):
        self.images = tuple(images)
        self.cap = cap
        self.truncated = truncated
        for im in self.images:
            if cap is not None and im.degree() is not None and im.degree() > cap:
                raise ValueError("image exceeds the degree cap")

    @classmethod
    def identity(cls, n: int, cap: int | None = DEFAULT_DEGREE_CAP) -> Endomorphism:
        return cls([FreeElement.var(i) for i in range(n)], cap)

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, e: FreeElement) -> FreeElement:
        return substitute(self, e)

    def compose(self, other: Endomorphism) -> Endomorphism:
        """``self o other``: x_j -> self(other(x_j))."""
        cap = _min_cap(self.cap, other.cap)
        dropped = self.truncated or other.truncated
        images = []
        for im in other.images:
            r, d = substitute_checked(self, im, cap)
            dropped |= d
            images.append(r)
        return Endomorphism(images, cap, dropped)

    def __eq__(self, other):
        return isinstance(other, Endomorphism) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        body = ", ".join(f"x{i} -> {im}" for i, im in enumerate(self.images))
        return f"Endomorphism({body})"


def _min_cap(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def substitute_checked(phi: Endomorphism, e: FreeElement, cap: int | None = None) -> tuple[FreeElement, bool]:
    if cap is None:
        cap = phi.cap
    memo: dict = {}
    dropped = False

    def sub(t: Term) -> FreeElement:
        nonlocal dropped
        if t in memo:
            return memo[t]
        if is_leaf(t):
            if not 0 <= t < phi.n:
                raise ValueError(f"variable x{t} is not covered by the endomorphism")
            r = phi.images[t]
            if cap is not None and r.degree() is not None and r.degree() > cap:
                dropped = True
                r = r.truncate(cap)
        else:
            r, d = operate(t[0], [sub(c) for c in t[1:]], cap)
            dropped |= d
        memo[t] = r
        return r

    out: dict[Term, Fraction] = {}
    for t, c in e.terms.items():
        for t2, c2 in sub(t).terms.items():
            s = out.get(t2, 0) + c * c2
            if s:
                out[t2] = s
            else:
                out.pop(t2, None)
    return FreeElement._raw(out), dropped


def substitute(phi: Endomorphism, e: FreeElement, cap: int | None = None) -> FreeElement:
    """Substitute the images of ``phi`` into ``e``, truncating at the cap."""
    return substitute_checked(phi, e, cap)[0]


# -- evaluation in an algebra -----------------------------------------------


def coefficient_mod(c: Fraction, p: int) -> int:
    if c.denominator % p == 0:
        raise ZeroDivisionError(f"coefficient {c} has a denominator divisible by p={p}")
    return c.numerator * pow(c.denominator, -1, p) % p


def evaluate(e: FreeElement, assignment, A) -> np.ndarray:
    """Evaluate ``e`` in the algebra ``A`` with ``x_i -> assignment[i]``.

    Assigned values may be single vectors of shape (k,) or batches of shape
    (..., k); the result has the matching shape.
    """
    p = A.p
    memo: dict = {}

    def ev(t):
        if t in memo:
            return memo[t]
        if is_leaf(t):
            try:
                r = np.asarray(assignment[t], dtype=np.int64) % p
            except (KeyError, IndexError):
                raise ValueError(f"variable x{t} is unassigned") from None
        else:
            r = A.apply(t[0], *(ev(c) for c in t[1:]))
        memo[t] = r
        return r

    acc = None
    for t, c in e.terms.items():
        v = ev(t) * coefficient_mod(c, p)
        acc = v if acc is None else acc + v
    if acc is None:
        values = list(assignment.values()) if isinstance(assignment, Mapping) else list(assignment)
        return np.zeros(np.shape(values[0]) if values else (A.k,), dtype=np.int64)
    return acc % p


# -- text format ------------------------------------------------------------


def format_coefficient(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_element(e: FreeElement) -> str:
    items = e.items()
    if not items:
        return "0"
    parts = []
    for i, (t, c) in enumerate(items):
        sign = "-" if c < 0 else "+"
        a = abs(c)
        body = term_str(t) if a == 1 else f"{format_coefficient(a)}*{term_str(t)}"
        if i == 0:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+)|(x\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text: str):
    pos = 0
    toks = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        num, v, ident, ch = m.groups()
        if num is not None:
            toks.append(("num", int(num)))
        elif v is not None:
            toks.append(("var", int(v[1:])))
        elif ident is not None:
            toks.append(("name", ident))
        elif ch is not None and ch.strip():
            toks.append(("sym", ch))
        pos = m.end()
    toks.append(("end", None))
    return toks


class _Parser:
    def __init__(self, text: str, sig: Signature | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind or value is not None and tok[1] != value:
            raise ValueError(f"parse error near token {tok[1]!r} (expected {value or kind})")
        self.i += 1
        return tok

    def expr(self) -> FreeElement:
        acc = FreeElement.zero()
        sign = 1
        if self.peek() in (("sym", "+"), ("sym", "-")):
            sign = -1 if self.take()[1] == "-" else 1
        acc = acc.add_scaled(self.summand(), sign)
        while self.peek() in (("sym", "+"), ("sym", "-")):
            sign = -1 if self.take()[1] == "-" else 1
            acc = acc.add_scaled(self.summand(), sign)
        return acc

    def summand(self) -> FreeElement:
        coef = Fraction(1)
        if self.peek()[0] == "num":
            num = self.take()[1]
            den = 1
            if self.peek() == ("sym", "/"):
                self.take()
                den = self.take("num")[1]
            coef = Fraction(num, den)
            self.take("sym", "*")
        return self.atom() * coef

    def atom(self) -> FreeElement:
        tok = self.peek()
        if tok[0] == "var":
            self.take()
            return FreeElement.var(tok[1])
        if tok == ("sym", "("):
            self.take()
            e = self.expr()
            self.take("sym", ")")
            return e
        if tok[0] == "name":
            name = self.take()[1]
            self.take("sym", "(")
            args = [self.expr()]
            while self.peek() == ("sym", ","):
                self.take()
                args.append(self.expr())
            self.take("sym", ")")
            if self.sig is not None and self.sig.arity(name) != len(args):
                raise ValueError(f"{name} expects {self.sig.arity(name)} arguments, got {len(args)}")
            return operate(name, args)[0]
        raise ValueError(f"parse error near token {tok[1]!r}")


def parse_element(text: str, sig: Signature | None = None) -> FreeElement:
    """Parse the text format; arguments that are sums expand multilinearly."""
    parser = _Parser(text, sig)
    if parser.peek() == ("num", 0) and parser.toks[1][0] == "end":
        return FreeElement.zero()
    e = parser.expr()
    parser.take("end")
    return e


def parse_term(text: str, sig: Signature | None = None) -> Term:
    e = parse_element(text, sig)
    if len(e.terms) != 1 or next(iter(e.terms.values())) != 1:
        raise ValueError(f"{text!r} is not a single term")
    return next(iter(e.terms))


def all_terms(sig: Signature, variables: Iterable[int], max_degree: int) -> list[Term]:
    """Every term over ``variables`` with at most ``max_degree`` leaves."""
    if any(a == 1 for _, a in sig):
        raise ValueError("unary operations give infinitely many terms per degree")
    variables = list(variables)
    by_deg: dict[int, list] = {1: list(variables)}
    for d in range(2, max_degree + 1):
        level = []
        for name, a in sig:
            for split in _compositions(d, a):
                for kids in product(*(by_deg.get(s, []) for s in split)):
                    level.append((name, *kids))
        by_deg[d] = level
    return [t for d in range(1, max_degree + 1) for t in by_deg.get(d, [])]


def _compositions(total: int, parts: int):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)
