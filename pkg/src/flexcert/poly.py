"""Exact sparse multivariate polynomials over a small named variable set.

Monomials are dense exponent vectors packed into a single Python int, 16 bits
per variable, with the total degree stored in the slot above the exponents::

    packed = deg << 16*n | e_0 << 16*(n-1) | ... | e_{n-1}

Multiplying monomials is integer addition, and comparing packed ints is the
graded lexicographic order with variable 0 most significant.  Coefficients are
``int`` or ``fractions.Fraction`` (normalized back to ``int`` when integral).
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

Scalar = Union[int, Fraction]

MAX_VARIABLES = 16
_BITS = 16
_MASK = (1 << _BITS) - 1
_MAX_DEGREE = _MASK

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class UniverseMismatch(ValueError):
    pass


class UnknownVariable(ValueError):
    def __init__(self, name: str, pos: int | None = None):
        self.name = name
        self.pos = pos
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"unknown variable {name!r}{where}")


class ZeroPolynomialError(ValueError):
    """Raised where a nonzero polynomial is required (e.g. multidegree of 0)."""


class NotHomogeneous(ValueError):
    """A polynomial is not multi-homogeneous; carries two witness terms."""

    def __init__(self, first, second, degrees):
        self.terms = (first, second)
        self.degrees = degrees
        super().__init__(
            f"not multi-homogeneous: {first} has degree {degrees[0]}, "
            f"{second} has degree {degrees[1]}"
        )


def scalar(value) -> Scalar:
    """Coerce to an exact scalar; rejects floats and bools."""
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, str):
        return scalar(Fraction(value))
    raise TypeError(f"not an exact scalar: {value!r}")


@dataclass(frozen=True)
class Universe:
    """Ordered, named variable set; index order fixes the monomial order."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) > MAX_VARIABLES:
            raise ValueError(f"at most {MAX_VARIABLES} variables supported")
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        for name in names:
            if not _NAME_RE.match(name):
                raise ValueError(f"bad variable name {name!r}")

    @cached_property
    def _index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def extend(self, *names: str) -> Universe:
        return Universe(self.names + tuple(names))

    def var(self, name: str) -> Polynomial:
        exps = [0] * len(self)
        exps[self.index(name)] = 1
        return Polynomial(self, {pack(exps): 1})

    def vars(self) -> tuple[Polynomial, ...]:
        return tuple(self.var(name) for name in self.names)

    def const(self, value) -> Polynomial:
        value = scalar(value)
        return Polynomial(self, {0: value} if value else {})

    def zero(self) -> Polynomial:
        return Polynomial(self, {})

    def one(self) -> Polynomial:
        return self.const(1)


# -- packed monomials -------------------------------------------------------


def pack(exps: Sequence[int]) -> int:
    n = len(exps)
    m = 0
    deg = 0
    for e in exps:
        if e < 0:
            raise ValueError("negative exponent")
        m = (m << _BITS) | e
        deg += e
    if deg > _MAX_DEGREE:
        raise OverflowError("monomial degree too large")
    return m | (deg << (_BITS * n))


def unpack(m: int, n: int) -> tuple[int, ...]:
    return tuple((m >> (_BITS * (n - 1 - j))) & _MASK for j in range(n))


def mono_degree(m: int, n: int) -> int:
    return m >> (_BITS * n)


def _unit(j: int, n: int) -> int:
    return (1 << (_BITS * (n - 1 - j))) | (1 << (_BITS * n))


def format_monomial(exps: Sequence[int], names: Sequence[str]) -> str:
    parts = []
    for e, name in zip(exps, names):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _format_term(coeff: Scalar, mono: str) -> str:
    if not mono:
        return str(coeff)
    if coeff == 1:
        return mono
    if coeff == -1:
        return "-" + mono
    return f"{coeff}*{mono}"


class Polynomial:
    """Immutable sparse polynomial over a :class:`Universe`.

    Build them with :func:`parse`, ``Universe.var`` or arithmetic; the raw
    constructor takes packed monomials and is mostly internal.
    """

    __slots__ = ("universe", "_terms", "_hash", "_expanded")

    def __init__(self, universe: Universe, terms: Mapping[int, Scalar] | None = None):
        self.universe = universe
        self._terms: dict[int, Scalar] = {}
        if terms:
            for m, c in terms.items():
                c = scalar(c)
                if c:
                    self._terms[m] = c
        self._hash = None
        self._expanded = None

    @classmethod
    def _raw(cls, universe: Universe, terms: dict[int, Scalar]) -> Polynomial:
        # terms already canonical: nonzero, normalized scalars
        p = cls.__new__(cls)
        p.universe = universe
        p._terms = terms
        p._hash = None
        p._expanded = None
        return p

    @classmethod
    def from_terms(cls, universe: Universe, terms: Iterable[tuple[Sequence[int], Scalar]]) -> Polynomial:
        acc: dict[int, Scalar] = {}
        for exps, c in terms:
            if len(exps) != len(universe):
                raise ValueError("exponent vector length does not match universe")
            m = pack(exps)
            acc[m] = acc.get(m, 0) + scalar(c)
        return cls(universe, acc)

    # -- inspection ---------------------------------------------------------

    def terms(self) -> list[tuple[tuple[int, ...], Scalar]]:
        """Terms as ``(exponents, coefficient)`` in descending graded-lex order."""
        n = len(self.universe)
        return [(unpack(m, n), self._terms[m]) for m in sorted(self._terms, reverse=True)]

    def monomials(self) -> list[tuple[int, ...]]:
        return [exps for exps, _ in self.terms()]

    def coefficient(self, exps: Sequence[int] | Polynomial) -> Scalar:
        if isinstance(exps, Polynomial):
            if len(exps._terms) != 1:
                raise ValueError("expected a single monomial")
            (m,) = exps._terms
        else:
            m = pack(exps)
        return self._terms.get(m, 0)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or set(self._terms) == {0}

    def constant_value(self) -> Scalar:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return self._terms.get(0, 0)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return mono_degree(max(self._terms), len(self.universe))

    def variables(self) -> set[str]:
        used = set()
        for exps, _ in self._expand():
            used.update(self.universe.names[j] for j, _e in exps)
        return used

    def _expand(self):
        # cached (coefficient, ((var index, exponent), ...)) list for evaluation
        if self._expanded is None:
            n = len(self.universe)
            out = []
            for m, c in self._terms.items():
                exps = unpack(m, n)
                out.append((tuple((j, e) for j, e in enumerate(exps) if e), c))
            self._expanded = out
        return self._expanded

    # -- equality -----------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.universe == other.universe and self._terms == other._terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.universe, frozenset(self._terms.items())))
        return self._hash

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.universe != self.universe:
                raise UniverseMismatch("polynomials over different universes")
            return other
        return self.universe.const(other)

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not other._terms:
            return self
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = scalar(s) if isinstance(s, Fraction) else s
            else:
                out.pop(m, None)
        return Polynomial._raw(self.universe, out)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial._raw(self.universe, {m: -c for m, c in self._terms.items()})

    def __pos__(self) -> Polynomial:
        return self

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self._terms, other._terms
        if not a or not b:
            return Polynomial._raw(self.universe, {})
        if self.degree() + other.degree() > _MAX_DEGREE:
            raise OverflowError("product degree exceeds monomial capacity")
        if len(a) < len(b):
            a, b = b, a
        out: dict[int, Scalar] = {}
        get = out.get
        for mb, cb in b.items():
            for ma, ca in a.items():
                m = ma + mb
                out[m] = get(m, 0) + ca * cb
        return Polynomial(self.universe, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = scalar(other) if not isinstance(other, Polynomial) else other.constant_value()
        if other == 0:
            raise ZeroDivisionError("division by zero")
        inv = Fraction(1, 1) / other
        return self * inv

    def __pow__(self, k: int) -> Polynomial:
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = self.universe.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- calculus and substitution -----------------------------------------

    def diff(self, var: str, times: int = 1) -> Polynomial:
        """Formal partial derivative with respect to ``var``."""
        j = self.universe.index(var)
        n = len(self.universe)
        shift = _BITS * (n - 1 - j)
        unit = _unit(j, n)
        p = self
        for _ in range(times):
            out: dict[int, Scalar] = {}
            for m, c in p._terms.items():
                e = (m >> shift) & _MASK
                if e:
                    out[m - unit] = c * e
            p = Polynomial._raw(self.universe, out)
        return p

    def partial(self, *vars: str) -> Polynomial:
        p = self
        for v in vars:
            p = p.diff(v)
        return p

    def evaluate(self, point: Mapping[str, Scalar], modulus: int | None = None) -> Scalar:
        """Exact value at ``point`` (every variable must be assigned).

        With ``modulus`` the value is computed in Z/modulus; rational entries
        are mapped through modular inverses.
        """
        values = []
        for name in self.universe.names:
            try:
                v = point[name]
            except KeyError:
                raise ValueError(f"point does not assign {name!r}") from None
            v = scalar(v)
            if modulus is not None:
                v = _to_residue(v, modulus)
            values.append(v)
        powers: dict[tuple[int, int], Scalar] = {}

        def power(j: int, e: int) -> Scalar:
            key = (j, e)
            if key not in powers:
                powers[key] = values[j] ** e if modulus is None else pow(values[j], e, modulus)
            return powers[key]

        total: Scalar = 0
        for exps, c in self._expand():
            t = c if modulus is None else _to_residue(c, modulus)
            for j, e in exps:
                t = t * power(j, e)
                if not t:
                    break
            if modulus is not None:
                t %= modulus
            total += t
        if modulus is not None:
            return total % modulus
        return scalar(total) if isinstance(total, Fraction) else total

    def substitute(self, mapping: Mapping[str, Polynomial | Scalar]) -> Polynomial:
        """Simultaneous substitution; unmapped variables stay fixed."""
        n = len(self.universe)
        images: dict[int, Polynomial] = {}
        for name, img in mapping.items():
            j = self.universe.index(name)
            images[j] = self._coerce(img)
        if not images:
            return self
        mapped = sorted(images)
        keep_mask = 0
        for j in range(n):
            if j not in images:
                keep_mask |= _MASK << (_BITS * (n - 1 - j))
        # group terms by the exponents of mapped variables
        groups: dict[tuple[int, ...], dict[int, Scalar]] = {}
        for m, c in self._terms.items():
            key = tuple((m >> (_BITS * (n - 1 - j))) & _MASK for j in mapped)
            rest = m & keep_mask
            rest |= sum(unpack(rest, n)) << (_BITS * n)
            groups.setdefault(key, {})[rest] = c
        powers: dict[tuple[int, int], Polynomial] = {}

        def power(j: int, e: int) -> Polynomial:
            if (j, e) not in powers:
                powers[(j, e)] = images[j] if e == 1 else power(j, e - 1) * images[j]
            return powers[(j, e)]

        result = self.universe.zero()
        for key, rest in groups.items():
            term = Polynomial._raw(self.universe, rest)
            for j, e in zip(mapped, key):
                if e:
                    term = term * power(j, e)
            result = result + term
        return result

    def embed(self, universe: Universe) -> Polynomial:
        """Re-express over a universe containing all of this one's variables."""
        if universe == self.universe:
            return self
        idx = [universe.index(name) for name in self.universe.names]
        out = {}
        for exps, c in self.terms():
            new = [0] * len(universe)
            for j, e in zip(idx, exps):
                new[j] = e
            out[pack(new)] = c
        return Polynomial._raw(universe, out)

    # -- text and JSON ------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        names = self.universe.names
        pieces = []
        for exps, c in self.terms():
            text = _format_term(c, format_monomial(exps, names))
            if not pieces:
                pieces.append(text)
            elif text.startswith("-"):
                pieces.append(" - " + text[1:])
            else:
                pieces.append(" + " + text)
        return "".join(pieces)

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r})"

    def to_json(self) -> dict:
        return {
            "variables": list(self.universe.names),
            "terms": [[list(exps), str(c)] for exps, c in self.terms()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Polynomial:
        universe = Universe(tuple(data["variables"]))
        return cls.from_terms(universe, ((exps, Fraction(c)) for exps, c in data["terms"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _to_residue(v: Scalar, modulus: int) -> int:
    if isinstance(v, Fraction):
        if v.denominator % modulus == 0:
            raise ZeroDivisionError(f"denominator divisible by {modulus}")
        return v.numerator * pow(v.denominator, -1, modulus) % modulus
    return v % modulus


# -- the flex universe ------------------------------------------------------

X_NAMES = ("x0", "x1", "x2")
CUBIC_EXPONENTS = tuple(
    sorted(
        (e for e in itertools.product(range(4), repeat=3) if sum(e) == 3),
        reverse=True,
    )
)
ALPHA_NAMES = tuple("a" + "".join(map(str, e)) for e in CUBIC_EXPONENTS)
FLEX_UNIVERSE = Universe(X_NAMES + ALPHA_NAMES)


def alpha_name(exps: Sequence[int]) -> str:
    return "a" + "".join(map(str, exps))


# -- parsing ----------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} at position {pos}")


_TOKEN_RE = re.compile(r"(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S)")
_SYMBOLS = frozenset("+-*/^()")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        num, name, sym = match.groups()
        if num is not None:
            tokens.append(("int", int(num), pos))
        elif name is not None:
            tokens.append(("name", name, pos))
        elif sym in _SYMBOLS:
            tokens.append((sym, sym, pos))
        else:
            raise ParseError(f"unexpected character {sym!r}", pos)
        pos = match.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    """Recursive descent over::

        expr   := term (('+'|'-') term)*
        term   := unary (('*'|'/') unary)*
        unary  := ('+'|'-') unary | power
        power  := atom ('^' uint)?
        atom   := int | var | '(' expr ')'
    """

    def __init__(self, text: str, universe: Universe):
        self.tokens = _tokenize(text)
        self.i = 0
        self.universe = universe

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, got {tok[1]!r}" if tok[0] != "end"
                             else f"expected {kind!r}, got end of input", tok[2])
        self.i += 1
        return tok

    def parse(self) -> Polynomial:
        if self.peek()[0] == "end":
            raise ParseError("empty expression", 0)
        p = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            q = self.unary()
            if op == "*":
                p = p * q
            else:
                if not q.is_constant() or q.is_zero():
                    raise ParseError("division only by a nonzero constant", pos)
                p = p / q.constant_value()
        return p

    def unary(self) -> Polynomial:
        if self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            p = self.unary()
            return -p if op == "-" else p
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "int":
                raise ParseError("exponent must be a non-negative integer", tok[2])
            self.take()
            return base ** tok[1]
        return base

    def atom(self) -> Polynomial:
        kind, value, pos = self.peek()
        if kind == "int":
            self.take()
            return self.universe.const(value)
        if kind == "name":
            self.take()
            if value not in self.universe:
                raise UnknownVariable(value, pos)
            return self.universe.var(value)
        if kind == "(":
            self.take()
            p = self.expr()
            self.take(")")
            return p
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {value!r}", pos)


def parse(text: str, universe: Universe = FLEX_UNIVERSE) -> Polynomial:
    """Parse an expression such as ``"a111*x0*x1*x2 + x0^3"`` into canonical form."""
    return _Parser(text, universe).parse()


# -- grading ----------------------------------------------------------------


@dataclass(frozen=True)
class VariableGrouping:
    """Ordered partition of a universe into blocks ``V_1 x ... x V_s``."""

    universe: Universe
    blocks: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen: list[str] = []
        for block in blocks:
            if not block:
                raise ValueError("empty block")
            for name in block:
                self.universe.index(name)
            seen.extend(block)
        if len(seen) != len(set(seen)):
            raise ValueError("blocks overlap")
        if set(seen) != set(self.universe.names):
            raise ValueError("blocks do not cover the universe")

    def __len__(self) -> int:
        return len(self.blocks)

    @cached_property
    def _block_of(self) -> tuple[int, ...]:
        owner = [0] * len(self.universe)
        for b, block in enumerate(self.blocks):
            for name in block:
                owner[self.universe.index(name)] = b
        return tuple(owner)

    def block_index(self, name: str) -> int:
        return self._block_of[self.universe.index(name)]

    def degrees(self, exps: Sequence[int]) -> tuple[int, ...]:
        out = [0] * len(self.blocks)
        for j, e in enumerate(exps):
            out[self._block_of[j]] += e
        return tuple(out)


FLEX_GROUPING = VariableGrouping(FLEX_UNIVERSE, (X_NAMES, ALPHA_NAMES))


def multidegree(p: Polynomial, grouping: VariableGrouping) -> tuple[int, ...]:
    """Common per-block degree vector of every term of ``p``.

    Raises :class:`ZeroPolynomialError` for 0 and :class:`NotHomogeneous` with
    two witness terms when the terms disagree.
    """
    if p.is_zero():
        raise ZeroPolynomialError("the zero polynomial has no multidegree")
    first = None
    for exps, c in p.terms():
        d = grouping.degrees(exps)
        if first is None:
            first = (exps, c, d)
        elif d != first[2]:
            names = p.universe.names
            w1 = _format_term(first[1], format_monomial(first[0], names)) if any(first[0]) else str(first[1])
            w2 = _format_term(c, format_monomial(exps, names)) if any(exps) else str(c)
            raise NotHomogeneous(w1, w2, (first[2], d))
    return first[2]


def isotypic_decompose(g: Polynomial, grouping: VariableGrouping) -> list[tuple[tuple[int, ...], Polynomial]]:
    """Split ``g`` into multi-homogeneous components, sorted by multidegree."""
    parts: dict[tuple[int, ...], dict[int, Scalar]] = {}
    n = len(g.universe)
    for m, c in g._terms.items():
        parts.setdefault(grouping.degrees(unpack(m, n)), {})[m] = c
    return [(d, Polynomial._raw(g.universe, parts[d])) for d in sorted(parts)]


def det3(M: Sequence[Sequence[Polynomial | Scalar]]) -> Polynomial | Scalar:
    """Leibniz expansion of a 3x3 determinant."""
    if len(M) != 3 or any(len(row) != 3 for row in M):
        raise ValueError("det3 needs a 3x3 matrix")
    (a, b, c), (d, e, f), (g, h, i) = M
    return a * e * i + b * f * g + c * d * h - c * e * g - b * d * i - a * f * h
