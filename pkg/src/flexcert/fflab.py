"""Finite-field reductions, projective-plane scans and sampling of cone points.

Everything here works modulo a prime ``p > 3`` so that 2, 3 and 6 stay
invertible.  Randomness comes from numpy's PCG64 generator seeded explicitly;
the seed is echoed in every report.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cache
from typing import Mapping, Sequence

import numpy as np

from .flex import WITNESS_X, build_f, build_h, inverse3, transport_witness, witness_point
from .multicone import BlockPoint
from .poly import (
    ALPHA_NAMES,
    CUBIC_EXPONENTS,
    FLEX_GROUPING,
    FLEX_UNIVERSE,
    X_NAMES,
    Polynomial,
    Scalar,
    Universe,
    _BITS,
    _MASK,
    _to_residue,
    _unit,
    format_monomial,
    pack,
    unpack,
)

MAX_PRIME = 65521
MAX_ENUMERATION_PRIME = 31
DEFAULT_PRIMES = (7, 13, 101)
SAMPLING_PRIME = 10007
MAX_ALPHA_DRAWS = 20


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if isinstance(self.p, bool) or not isinstance(self.p, int):
            raise TypeError("modulus must be an int")
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if not 3 < self.p <= MAX_PRIME:
            raise ValueError(f"prime must satisfy 3 < p <= {MAX_PRIME}, got {self.p}")

    def __call__(self, v: Scalar) -> int:
        return _to_residue(v, self.p)

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError("zero has no inverse")
        return pow(a, -1, self.p)

    def signed(self, a: int) -> int:
        """Representative in ``(-p/2, p/2]``, for display."""
        a %= self.p
        return a - self.p if a > self.p // 2 else a

    @property
    def plane_size(self) -> int:
        return self.p * self.p + self.p + 1


@dataclass(frozen=True)
class ProjectivePoint2:
    """Point of P^2(F_p), normalized so the first nonzero coordinate is 1."""

    coords: tuple[int, int, int]
    p: int

    @classmethod
    def normalize(cls, coords: Sequence[Scalar], p: int) -> ProjectivePoint2:
        xs = [_to_residue(c, p) for c in coords]
        if len(xs) != 3:
            raise ValueError("need three coordinates")
        for c in xs:
            if c:
                inv = pow(c, -1, p)
                return cls(tuple(v * inv % p for v in xs), p)
        raise ValueError("all coordinates zero")

    def __str__(self) -> str:
        half = self.p // 2
        return "(" + ":".join(str(v - self.p if v > half else v) for v in self.coords) + ")"


@cache
def projective_plane(p: int) -> tuple[ProjectivePoint2, ...]:
    pts = [ProjectivePoint2((1, a, b), p) for a in range(p) for b in range(p)]
    pts += [ProjectivePoint2((0, 1, b), p) for b in range(p)]
    pts.append(ProjectivePoint2((0, 0, 1), p))
    return tuple(pts)


@cache
def _plane_array(p: int) -> np.ndarray:
    return np.array([pt.coords for pt in projective_plane(p)], dtype=np.int64)


# -- polynomials over F_p --------------------------------------------------


class ModPolynomial:
    """Polynomial with coefficients in F_p, sharing packed monomials with :class:`Polynomial`."""

    __slots__ = ("field", "universe", "_terms")

    def __init__(self, field: PrimeField, universe: Universe, terms: Mapping[int, int]):
        self.field = field
        self.universe = universe
        p = field.p
        self._terms = {m: c % p for m, c in terms.items() if c % p}

    def _check(self, other: ModPolynomial):
        if self.field != other.field or self.universe != other.universe:
            raise ValueError("incompatible polynomials")

    def __add__(self, other: ModPolynomial) -> ModPolynomial:
        self._check(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return ModPolynomial(self.field, self.universe, out)

    def __sub__(self, other: ModPolynomial) -> ModPolynomial:
        self._check(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) - c
        return ModPolynomial(self.field, self.universe, out)

    def __mul__(self, other: ModPolynomial) -> ModPolynomial:
        self._check(other)
        out: dict[int, int] = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                out[ma + mb] = out.get(ma + mb, 0) + ca * cb
        return ModPolynomial(self.field, self.universe, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModPolynomial):
            return NotImplemented
        return self.field == other.field and self.universe == other.universe and self._terms == other._terms

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def diff(self, var: str) -> ModPolynomial:
        j = self.universe.index(var)
        n = len(self.universe)
        shift = _BITS * (n - 1 - j)
        unit = _unit(j, n)
        out = {}
        for m, c in self._terms.items():
            e = (m >> shift) & _MASK
            if e:
                out[m - unit] = c * e
        return ModPolynomial(self.field, self.universe, out)

    def terms(self):
        n = len(self.universe)
        return [(unpack(m, n), self._terms[m]) for m in sorted(self._terms, reverse=True)]

    def evaluate(self, point: Mapping[str, Scalar]) -> int:
        p = self.field.p
        vals = [_to_residue(point[name], p) for name in self.universe.names]
        total = 0
        for exps, c in self.terms():
            t = c
            for v, e in zip(vals, exps):
                if e:
                    t = t * pow(v, e, p) % p
            total += t
        return total % p

    def specialize(self, values: Mapping[str, Scalar]) -> ModPolynomial:
        """Substitute field values for some variables (the rest stay symbolic)."""
        p = self.field.p
        fixed = {self.universe.index(k): _to_residue(v, p) for k, v in values.items()}
        out: dict[int, int] = {}
        for exps, c in self.terms():
            rest = list(exps)
            for j, v in fixed.items():
                if exps[j]:
                    c = c * pow(v, exps[j], p) % p
                    rest[j] = 0
            if c:
                m = pack(rest)
                out[m] = out.get(m, 0) + c
        return ModPolynomial(self.field, self.universe, out)

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at the rows of an ``(N, n)`` integer array of residues."""
        p = self.field.p
        points = np.asarray(points, dtype=np.int64) % p
        n_pts = points.shape[0]
        result = np.zeros(n_pts, dtype=np.int64)
        cache: dict[tuple[int, int], np.ndarray] = {}

        def power(j: int, e: int) -> np.ndarray:
            key = (j, e)
            if key not in cache:
                cache[key] = points[:, j] if e == 1 else power(j, e - 1) * points[:, j] % p
            return cache[key]

        for exps, c in self.terms():
            term = np.full(n_pts, c, dtype=np.int64)
            for j, e in enumerate(exps):
                if e:
                    term = term * power(j, e) % p
            result = (result + term) % p
        return result

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        names = self.universe.names
        parts = []
        for exps, c in self.terms():
            mono = format_monomial(exps, names)
            parts.append(f"{c}*{mono}" if mono and c != 1 else (mono or str(c)))
        return " + ".join(parts) + f" (mod {self.field.p})"

    def __repr__(self) -> str:
        return f"ModPolynomial({str(self)!r})"


def reduce_mod_p(poly: Polynomial, field: PrimeField) -> ModPolynomial:
    """Coefficient-wise reduction; a denominator divisible by ``p`` is rejected."""
    p = field.p
    out = {}
    for m, c in poly._terms.items():
        try:
            out[m] = _to_residue(c, p)
        except ZeroDivisionError:
            raise ValueError(f"coefficient {c} has a denominator divisible by {p}") from None
    return ModPolynomial(field, poly.universe, out)


@cache
def _reduced_fh(p: int) -> tuple[ModPolynomial, ModPolynomial]:
    field = PrimeField(p)
    return reduce_mod_p(build_f(), field), reduce_mod_p(build_h(), field)


def reduce_point(point: Mapping[str, Scalar], field: PrimeField) -> dict[str, int]:
    return {k: field(v) for k, v in point.items()}


# -- flexes of a fixed cubic ---------------------------------------------


@dataclass
class FFReport:
    prime: int
    check: str
    coverage: str
    failures: list = field(default_factory=list)
    seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "prime": self.prime,
            "check": self.check,
            "coverage": self.coverage,
            "failures": self.failures,
            "seed": self.seed,
            "details": self.details,
        }


def _alpha_dict(alpha: Mapping[str, Scalar] | Sequence[Scalar], field: PrimeField) -> dict[str, int]:
    if isinstance(alpha, Mapping):
        return {name: field(alpha.get(name, 0)) for name in ALPHA_NAMES}
    if len(alpha) != len(ALPHA_NAMES):
        raise ValueError("need ten cubic coefficients")
    return {name: field(v) for name, v in zip(ALPHA_NAMES, alpha)}


def flexes_of_cubic(alpha: Mapping[str, Scalar] | Sequence[Scalar], field: PrimeField) -> list[ProjectivePoint2]:
    """All points of P^2(F_p) where the cubic and its Hessian both vanish."""
    alphas = _alpha_dict(alpha, field)
    if not any(alphas.values()):
        raise ValueError("the zero cubic has no flexes")
    f_p, h_p = _reduced_fh(field.p)
    fa, ha = f_p.specialize(alphas), h_p.specialize(alphas)
    pts = _plane_array(field.p)
    full = np.zeros((pts.shape[0], len(FLEX_UNIVERSE)), dtype=np.int64)
    full[:, :3] = pts
    mask = (fa.evaluate_many(full) == 0) & (ha.evaluate_many(full) == 0)
    plane = projective_plane(field.p)
    return [plane[k] for k in np.flatnonzero(mask)]


def singular_points(alpha: Mapping[str, Scalar] | Sequence[Scalar], field: PrimeField) -> list[ProjectivePoint2]:
    """Rational points where all three x-partials of the cubic vanish."""
    alphas = _alpha_dict(alpha, field)
    f_p, _ = _reduced_fh(field.p)
    fa = f_p.specialize(alphas)
    pts = _plane_array(field.p)
    full = np.zeros((pts.shape[0], len(FLEX_UNIVERSE)), dtype=np.int64)
    full[:, :3] = pts
    mask = np.ones(pts.shape[0], dtype=bool)
    for v in X_NAMES:
        mask &= fa.diff(v).evaluate_many(full) == 0
    plane = projective_plane(field.p)
    return [plane[k] for k in np.flatnonzero(mask)]


def contains_full_line(points: Sequence[ProjectivePoint2], p: int) -> bool:
    """Whether some line of P^2(F_p) has all its p+1 points in ``points``."""
    if len(points) < p + 1:
        return False
    # lines are dual points; count incidences of every line with the set
    chosen = np.array([pt.coords for pt in points], dtype=np.int64)
    incidences = (_plane_array(p) @ chosen.T) % p == 0
    return bool((incidences.sum(axis=1) == p + 1).any())


def looks_smooth(alpha, field: PrimeField, flexes: Sequence[ProjectivePoint2] | None = None) -> bool:
    """No rational singular point and no line inside the flex set."""
    if singular_points(alpha, field):
        return False
    if flexes is None:
        flexes = flexes_of_cubic(alpha, field)
    return not contains_full_line(flexes, field.p)


# -- every point of the plane is a flex of some cubic -------------------------


def _mat_mul(A, B, p):
    return [[sum(A[i][k] * B[k][j] for k in range(3)) % p for j in range(3)] for i in range(3)]


def _det_mod(A, p):
    (a, b, c), (d, e, f), (g, h, i) = A
    return (a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)) % p


def _basis_with_first_column(v: Sequence[int], p: int):
    std = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    for u, w in itertools.combinations(std, 2):
        M = [[v[i], u[i], w[i]] for i in range(3)]
        if _det_mod(M, p):
            return M
    raise ValueError("zero vector")


def transport_matrix(e: Sequence[int], p: int) -> list[list[int]]:
    """Invertible ``A`` over F_p with ``A e`` equal to the witness x-point."""
    w = [c % p for c in WITNESS_X]
    M = _basis_with_first_column([c % p for c in e], p)
    N = _basis_with_first_column(w, p)
    return _mat_mul(N, inverse3(M, p), p)


def transported_flex(e: ProjectivePoint2) -> dict[str, int]:
    """A point of C (mod p) whose x-part is ``e``, obtained by moving the witness."""
    A = transport_matrix(e.coords, e.p)
    return transport_witness(A, modulus=e.p)


def check_projection_surjectivity_to_PL(field: PrimeField) -> FFReport:
    """Every point of P^2(F_p) is a flex of some cubic, exhibited constructively."""
    p = field.p
    if p > MAX_ENUMERATION_PRIME:
        raise ValueError(f"full enumeration needs p <= {MAX_ENUMERATION_PRIME}")
    f_p, h_p = _reduced_fh(p)
    covered = 0
    failures = []
    for e in projective_plane(p):
        point = transported_flex(e)
        x = ProjectivePoint2.normalize([point[n] for n in X_NAMES], p)
        alpha_nonzero = any(point[n] for n in ALPHA_NAMES)
        if x == e and alpha_nonzero and f_p.evaluate(point) == 0 and h_p.evaluate(point) == 0:
            covered += 1
        else:
            failures.append(str(e))
    return FFReport(p, "projection_to_PL", f"{covered}/{field.plane_size}", failures,
                    details={"covered": covered, "total": field.plane_size})


def exhibit_cubic_with_flex_at(e: ProjectivePoint2) -> dict[str, int]:
    """Coefficients of a cubic having a flex at ``e``."""
    point = transported_flex(e)
    return {n: point[n] for n in ALPHA_NAMES}


# -- random cubics: do they have rational flexes? -----------------------------


def random_cubic_flex_scan(field: PrimeField, count: int = 200, seed: int = 0) -> FFReport:
    """Scan ``count`` random cubics for rational flexes; empty results are counted, not failed."""
    rng = np.random.default_rng(seed)
    histogram: dict[int, int] = {}
    empty = 0
    failures = []
    f_p, h_p = _reduced_fh(field.p)
    for k in range(count):
        while True:
            alpha = [int(a) for a in rng.integers(0, field.p, size=len(ALPHA_NAMES))]
            if any(alpha):
                break
        flexes = flexes_of_cubic(alpha, field)
        histogram[len(flexes)] = histogram.get(len(flexes), 0) + 1
        if not flexes:
            empty += 1
        alphas = _alpha_dict(alpha, field)
        for pt in flexes:
            point = dict(zip(X_NAMES, pt.coords), **alphas)
            if f_p.evaluate(point) or h_p.evaluate(point):
                failures.append({"cubic": k, "point": str(pt)})
    return FFReport(
        field.p, "random_cubic_flexes", f"{count - empty}/{count}", failures, seed,
        {"empty": empty, "nonempty": count - empty,
         "flex_count_histogram": {str(n): histogram[n] for n in sorted(histogram)}},
    )


# -- sampling points of C ---------------------------------------------------


def witness_mod_p(field: PrimeField) -> BlockPoint:
    return BlockPoint(FLEX_GROUPING, witness_point(), field.p)


def _random_projective(rng, p: int) -> tuple[int, int, int]:
    while True:
        x = [int(v) for v in rng.integers(0, p, size=3)]
        if any(x):
            return ProjectivePoint2.normalize(x, p).coords


def _alpha_kernel(x: Sequence[int], p: int) -> list[list[int]]:
    """Basis of the alpha-hyperplane ``f(x, alpha) = 0`` for fixed ``x``."""
    v = [x[0] ** e[0] * x[1] ** e[1] * x[2] ** e[2] % p for e in CUBIC_EXPONENTS]
    k = next(i for i, c in enumerate(v) if c)
    inv = pow(v[k], -1, p)
    basis = []
    for m in range(len(v)):
        if m == k:
            continue
        b = [0] * len(v)
        b[m] = 1
        b[k] = -v[m] * inv % p
        basis.append(b)
    return basis


def sample_C_points(field: PrimeField, n: int, seed: int = 0) -> list[BlockPoint]:
    """``n`` points of ``C`` inside ``U`` over F_p; point #0 is the reduced witness.

    For a random x the condition ``f = 0`` is linear in alpha; along a random
    line in that hyperplane ``h`` is scanned for roots.  A bounded number of
    lines is tried before drawing a fresh x.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    p = field.p
    rng = np.random.default_rng(seed)
    f_p, h_p = _reduced_fh(p)
    points = [witness_mod_p(field)]
    lam = np.arange(p, dtype=np.int64)
    while len(points) < n:
        x = _random_projective(rng, p)
        basis = np.array(_alpha_kernel(x, p), dtype=np.int64)
        for _ in range(MAX_ALPHA_DRAWS):
            a0 = rng.integers(0, p, size=basis.shape[0]) @ basis % p
            b = rng.integers(0, p, size=basis.shape[0]) @ basis % p
            alphas = (a0[None, :] + lam[:, None] * b[None, :]) % p
            full = np.concatenate([np.tile(np.array(x, dtype=np.int64), (p, 1)), alphas], axis=1)
            roots = np.flatnonzero((h_p.evaluate_many(full) == 0) & alphas.any(axis=1))
            if roots.size:
                row = full[int(rng.choice(roots))]
                values = {name: int(v) for name, v in zip(FLEX_UNIVERSE.names, row)}
                pt = BlockPoint(FLEX_GROUPING, values, p)
                if f_p.evaluate(values) or h_p.evaluate(values):
                    raise AssertionError("sampled point is not on C")
                points.append(pt)
                break
    return points


def sampling_report(field: PrimeField, n: int, seed: int = 0) -> tuple[FFReport, list[BlockPoint]]:
    pts = sample_C_points(field, n, seed)
    f_p, h_p = _reduced_fh(field.p)
    failures = [k for k, pt in enumerate(pts)
                if f_p.evaluate(pt.values) or h_p.evaluate(pt.values) or not pt.in_U()]
    return FFReport(field.p, "sample_C_points", f"{len(pts) - len(failures)}/{len(pts)}",
                    failures, seed, {"count": len(pts)}), pts
