"""Torus actions on products of vector spaces and multi-cones.

A :class:`MultiConeSystem` is a block decomposition ``V = V_1 x ... x V_s`` of
the variables together with multi-homogeneous generators ``q_1..q_m``.  Its
zero set ``C`` in ``V`` is stable under the torus ``T = (k^*)^s`` acting by
scaling block ``i`` by ``t_i``.  The helpers here check the scaling law
symbolically, restrict generators to coordinate blocks, walk orbit curves of
one-dimensional subtori and test, point by point, that isotypic components of
a function vanishing on ``C`` vanish there too.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .poly import (
    NotHomogeneous,
    Polynomial,
    Scalar,
    VariableGrouping,
    ZeroPolynomialError,
    isotypic_decompose,
    multidegree,
    parse,
    scalar,
    Universe,
)

# coordinates of the sampled torus translates used by component_vanishing_check
TRANSLATE_VALUES = (1, -1, 2, -2, 3, -3, 5)
N_TRANSLATES = 16


class NotOnCone(ValueError):
    pass


@dataclass(frozen=True)
class TorusElement:
    coords: tuple[Scalar, ...]

    def __post_init__(self):
        coords = tuple(scalar(c) for c in self.coords)
        if any(c == 0 for c in coords):
            raise ValueError("torus coordinates must be nonzero")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def identity(cls, s: int) -> TorusElement:
        return cls((1,) * s)

    def __len__(self) -> int:
        return len(self.coords)

    def __mul__(self, other: TorusElement) -> TorusElement:
        if len(other) != len(self):
            raise ValueError("torus dimension mismatch")
        return TorusElement(tuple(scalar(a * b) for a, b in zip(self.coords, other.coords)))

    def character(self, degrees: Sequence[int]) -> Scalar:
        """Value of the character ``t -> t_1^d_1 ... t_s^d_s``."""
        value: Scalar = 1
        for t, d in zip(self.coords, degrees, strict=True):
            value = value * t ** d
        return scalar(value)


@dataclass(frozen=True)
class BlockPoint:
    """A point of ``V`` with its coordinates grouped by block.

    ``modulus`` is set for points over a prime field; coordinates are then
    residues and every operation reduces modulo it.
    """

    grouping: VariableGrouping
    values: Mapping[str, Scalar]
    modulus: int | None = None

    def __post_init__(self):
        values = {}
        for name in self.grouping.universe:
            if name not in self.values:
                raise ValueError(f"point does not assign {name!r}")
            v = scalar(self.values[name])
            if self.modulus is not None:
                v = _residue(v, self.modulus)
            values[name] = v
        object.__setattr__(self, "values", values)

    def block(self, i: int) -> tuple[Scalar, ...]:
        return tuple(self.values[name] for name in self.grouping.blocks[i])

    def block_is_zero(self, i: int) -> bool:
        return all(v == 0 for v in self.block(i))

    def in_U(self) -> bool:
        return not any(self.block_is_zero(i) for i in range(len(self.grouping)))

    def evaluate(self, p: Polynomial) -> Scalar:
        return p.evaluate(self.values, modulus=self.modulus)

    def replace_block(self, i: int, coords: Sequence[Scalar]) -> BlockPoint:
        values = dict(self.values)
        for name, v in zip(self.grouping.blocks[i], coords, strict=True):
            values[name] = v
        return BlockPoint(self.grouping, values, self.modulus)

    def to_json(self) -> dict:
        out = {"blocks": [[str(v) for v in self.block(i)] for i in range(len(self.grouping))]}
        if self.modulus is not None:
            out["modulus"] = self.modulus
        return out


def _residue(v: Scalar, p: int) -> int:
    if isinstance(v, Fraction):
        return v.numerator * pow(v.denominator, -1, p) % p
    return v % p


def torus_act(t: TorusElement, v: BlockPoint) -> BlockPoint:
    if len(t) != len(v.grouping):
        raise ValueError("torus dimension does not match the block structure")
    values = dict(v.values)
    for ti, block in zip(t.coords, v.grouping.blocks):
        for name in block:
            values[name] = scalar(ti * values[name])
    return BlockPoint(v.grouping, values, v.modulus)


@dataclass
class MultiConeSystem:
    """Block structure plus generators ``q_1..q_m``.

    Multidegrees are computed at construction; ``declared`` ones, if given,
    must match.  ``positive`` records whether every multidegree entry is > 0.
    """

    grouping: VariableGrouping
    generators: list[Polynomial]
    declared: list[tuple[int, ...]] | None = None
    degrees: list[tuple[int, ...]] = field(init=False)
    positive: bool = field(init=False)

    def __post_init__(self):
        self.generators = list(self.generators)
        for q in self.generators:
            if q.universe != self.grouping.universe:
                raise ValueError("generator over a different universe")
        self.degrees = [multidegree(q, self.grouping) for q in self.generators]
        if self.declared is not None:
            declared = [tuple(d) for d in self.declared]
            if declared != self.degrees:
                raise ValueError(f"declared multidegrees {declared} != computed {self.degrees}")
        self.positive = all(d > 0 for deg in self.degrees for d in deg)

    @property
    def s(self) -> int:
        return len(self.grouping)

    def contains(self, v: BlockPoint) -> bool:
        """Membership in ``C``: every generator vanishes at ``v``."""
        return all(v.evaluate(q) == 0 for q in self.generators)

    def to_json(self) -> dict:
        return {
            "blocks": [list(b) for b in self.grouping.blocks],
            "generators": [str(q) for q in self.generators],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: Mapping) -> MultiConeSystem:
        blocks = [tuple(b) for b in data["blocks"]]
        universe = Universe(tuple(itertools.chain.from_iterable(blocks)))
        grouping = VariableGrouping(universe, tuple(blocks))
        return cls(grouping, [parse(text, universe) for text in data["generators"]])


@dataclass
class HomogeneityReport:
    index: int
    ok: bool
    multidegree: tuple[int, ...] | None
    positive: bool
    witness: tuple[str, str] | None = None
    message: str = ""


def scale_variables(grouping: VariableGrouping, prefix: str = "t"):
    """Universe with fresh scale variables ``t1..ts`` and the block-wise scaling map."""
    names = [f"{prefix}{i + 1}" for i in range(len(grouping))]
    while any(name in grouping.universe for name in names):
        prefix += "_"
        names = [f"{prefix}{i + 1}" for i in range(len(grouping))]
    big = grouping.universe.extend(*names)
    ts = [big.var(name) for name in names]
    mapping = {}
    for t, block in zip(ts, grouping.blocks):
        for name in block:
            mapping[name] = t * big.var(name)
    return big, ts, mapping


def check_multihomogeneous(sys: MultiConeSystem | VariableGrouping,
                           generators: Sequence[Polynomial] | None = None) -> list[HomogeneityReport]:
    """Symbolic check of ``q(t.v) = t^d q(v)`` for every generator.

    Accepts a system, or a grouping plus raw generators (which may fail to be
    homogeneous; such generators are reported with two witness terms).
    """
    if isinstance(sys, MultiConeSystem):
        grouping, generators = sys.grouping, sys.generators
    else:
        grouping = sys
    big, ts, mapping = scale_variables(grouping)
    reports = []
    for i, q in enumerate(generators):
        try:
            d = multidegree(q, grouping)
        except NotHomogeneous as exc:
            reports.append(HomogeneityReport(i, False, None, False, exc.terms, str(exc)))
            continue
        except ZeroPolynomialError as exc:
            reports.append(HomogeneityReport(i, False, None, False, None, str(exc)))
            continue
        lifted = q.embed(big)
        scaled = lifted.substitute(mapping)
        expected = lifted
        for t, e in zip(ts, d):
            expected = expected * t ** e
        ok = scaled == expected
        reports.append(HomogeneityReport(
            i, ok, d, all(e > 0 for e in d), None,
            "" if ok else "scaled generator differs from character times generator",
        ))
    return reports


def restrict_block_to_zero(p: Polynomial, grouping: VariableGrouping, block: int) -> Polynomial:
    """Set every variable of ``block`` to zero."""
    if not 0 <= block < len(grouping):
        raise IndexError(f"block index {block} out of range")
    return p.substitute({name: 0 for name in grouping.blocks[block]})


def orbit_curve(sys: MultiConeSystem, c: BlockPoint, i: int, t) -> BlockPoint:
    """Point at parameter ``t`` on the orbit of ``c`` under the subtorus scaling block ``i`` only."""
    t = scalar(t)
    if c.modulus is not None:
        t = _residue(t, c.modulus)
    if t == 0:
        raise ValueError("orbit parameter must be nonzero")
    if not 0 <= i < sys.s:
        raise IndexError(f"block index {i} out of range")
    if not c.in_U():
        raise NotOnCone("point has a zero block (not in U)")
    if not sys.contains(c):
        raise NotOnCone("point is not on the cone C")
    coords = [1] * sys.s
    coords[i] = t
    return torus_act(TorusElement(tuple(coords)), c)


def orbit_limit(c: BlockPoint, i: int) -> BlockPoint:
    """Closure point of the block-``i`` orbit curve as ``t -> 0``."""
    return c.replace_block(i, [0] * len(c.grouping.blocks[i]))


def default_translates(s: int, n: int = N_TRANSLATES) -> list[TorusElement]:
    """Deterministic sample of ``n`` torus elements, identity first."""
    grid = list(itertools.product(TRANSLATE_VALUES, repeat=s))
    if len(grid) <= n:
        chosen = grid
    else:
        step = len(grid) / n
        chosen = [grid[int(k * step)] for k in range(n)]
    return [TorusElement(c) for c in chosen]


@dataclass
class ComponentVanishingReport:
    components: list[tuple[tuple[int, ...], Polynomial]]
    points_checked: int = 0
    points_skipped: int = 0
    ok: bool = True
    counterexample: tuple[tuple[int, ...], int] | None = None
    note: str = "empirical: finitely many sampled points of C"

    def to_json(self) -> dict:
        return {
            "components": [[list(d), str(p)] for d, p in self.components],
            "points_checked": self.points_checked,
            "points_skipped": self.points_skipped,
            "ok": self.ok,
            "counterexample": (
                None if self.counterexample is None
                else {"multidegree": list(self.counterexample[0]), "point": self.counterexample[1]}
            ),
            "note": self.note,
        }


def component_vanishing_check(sys: MultiConeSystem, g: Polynomial, cone_points: Sequence[BlockPoint],
                           translates: Sequence[TorusElement] | None = None) -> ComponentVanishingReport:
    """Check that isotypic components of ``g`` vanish where ``g`` vanishes on torus translates.

    Every point must lie on ``C``.  For each point ``c`` at which ``g`` vanishes on
    all of ``t.c`` for the sampled ``t``, each component of ``g`` must vanish at
    ``c``.  The first failing (component, point index) is recorded.
    """
    if translates is None:
        translates = default_translates(sys.s)
    report = ComponentVanishingReport(isotypic_decompose(g, sys.grouping))
    for k, c in enumerate(cone_points):
        if not sys.contains(c):
            raise NotOnCone(f"point #{k} is not on C")
        if not all(torus_act(t, c).evaluate(g) == 0 for t in translates):
            report.points_skipped += 1
            continue
        report.points_checked += 1
        for d, comp in report.components:
            if c.evaluate(comp) != 0:
                report.ok = False
                report.counterexample = (d, k)
                return report
    return report
