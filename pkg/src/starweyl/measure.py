"""Exact arithmetic for finite measures made of atoms and polynomial densities.

A measure here is a finite list of weighted points plus finitely many
density pieces, each piece a polynomial that is nonnegative on a bounded
interval.  Every operation (mass of a window, sum, restriction, symmetric
derivative, decomposition against another measure) is closed-form over
rationals, so tests can demand equality instead of tolerances.

Positions, masses and coefficients are stored as `fractions.Fraction`.
Floats passed in are converted to their exact binary value; two atoms merge
only when their positions compare equal as rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

NumberLike = Union[int, float, str, Fraction]


def as_fraction(x: NumberLike) -> Fraction:
    """Convert ``x`` to an exact Fraction; floats keep their binary value."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r} has no exact rational form")
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {type(x).__name__} as an exact number")


def number_to_json(x: Fraction) -> Union[int, float, str]:
    """Encode a Fraction as an int, a float, or a "p/q" string.

    Ints and dyadic rationals survive a JSON round trip bit-exactly via the
    native number types; everything else falls back to the string form.
    """
    x = as_fraction(x)
    if x.denominator == 1 and abs(x.numerator) <= 2**53:
        return int(x)
    try:
        f = float(x)
    except OverflowError:
        return f"{x.numerator}/{x.denominator}"
    if math.isfinite(f) and Fraction(f) == x:
        return f
    return f"{x.numerator}/{x.denominator}"


def number_from_json(v: Union[int, float, str]) -> Fraction:
    if isinstance(v, (int, float, str)):
        return as_fraction(v)
    raise TypeError(f"expected a JSON number or 'p/q' string, got {type(v).__name__}")


class Poly:
    """Dense univariate polynomial with exact rational coefficients.

    Coefficients run from the constant term upward.  The zero polynomial is
    the empty tuple.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[NumberLike]):
        cs = [as_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- basic protocol -------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("Poly", self.coeffs))

    def __repr__(self):
        return f"Poly({[str(c) for c in self.coeffs]})"

    def __bool__(self):
        return bool(self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    # -- evaluation and calculus ----------------------------------------

    def __call__(self, x):
        """Evaluate by Horner's rule.  Exact when ``x`` is a Fraction."""
        acc = x * 0  # zero of the right type
        for c in reversed(self.coeffs):
            if isinstance(x, Fraction):
                acc = acc * x + c
            else:
                acc = acc * x + float(c)
        return acc

    def derivative(self) -> "Poly":
        return Poly([k * c for k, c in enumerate(self.coeffs)][1:])

    def antiderivative(self) -> "Poly":
        return Poly([Fraction(0)] + [c / (k + 1) for k, c in enumerate(self.coeffs)])

    def integrate(self, a: NumberLike, b: NumberLike) -> Fraction:
        a, b = as_fraction(a), as_fraction(b)
        anti = self.antiderivative()
        return anti(b) - anti(a)

    def taylor_at(self, c: NumberLike) -> "Poly":
        """Coefficients of p(c + h) as a polynomial in h, exactly."""
        c = as_fraction(c)
        work = list(self.coeffs)
        n = len(work)
        out = []
        # Repeated synthetic division by (x - c); remainders are the shifted
        # coefficients in ascending order.
        for i in range(n):
            for j in range(n - 2, i - 1, -1):
                work[j] += c * work[j + 1]
            out.append(work[i])
        return Poly(out)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    def __mul__(self, other: "Poly") -> "Poly":
        if self.is_zero or other.is_zero:
            return Poly(())
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    def scaled(self, c: NumberLike) -> "Poly":
        c = as_fraction(c)
        return Poly([c * a for a in self.coeffs])

    def min_on(self, lo: Fraction, hi: Fraction) -> float:
        """Lower estimate of the minimum on [lo, hi].

        Exact for degree <= 1; otherwise the candidates are the endpoints and
        the numerically computed critical points, which is enough to validate
        nonnegativity of the low-degree densities used here.
        """
        flo, fhi = float(lo), float(hi)
        vals = [float(self(lo)), float(self(hi))]
        der = self.derivative()
        if der.degree >= 1:
            roots = np.roots([float(c) for c in reversed(der.coeffs)])
            for r in roots:
                if abs(r.imag) < 1e-9 and flo <= r.real <= fhi:
                    vals.append(float(self(float(r.real))))
        return min(vals)


ZERO_POLY = Poly(())
ONE_PLUS_X2 = Poly((1, 0, 1))


@dataclass(frozen=True)
class Piece:
    """A density piece: ``poly`` on the closed interval [lo, hi]."""

    lo: Fraction
    hi: Fraction
    poly: Poly

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"piece needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.poly.is_zero:
            raise ValueError("zero densities should be dropped, not stored")
        if self.poly.min_on(self.lo, self.hi) < -1e-12:
            raise ValueError(
                f"density {self.poly!r} is negative on [{self.lo}, {self.hi}]"
            )

    def mass(self) -> Fraction:
        return self.poly.integrate(self.lo, self.hi)

    def to_json(self) -> dict:
        return {
            "interval": [number_to_json(self.lo), number_to_json(self.hi)],
            "coeffs": [number_to_json(c) for c in self.poly.coeffs],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Piece":
        lo, hi = (number_from_json(v) for v in obj["interval"])
        return cls(lo, hi, Poly([number_from_json(c) for c in obj["coeffs"]]))


@dataclass(frozen=True)
class DerivativeValue:
    """Result of a symmetric-derivative limit at one point.

    ``kind`` is one of "finite", "infinite", "undefined"; only finite values
    carry a number, always nonnegative.
    """

    kind: str
    value: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("finite", "infinite", "undefined"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "finite":
            if self.value is None or self.value < 0:
                raise ValueError("finite derivative values must be >= 0")
        elif self.value is not None:
            raise ValueError(f"{self.kind} derivative carries no value")

    @classmethod
    def finite(cls, v: NumberLike) -> "DerivativeValue":
        return cls("finite", as_fraction(v))

    @classmethod
    def infinite(cls) -> "DerivativeValue":
        return cls("infinite")

    @classmethod
    def undefined(cls) -> "DerivativeValue":
        return cls("undefined")

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def is_infinite(self) -> bool:
        return self.kind == "infinite"

    @property
    def is_positive(self) -> bool:
        return self.kind == "infinite" or (self.kind == "finite" and self.value > 0)


IntervalSet = Sequence  # loose alias, normalized by _interval_set below


def _interval_set(X) -> Tuple[Tuple[Fraction, Fraction], ...]:
    """Normalize a window spec into disjoint sorted closed intervals.

    Accepts a single (a, b) pair or an iterable of pairs; a == b marks a
    single point.  Overlapping or touching intervals are merged, which is
    harmless because intervals are closed and measures are countably additive.
    """
    items = list(X)
    if len(items) == 2 and all(isinstance(v, (int, float, str, Fraction)) for v in items):
        items = [tuple(items)]
    out = []
    for pair in items:
        a, b = pair
        a, b = as_fraction(a), as_fraction(b)
        if a > b:
            raise ValueError(f"interval [{a}, {b}] is reversed")
        out.append((a, b))
    out.sort()
    merged: list[list[Fraction]] = []
    for a, b in out:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


def _in_set(x: Fraction, ivs) -> bool:
    return any(a <= x <= b for a, b in ivs)


@dataclass(frozen=True)
class ScalarMeasure:
    """Finite positive measure: sorted atoms plus disjoint density pieces."""

    atoms: Tuple[Tuple[Fraction, Fraction], ...] = ()
    pieces: Tuple[Piece, ...] = ()

    def __post_init__(self):
        for (x, w) in self.atoms:
            if not (isinstance(x, Fraction) and isinstance(w, Fraction)):
                raise TypeError("atoms must hold Fractions; use ScalarMeasure.of")
            if w <= 0:
                raise ValueError(f"atom at {x} has nonpositive mass {w}")
        for i in range(len(self.atoms) - 1):
            if not self.atoms[i][0] < self.atoms[i + 1][0]:
                raise ValueError("atom positions must be strictly increasing")
        for i in range(len(self.pieces) - 1):
            if not self.pieces[i].hi <= self.pieces[i + 1].lo:
                raise ValueError("density pieces overlap")

    @classmethod
    def of(cls, atoms: Iterable = (), pieces: Iterable = ()) -> "ScalarMeasure":
        """Build from loose input, merging exact-duplicate atom positions."""
        acc: dict[Fraction, Fraction] = {}
        for x, w in atoms:
            x, w = as_fraction(x), as_fraction(w)
            if w < 0:
                raise ValueError(f"negative atom mass {w} at {x}")
            if w == 0:
                continue
            acc[x] = acc.get(x, Fraction(0)) + w
        norm_pieces = []
        for item in pieces:
            if isinstance(item, Piece):
                norm_pieces.append(item)
            else:
                (lo, hi), coeffs = item
                p = coeffs if isinstance(coeffs, Poly) else Poly(coeffs)
                if p.is_zero:
                    continue
                norm_pieces.append(Piece(as_fraction(lo), as_fraction(hi), p))
        norm_pieces.sort(key=lambda p: (p.lo, p.hi))
        return cls(tuple(sorted(acc.items())), tuple(norm_pieces))

    @classmethod
    def zero(cls) -> "ScalarMeasure":
        return cls()

    @classmethod
    def point(cls, x: NumberLike, w: NumberLike = 1) -> "ScalarMeasure":
        return cls.of(atoms=[(x, w)])

    # -- queries ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.atoms and not self.pieces

    @property
    def is_atomic(self) -> bool:
        return not self.pieces

    def atom_positions(self) -> Tuple[Fraction, ...]:
        return tuple(x for x, _ in self.atoms)

    def atom_mass_at(self, x: NumberLike) -> Fraction:
        x = as_fraction(x)
        for p, w in self.atoms:
            if p == x:
                return w
            if p > x:
                break
        return Fraction(0)

    def piece_intervals(self) -> Tuple[Tuple[Fraction, Fraction], ...]:
        return tuple((p.lo, p.hi) for p in self.pieces)

    def support_bounds(self) -> Tuple[Fraction, Fraction] | None:
        """Smallest closed interval containing the support, or None if zero."""
        pts = [x for x, _ in self.atoms]
        pts += [p.lo for p in self.pieces] + [p.hi for p in self.pieces]
        if not pts:
            return None
        return min(pts), max(pts)

    def total_mass(self) -> Fraction:
        return sum((w for _, w in self.atoms), Fraction(0)) + sum(
            (p.mass() for p in self.pieces), Fraction(0)
        )

    def mass(self, X) -> Fraction:
        """Measure of a finite union of closed intervals and points."""
        ivs = _interval_set(X)
        total = sum((w for x, w in self.atoms if _in_set(x, ivs)), Fraction(0))
        for piece in self.pieces:
            for a, b in ivs:
                lo, hi = max(piece.lo, a), min(piece.hi, b)
                if lo < hi:
                    total += piece.poly.integrate(lo, hi)
        return total

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "ScalarMeasure") -> "ScalarMeasure":
        if not isinstance(other, ScalarMeasure):
            return NotImplemented
        atoms = list(self.atoms) + list(other.atoms)
        cuts = sorted(
            {p.lo for p in self.pieces}
            | {p.hi for p in self.pieces}
            | {p.lo for p in other.pieces}
            | {p.hi for p in other.pieces}
        )
        pieces: list[Piece] = []
        for lo, hi in zip(cuts, cuts[1:]):
            acc = ZERO_POLY
            for p in self.pieces + other.pieces:
                if p.lo <= lo and hi <= p.hi:
                    acc = acc + p.poly
            if acc.is_zero:
                continue
            if pieces and pieces[-1].hi == lo and pieces[-1].poly == acc:
                pieces[-1] = Piece(pieces[-1].lo, hi, acc)
            else:
                pieces.append(Piece(lo, hi, acc))
        return ScalarMeasure.of(atoms=atoms, pieces=pieces)

    def scaled(self, c: NumberLike) -> "ScalarMeasure":
        c = as_fraction(c)
        if c < 0:
            raise ValueError("measures stay positive; negative scale rejected")
        if c == 0:
            return ScalarMeasure()
        return ScalarMeasure.of(
            atoms=[(x, c * w) for x, w in self.atoms],
            pieces=[Piece(p.lo, p.hi, p.poly.scaled(c)) for p in self.pieces],
        )

    def times_polynomial(self, poly: Poly) -> "ScalarMeasure":
        """Reweight by a polynomial that is positive on the support."""
        atoms = []
        for x, w in self.atoms:
            fac = poly(x)
            if fac < 0:
                raise ValueError(f"weight polynomial negative at atom {x}")
            atoms.append((x, w * fac))
        pieces = [Piece(p.lo, p.hi, p.poly * poly) for p in self.pieces]
        return ScalarMeasure.of(atoms=atoms, pieces=pieces)

    def restrict(self, X) -> "ScalarMeasure":
        ivs = _interval_set(X)
        atoms = [(x, w) for x, w in self.atoms if _in_set(x, ivs)]
        pieces = []
        for piece in self.pieces:
            for a, b in ivs:
                lo, hi = max(piece.lo, a), min(piece.hi, b)
                if lo < hi:
                    pieces.append(Piece(lo, hi, piece.poly))
        return ScalarMeasure.of(atoms=atoms, pieces=pieces)

    # -- local structure ------------------------------------------------------

    def _side_density(self, x: Fraction, side: int) -> Poly:
        """Density polynomial governing the side of ``x`` (+1 right, -1 left)."""
        for p in self.pieces:
            if side > 0 and p.lo <= x < p.hi:
                return p.poly
            if side < 0 and p.lo < x <= p.hi:
                return p.poly
        return ZERO_POLY

    def _local_series(self, x: Fraction, nterms: int) -> list:
        """Coefficients of eps -> mass([x-eps, x+eps]) for small eps.

        Entry 0 is the atom mass at x; entry k >= 1 multiplies eps**k.  Valid
        for eps smaller than the gap to the nearest other feature, which is
        all a one-sided limit ever sees.
        """
        out = [self.atom_mass_at(x)] + [Fraction(0)] * nterms
        right = self._side_density(x, +1)
        left = self._side_density(x, -1)
        if not right.is_zero:
            t = right.taylor_at(x)
            for k in range(1, nterms + 1):
                if k - 1 <= t.degree:
                    out[k] += t.coeffs[k - 1] / k
        if not left.is_zero:
            t = left.taylor_at(x)
            for k in range(1, nterms + 1):
                if k - 1 <= t.degree:
                    out[k] += (-1) ** (k - 1) * t.coeffs[k - 1] / k
        return out

    def locally_positive_at(self, x: NumberLike) -> bool:
        """True when every interval [x-eps, x+eps] has positive mass."""
        x = as_fraction(x)
        depth = max([p.poly.degree for p in self.pieces], default=0) + 1
        return any(c != 0 for c in self._local_series(x, depth))

    def symmetric_derivative(self, sigma: "ScalarMeasure", x: NumberLike) -> DerivativeValue:
        """Limit of mass ratios over shrinking symmetric intervals at ``x``.

        Both measures are expanded locally in the half-width, and the limit
        is read off the lowest-order nonvanishing terms.  The answer is
        infinite when ``x`` supports this measure but not ``sigma``, and
        undefined when it supports neither.
        """
        x = as_fraction(x)
        depth = (
            max(
                [p.poly.degree for p in self.pieces]
                + [p.poly.degree for p in sigma.pieces],
                default=0,
            )
            + 1
        )
        F = self._local_series(x, depth)
        G = sigma._local_series(x, depth)
        ordF = next((k for k, c in enumerate(F) if c != 0), None)
        ordG = next((k for k, c in enumerate(G) if c != 0), None)
        if ordG is None:
            return DerivativeValue.infinite() if ordF is not None else DerivativeValue.undefined()
        if ordF is None:
            return DerivativeValue.finite(0)
        if ordF < ordG:
            return DerivativeValue.infinite()
        if ordF > ordG:
            return DerivativeValue.finite(0)
        return DerivativeValue.finite(F[ordF] / G[ordG])

    def lebesgue_decompose(
        self, sigma: "ScalarMeasure"
    ) -> Tuple["ScalarMeasure", "ScalarMeasure"]:
        """Split into a part dominated by ``sigma`` and a part singular to it.

        Atoms follow the atom positions of ``sigma``; density pieces follow
        the density support of ``sigma``.  The two parts always add back to
        the original measure exactly.
        """
        sig_atoms = set(sigma.atom_positions())
        ac_atoms = [(x, w) for x, w in self.atoms if x in sig_atoms]
        s_atoms = [(x, w) for x, w in self.atoms if x not in sig_atoms]
        sig_support = _interval_set(sigma.piece_intervals()) if sigma.pieces else ()
        ac_pieces: list[Piece] = []
        s_pieces: list[Piece] = []
        for piece in self.pieces:
            covered: list[Tuple[Fraction, Fraction]] = []
            for a, b in sig_support:
                lo, hi = max(piece.lo, a), min(piece.hi, b)
                if lo < hi:
                    covered.append((lo, hi))
                    ac_pieces.append(Piece(lo, hi, piece.poly))
            cursor = piece.lo
            for lo, hi in covered:
                if cursor < lo:
                    s_pieces.append(Piece(cursor, lo, piece.poly))
                cursor = hi
            if cursor < piece.hi:
                s_pieces.append(Piece(cursor, piece.hi, piece.poly))
        return (
            ScalarMeasure.of(atoms=ac_atoms, pieces=ac_pieces),
            ScalarMeasure.of(atoms=s_atoms, pieces=s_pieces),
        )

    def mutually_singular(self, other: "ScalarMeasure") -> bool:
        """True when the two measures live on disjoint sets.

        Structurally: no shared atom position, and the density intervals
        overlap at most in isolated points.
        """
        mine = set(self.atom_positions())
        if mine.intersection(other.atom_positions()):
            return False
        for p in self.pieces:
            for q in other.pieces:
                if max(p.lo, q.lo) < min(p.hi, q.hi):
                    return False
        return True

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "atoms": [[number_to_json(x), number_to_json(w)] for x, w in self.atoms],
            "pieces": [p.to_json() for p in self.pieces],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ScalarMeasure":
        if not isinstance(obj, dict) or "atoms" not in obj or "pieces" not in obj:
            raise ValueError("measure JSON needs 'atoms' and 'pieces'")
        atoms = [(number_from_json(x), number_from_json(w)) for x, w in obj["atoms"]]
        pieces = [Piece.from_json(p) for p in obj["pieces"]]
        return cls.of(atoms=atoms, pieces=pieces)


def sum_measures(measures: Iterable[ScalarMeasure]) -> ScalarMeasure:
    total = ScalarMeasure()
    for m in measures:
        total = total + m
    return total


def overlap_count(measures: Sequence[ScalarMeasure], x: NumberLike) -> int:
    """Number of measures visible at ``x`` relative to their sum.

    Counts the entries whose derivative against the total is positive.  The
    point must carry the total measure locally, otherwise the count is
    meaningless and a ValueError is raised.
    """
    mu = sum_measures(measures)
    if not mu.locally_positive_at(x):
        raise ValueError(f"{x} is outside the support of the combined measure")
    count = 0
    for m in measures:
        d = m.symmetric_derivative(mu, x)
        if d.is_positive:
            count += 1
    return count
