"""Spectral reports for pasted systems: eigenvalues with layer counts,
region classification, and independent cross-checks.

The report distinguishes three kinds of spectrum on a window.  Point
spectrum comes from two mechanisms: positions where at least two inputs
carry an atom (layer count = carriers - 1), and zeros of the summed
interface function on pole-free gaps (always simple).  Absolutely
continuous regions carry as many layers as there are inputs with positive
density.  Singular locations carried by exactly one input disappear from
the joined spectrum entirely; the report lists them separately so their
absence is visible rather than silent.

A finite-difference discretization of the star provides an oracle that
knows nothing about any of the above and is compared against it in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.sparse.linalg import eigsh

from .errors import ConvergenceError, InternalInvariantError
from .herglotz import (
    HerglotzRep,
    atom_weight,
    atomic_rational_parts,
    cos_sin,
    poly_gcd_degree,
    real_zeros,
)
from .measure import (
    NumberLike,
    Piece,
    Poly,
    ScalarMeasure,
    as_fraction,
    number_from_json,
    number_to_json,
    sum_measures,
)
from .pasting import PastedSystem, multiplicity_at, trace_weyl
from .schrodinger import Edge, dirichlet_eigenvalues, weyl_m

OVERLAP = "overlap"
KIRCHHOFF = "kirchhoff-zero"


@dataclass(frozen=True)
class Eigenvalue:
    x: Union[Fraction, float]
    multiplicity: int
    provenance: str

    def __post_init__(self):
        if self.provenance not in (OVERLAP, KIRCHHOFF):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.multiplicity < 1:
            raise ValueError("listed eigenvalues must have multiplicity >= 1")
        if self.provenance == KIRCHHOFF and self.multiplicity != 1:
            raise ValueError("zeros of the summed function are always simple")


@dataclass(frozen=True)
class AcRegion:
    lo: Union[Fraction, float]
    hi: Union[Fraction, float]
    r: int


@dataclass(frozen=True)
class SingularItem:
    x: Union[Fraction, float]
    multiplicity: int


@dataclass(frozen=True)
class SpectralReport:
    window: Tuple[Union[Fraction, float], Union[Fraction, float]]
    eigenvalues: Tuple[Eigenvalue, ...] = ()
    ac_regions: Tuple[AcRegion, ...] = ()
    sac_items: Tuple[SingularItem, ...] = ()
    ss_items: Tuple[SingularItem, ...] = ()
    vanished: Tuple[Union[Fraction, float], ...] = ()
    notes: Tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "window": [number_to_json(as_fraction(v)) for v in self.window],
            "eigenvalues": [
                {
                    "x": number_to_json(as_fraction(e.x)),
                    "multiplicity": e.multiplicity,
                    "provenance": e.provenance,
                }
                for e in self.eigenvalues
            ],
            "ac_regions": [
                {
                    "interval": [number_to_json(as_fraction(r.lo)),
                                 number_to_json(as_fraction(r.hi))],
                    "r": r.r,
                }
                for r in self.ac_regions
            ],
            "sac_items": [
                {"x": number_to_json(as_fraction(s.x)), "multiplicity": s.multiplicity}
                for s in self.sac_items
            ],
            "ss_items": [
                {"x": number_to_json(as_fraction(s.x)), "multiplicity": s.multiplicity}
                for s in self.ss_items
            ],
            "vanished": [number_to_json(as_fraction(v)) for v in self.vanished],
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SpectralReport":
        return cls(
            window=tuple(number_from_json(v) for v in obj["window"]),
            eigenvalues=tuple(
                Eigenvalue(number_from_json(e["x"]), int(e["multiplicity"]), e["provenance"])
                for e in obj["eigenvalues"]
            ),
            ac_regions=tuple(
                AcRegion(number_from_json(r["interval"][0]),
                         number_from_json(r["interval"][1]), int(r["r"]))
                for r in obj["ac_regions"]
            ),
            sac_items=tuple(
                SingularItem(number_from_json(s["x"]), int(s["multiplicity"]))
                for s in obj["sac_items"]
            ),
            ss_items=tuple(
                SingularItem(number_from_json(s["x"]), int(s["multiplicity"]))
                for s in obj["ss_items"]
            ),
            vanished=tuple(number_from_json(v) for v in obj["vanished"]),
            notes=tuple(obj.get("notes", ())),
        )

    def csv_rows(self):
        """Rows (x, N, provenance) for the eigenvalue table."""
        for e in self.eigenvalues:
            yield (float(e.x), e.multiplicity, e.provenance)


# ---------------------------------------------------------------------------
# Point spectrum
# ---------------------------------------------------------------------------


def _pole_positions_numeric(sys: PastedSystem, window) -> list:
    """(position, entry index) pairs of all poles in the window."""
    out = []
    for l, e in enumerate(sys.entries):
        if isinstance(e, Edge):
            for x in dirichlet_eigenvalues(e, window):
                out.append((float(x), l))
        elif isinstance(e, HerglotzRep):
            lo, hi = as_fraction(window[0]), as_fraction(window[1])
            for t, _w in e.omega.atoms:
                if lo <= t <= hi:
                    out.append((float(t), l))
        else:
            raise ValueError(
                "cannot enumerate poles of a black-box callable entry; "
                "provide a representation or an edge"
            )
    return sorted(out)


def _cluster_positions(pairs):
    """Group (position, entry) pairs whose positions agree numerically."""
    clusters = []
    for x, l in pairs:
        if clusters and abs(x - clusters[-1][0][-1]) <= 1e-9 * (1 + abs(x)):
            clusters[-1][0].append(x)
            clusters[-1][1].add(l)
        else:
            clusters.append(([x], {l}))
    return [(sum(xs) / len(xs), entries) for xs, entries in clusters]


def _real_sum_value(sys: PastedSystem, x: float) -> float:
    total = 0.0
    for e in sys.entries:
        if isinstance(e, Edge):
            total += float(weyl_m(e, x).real)
        else:
            total += float(e.eval_real(x))
    return total


def find_point_spectrum(sys: PastedSystem, window, eps_schedule=None,
                        cross_check: bool = True) -> list:
    """All eigenvalues of the pasted problem in the window.

    Exact route (purely atomic representations): shared atom positions give
    overlap eigenvalues with layer count carriers-1; the zeros of the
    summed function, one per pole-free gap, give simple eigenvalues.  The
    numeric route does the same with ODE-located poles and bracketed sign
    changes.  Each reported point is re-derived through the omega-sample
    rank, which is an independent formula; disagreement is a hard error.
    """
    results: list[Eigenvalue] = []
    if sys.is_exact_atomic:
        reps = sys.reps
        lo, hi = as_fraction(window[0]), as_fraction(window[1])
        seen = set()
        for r in reps:
            for t, _w in r.omega.atoms:
                if t in seen or not (lo <= t <= hi):
                    continue
                seen.add(t)
                k = sum(1 for rr in reps if rr.omega.atom_mass_at(t) > 0)
                if k >= 2:
                    results.append(Eigenvalue(t, k - 1, OVERLAP))
        for u in real_zeros(sys.sum_rep(), (lo, hi)):
            results.append(Eigenvalue(u, 1, KIRCHHOFF))
        if cross_check:
            for e in results:
                got = multiplicity_at(sys, e.x, exact=True)
                if got != e.multiplicity:
                    raise InternalInvariantError(
                        f"layer count at {e.x}: counted {e.multiplicity}, rank gave {got}"
                    )
        return sorted(results, key=lambda e: e.x)

    # Numeric route.
    lo, hi = float(window[0]), float(window[1])
    poles = _pole_positions_numeric(sys, window)
    clusters = _cluster_positions(poles)
    for x, entries in clusters:
        if len(entries) >= 2:
            results.append(Eigenvalue(x, len(entries) - 1, OVERLAP))

    blocked = []
    for e in sys.entries:
        if isinstance(e, HerglotzRep):
            blocked.extend((float(p.lo), float(p.hi)) for p in e.omega.pieces)
    gap_bounds = [lo] + [x for x, _ in clusters] + [hi]
    for a, b in zip(gap_bounds, gap_bounds[1:]):
        if b - a <= 1e-9 * (1 + abs(a)):
            continue
        if any(max(a, blo) < min(b, bhi) for blo, bhi in blocked):
            continue  # summed function is not real-analytic across densities
        shift = 1e-7 * (b - a)
        aa, bb = a + shift, b - shift
        try:
            va, vb = _real_sum_value(sys, aa), _real_sum_value(sys, bb)
        except (ValueError, ZeroDivisionError):
            continue
        if va == 0.0:
            results.append(Eigenvalue(aa, 1, KIRCHHOFF))
            continue
        if va < 0 < vb:
            u = brentq(lambda t: _real_sum_value(sys, t), aa, bb,
                       xtol=1e-13, rtol=8.9e-16)
            results.append(Eigenvalue(float(u), 1, KIRCHHOFF))

    if cross_check:
        schedule = eps_schedule or sys.default_schedule()
        tr = lambda z: trace_weyl(sys, z)
        for e in results:
            w = atom_weight(tr, float(e.x), schedule=schedule)
            if not w > 1e-10:
                raise InternalInvariantError(
                    f"reported eigenvalue {e.x} has no point mass in the trace"
                )
            got = multiplicity_at(sys, e.x, eps_schedule=schedule, exact=False)
            if got != e.multiplicity:
                raise InternalInvariantError(
                    f"layer count at {e.x}: counted {e.multiplicity}, rank gave {got}"
                )
    return sorted(results, key=lambda e: float(e.x))


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def classify_spectrum(measures: Sequence[ScalarMeasure], window,
                      sys: Union[PastedSystem, None] = None) -> SpectralReport:
    """Region-and-point report for the system whose inputs carry ``measures``.

    ac_regions: maximal intervals where at least one density is positive,
    labelled with the number of positive densities r (the layer count
    there).  sac_items: shared atoms (carriers - 1 layers).  vanished:
    atoms carried by exactly one input, absent from the joined spectrum.
    ss_items: simple eigenvalues off the combined support, found through
    the summed interface function when the inputs are purely atomic.
    """
    lo, hi = as_fraction(window[0]), as_fraction(window[1])
    if not lo < hi:
        raise ValueError("window must have positive length")
    notes: list[str] = []

    cuts = {lo, hi}
    for m in measures:
        for p in m.pieces:
            if p.hi <= lo or hi <= p.lo:
                continue
            cuts.add(max(p.lo, lo))
            cuts.add(min(p.hi, hi))
    cuts = sorted(cuts)
    regions: list[AcRegion] = []
    for a, b in zip(cuts, cuts[1:]):
        r = 0
        for m in measures:
            if any(p.lo <= a and b <= p.hi and not p.poly.is_zero for p in m.pieces):
                r += 1
        if r == 0:
            continue
        if regions and regions[-1].hi == a and regions[-1].r == r:
            regions[-1] = AcRegion(regions[-1].lo, b, r)
        else:
            regions.append(AcRegion(a, b, r))

    mu = sum_measures(measures)
    sac: list[SingularItem] = []
    vanished: list = []
    eigenvalues: list[Eigenvalue] = []
    for x, _w in mu.atoms:
        if not (lo <= x <= hi):
            continue
        k = sum(1 for m in measures if m.atom_mass_at(x) > 0)
        if k >= 2:
            sac.append(SingularItem(x, k - 1))
            eigenvalues.append(Eigenvalue(x, k - 1, OVERLAP))
        else:
            vanished.append(x)

    ss: list[SingularItem] = []
    if sys is None and len(measures) >= 2:
        try:
            sys = PastedSystem.of(list(measures))
        except ValueError:
            sys = None
    if sys is not None and sys.is_exact_atomic:
        for u in real_zeros(sys.sum_rep(), (lo, hi)):
            ss.append(SingularItem(u, 1))
            eigenvalues.append(Eigenvalue(u, 1, KIRCHHOFF))
    elif sys is not None:
        notes.append("off-support simple spectrum not scanned: density pieces present")

    eigenvalues.sort(key=lambda e: float(e.x))
    return SpectralReport(
        window=(lo, hi),
        eigenvalues=tuple(eigenvalues),
        ac_regions=tuple(regions),
        sac_items=tuple(sorted(sac, key=lambda s: float(s.x))),
        ss_items=tuple(sorted(ss, key=lambda s: float(s.x))),
        vanished=tuple(sorted(vanished, key=float)),
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# Finite-difference oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FdOracleResult:
    items: Tuple[Tuple[float, int], ...]
    coarse: bool
    h_max: float


def fd_oracle(edges: Sequence[Edge], window, grid: int = 4000) -> FdOracleResult:
    """Star spectrum from a direct discretization, single shared vertex DOF.

    Piecewise-linear elements with a lumped mass matrix on each edge; the
    shared value at the vertex enforces continuity, assembling the forms
    enforces the derivative-sum condition, and the outer condition enters
    as elimination (Dirichlet) or a boundary term.  Eigenvalues inside the
    window are clustered into multiplicity groups; clusters closer than
    ten times the discretization error raise the ``coarse`` flag.
    """
    if grid < 100:
        raise ValueError("the oracle needs at least 100 points per edge")
    if any(e.is_infinite for e in edges):
        raise ValueError("the discretization oracle needs finite edges")
    lo, hi = float(window[0]), float(window[1])
    n = len(edges)

    index = {}
    next_idx = 1  # 0 is the shared vertex value
    for l, e in enumerate(edges):
        for j in range(1, grid):
            index[(l, j)] = next_idx
            next_idx += 1
        c, s = cos_sin(float(e.outer_angle))
        if s != 0.0:
            index[(l, grid)] = next_idx
            next_idx += 1
    size = next_idx

    rowsA, colsA, valsA = [], [], []
    massdiag = np.zeros(size)

    def add(i, j, v):
        rowsA.append(i)
        colsA.append(j)
        valsA.append(v)

    for l, e in enumerate(edges):
        L = float(e.length)
        h = L / grid
        c, s = cos_sin(float(e.outer_angle))
        has_outer = s != 0.0

        def node(j):
            if j == 0:
                return 0
            if j == grid:
                return index[(l, grid)] if has_outer else None
            return index[(l, j)]

        for j in range(grid):
            a, b = node(j), node(j + 1)
            k = 1.0 / h
            if a is not None:
                add(a, a, k)
            if b is not None:
                add(b, b, k)
            if a is not None and b is not None:
                add(a, b, -k)
                add(b, a, -k)
        for j in range(grid + 1):
            idx = node(j)
            if idx is None:
                continue
            w = h if 0 < j < grid else h / 2.0
            massdiag[idx] += w
            q = e.q_at(j * h)
            if q != 0.0:
                add(idx, idx, q * w)
        if has_outer:
            add(index[(l, grid)], index[(l, grid)], c / s)

    A = sp.csc_matrix(sp.coo_matrix((valsA, (rowsA, colsA)), shape=(size, size)))
    B = sp.diags(massdiag, format="csc")

    qmax = max(
        (abs(e.q_at(j * float(e.length) / grid)) for e in edges for j in range(grid + 1)),
        default=0.0,
    )
    total_len = sum(float(e.length) for e in edges)
    want = int(math.ceil(total_len * math.sqrt(max(hi + qmax, 1.0)) / math.pi)) + 2 * n + 10
    sigma = min(lo, 0.0) - 1.0 - qmax

    eigvals = None
    k = min(want, size - 2)
    for _ in range(3):
        vals = eigsh(A, k=k, M=B, sigma=sigma, which="LM",
                     return_eigenvectors=False)
        vals = np.sort(vals)
        if vals[-1] > hi or k >= size - 2:
            eigvals = vals
            break
        k = min(size - 2, 2 * k)
    if eigvals is None:
        raise ConvergenceError("could not capture the whole window; grid too small")

    inside = [float(v) for v in eigvals if lo <= v <= hi]
    clusters: list[list[float]] = []
    for v in inside:
        if clusters and v - clusters[-1][-1] < 1e-6 * (1 + abs(v)):
            clusters[-1].append(v)
        else:
            clusters.append([v])
    items = tuple((sum(c) / len(c), len(c)) for c in clusters)

    h_max = max(float(e.length) / grid for e in edges)
    coarse = False
    for (x1, _), (x2, _) in zip(items, items[1:]):
        est = max(x1 * x1, x2 * x2, 1.0) * h_max * h_max / 12.0
        if x2 - x1 < 10.0 * est:
            coarse = True
    return FdOracleResult(items=items, coarse=coarse, h_max=h_max)


# ---------------------------------------------------------------------------
# Verification harnesses
# ---------------------------------------------------------------------------


def verify_kac(sys: PastedSystem, window) -> Tuple[bool, dict]:
    """For a two-entry system, every point-spectrum layer count must be 1."""
    if sys.n != 2:
        raise ValueError("this check is about two-entry systems")
    eigs = find_point_spectrum(sys, window)
    violations = [
        {"x": float(e.x), "multiplicity": e.multiplicity}
        for e in eigs
        if e.multiplicity != 1
    ]
    report = {
        "checked": len(eigs),
        "violations": violations,
    }
    return (not violations), report


def aronszajn_donoghue_check(m: HerglotzRep, alpha1: float, alpha2: float) -> bool:
    """Certified disjointness of the pole sets of two re-anchorings of m.

    Writes the purely atomic m as P/Q and forms the numerators
    R = sin(alpha) P + cos(alpha) Q whose roots are the transformed poles.
    The two root sets are disjoint exactly when gcd(R1, R2) is constant,
    which is decided in rational arithmetic with no tolerance anywhere.
    """
    if not m.omega.is_atomic:
        raise ValueError("the exact certificate needs purely atomic data")
    if alpha1 == alpha2:
        raise ValueError("angles must differ")
    P, Q = atomic_rational_parts(m)
    numerators = []
    for alpha in (alpha1, alpha2):
        c, s = cos_sin(float(alpha))
        cf, sf = as_fraction(c), as_fraction(s)
        numerators.append(P.scaled(sf) + Q.scaled(cf))
    R1, R2 = numerators
    if R1.is_zero or R2.is_zero:
        raise ValueError("degenerate transform: numerator vanished identically")
    return poly_gcd_degree(R1, R2) == 0


# ---------------------------------------------------------------------------
# The worked four-measure example
# ---------------------------------------------------------------------------


def _unit_grid(offset: Fraction, count: int) -> list:
    """count atoms in (0,1) at odd multiples of 1/(2 count), plus an offset."""
    return [(Fraction(2 * i - 1, 2 * count) + offset, Fraction(1, count))
            for i in range(1, count + 1)]


def _shifted(atoms, shifts) -> ScalarMeasure:
    out = []
    for s in shifts:
        out.extend((x + s, w) for x, w in atoms)
    return ScalarMeasure.of(atoms=out)


def build_example_k74(window=(0, 8), atoms_per_unit: int = 6):
    """Four measures whose joined spectrum shows every multiplicity jump.

    Two mutually singular families of unit atom grids stand in for the
    singular parts; integer shifts place copies on the intervals encoded
    in each measure.  All four share one smooth density supported from
    4.5 up to the window top, so the absolutely continuous layer count is
    the full 4 there.  Expected singular layer counts by region:
    (2,3) -> 1, (3,4) -> 2, (4,5) -> 1, (5,6) -> 1, (6,7) -> 3.
    """
    wlo, whi = as_fraction(window[0]), as_fraction(window[1])
    if wlo > 0 or whi < 8:
        raise ValueError("the example needs a window containing [0, 8]")
    k = int(atoms_per_unit)
    if k < 1:
        raise ValueError("need at least one atom per unit interval")
    lam1 = _unit_grid(Fraction(0), k)
    lam2 = _unit_grid(Fraction(1, 4 * k), k)

    def shifts(n, m):
        return range(n, m)

    density_lo = Fraction(9, 2)
    density = _power_density(density_lo, whi)

    mu1 = (
        _shifted(lam1, shifts(2, 3))
        + _shifted(lam1, shifts(4, 5))
        + _shifted(lam2, shifts(3, 4))
        + _shifted(lam2, shifts(6, 7))
        + density
    )
    mu2 = _shifted(lam1, shifts(2, 6)) + _shifted(lam2, shifts(6, 7)) + density
    mu3 = _shifted(lam2, shifts(0, 7)) + density
    mu4 = (
        _shifted(lam1, shifts(0, 1))
        + _shifted(lam1, shifts(7, 8))
        + _shifted(lam2, shifts(3, 8))
        + density
    )
    return mu1, mu2, mu3, mu4


def _power_density(lo: Fraction, hi: Fraction) -> ScalarMeasure:
    """Quadratic fit of (2/(3 pi)) x^(3/2) on [lo, hi] as a density piece.

    The exact power is not a polynomial, so the class cannot hold it; a
    three-point quadratic interpolant keeps the qualitative shape (layer
    counting only cares that the density is positive on the interval).
    """
    def f(x: float) -> float:
        return 2.0 / (3.0 * math.pi) * x ** 1.5

    x0, x2 = float(lo), float(hi)
    x1 = (x0 + x2) / 2.0
    ys = [f(x0), f(x1), f(x2)]
    # Lagrange basis expanded through exact arithmetic on the float nodes.
    xs = [as_fraction(x0), as_fraction(x1), as_fraction(x2)]
    poly = Poly(())
    for i in range(3):
        basis = Poly((1,))
        denom = Fraction(1)
        for j in range(3):
            if j == i:
                continue
            basis = basis * Poly((-xs[j], 1))
            denom *= xs[i] - xs[j]
        poly = poly + basis.scaled(as_fraction(ys[i]) / denom)
    return ScalarMeasure.of(pieces=[Piece(lo, hi, poly)])
