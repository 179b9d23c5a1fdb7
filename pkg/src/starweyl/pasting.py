"""Joining n scalar interface functions at one vertex.

The n inputs m_1..m_n (interface data of the individual edges) determine an
n x n matrix-valued Herglotz function M of the joined problem, through the
value-continuity + derivative-sum interface.  Everything downstream reads
local spectral data out of M: the matrix measure it represents, the density
omega of that measure against its own trace, and the rank of omega, which
counts spectral layers at a point.

Two computation routes coexist on purpose.  For purely atomic rational
data, residue matrices of M at a point come out in exact Fraction
arithmetic.  For black-box inputs the same objects are extrapolated from
Im M(x + i eps) / Im tr M(x + i eps) along a shrinking schedule.  The tests
play the routes against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple, Union

import numpy as np

from .errors import ConvergenceError, InternalInvariantError, PureRelationError
from .herglotz import (
    DEFAULT_SCHEDULE,
    HerglotzFunction,
    HerglotzRep,
    cos_sin,
    geometric_schedule,
    mobius,
    richardson,
)
from .measure import NumberLike, ScalarMeasure, as_fraction
from .schrodinger import Edge, weyl_m

RANK_RTOL = 1e-8


# ---------------------------------------------------------------------------
# System container
# ---------------------------------------------------------------------------


def _normalize_entry(item):
    if isinstance(item, (HerglotzRep, HerglotzFunction, Edge)):
        return item
    if isinstance(item, ScalarMeasure):
        return HerglotzRep.from_measure(item)
    if callable(item):
        return HerglotzFunction(item)
    raise TypeError(f"cannot use {type(item).__name__} as interface data")


@dataclass(frozen=True, eq=False)
class PastedSystem:
    """n >= 2 interface functions joined at a single vertex.

    Entries may be exact representations, ODE-backed edges, or plain
    callables.  At most one entry may be a real constant (a degenerate
    relation in place of a function); with two or more the joined object
    stops being an operator, so that is rejected here.
    """

    entries: Tuple[object, ...]
    angles: Union[Tuple[Tuple[float, ...], float], None] = None

    def __post_init__(self):
        if len(self.entries) < 2:
            raise ValueError("a pasting needs at least two entries")
        n_const = sum(
            1 for e in self.entries if isinstance(e, HerglotzRep) and e.is_constant
        )
        if n_const > 1:
            raise PureRelationError(
                f"{n_const} constant entries: at most one degenerate relation is allowed"
            )
        if n_const == len(self.entries):
            raise PureRelationError("all entries constant: nothing left to paste")
        if self.angles is not None:
            a, b = self.angles
            if len(a) != len(self.entries):
                raise ValueError("need one interface angle per entry")
            if not 0.0 < float(b) < math.pi:
                raise ValueError("the vertex angle must lie strictly inside (0, pi)")

    @classmethod
    def of(cls, items: Sequence, angles=None) -> "PastedSystem":
        norm = tuple(_normalize_entry(it) for it in items)
        if angles is not None:
            angles = (tuple(float(v) for v in angles[0]), float(angles[1]))
        return cls(norm, angles)

    @property
    def n(self) -> int:
        return len(self.entries)

    def entry_value(self, l: int, z: complex) -> complex:
        e = self.entries[l]
        if isinstance(e, Edge):
            return weyl_m(e, z)
        return e.eval(z)

    def entry_values(self, z: complex) -> np.ndarray:
        return np.array([self.entry_value(l, z) for l in range(self.n)], dtype=complex)

    @property
    def reps(self) -> Union[Tuple[HerglotzRep, ...], None]:
        """The entries as exact representations, or None if any is not one."""
        if all(isinstance(e, HerglotzRep) for e in self.entries):
            return self.entries
        return None

    @property
    def is_exact_atomic(self) -> bool:
        reps = self.reps
        return reps is not None and all(r.omega.is_atomic for r in reps)

    @property
    def has_edges(self) -> bool:
        return any(isinstance(e, Edge) for e in self.entries)

    def sum_rep(self) -> HerglotzRep:
        reps = self.reps
        if reps is None:
            raise ValueError("the summed representation needs all entries exact")
        a = sum((r.a for r in reps), Fraction(0))
        b = sum((r.b for r in reps), Fraction(0))
        omega = ScalarMeasure()
        for r in reps:
            omega = omega + r.omega
        return HerglotzRep(a, b, omega)

    def default_schedule(self):
        # ODE-backed values lose accuracy once eps drops under the solver
        # error amplified by 1/eps, hence the shorter ladder for edges.
        return geometric_schedule(1e-2, 13) if self.has_edges else DEFAULT_SCHEDULE

    def to_json(self) -> dict:
        edges = []
        for e in self.entries:
            edges.append(e.to_json() if not isinstance(e, HerglotzFunction) else None)
        if any(e is None for e in edges):
            raise ValueError("black-box callables have no JSON form")
        if self.angles is None:
            iface = {"type": "standard"}
        else:
            iface = {"type": "angles", "a": list(self.angles[0]), "b": self.angles[1]}
        return {"edges": edges, "interface": iface}

    @classmethod
    def from_json(cls, obj: dict) -> "PastedSystem":
        items = []
        for spec in obj["edges"]:
            if "length" in spec:
                items.append(Edge.from_json(spec))
            elif "omega" in spec:
                items.append(HerglotzRep.from_json(spec))
            elif "atoms" in spec:
                items.append(ScalarMeasure.from_json(spec))
            else:
                raise ValueError(f"unrecognized edge spec with keys {sorted(spec)}")
        iface = obj.get("interface", {"type": "standard"})
        angles = None
        if iface.get("type") == "angles":
            angles = (iface["a"], iface["b"])
        elif iface.get("type") != "standard":
            raise ValueError(f"unknown interface type {iface.get('type')!r}")
        return cls.of(items, angles)


# ---------------------------------------------------------------------------
# Interface matrix and matrix Weyl function
# ---------------------------------------------------------------------------


def interface_matrix(n: int) -> np.ndarray:
    """The 2n x 2n real matrix w coupling boundary values at the vertex.

    Block layout [[w11, w12], [w21, w22]]: the first n-1 rows of w11 take
    differences of neighbouring values (continuity), row n-1 of w12 sums
    the derivative-side entries (the flux condition), and the (n-1, n-1)
    entries of w21/w22 close the square.  w preserves the standard complex
    symplectic form J = [[0, I], [-I, 0]].
    """
    if n < 2:
        raise ValueError("the interface needs n >= 2")
    w11 = np.zeros((n, n))
    w12 = np.zeros((n, n))
    w21 = np.zeros((n, n))
    w22 = np.zeros((n, n))
    for l in range(n - 1):
        w11[l, l] = -1.0
        w11[l, n - 1] = 1.0
    w12[n - 1, :] = 1.0
    w21[n - 1, n - 1] = -1.0
    for l in range(n - 1):
        w22[l, l] = -1.0
    top = np.hstack([w11, w12])
    bot = np.hstack([w21, w22])
    return np.vstack([top, bot])


def symplectic_form(n: int) -> np.ndarray:
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.vstack([np.hstack([zero, eye]), np.hstack([-eye, zero])])


def matrix_weyl(sys: PastedSystem, z: complex) -> np.ndarray:
    """The n x n matrix M(z) of the joined problem, entrywise from m_l(z).

    With m = sum of all m_l: M_ij = -m_i m_j / m and M_ii = m_i (m - m_i)/m
    for i, j < n-1-indexed block, M_in = -m_i / m, M_nn = -1/m.  Off the
    real axis m cannot vanish (its imaginary part is a positive sum), so
    the division is safe.
    """
    ms = sys.entry_values(z)
    n = sys.n
    m = ms.sum()
    if m == 0:
        raise ZeroDivisionError(f"sum of interface values vanishes at z={z}")
    M = np.empty((n, n), dtype=complex)
    for i in range(n - 1):
        for j in range(n - 1):
            M[i, j] = -ms[i] * ms[j] / m
        M[i, i] = ms[i] * (m - ms[i]) / m
        M[i, n - 1] = M[n - 1, i] = -ms[i] / m
    M[n - 1, n - 1] = -1.0 / m
    return M


def trace_weyl(sys: PastedSystem, z: complex) -> complex:
    ms = sys.entry_values(z)
    m = ms.sum()
    if m == 0:
        raise ZeroDivisionError(f"sum of interface values vanishes at z={z}")
    head = ms[:-1]
    return complex((head * (m - head)).sum() / m - 1.0 / m)


# ---------------------------------------------------------------------------
# Omega samples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: float
    hermitian_defect: float
    tolerance: float


@dataclass(frozen=True, eq=False)
class OmegaMatrix:
    """One pointwise sample of the density of the matrix measure against
    its trace: Hermitian, positive semidefinite, trace 1 on the spectrum.

    ``exact`` marks the Fraction-arithmetic route; ``exact_entries`` then
    holds the unrounded values.  ``trace_vanishing`` marks points where the
    trace measure carries nothing, in which case the sample is zero and the
    rank is 0 by convention.
    """

    matrix: np.ndarray
    rank: int
    exact: bool
    converged: bool
    trace_vanishing: bool
    psd_tolerance_report: PsdReport
    exact_entries: Union[Tuple[Tuple[Fraction, ...], ...], None] = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _finalize_omega(mat: np.ndarray, exact: bool, converged: bool,
                    trace_vanishing: bool, exact_entries=None,
                    exact_rank=None) -> OmegaMatrix:
    mat = np.asarray(mat, dtype=complex)
    herm_defect = float(np.linalg.norm(mat - mat.conj().T))
    mat = (mat + mat.conj().T) / 2.0
    n = mat.shape[0]
    eigvals, eigvecs = np.linalg.eigh(mat)
    min_eig = float(eigvals.min()) if n else 0.0
    tol = max(n * float(np.abs(eigvals).max(initial=0.0)) * RANK_RTOL, 1e-300)
    clipped = np.clip(eigvals, 0.0, None)
    projected = (eigvecs * clipped) @ eigvecs.conj().T
    projected = (projected + projected.conj().T) / 2.0
    if exact_rank is not None:
        rank = exact_rank
    else:
        rank = int((clipped > tol).sum())
    return OmegaMatrix(
        matrix=projected,
        rank=rank,
        exact=exact,
        converged=converged,
        trace_vanishing=trace_vanishing,
        psd_tolerance_report=PsdReport(min_eig, herm_defect, tol),
        exact_entries=exact_entries,
    )


def _residue_matrix_at_atom(reps: Sequence[HerglotzRep], x: Fraction):
    """Exact residue matrix of M at a shared atom position, or None.

    Each input with an atom at x contributes rho_l = w_l (1 + x^2).  In the
    entry formulas the pole of m cancels all rows/columns except the block
    of carrying inputs among the first n-1, where the residue is
    diag(rho) - rho rho^T / (sum over all carriers).  The rank is always
    (number of carriers) - 1; one single carrier leaves no trace at all.
    """
    n = len(reps)
    rhos = [r.omega.atom_mass_at(x) * (1 + x * x) for r in reps]
    carriers = [l for l, rho in enumerate(rhos) if rho > 0]
    if not carriers:
        return None
    total = sum(rhos[l] for l in carriers)
    C = [[Fraction(0)] * n for _ in range(n)]
    head = [l for l in carriers if l < n - 1]
    for i in head:
        for j in head:
            C[i][j] = -rhos[i] * rhos[j] / total
        C[i][i] += rhos[i]
    rank = len(carriers) - 1
    return C, rank


def _kirchhoff_residue(reps: Sequence[HerglotzRep], x: Fraction):
    """Exact rank-one residue at a zero of the summed function, or None.

    Requires every input to be finite and real-analytic at x and the sum
    to vanish there.  Bisection-produced zeros carry ~2^-64 position error,
    so "vanish" tolerates a residual proportional to the derivative.
    """
    n = len(reps)
    vals = []
    deriv = Fraction(0)
    for r in reps:
        if r.omega.atom_mass_at(x) > 0:
            return None
        vals.append(r.eval_real(x))
        deriv += r.derivative_real(x)
    total = sum(vals, Fraction(0))
    if total != 0:
        scale = 1 + abs(deriv) * max(Fraction(1), abs(x))
        if abs(total) > scale / Fraction(2**40):
            return None
    if deriv <= 0:
        return None  # constant system cannot be pasted anyway
    v = [vals[l] for l in range(n - 1)] + [Fraction(1)]
    C = [[v[i] * v[j] / deriv for j in range(n)] for i in range(n)]
    return C, 1


def omega_at(sys: PastedSystem, x: NumberLike, eps_schedule=None,
             exact: Union[bool, None] = None) -> OmegaMatrix:
    """Sample of Im M / Im tr M in the limit onto the real point x.

    Route selection: exact residue arithmetic when every entry is a purely
    atomic representation (unless ``exact=False``), the extrapolated
    eps-limit otherwise.  Points the trace measure does not charge come
    back flagged ``trace_vanishing`` with a zero matrix.
    """
    n = sys.n
    if exact is None:
        exact = sys.is_exact_atomic
    if exact and not sys.is_exact_atomic:
        raise ValueError("exact route requires purely atomic representations")

    if exact:
        xf = as_fraction(x)
        reps = sys.reps
        hit = _residue_matrix_at_atom(reps, xf)
        if hit is None:
            hit = _kirchhoff_residue(reps, xf)
        if hit is None:
            return _finalize_omega(np.zeros((n, n)), True, True, True,
                                   exact_rank=0)
        C, rank = hit
        tr = sum((C[i][i] for i in range(n)), Fraction(0))
        if tr == 0:
            # single carrier: the joined measure has no atom here at all
            return _finalize_omega(np.zeros((n, n)), True, True, True,
                                   exact_rank=0)
        omega = tuple(tuple(C[i][j] / tr for j in range(n)) for i in range(n))
        mat = np.array([[float(v) for v in row] for row in omega])
        return _finalize_omega(mat, True, True, False,
                               exact_entries=omega, exact_rank=rank)

    schedule = tuple(eps_schedule or sys.default_schedule())
    xf = float(x)
    ratios = []
    weights = []
    for eps in schedule:
        M = matrix_weyl(sys, xf + 1j * eps)
        T = float(np.trace(M).imag)
        if T <= 0:
            raise ConvergenceError(
                f"Im tr M not positive at eps={eps}; cannot form the ratio"
            )
        weights.append(eps * T)
        ratios.append(M.imag / T)
    # eps * Im tr M extrapolates to the trace weight of the point: positive
    # exactly at atoms, zero at regular and purely continuous points.
    weight, _ = richardson(schedule, weights)
    if weight <= 1e-6 * max(weights[0], 1e-300):
        return _finalize_omega(np.zeros((n, n)), False, True, True)
    limit, err = _richardson_matrix(schedule, ratios)
    converged = err <= max(1e-6, 1e-4 * float(np.linalg.norm(limit)))
    return _finalize_omega(limit, False, converged, False)


def _richardson_matrix(eps: Sequence[float], vals: Sequence[np.ndarray], tail: int = 8):
    k = min(tail, len(vals))
    e = list(eps)[-k:]
    v = [np.asarray(m, dtype=float) for m in vals[-k:]]
    if k == 1:
        return v[0], float(np.linalg.norm(v[0]))
    r = e[0] / e[1]
    prev = v[-1]
    for mpow in range(1, k):
        rm = r**mpow
        v = [(rm * v[i + 1] - v[i]) / (rm - 1.0) for i in range(len(v) - 1)]
        err = float(np.linalg.norm(v[-1] - prev))
        prev = v[-1]
    return prev, err


def multiplicity_at(sys: PastedSystem, x: NumberLike, eps_schedule=None,
                    exact: Union[bool, None] = None) -> int:
    """Number of spectral layers at x: the rank of the omega sample there."""
    om = omega_at(sys, x, eps_schedule=eps_schedule, exact=exact)
    if not om.converged:
        raise ConvergenceError(f"omega sample at x={x} did not converge")
    return om.rank


# ---------------------------------------------------------------------------
# Rank formulas
# ---------------------------------------------------------------------------


def md_matrix(b: Sequence[NumberLike], d: NumberLike):
    """The matrix d * diag(b) - b b^T as exact Fractions."""
    bs = [as_fraction(v) for v in b]
    df = as_fraction(d)
    n = len(bs)
    out = [[-bs[i] * bs[j] for j in range(n)] for i in range(n)]
    for i in range(n):
        out[i][i] += df * bs[i]
    return out


def exact_rank(rows) -> int:
    """Rank by Gaussian elimination over the rationals (no thresholds)."""
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    rank = 0
    col = 0
    for col in range(ncols):
        pivot = None
        for r in range(rank, nrows):
            if m[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        pv = m[rank][col]
        for r in range(rank + 1, nrows):
            if m[r][col] != 0:
                f = m[r][col] / pv
                m[r] = [a - f * p for a, p in zip(m[r], m[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


def rank_md(b: Sequence[NumberLike], d: NumberLike) -> int:
    """Exact rank of d*diag(b) - b b^T: n-1 when d equals sum(b), else n.

    Both the closed-form branch and plain elimination are computed; they
    must agree, which guards the formula against editing accidents.
    """
    bs = [as_fraction(v) for v in b]
    df = as_fraction(d)
    if any(v == 0 for v in bs):
        raise ValueError("all b entries must be nonzero")
    if df == 0:
        raise ValueError("d must be nonzero")
    n = len(bs)
    predicted = n - 1 if df == sum(bs) else n
    computed = exact_rank(md_matrix(bs, df))
    if computed != predicted:
        raise InternalInvariantError(
            f"rank mismatch for b={bs}, d={df}: formula {predicted}, elimination {computed}"
        )
    return computed


def predicted_rank_singular(d: Sequence[NumberLike]) -> int:
    """Layer count from derivative shares on the shared singular part.

    Input: the shares each input contributes at a point, nonnegative and
    summing to one.  A share of exactly one would mean a single dominant
    input; such points carry no spectrum of the joined problem and are
    rejected rather than assigned a rank.
    """
    ds = [as_fraction(v) for v in d]
    if any(v < 0 or v > 1 for v in ds):
        raise ValueError("shares must lie in [0, 1]")
    if sum(ds) != 1:
        raise ValueError(f"shares must sum to 1, got {sum(ds)}")
    if any(v == 1 for v in ds):
        raise ValueError("a single dominant share carries no joined spectrum")
    return sum(1 for v in ds if v > 0) - 1


def rank_one_limit_matrix(m_values: Sequence[NumberLike]) -> OmegaMatrix:
    """The omega sample at a zero of the summed function, from the finite
    real limits of the first n-1 inputs: the normalized Gram matrix of
    (m_1, ..., m_{n-1}, 1).  Rank one by construction.
    """
    vals = [as_fraction(v) for v in m_values]
    v = vals + [Fraction(1)]
    norm = sum((u * u for u in v), Fraction(0))
    omega = tuple(tuple(v[i] * v[j] / norm for j in range(len(v))) for i in range(len(v)))
    mat = np.array([[float(c) for c in row] for row in omega])
    return _finalize_omega(mat, True, True, False, exact_entries=omega, exact_rank=1)


# ---------------------------------------------------------------------------
# Generalized vertex conditions
# ---------------------------------------------------------------------------


def pure_relation_weyl(beta: float) -> HerglotzRep:
    """Constant interface data -cot(beta) of the bare vertex relation."""
    c, s = cos_sin(float(beta))
    if s == 0.0:
        raise PureRelationError("beta = 0 mod pi leaves no function, only a relation")
    t = -c / s
    if abs(t - round(t)) < 1e-12:
        t = float(round(t))
    return HerglotzRep.constant(t)


def generalized_multiplicity(sys: PastedSystem, a: Sequence[float], b: float,
                             x: NumberLike, eps_schedule=None) -> int:
    """Multiplicity at x under rotated interface conditions.

    Each entry is re-anchored by its angle a_l, and the rotated vertex sum
    condition contributes one more (constant) entry -cot(b).  The result
    is the plain multiplicity of that enlarged standard pasting.  b on the
    excluded boundary (0 mod pi) is rejected.
    """
    if len(a) != sys.n:
        raise ValueError("need one angle per entry")
    if not 0.0 < float(b) < math.pi:
        raise ValueError("the vertex angle must lie strictly inside (0, pi)")
    transformed = [mobius(sys.entries[l] if not isinstance(sys.entries[l], Edge)
                          else (lambda zz, e=sys.entries[l]: weyl_m(e, zz)),
                          a[l])
                   for l in range(sys.n)]
    enlarged = PastedSystem.of(list(transformed) + [pure_relation_weyl(b)])
    if eps_schedule is None and sys.has_edges:
        # Wrapping edges as callables hides them from the enlarged system's
        # schedule choice, so inherit the edge-aware ladder from the source.
        eps_schedule = sys.default_schedule()
    return multiplicity_at(enlarged, x, eps_schedule=eps_schedule)
