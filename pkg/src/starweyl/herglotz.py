"""Herglotz functions: representation, evaluation, and boundary limits.

A function of the upper half-plane with nonnegative imaginary part is stored
as the triple (a, b, omega): a real offset, a nonnegative slope, and a finite
`ScalarMeasure`, entering through the kernel (1 + x z)/(x - z).  Purely
atomic representations support an exact real-axis calculus (poles, zeros,
residues, level sets) with rational arithmetic; density pieces evaluate
through closed-form logarithms.  Limits onto the real axis are taken along a
decreasing schedule of imaginary offsets with Richardson acceleration.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Tuple, Union

import numpy as np

from .errors import ConvergenceError, InternalInvariantError, PureRelationError
from .measure import (
    NumberLike,
    ONE_PLUS_X2,
    Piece,
    Poly,
    ScalarMeasure,
    as_fraction,
    number_from_json,
    number_to_json,
)

DIVERGENCE_THRESHOLD = 1e12


def cos_sin(alpha: float) -> Tuple[float, float]:
    """cos/sin with values snapped to exact 0 and +-1 near the axes.

    Angles are almost always multiples of pi/4 in practice; snapping keeps
    alpha = pi/2 meaning "exactly the inverse transform" instead of leaking
    a 6e-17 residue of pi's float rounding into exact rational paths.
    """
    c, s = math.cos(alpha), math.sin(alpha)
    for name, v in (("c", c), ("s", s)):
        if abs(v) < 1e-15:
            v = 0.0
        elif abs(abs(v) - 1.0) < 1e-15:
            v = math.copysign(1.0, v)
        if name == "c":
            c = v
        else:
            s = v
    if c != 0.0 and s != 0.0 and abs(abs(c) - abs(s)) < 1e-15:
        # pi/4 family: cos and sin land one ulp apart.  Every consumer only
        # depends on the (c, s) ray, so equalizing the magnitudes is safe.
        s = math.copysign(abs(c), s)
    return c, s


# ---------------------------------------------------------------------------
# Cauchy transform
# ---------------------------------------------------------------------------


def _poly_div_at(coeffs: Sequence[complex], z: complex) -> Tuple[list, complex]:
    """Synthetic division: p(x) = (x - z) q(x) + p(z)."""
    q: list = []
    acc = 0.0 + 0.0j
    for c in reversed(list(coeffs)):
        q.append(acc)
        acc = acc * z + c
    q.reverse()
    return q[1:] if q else [], acc


def _poly_int(coeffs: Sequence[complex], a: float, b: float) -> complex:
    total = 0.0 + 0.0j
    for k, c in enumerate(coeffs):
        total += c * (b ** (k + 1) - a ** (k + 1)) / (k + 1)
    return total


def cauchy_transform(nu: ScalarMeasure, z: complex) -> complex:
    """Integral of (1 + x z)/(x - z) against ``nu``, in closed form.

    Atom terms use the split (1 + t z)/(t - z) = (1 + t^2)/(t - z) - t so
    the imaginary part is a sum of positive terms whenever Im z > 0.
    Density pieces reduce to polynomial integrals plus a principal-branch
    logarithm, which is safe off the real axis.
    """
    z = complex(z)
    if z.imag == 0:
        raise ValueError("evaluation on the real axis is not defined; use eval_real")
    total = 0.0 + 0.0j
    for t, w in nu.atoms:
        tf, wf = float(t), float(w)
        total += wf * ((1.0 + tf * tf) / (tf - z) - tf)
    for piece in nu.pieces:
        a, b = float(piece.lo), float(piece.hi)
        coeffs = [float(c) for c in piece.poly.coeffs]
        # (1 + x z)/(x - z) = z + (1 + z^2)/(x - z)
        part = z * _poly_int(coeffs, a, b)
        q, pz = _poly_div_at(coeffs, z)
        log_term = cmath.log(b - z) - cmath.log(a - z)
        part += (1.0 + z * z) * (_poly_int(q, a, b) + pz * log_term)
        total += part
    return total


@dataclass(frozen=True)
class HerglotzRep:
    """Representation (a, b, omega) of a Herglotz function."""

    a: Fraction
    b: Fraction
    omega: ScalarMeasure

    def __post_init__(self):
        if not isinstance(self.a, Fraction) or not isinstance(self.b, Fraction):
            raise TypeError("a and b must be Fractions; use HerglotzRep.of")
        if self.b < 0:
            raise ValueError(f"slope b must be >= 0, got {self.b}")

    @classmethod
    def of(cls, a: NumberLike = 0, b: NumberLike = 0,
           omega: ScalarMeasure | None = None) -> "HerglotzRep":
        return cls(as_fraction(a), as_fraction(b), omega or ScalarMeasure())

    @classmethod
    def from_measure(cls, omega: ScalarMeasure) -> "HerglotzRep":
        return cls.of(0, 0, omega)

    @classmethod
    def constant(cls, c: NumberLike) -> "HerglotzRep":
        return cls.of(c, 0, None)

    @property
    def is_constant(self) -> bool:
        return self.b == 0 and self.omega.is_zero

    @property
    def is_atomic(self) -> bool:
        return self.omega.is_atomic

    def eval(self, z: complex) -> complex:
        return float(self.a) + float(self.b) * complex(z) + cauchy_transform(self.omega, z)

    __call__ = eval

    # -- real-axis calculus -------------------------------------------------

    def eval_real(self, x: NumberLike) -> Union[Fraction, float]:
        """Boundary value at a real point where the function stays analytic.

        Exact (a Fraction) for purely atomic data; a float once density
        pieces contribute their logarithmic integrals.  Raises at atoms and
        inside density intervals where no finite real limit exists.
        """
        x = as_fraction(x)
        val = self.a + self.b * x
        for t, w in self.omega.atoms:
            if t == x:
                raise ValueError(f"{x} is a pole (atom of the representing measure)")
            val += w * ((1 + t * t) / (t - x) - t)
        if not self.omega.pieces:
            return val
        out = float(val)
        xf = float(x)
        for piece in self.omega.pieces:
            if piece.lo <= x <= piece.hi:
                raise ValueError(f"{x} lies inside a density interval [{piece.lo}, {piece.hi}]")
            a, b = float(piece.lo), float(piece.hi)
            coeffs = [float(c) for c in piece.poly.coeffs]
            q, px = _poly_div_at(coeffs, xf)
            log_term = math.log(abs(b - xf)) - math.log(abs(a - xf))
            out += xf * _poly_int(coeffs, a, b).real
            out += (1.0 + xf * xf) * (_poly_int(q, a, b).real + px.real * log_term)
        return out

    def derivative_real(self, x: NumberLike) -> Fraction:
        """Exact derivative on the real axis; purely atomic data only."""
        if self.omega.pieces:
            raise ValueError("exact derivative needs a purely atomic measure")
        x = as_fraction(x)
        val = self.b
        for t, w in self.omega.atoms:
            if t == x:
                raise ValueError(f"{x} is a pole")
            val += w * (1 + t * t) / (t - x) ** 2
        return val

    def value_at_infinity(self) -> Fraction:
        """Limit along the real axis when b = 0 (finite only then)."""
        if self.b != 0:
            raise ValueError("function grows linearly; no finite limit at infinity")
        return self.a - sum((w * t for t, w in self.omega.atoms), Fraction(0))

    def to_json(self) -> dict:
        return {
            "a": number_to_json(self.a),
            "b": number_to_json(self.b),
            "omega": self.omega.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "HerglotzRep":
        return cls.of(
            number_from_json(obj["a"]),
            number_from_json(obj["b"]),
            ScalarMeasure.from_json(obj["omega"]),
        )


@dataclass(frozen=True)
class HerglotzFunction:
    """A Herglotz function known only through point evaluation."""

    fn: Callable[[complex], complex]
    label: str = ""

    def eval(self, z: complex) -> complex:
        return self.fn(z)

    __call__ = eval


WeylLike = Union[HerglotzRep, HerglotzFunction, Callable[[complex], complex]]


def as_callable(h: WeylLike) -> Callable[[complex], complex]:
    if isinstance(h, (HerglotzRep, HerglotzFunction)):
        return h.eval
    if isinstance(h, ScalarMeasure):
        return HerglotzRep.from_measure(h).eval
    if callable(h):
        return h
    raise TypeError(f"cannot evaluate {type(h).__name__} as a Herglotz function")


def classical_parts(h: HerglotzRep) -> Tuple[Fraction, Fraction, ScalarMeasure]:
    """The same function with the measure in the 1/(x - z) normalization.

    Returns (a, b, omega_tilde) where omega_tilde = (1 + x^2) * omega.
    """
    return h.a, h.b, h.omega.times_polynomial(ONE_PLUS_X2)


# ---------------------------------------------------------------------------
# Limits onto the real axis
# ---------------------------------------------------------------------------


def geometric_schedule(eps0: float = 0.1, steps: int = 40, ratio: float = 0.5):
    """The default ladder of imaginary offsets: eps0 * ratio**k."""
    if not (eps0 > 0 and 0 < ratio < 1 and steps >= 2):
        raise ValueError("schedule needs eps0 > 0, 0 < ratio < 1, steps >= 2")
    return tuple(eps0 * ratio**k for k in range(steps))


DEFAULT_SCHEDULE = geometric_schedule()


def richardson(eps: Sequence[float], vals: Sequence[complex], tail: int = 8):
    """Accelerated limit of vals as eps -> 0 on a geometric schedule.

    Successively eliminates integer powers of eps.  Returns the accelerated
    value together with a crude error estimate (the change produced by the
    last elimination stage).
    """
    k = min(tail, len(vals))
    if k == 0:
        raise ValueError("no samples")
    if k == 1:
        return vals[-1], abs(vals[-1])
    e = [float(v) for v in eps[-k:]]
    v = list(vals[-k:])
    r = e[0] / e[1]
    geometric = all(abs(e[i] / e[i + 1] - r) <= 1e-9 * r for i in range(len(e) - 1))
    if not geometric:
        # Fall back to a polynomial fit in eps, scaled for conditioning.
        s = max(e)
        A = np.array([[(ei / s) ** j for j in range(k)] for ei in e])
        coef = np.linalg.solve(A, np.array(v, dtype=complex))
        return complex(coef[0]), float(abs(v[-1] - coef[0]))
    prev_diag = v[-1]
    for m in range(1, k):
        rm = r**m
        v = [(rm * v[i + 1] - v[i]) / (rm - 1.0) for i in range(len(v) - 1)]
        diag = v[-1]
        err = abs(diag - prev_diag)
        prev_diag = diag
    return prev_diag, err


@dataclass(frozen=True)
class BoundaryLimit:
    """Outcome of a limit x + i*eps -> x.

    ``value`` is None when the samples diverge (``infinite`` is then set).
    ``tol`` records the achieved error estimate of the extrapolation.
    """

    value: complex | float | None
    infinite: bool
    eps_trace: Tuple[Tuple[float, complex], ...]
    converged: bool
    tol: float | None

    def __post_init__(self):
        es = [e for e, _ in self.eps_trace]
        if any(es[i] <= es[i + 1] for i in range(len(es) - 1)):
            raise ValueError("eps_trace must be strictly decreasing")


def _limit_of(samples_f, x: float, schedule, abs_tol=1e-8, rel_tol=1e-6,
              imag_only=False) -> BoundaryLimit:
    schedule = tuple(schedule or DEFAULT_SCHEDULE)
    trace = []
    vals = []
    for eps in schedule:
        v = samples_f(x + 1j * eps)
        v = v.imag if imag_only else v
        trace.append((eps, v))
        vals.append(v)
        if abs(v) > DIVERGENCE_THRESHOLD:
            return BoundaryLimit(None, True, tuple(trace), True, None)
    limit, err = richardson(schedule, vals)
    if imag_only:
        limit = limit.real if isinstance(limit, complex) else limit
    ok = err <= max(abs_tol, rel_tol * abs(limit))
    return BoundaryLimit(limit, False, tuple(trace), ok, err)


def boundary_imag_limit(h: WeylLike, x: float, schedule=None) -> BoundaryLimit:
    """Limit of the imaginary part at x; diverges exactly at point masses."""
    return _limit_of(as_callable(h), float(x), schedule, imag_only=True)


def boundary_limit(h: WeylLike, x: float, schedule=None) -> BoundaryLimit:
    """Full complex boundary value at x (when it exists)."""
    return _limit_of(as_callable(h), float(x), schedule, imag_only=False)


def ratio_limit(h1: WeylLike, h2: WeylLike, x: float, schedule=None) -> BoundaryLimit:
    """Limit of Im h1 / Im h2 at x; a derivative of one measure by another."""
    f1, f2 = as_callable(h1), as_callable(h2)
    schedule = tuple(schedule or DEFAULT_SCHEDULE)
    trace = []
    vals = []
    x = float(x)
    for eps in schedule:
        z = x + 1j * eps
        denom = f2(z).imag
        if denom == 0.0:
            raise ConvergenceError(f"Im of the reference function vanished at eps={eps}")
        v = f1(z).imag / denom
        trace.append((eps, v))
        vals.append(v)
        if abs(v) > DIVERGENCE_THRESHOLD:
            return BoundaryLimit(None, True, tuple(trace), True, None)
    limit, err = richardson(schedule, vals)
    limit = limit.real if isinstance(limit, complex) else limit
    ok = err <= max(1e-8, 1e-6 * abs(limit))
    return BoundaryLimit(limit, False, tuple(trace), ok, err)


def atom_weight(h: WeylLike, x0: NumberLike, schedule=None,
                force_limit: bool = False) -> Union[Fraction, float]:
    """Mass the representing measure puts on the single point x0.

    For a stored representation this is read off exactly.  For black-box
    functions (or with ``force_limit``) it is the accelerated limit of
    eps * Im h(x0 + i eps) / (1 + x0^2), clamped at zero.
    """
    if isinstance(h, HerglotzRep) and not force_limit:
        return h.omega.atom_mass_at(x0)
    f = as_callable(h)
    x = float(x0)
    schedule = tuple(schedule or DEFAULT_SCHEDULE)
    vals = [eps * f(x + 1j * eps).imag / (1.0 + x * x) for eps in schedule]
    limit, _err = richardson(schedule, vals)
    limit = limit.real if isinstance(limit, complex) else limit
    return max(0.0, float(limit))


# ---------------------------------------------------------------------------
# Stieltjes inversion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StieltjesResult:
    measure: ScalarMeasure
    warnings: Tuple[str, ...]


def _refine_atom_position(f, pos: float, halfwidth: float) -> float:
    """Sharpen an atom location by maximizing Im f(x + i eps) as eps shrinks,
    then polishing on the steep zero crossing of Re f(x + i eps).

    The polish matters: near a pole Re f flips sign over a width of order
    eps^2 * (background / residue), so a bracketed root there pins the
    position orders of magnitude tighter than the broad Im peak does.
    """
    from scipy.optimize import brentq, minimize_scalar

    eps = halfwidth
    for _ in range(4):
        res = minimize_scalar(
            lambda t: -f(t + 1j * eps).imag,
            bounds=(pos - 4 * eps, pos + 4 * eps),
            method="bounded",
            options={"xatol": eps * 1e-6},
        )
        pos = float(res.x)
        eps *= 0.1
    for eps in (1e-4, 1e-6, 1e-8):
        a, b = pos - 10 * eps, pos + 10 * eps
        fa = f(a + 1j * eps).real
        fb = f(b + 1j * eps).real
        if fa > 0 > fb:
            pos = float(brentq(lambda t: f(t + 1j * eps).real, a, b,
                               xtol=1e-15, rtol=8.9e-16))
    return pos


def stieltjes_invert(h: WeylLike, window, grid: int = 1000,
                     eps: float = 1e-6) -> StieltjesResult:
    """Recover an approximation of the representing measure on a window.

    When ``h`` carries its representation the answer is its measure
    restricted to the window, exactly.  Otherwise atoms are detected as
    spikes at the grid scale and refined, and the smooth part is sampled
    via Im h(x + i eps) and returned as a piecewise-linear density.
    """
    if not float(window[0]) < float(window[1]):
        raise ValueError("window must have positive length")
    if isinstance(h, HerglotzRep):
        clipped = h.omega.restrict((as_fraction(window[0]), as_fraction(window[1])))
        return StieltjesResult(clipped, ())
    lo, hi = float(window[0]), float(window[1])
    f = as_callable(h)
    warnings: list[str] = []
    cell = (hi - lo) / grid

    atoms: list[tuple] = []
    det_eps = cell
    xs = np.linspace(lo, hi, grid + 1)
    spikes = np.array([det_eps * f(x + 1j * det_eps).imag / (1 + x * x) for x in xs])
    floor = 1e-8 + 10.0 * float(np.median(spikes))
    i = 1
    while i < grid:
        if spikes[i] > floor and spikes[i] >= spikes[i - 1] and spikes[i] >= spikes[i + 1]:
            pos = _refine_atom_position(f, float(xs[i]), cell)
            # The ladder stops above the residual position error: below that
            # scale the probe sits next to the atom and the weight collapses.
            w = atom_weight(f, pos, schedule=geometric_schedule(1e-3, 15))
            if w > 0.1 * floor:
                atoms.append((pos, w))
            i += 2
        else:
            i += 1
    positions = sorted(float(p) for p, _ in atoms)
    if any(b - a < 2 * cell for a, b in zip(positions, positions[1:])):
        warnings.append("grid too coarse: atom spacing below two grid cells")

    def atom_tail(x: float) -> float:
        s = 0.0
        for p, w in atoms:
            pf, wf = float(p), float(w)
            s += wf * (1 + pf * pf) * eps / ((x - pf) ** 2 + eps * eps)
        return s

    xs = np.linspace(lo, hi, grid + 1)
    dens = []
    for x in xs:
        raw = f(x + 1j * eps).imag - atom_tail(float(x))
        dens.append(max(0.0, raw / (math.pi * (1 + x * x))))
    pieces = []
    tiny = 1e-12
    for i in range(grid):
        d0, d1 = dens[i], dens[i + 1]
        if d0 <= tiny and d1 <= tiny:
            continue
        slope = (d1 - d0) / cell
        x0 = float(xs[i])
        pieces.append(Piece(
            as_fraction(x0), as_fraction(float(xs[i + 1])),
            Poly([d0 - slope * x0, slope]),
        ))
    try:
        measure = ScalarMeasure.of(atoms=atoms, pieces=pieces)
    except ValueError:
        # Linear interpolation can dip a hair below zero between samples.
        fixed = []
        for p in pieces:
            m = p.poly.min_on(p.lo, p.hi)
            if m < 0:
                fixed.append(Piece(p.lo, p.hi, p.poly + Poly([as_fraction(-m)])))
            else:
                fixed.append(p)
        measure = ScalarMeasure.of(atoms=atoms, pieces=fixed)
        warnings.append("density clipped up to stay nonnegative")
    return StieltjesResult(measure, tuple(warnings))


# ---------------------------------------------------------------------------
# Level sets and zeros on the real axis (exact, purely atomic)
# ---------------------------------------------------------------------------

_BISECT_BITS = 64
_MAX_SHRINK = 200


def _bisect_exact(F, lo: Fraction, hi: Fraction) -> Fraction:
    """Root of the increasing function F on [lo, hi], F(lo) < 0 < F(hi)."""
    width_goal = None
    while True:
        mid = (lo + hi) / 2
        if width_goal is None:
            width_goal = max(abs(mid), Fraction(1)) / Fraction(2**_BISECT_BITS)
        v = F(mid)
        if v == 0:
            return mid
        if v < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < width_goal:
            break
    # Roots at simple rationals deserve to come back exact: try the lowest
    # denominator candidates inside the final bracket before giving up.
    mid = (lo + hi) / 2
    for bound in (10, 10**3, 10**6, 10**9, 10**12):
        cand = mid.limit_denominator(bound)
        if lo < cand < hi and F(cand) == 0:
            return cand
    return mid


def solve_level(h: HerglotzRep, level: NumberLike, window=None) -> list:
    """All real solutions of h(x) = level, using monotonicity between poles.

    The function increases strictly on every interval free of poles, so each
    such gap carries at most one solution, bracketed and bisected in exact
    rational arithmetic.  ``window`` (lo, hi) filters the output.
    """
    if not h.omega.is_atomic:
        raise ValueError("exact level solving needs a purely atomic measure")
    level = as_fraction(level)

    def F(x: Fraction) -> Fraction:
        return h.eval_real(x) - level

    ts = [t for t, _ in h.omega.atoms]
    roots: list[Fraction] = []
    if not ts:
        if h.b > 0:
            roots.append((level - h.a) / h.b)
        # constant functions have no isolated solutions worth reporting
    else:
        hinf = h.value_at_infinity() if h.b == 0 else None
        gaps: list[tuple] = [(None, ts[0])]
        gaps += [(ts[i], ts[i + 1]) for i in range(len(ts) - 1)]
        gaps.append((ts[-1], None))
        for L, R in gaps:
            if L is None and h.b == 0 and not (hinf < level):
                continue
            if R is None and h.b == 0 and not (hinf > level):
                continue
            # Left endpoint of the bracket: F must be negative there.
            if L is not None:
                d = (R - L) / 16 if R is not None else Fraction(1)
                for _ in range(_MAX_SHRINK):
                    lo = L + d
                    v = F(lo)
                    if v < 0:
                        break
                    if v == 0:
                        roots.append(lo)
                        lo = None
                        break
                    d /= 4
                else:
                    raise ConvergenceError("could not bracket below a pole")
                if lo is None:
                    continue
            else:
                step = Fraction(1)
                lo = R - step
                for _ in range(_MAX_SHRINK):
                    v = F(lo)
                    if v < 0:
                        break
                    if v == 0:
                        roots.append(lo)
                        lo = None
                        break
                    step *= 2
                    lo = R - step
                else:
                    raise ConvergenceError("no sign change toward -infinity")
                if lo is None:
                    continue
            # Right endpoint: F positive.
            if R is not None:
                d = (R - L) / 16 if L is not None else Fraction(1)
                for _ in range(_MAX_SHRINK):
                    hi = R - d
                    if hi <= lo:
                        d /= 4
                        continue
                    v = F(hi)
                    if v > 0:
                        break
                    if v == 0:
                        roots.append(hi)
                        hi = None
                        break
                    d /= 4
                else:
                    raise ConvergenceError("could not bracket above a pole")
                if hi is None:
                    continue
            else:
                step = Fraction(1)
                hi = L + step
                for _ in range(_MAX_SHRINK):
                    if hi > lo:
                        v = F(hi)
                        if v > 0:
                            break
                        if v == 0:
                            roots.append(hi)
                            hi = None
                            break
                    step *= 2
                    hi = L + step
                else:
                    raise ConvergenceError("no sign change toward +infinity")
                if hi is None:
                    continue
            roots.append(_bisect_exact(F, lo, hi))
    roots.sort()
    if window is not None:
        wlo, whi = as_fraction(window[0]), as_fraction(window[1])
        roots = [r for r in roots if wlo <= r <= whi]
    return roots


def real_zeros(h: HerglotzRep, window) -> list:
    """Zeros of the boundary values on a window, one per pole-free gap."""
    return solve_level(h, 0, window)


# ---------------------------------------------------------------------------
# Moebius transforms of the boundary condition
# ---------------------------------------------------------------------------


def _mobius_exact(h: HerglotzRep, c: Fraction, s: Fraction) -> HerglotzRep:
    """Transformed representation for purely atomic data, s != 0."""
    level = -c / s
    poles = solve_level(h, level)
    atoms = []
    for u in poles:
        hp = h.derivative_real(u)
        atoms.append((u, 1 / (s * s * hp * (1 + u * u))))
    w_tilde = sum(((1 + t * t) * w for t, w in h.omega.atoms), Fraction(0))
    if h.b == 0:
        hinf = h.value_at_infinity()
        if s * hinf + c == 0:
            if w_tilde == 0:
                raise PureRelationError(
                    "transform of the constant hits the excluded vertical relation"
                )
            b_new = (1 + hinf * hinf) / w_tilde
            s1 = sum(((1 + t * t) * w * t for t, w in h.omega.atoms), Fraction(0))
            a_new = c / s - (1 + hinf * hinf) * s1 / (w_tilde * w_tilde)
        else:
            b_new = Fraction(0)
            a_new = (c * hinf - s) / (s * hinf + c)
    else:
        b_new = Fraction(0)
        a_new = c / s
    a_new += sum((w * u for u, w in atoms), Fraction(0))
    out = HerglotzRep.of(a_new, b_new, ScalarMeasure.of(atoms=atoms))
    # The rebuilt representation must agree with the direct formula.
    z0 = 0.37 + 1.1j
    direct = (float(c) * h.eval(z0) - float(s)) / (float(s) * h.eval(z0) + float(c))
    err = abs(out.eval(z0) - direct)
    if err > 1e-8 * (1 + abs(direct)):
        raise InternalInvariantError(
            f"transformed representation mismatch: |delta| = {err:.3e}"
        )
    return out


def mobius(h: WeylLike, alpha: float) -> WeylLike:
    """The boundary-angle transform h -> (cos(a) h - sin(a))/(sin(a) h + cos(a)).

    Purely atomic representations come back as representations, with new
    poles and masses computed by the exact level-set machinery.  Anything
    else comes back as a callable.  A constant input whose transform would
    be the vertical relation raises PureRelationError.
    """
    c, s = cos_sin(float(alpha))
    if isinstance(h, HerglotzRep):
        if s == 0.0:
            return h  # (c h)/(c) with c = +-1
        cf, sf = as_fraction(c), as_fraction(s)
        if h.is_constant:
            denom = sf * h.a + cf
            if denom == 0:
                raise PureRelationError(
                    f"constant {h.a} maps to infinity under angle {alpha}"
                )
            return HerglotzRep.constant((cf * h.a - sf) / denom)
        if h.is_atomic:
            return _mobius_exact(h, cf, sf)
    f = as_callable(h)
    if s == 0.0:
        return HerglotzFunction(f, label="identity transform")

    def g(z: complex) -> complex:
        v = f(z)
        return (c * v - s) / (s * v + c)

    return HerglotzFunction(g, label=f"angle {alpha} transform")


# ---------------------------------------------------------------------------
# Rational form (for exact disjointness certificates)
# ---------------------------------------------------------------------------


def atomic_rational_parts(h: HerglotzRep) -> Tuple[Poly, Poly]:
    """Write a purely atomic function as P/Q with Q = prod (t_j - x).

    P and Q are coprime by construction (P(t_j) is a nonzero multiple of the
    j-th mass), which is what makes pole-disjointness certificates exact.
    """
    if not h.omega.is_atomic:
        raise ValueError("rational form needs a purely atomic measure")
    atoms = h.omega.atoms
    Q = Poly((1,))
    for t, _ in atoms:
        Q = Q * Poly((t, -1))
    lead = h.a - sum((w * t for t, w in atoms), Fraction(0))
    P = Poly((lead, h.b)) * Q
    for j, (t, w) in enumerate(atoms):
        Qj = Poly((1,))
        for k, (tk, _) in enumerate(atoms):
            if k != j:
                Qj = Qj * Poly((tk, -1))
        P = P + Qj.scaled(w * (1 + t * t))
    return P, Q


def poly_gcd_degree(p: Poly, q: Poly) -> int:
    """Degree of gcd(p, q) over the rationals (0 means coprime)."""
    a, b = p, q
    while not b.is_zero:
        # remainder of a by b
        ra = list(a.coeffs)
        bc = b.coeffs
        while len(ra) >= len(bc) and any(c != 0 for c in ra):
            if ra[-1] == 0:
                ra.pop()
                continue
            factor = ra[-1] / bc[-1]
            shift = len(ra) - len(bc)
            for i, cb in enumerate(bc):
                ra[shift + i] -= factor * cb
            ra.pop()
        a, b = b, Poly(ra)
    return max(a.degree, 0)
