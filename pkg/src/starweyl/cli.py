"""Batch front end: problem files in, reports and plot tables out.

A problem file is a single JSON object:

    {
      "task": "eigs" | "weyl" | "classify" | "verify" | "oracle",
      "system": {"edges": [...], "interface": {"type": "standard"}},
      "window": [a, b],
      "eps0": 0.1,         # optional eps-ladder start
      "eps_steps": 40,     # optional ladder length
      "grid": 1000,        # optional sampling/oracle resolution
      "exact": false       # force the rational route
    }

Exit codes: 0 success, 2 schema violation, 3 non-convergence (partial
artifacts are kept), 4 breached internal invariant.  Runs are
deterministic: the same problem file and seed produce byte-identical
artifacts.
"""

from __future__ import annotations

import argparse
import json
import math
import sys as _sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np

from .errors import ConvergenceError, InternalInvariantError, SchemaError
from .herglotz import HerglotzRep, geometric_schedule
from .measure import ScalarMeasure, as_fraction
from .pasting import (
    PastedSystem,
    exact_rank,
    interface_matrix,
    matrix_weyl,
    md_matrix,
    rank_md,
    trace_weyl,
)
from .schrodinger import Edge
from .spectra import (
    SpectralReport,
    aronszajn_donoghue_check,
    build_example_k74,
    classify_spectrum,
    fd_oracle,
    find_point_spectrum,
    verify_kac,
)

TASKS = ("eigs", "weyl", "classify", "verify", "oracle")
BUILTINS = ("k74", "equilateral3", "kac2")


# ---------------------------------------------------------------------------
# Problem files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemFile:
    task: str
    system: Union[PastedSystem, None]
    window: Tuple[Fraction, Fraction]
    eps0: Union[float, None] = None
    eps_steps: Union[int, None] = None
    grid: Union[int, None] = None
    exact: bool = False

    @classmethod
    def parse(cls, obj) -> "ProblemFile":
        if not isinstance(obj, dict):
            raise SchemaError("problem file must be a JSON object")
        allowed = {"task", "system", "window", "eps0", "eps_steps", "grid", "exact"}
        extra = set(obj) - allowed
        if extra:
            raise SchemaError(f"unknown problem keys: {sorted(extra)}")
        task = obj.get("task")
        if task not in TASKS:
            raise SchemaError(f"task must be one of {TASKS}, got {task!r}")
        window = obj.get("window")
        if (
            not isinstance(window, (list, tuple))
            or len(window) != 2
            or not all(isinstance(v, (int, float, str)) for v in window)
        ):
            raise SchemaError("window must be a [lo, hi] pair of numbers")
        try:
            lo, hi = as_fraction(window[0]), as_fraction(window[1])
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad window value: {exc}") from exc
        if not lo < hi:
            raise SchemaError("window needs lo < hi")
        system = None
        if "system" in obj and obj["system"] is not None:
            try:
                system = PastedSystem.from_json(obj["system"])
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"bad system spec: {exc}") from exc
        if system is None and task != "verify":
            raise SchemaError(f"task {task!r} needs a system")
        eps0 = obj.get("eps0")
        if eps0 is not None and not (isinstance(eps0, (int, float)) and eps0 > 0):
            raise SchemaError("eps0 must be a positive number")
        eps_steps = obj.get("eps_steps")
        if eps_steps is not None and not (isinstance(eps_steps, int) and eps_steps >= 2):
            raise SchemaError("eps_steps must be an integer >= 2")
        grid = obj.get("grid")
        if grid is not None and not (isinstance(grid, int) and grid >= 1):
            raise SchemaError("grid must be a positive integer")
        exact = obj.get("exact", False)
        if not isinstance(exact, bool):
            raise SchemaError("exact must be a boolean")
        return cls(task, system, (lo, hi),
                   None if eps0 is None else float(eps0), eps_steps, grid, exact)

    def schedule(self):
        if self.eps0 is None and self.eps_steps is None:
            return None
        return geometric_schedule(self.eps0 or 0.1, self.eps_steps or 40)


def builtin_problem(name: str) -> dict:
    """Problem dictionaries for the named bundled examples."""
    if name == "equilateral3":
        edge = Edge.of(math.pi, "free", 0.0).to_json()
        return {
            "task": "eigs",
            "system": {"edges": [edge, edge, edge], "interface": {"type": "standard"}},
            "window": ["0.1", 10],
        }
    if name == "kac2":
        m1 = ScalarMeasure.point(-1, 1).to_json()
        m2 = ScalarMeasure.point(1, 1).to_json()
        return {
            "task": "eigs",
            "system": {"edges": [m1, m2], "interface": {"type": "standard"}},
            "window": ["-0.9", "0.9"],
            "exact": True,
        }
    if name == "k74":
        mus = build_example_k74((0, 8))
        return {
            "task": "classify",
            "system": {
                "edges": [m.to_json() for m in mus],
                "interface": {"type": "standard"},
            },
            "window": [0, 8],
        }
    raise SchemaError(f"unknown builtin {name!r}; have {BUILTINS}")


# ---------------------------------------------------------------------------
# Deterministic serialization
# ---------------------------------------------------------------------------


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def emit_plot_data(system: PastedSystem, report: SpectralReport,
                   grid: int = 200, eps: float = 1e-3, jobs: int = 1) -> list:
    """Rows (x, Im tr M(x + i eps), marker) over the report window.

    Grid samples carry an empty marker; one extra row per eigenvalue holds
    its layer count.  Rows are sorted by x, ready to plot.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    lo, hi = float(report.window[0]), float(report.window[1])
    xs = [float(v) for v in np.linspace(lo, hi, grid)] if grid > 0 else []
    marks = {float(e.x): e.multiplicity for e in report.eigenvalues}
    xs_all = sorted(set(xs) | set(marks))

    def val(x: float) -> float:
        return float(trace_weyl(system, x + 1j * eps).imag)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            vals = list(pool.map(val, xs_all))
    else:
        vals = [val(x) for x in xs_all]
    rows = []
    for x, v in zip(xs_all, vals):
        rows.append((x, v, marks.get(x, "")))
    return rows


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------


def random_atomic_rep(rng: np.random.Generator, max_atoms: int = 6,
                      allow_slope: bool = True) -> HerglotzRep:
    """Small random purely atomic representation with rational data."""
    n = int(rng.integers(1, max_atoms + 1))
    positions = set()
    while len(positions) < n:
        positions.add(Fraction(int(rng.integers(-40, 41)), 8))
    atoms = [(p, Fraction(int(rng.integers(1, 33)), 16)) for p in sorted(positions)]
    a = Fraction(int(rng.integers(-8, 9)), 4)
    b = Fraction(int(rng.integers(0, 3)), 2) if allow_slope else Fraction(0)
    return HerglotzRep.of(a, b, ScalarMeasure.of(atoms=atoms))


def random_upper_z(rng: np.random.Generator) -> complex:
    return complex(float(rng.uniform(-5, 5)), float(rng.uniform(0.1, 4.0)))


def suite_rank_lemma(rng: np.random.Generator, trials: int = 1000) -> dict:
    """rank formula vs plain elimination on random integer data."""
    failures = 0
    for _ in range(trials):
        n = int(rng.integers(2, 7))
        b = [Fraction(int(v)) for v in rng.integers(1, 20, size=n)]
        if rng.integers(0, 2):
            d = sum(b)
            expect = n - 1
        else:
            d = Fraction(int(rng.integers(1, 200)))
            expect = n - 1 if d == sum(b) else n
        got = rank_md(b, d)
        if got != expect or got != exact_rank(md_matrix(b, d)):
            failures += 1
    return {"trials": trials, "failures": failures, "passed": failures == 0}


def suite_herglotz_psd(rng: np.random.Generator, trials: int = 1000) -> dict:
    """Im M positive semidefinite, symmetry, and the defining identity."""
    worst_eig = 0.0
    worst_identity = 0.0
    worst_symmetry = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 6))
        sys_ = PastedSystem.of([random_atomic_rep(rng) for _ in range(n)])
        z = random_upper_z(rng)
        M = matrix_weyl(sys_, z)
        im = (M - M.conj().T) / 2j
        worst_eig = min(worst_eig, float(np.linalg.eigvalsh(im).min()))
        w = interface_matrix(n)
        w11, w12 = w[:n, :n], w[:n, n:]
        w21, w22 = w[n:, :n], w[n:, n:]
        mt = np.diag(sys_.entry_values(z))
        resid = M @ (w11 + w12 @ mt) - (w21 + w22 @ mt)
        worst_identity = max(worst_identity, float(np.linalg.norm(resid)))
        sym = np.linalg.norm(matrix_weyl(sys_, z.conjugate()) - M.conj().T)
        worst_symmetry = max(worst_symmetry, float(sym))
    passed = worst_eig >= -1e-12 and worst_identity <= 1e-12 and worst_symmetry <= 1e-12
    return {
        "trials": trials,
        "min_imag_eigenvalue": worst_eig,
        "max_identity_residual": worst_identity,
        "max_symmetry_residual": worst_symmetry,
        "passed": passed,
    }


def suite_kac(rng: np.random.Generator, trials: int = 100) -> dict:
    """Every point-spectrum layer count of a two-entry system equals 1."""
    failures = 0
    checked = 0
    for _ in range(trials):
        # Draw atoms off a shared coarse lattice so overlaps actually happen.
        def measure():
            k = int(rng.integers(1, 6))
            pos = set()
            while len(pos) < k:
                pos.add(Fraction(int(rng.integers(-6, 7)), 2))
            return ScalarMeasure.of(
                atoms=[(p, Fraction(int(rng.integers(1, 9)), 4)) for p in pos]
            )

        sys_ = PastedSystem.of([measure(), measure()])
        ok, rep = verify_kac(sys_, (-4, 4))
        checked += rep["checked"]
        if not ok:
            failures += 1
    return {"trials": trials, "points_checked": checked,
            "failures": failures, "passed": failures == 0}


def suite_aronszajn_donoghue(rng: np.random.Generator, trials: int = 100) -> dict:
    """Pole sets of two differently anchored transforms never meet."""
    failures = 0
    for _ in range(trials):
        m = random_atomic_rep(rng, max_atoms=5, allow_slope=False)
        a1 = float(rng.uniform(0, math.pi))
        a2 = float(rng.uniform(0, math.pi))
        while a2 == a1:
            a2 = float(rng.uniform(0, math.pi))
        if not aronszajn_donoghue_check(m, a1, a2):
            failures += 1
    return {"trials": trials, "failures": failures, "passed": failures == 0}


def run_verify_suites(seed: int = 0, scale: float = 1.0) -> dict:
    """All four invariant suites with one seeded RNG; scale shrinks trial
    counts for quick runs (the defaults match the acceptance gates)."""
    rng = np.random.default_rng(seed)
    suites = {
        "rank-lemma": suite_rank_lemma(rng, max(1, int(1000 * scale))),
        "herglotz-psd": suite_herglotz_psd(rng, max(1, int(1000 * scale))),
        "kac": suite_kac(rng, max(1, int(100 * scale))),
        "aronszajn-donoghue": suite_aronszajn_donoghue(rng, max(1, int(100 * scale))),
    }
    suites["passed"] = all(v["passed"] for k, v in suites.items() if isinstance(v, dict))
    return suites


# ---------------------------------------------------------------------------
# Task runners
# ---------------------------------------------------------------------------


def _rep_measures(system: PastedSystem):
    measures = []
    for e in system.entries:
        if isinstance(e, HerglotzRep):
            measures.append(e.omega)
        else:
            raise SchemaError("classification needs measure-backed entries")
    return measures


def run(problem: ProblemFile, out_dir, jobs: int = 1, seed: int = 0) -> int:
    """Execute one task, write artifacts into out_dir, return the exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if problem.exact and problem.system is not None and not problem.system.is_exact_atomic:
            raise SchemaError("exact route requested but the system is not purely atomic")

        if problem.task == "eigs":
            eigs = find_point_spectrum(problem.system, problem.window,
                                       eps_schedule=problem.schedule())
            report = SpectralReport(window=problem.window, eigenvalues=tuple(eigs))
            _write_json(out / "report.json", report.to_json())
            _write_csv(out / "report.csv", ("x", "multiplicity", "provenance"),
                       report.csv_rows())
            rows = emit_plot_data(problem.system, report,
                                  grid=problem.grid or 200, jobs=jobs)
            _write_csv(out / "plot.csv", ("x", "im_trace", "marker"), rows)
        elif problem.task == "classify":
            measures = _rep_measures(problem.system)
            report = classify_spectrum(measures, problem.window, sys=problem.system)
            _write_json(out / "report.json", report.to_json())
            _write_csv(out / "report.csv", ("x", "multiplicity", "provenance"),
                       report.csv_rows())
        elif problem.task == "weyl":
            lo, hi = (float(v) for v in problem.window)
            grid = problem.grid or 50
            eps = problem.eps0 or 1e-3
            n = problem.system.n
            xs = np.linspace(lo, hi, grid)

            def sample(x: float):
                M = matrix_weyl(problem.system, complex(x, eps))
                row = [x, eps]
                for i in range(n):
                    for j in range(n):
                        row.extend((float(M[i, j].real), float(M[i, j].imag)))
                return tuple(row)

            if jobs > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    rows = list(pool.map(sample, (float(x) for x in xs)))
            else:
                rows = [sample(float(x)) for x in xs]
            header = ["x", "eps"]
            for i in range(n):
                for j in range(n):
                    header.extend((f"m{i}{j}_re", f"m{i}{j}_im"))
            _write_csv(out / "weyl.csv", header, rows)
        elif problem.task == "oracle":
            edges = []
            for e in problem.system.entries:
                if not isinstance(e, Edge):
                    raise SchemaError("the discretization oracle needs edge entries")
                edges.append(e)
            res = fd_oracle(edges, problem.window, grid=problem.grid or 4000)
            _write_json(out / "oracle.json", {
                "items": [[x, k] for x, k in res.items],
                "coarse": res.coarse,
                "h_max": res.h_max,
            })
            _write_csv(out / "oracle.csv", ("x", "multiplicity"), res.items)
        elif problem.task == "verify":
            suites = run_verify_suites(seed=seed)
            _write_json(out / "verify.json", suites)
            if not suites["passed"]:
                return 4
        else:  # unreachable; parse() has validated
            raise SchemaError(f"unknown task {problem.task!r}")
    except SchemaError:
        raise
    except ConvergenceError as exc:
        _write_json(out / "error.json", {"error": "non-convergence", "detail": str(exc)})
        return 3
    except InternalInvariantError as exc:
        _write_json(out / "error.json", {"error": "invariant-breach", "detail": str(exc)})
        return 4
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _load_problem(source: str, overrides: dict) -> ProblemFile:
    if source in BUILTINS:
        obj = builtin_problem(source)
    else:
        path = Path(source)
        if not path.exists():
            raise SchemaError(f"no such problem file or builtin: {source}")
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"problem file is not valid JSON: {exc}") from exc
    obj.update({k: v for k, v in overrides.items() if v is not None})
    return ProblemFile.parse(obj)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="starweyl",
        description="Spectra and local multiplicity of pasted interface problems.",
    )
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("problem", help=f"problem JSON path or one of {BUILTINS}")
    parser.add_argument("--window", nargs=2, metavar=("LO", "HI"))
    parser.add_argument("--eps0", type=float)
    parser.add_argument("--eps-steps", type=int, dest="eps_steps")
    parser.add_argument("--grid", type=int)
    parser.add_argument("--exact", action="store_true", default=None)
    parser.add_argument("--out", default="out")
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    overrides = {
        "task": args.task,
        "window": list(args.window) if args.window else None,
        "eps0": args.eps0,
        "eps_steps": args.eps_steps,
        "grid": args.grid,
        "exact": args.exact,
    }
    try:
        problem = _load_problem(args.problem, overrides)
        code = run(problem, args.out, jobs=args.jobs, seed=args.seed)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=_sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"did not converge: {exc}", file=_sys.stderr)
        return 3
    except InternalInvariantError as exc:
        print(f"internal invariant breached: {exc}", file=_sys.stderr)
        return 4
    return code


if __name__ == "__main__":
    raise SystemExit(main())
