"""Spectral report tests.

Frozen oracles, all reproduced by hand or by an independent computation
before being pinned here:

* three atomic inputs {0,2}, {0,4}, {6} (unit weights): the only shared
  atom is 0 with two carriers, so one layer; the summed function has one
  simple zero strictly inside each pole-free gap (0,2), (2,4), (4,6);
  its value at -1 is exactly 37/105 > 0, so no zero enters from the left
  outer gap inside a window starting at -1.
* the four-measure showcase on (0, 8) with six atoms per unit interval:
  36 shared-atom eigenvalues in units (2,3) through (6,7) with layer
  counts 1, 2, 1, 1, 3 and 12 of them sitting in (4,5); 48 singleton
  atoms that vanish from the joined spectrum; a single density region
  (9/2, 8) carried by all four inputs.
* a star of two free edges joined through the matching conditions is a
  plain Dirichlet interval, so two edges of length pi/2 give k^2 and
  lengths 1 and 2 give (k pi / 3)^2.
"""

import json
import math
from fractions import Fraction

import pytest

from starweyl import (
    AcRegion,
    ConvergenceError,
    Edge,
    Eigenvalue,
    HerglotzFunction,
    HerglotzRep,
    InternalInvariantError,
    PastedSystem,
    ScalarMeasure,
    SingularItem,
    SpectralReport,
    aronszajn_donoghue_check,
    build_example_k74,
    classify_spectrum,
    fd_oracle,
    find_point_spectrum,
    verify_kac,
)

OVERLAP = "overlap"
KIRCHHOFF = "kirchhoff-zero"


def rep_of(atoms):
    return HerglotzRep.of(omega=ScalarMeasure.of(atoms=atoms))


# ---------------------------------------------------------------------------
# report containers
# ---------------------------------------------------------------------------


def test_eigenvalue_validation():
    Eigenvalue(Fraction(1), 2, OVERLAP)
    with pytest.raises(ValueError):
        Eigenvalue(1.0, 1, "guess")
    with pytest.raises(ValueError):
        Eigenvalue(1.0, 0, OVERLAP)
    with pytest.raises(ValueError):
        Eigenvalue(1.0, 2, KIRCHHOFF)


def test_report_json_round_trip():
    rep = SpectralReport(
        window=(Fraction(-1, 3), Fraction(7)),
        eigenvalues=(
            Eigenvalue(Fraction(1, 3), 2, OVERLAP),
            Eigenvalue(0.5917502724219053, 1, KIRCHHOFF),
        ),
        ac_regions=(AcRegion(Fraction(9, 2), Fraction(8), 4),),
        sac_items=(SingularItem(Fraction(1, 3), 2),),
        ss_items=(SingularItem(Fraction(5), 1),),
        vanished=(Fraction(1, 7),),
        notes=("left outer gap not scanned",),
    )
    blob = json.dumps(rep.to_json())
    back = SpectralReport.from_json(json.loads(blob))
    assert back == rep
    assert back.eigenvalues[0].x == Fraction(1, 3)


def test_report_csv_rows():
    rep = SpectralReport(
        window=(0, 1),
        eigenvalues=(Eigenvalue(Fraction(1, 2), 3, OVERLAP),),
    )
    assert list(rep.csv_rows()) == [(0.5, 3, OVERLAP)]


# ---------------------------------------------------------------------------
# point spectrum, exact route
# ---------------------------------------------------------------------------


@pytest.fixture()
def three_entry_system():
    return PastedSystem.of(
        [rep_of([(0, 1), (2, 1)]), rep_of([(0, 1), (4, 1)]), rep_of([(6, 1)])]
    )


def test_exact_point_spectrum_worked_example(three_entry_system):
    eigs = find_point_spectrum(three_entry_system, (-1, 7))
    assert len(eigs) == 4
    assert eigs[0].x == 0 and eigs[0].multiplicity == 1
    assert eigs[0].provenance == OVERLAP
    zeros = [e for e in eigs if e.provenance == KIRCHHOFF]
    gaps = [(0, 2), (2, 4), (4, 6)]
    assert all(lo < z.x < hi for z, (lo, hi) in zip(zeros, gaps))
    assert all(z.multiplicity == 1 for z in zeros)
    h = three_entry_system.sum_rep()
    for z in zeros:
        assert abs(float(h.eval_real(z.x))) < 1e-15
    # the left outer gap carries no zero above -1: the summed function is
    # already positive there on its way up to the pole
    assert h.eval_real(Fraction(-1)) == Fraction(37, 105)


def test_exact_point_spectrum_respects_window(three_entry_system):
    eigs = find_point_spectrum(three_entry_system, (Fraction(1, 2), 3))
    assert [e.provenance for e in eigs] == [KIRCHHOFF, KIRCHHOFF]
    assert all(Fraction(1, 2) < e.x < 3 for e in eigs)


def test_exact_overlap_layer_count_is_carriers_minus_one():
    sys_ = PastedSystem.of([rep_of([(1, 1)]), rep_of([(1, 2)]), rep_of([(1, 3)])])
    eigs = find_point_spectrum(sys_, (0, 2))
    shared = [e for e in eigs if e.provenance == OVERLAP]
    assert len(shared) == 1
    assert shared[0].x == 1 and shared[0].multiplicity == 2


def test_numeric_point_spectrum_equilateral_star():
    edges = [Edge.of(math.pi) for _ in range(3)]
    sys_ = PastedSystem.of(edges)
    eigs = find_point_spectrum(sys_, (0.1, 2.5))
    got = [(round(float(e.x), 6), e.multiplicity, e.provenance) for e in eigs]
    assert got == [
        (0.25, 1, KIRCHHOFF),
        (1.0, 2, OVERLAP),
        (2.25, 1, KIRCHHOFF),
    ]


def test_numeric_route_rejects_black_box_entries():
    wrapped = HerglotzFunction(lambda z: 1j)
    sys_ = PastedSystem.of([wrapped, rep_of([(0, 1)])])
    with pytest.raises(ValueError):
        find_point_spectrum(sys_, (-1, 1))


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def test_classify_spectrum_showcase_counts():
    mus = build_example_k74((0, 8))
    rep = classify_spectrum(mus, (0, 8))
    assert len(rep.eigenvalues) == 36
    assert len(rep.sac_items) == 36
    assert len(rep.vanished) == 48
    assert rep.ss_items == ()
    assert rep.notes == (
        "off-support simple spectrum not scanned: density pieces present",
    )
    by_unit = {}
    for e in rep.eigenvalues:
        unit = int(e.x)
        by_unit.setdefault(unit, []).append(e.multiplicity)
    assert {u: (len(v), set(v)) for u, v in sorted(by_unit.items())} == {
        2: (6, {1}),
        3: (6, {2}),
        4: (12, {1}),
        5: (6, {1}),
        6: (6, {3}),
    }


def test_classify_spectrum_showcase_positions_are_exact():
    mus = build_example_k74((0, 8))
    rep = classify_spectrum(mus, (0, 8))
    top = [e.x for e in rep.eigenvalues if 6 < e.x < 7]
    assert top == [
        Fraction(49, 8),
        Fraction(151, 24),
        Fraction(155, 24),
        Fraction(53, 8),
        Fraction(163, 24),
        Fraction(167, 24),
    ]
    assert rep.ac_regions == (AcRegion(Fraction(9, 2), Fraction(8), 4),)


def test_classify_vanished_atoms_are_single_carrier():
    mus = build_example_k74((0, 8))
    rep = classify_spectrum(mus, (0, 8))
    for x in rep.vanished:
        carriers = sum(1 for m in mus if m.atom_mass_at(x) > 0)
        assert carriers == 1


def test_classify_atomic_inputs_report_gap_zeros():
    m1 = ScalarMeasure.of(atoms=[(0, 1), (2, 1)])
    m2 = ScalarMeasure.of(atoms=[(0, 1), (3, 1)])
    rep = classify_spectrum([m1, m2], (-1, 4))
    assert [s.multiplicity for s in rep.sac_items] == [1]
    assert len(rep.ss_items) == 2  # one zero per interior gap
    assert rep.notes == ()
    kinds = [e.provenance for e in rep.eigenvalues]
    assert kinds.count(OVERLAP) == 1 and kinds.count(KIRCHHOFF) == 2


def test_classify_window_must_be_ordered():
    with pytest.raises(ValueError):
        classify_spectrum([ScalarMeasure.of(atoms=[(0, 1)])], (2, 2))


def test_classify_merges_adjacent_regions_with_equal_count():
    left = ScalarMeasure.of(pieces=[((0, 1), [1])])
    right = ScalarMeasure.of(pieces=[((1, 2), [1])])
    both = left + right
    rep = classify_spectrum([both], (0, 2))
    assert rep.ac_regions == (AcRegion(Fraction(0), Fraction(2), 1),)


# ---------------------------------------------------------------------------
# finite-difference oracle
# ---------------------------------------------------------------------------


def test_fd_oracle_two_edges_form_an_interval():
    r = fd_oracle([Edge.of(math.pi / 2), Edge.of(math.pi / 2)], (0.5, 10), grid=2000)
    assert [m for _, m in r.items] == [1, 1, 1]
    for got, want in zip((x for x, _ in r.items), (1.0, 4.0, 9.0)):
        assert abs(got - want) <= 1e-4 * want
    assert not r.coarse


def test_fd_oracle_distinct_lengths():
    r = fd_oracle([Edge.of(1), Edge.of(2)], (0.5, 12), grid=2000)
    want = [(k * math.pi / 3) ** 2 for k in (1, 2, 3)]
    assert [m for _, m in r.items] == [1, 1, 1]
    for got, ref in zip((x for x, _ in r.items), want):
        assert abs(got - ref) <= 1e-5 * ref


def test_fd_oracle_detects_double_layers():
    r = fd_oracle([Edge.of(math.pi)] * 3, (0.1, 5), grid=600)
    assert [(round(x, 2), m) for x, m in r.items] == [
        (0.25, 1),
        (1.0, 2),
        (2.25, 1),
        (4.0, 2),
    ]


def test_fd_oracle_coarse_flag_tracks_resolution():
    edges = [Edge.of(math.pi), Edge.of(math.pi * (1 + 1e-4)), Edge.of(math.pi)]
    rough = fd_oracle(edges, (0.5, 1.5), grid=100)
    assert rough.coarse
    fine = fd_oracle(edges, (0.5, 1.5), grid=3000)
    assert not fine.coarse
    assert [m for _, m in fine.items] == [1, 1]


def test_fd_oracle_input_validation():
    with pytest.raises(ValueError):
        fd_oracle([Edge.of(1)], (0, 1), grid=50)
    with pytest.raises(ValueError):
        fd_oracle([Edge.of("inf")], (0, 1))


# ---------------------------------------------------------------------------
# cross checks
# ---------------------------------------------------------------------------


def test_verify_kac_two_entry_overlap():
    sys_ = PastedSystem.of([rep_of([(0, 1), (2, 1)]), rep_of([(0, 1), (3, 1)])])
    ok, report = verify_kac(sys_, (-5, 5))
    assert ok
    assert report == {"checked": 4, "violations": []}


def test_verify_kac_needs_two_entries():
    sys_ = PastedSystem.of([rep_of([(0, 1)]), rep_of([(1, 1)]), rep_of([(2, 1)])])
    with pytest.raises(ValueError):
        verify_kac(sys_, (-1, 3))


def test_aronszajn_donoghue_generic_angles_are_disjoint():
    m = rep_of([(0, 1), (1, 1)])
    assert aronszajn_donoghue_check(m, 0.3, 0.9)


def test_aronszajn_donoghue_antipodal_angles_share_all_poles():
    m = rep_of([(0, 1), (1, 1)])
    assert not aronszajn_donoghue_check(m, math.pi / 4, 5 * math.pi / 4)


def test_aronszajn_donoghue_input_validation():
    m = rep_of([(0, 1)])
    with pytest.raises(ValueError):
        aronszajn_donoghue_check(m, 0.5, 0.5)
    with_density = HerglotzRep.of(
        omega=ScalarMeasure.of(atoms=[(0, 1)], pieces=[((2, 3), [1])])
    )
    with pytest.raises(ValueError):
        aronszajn_donoghue_check(with_density, 0.3, 0.9)


# ---------------------------------------------------------------------------
# the showcase builder itself
# ---------------------------------------------------------------------------


def test_showcase_builder_validates_window():
    with pytest.raises(ValueError):
        build_example_k74((1, 8))
    with pytest.raises(ValueError):
        build_example_k74((0, 7))
    with pytest.raises(ValueError):
        build_example_k74((0, 8), atoms_per_unit=0)


def test_showcase_builder_atom_counts_and_masses():
    mus = build_example_k74((0, 8))
    assert [len(m.atoms) for m in mus] == [24, 30, 42, 42]
    for m in mus:
        assert all(w == Fraction(1, 6) for _, w in m.atoms)
        assert len(m.pieces) == 1
        piece = m.pieces[0]
        assert (piece.lo, piece.hi) == (Fraction(9, 2), Fraction(8))
        assert piece.poly.min_on(piece.lo, piece.hi) > 0
