import pytest

from loqc_grover.elements import Waveplate
from loqc_grover.gates import P_SCALABLE
from loqc_grover.grover import (
    BUDGET,
    GroverVariant,
    build_optical_grover,
    cross_check,
    run_grover,
    tv_distance,
)
from loqc_grover.circuit import run_circuit
from loqc_grover.qubit_reference import MARKED_ITEMS

EXPECTED_ACCEPTANCE = {
    "bell": 1 / 9,
    "full": P_SCALABLE / 9,
    "two_scalable": P_SCALABLE**2,
}


@pytest.mark.parametrize("variant", sorted(EXPECTED_ACCEPTANCE))
@pytest.mark.parametrize("marked", MARKED_ITEMS)
def test_variants_find_the_item(variant, marked):
    rep = run_grover(variant, marked)
    assert rep.overall_success_probability == pytest.approx(EXPECTED_ACCEPTANCE[variant], abs=1e-12)
    assert rep.conditional_distribution[marked] == pytest.approx(1, abs=1e-10)
    assert rep.answer == marked


@pytest.mark.parametrize("variant", sorted(EXPECTED_ACCEPTANCE))
def test_cross_check(variant):
    assert cross_check(variant, "01")


@pytest.mark.parametrize("variant", sorted(EXPECTED_ACCEPTANCE))
def test_photon_and_detector_budget(variant):
    counts = run_grover(variant, "00").counts
    assert (counts["photons"], counts["detectors"]) == BUDGET[GroverVariant(variant)]


def test_abstract_variant():
    rep = run_grover("abstract", "11")
    assert rep.overall_success_probability == 1 and rep.answer == "11"
    with pytest.raises(ValueError):
        build_optical_grover("abstract", "11")


def test_variant_parsing():
    assert GroverVariant.parse("Two-Scalable") is GroverVariant.TWO_SCALABLE
    with pytest.raises(ValueError, match="choose from"):
        GroverVariant.parse("quantum")
    with pytest.raises(ValueError):
        build_optical_grover("full", "2")


@pytest.mark.parametrize("variant", ["bell", "full"])
def test_merging_waveplates_changes_nothing(variant):
    merged = build_optical_grover(variant, "10")
    literal = build_optical_grover(variant, "10", merge=False)
    count = lambda c: sum(isinstance(e, Waveplate) for e in c.elements)
    assert count(merged) < count(literal)
    a, b = run_circuit(merged), run_circuit(literal)
    assert a.acceptance_probability == pytest.approx(b.acceptance_probability, abs=1e-15)
    assert tv_distance(a.logical, b.logical) < 1e-12


def test_reflectivity_error_degrades_answer():
    rep = run_grover("full", "10", delta_r=0.02)
    assert 0.9 < rep.conditional_distribution["10"] < 1.0


def test_bell_and_full_distributions_agree():
    for marked in MARKED_ITEMS:
        bell = run_grover("bell", marked).conditional_distribution
        full = run_grover("full", marked).conditional_distribution
        assert tv_distance(bell, full) < 1e-10


def test_tally_warnings_are_soft():
    rep = run_grover("bell", "00")
    assert any(w.startswith("pbs") for w in rep.warnings)
    assert rep.to_dict()["warnings"] == rep.warnings
