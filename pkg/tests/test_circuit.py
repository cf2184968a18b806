import math

import pytest

from loqc_grover.circuit import Circuit, Detector, accepts, perturb_reflectivities, run_circuit
from loqc_grover.elements import Beamsplitter, Waveplate
from loqc_grover.errors import RegistryError, ValidationError


def hom(pol="H"):
    return Circuit(
        rails=("a", "b"),
        photons=(("a", pol), ("b", pol)),
        elements=(Beamsplitter("a", "b", math.sqrt(0.5), pol=pol),),
        detectors=(Detector("da", "a"), Detector("db", "b")),
    )


def test_hom_readings():
    result = run_circuit(hom())
    assert result.readings[(1, 1)] == pytest.approx(0, abs=1e-24)
    assert result.readings[(2, 0)] == pytest.approx(0.5)
    assert result.logical is None


def test_hom_bucket_detectors():
    result = run_circuit(hom(), bucket=True)
    assert set(result.readings) == {(1, 0), (0, 1)}


def test_validation():
    with pytest.raises(RegistryError):
        Circuit(rails=("a", "a"))
    with pytest.raises(RegistryError, match="zz"):
        Circuit(rails=("a",), elements=(Waveplate("zz", 0, 180),))
    with pytest.raises(ValidationError, match="overlaps"):
        Circuit(rails=("a",), detectors=(Detector("x", "a"), Detector("y", "a", "H")))
    with pytest.raises(ValidationError, match="separate H and V"):
        Circuit(rails=("a", "b"), detectors=(Detector("x", "a"),), coincidence=("a", "b"))


def test_coincidence_acceptance_rule():
    c = Circuit(
        rails=("a", "b"),
        photons=(("a", "H"), ("b", "V")),
        detectors=tuple(Detector(f"d{r}{p}", r, p) for r in "ab" for p in "HV"),
        coincidence=("a", "b"),
    )
    assert accepts(c, (1, 0, 0, 1)) and not accepts(c, (1, 1, 0, 0))
    result = run_circuit(c)
    assert result.logical["01"] == pytest.approx(1)


def test_pdc_source_state():
    c = Circuit(rails=("a", "b"), pdc_sources=(("a", "b"),))
    state = c.initial_state()
    assert state.amplitude((1, 0, 1, 0)) == pytest.approx(1 / math.sqrt(2))
    assert state.amplitude((0, 1, 0, 1)) == pytest.approx(1 / math.sqrt(2))
    assert c.photon_count() == 2


def test_perturbation_clips_to_physical_range():
    c = perturb_reflectivities(hom(), 0.5)
    assert c.elements[0].r == 1.0
    assert perturb_reflectivities(hom(), 0.0) is not None


def test_loss_models_agree_and_are_checked():
    a = run_circuit(hom(), eta_d=0.7)
    b = run_circuit(hom(), eta_d=0.7, loss_model="modes")
    for k in set(a.readings) | set(b.readings):
        assert a.readings[k] == pytest.approx(b.readings[k], abs=1e-12)
    with pytest.raises(ValueError):
        run_circuit(hom(), loss_model="magic")
    with pytest.raises(ValueError):
        run_circuit(hom(), eta_d=1.1)


def test_tally():
    counts = hom().tally()
    assert counts["beamsplitters"] == 1 and counts["photons"] == 2 and counts["detectors"] == 2
