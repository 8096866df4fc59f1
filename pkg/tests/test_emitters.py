import numpy as np
import pytest

from rydbeat import Emitter, EmitterSet, default_catalog, emitters_from_catalog
from rydbeat.errors import InvalidInputError, NotFoundError


@pytest.fixture(scope="module")
def catalog():
    return default_catalog()


def test_emitter_validation():
    with pytest.raises(InvalidInputError):
        Emitter(energy=0.0, lifetime=-1.0)
    with pytest.raises(InvalidInputError):
        Emitter(energy=0.0, lifetime=1.0, amplitude=-0.5)
    with pytest.raises(InvalidInputError):
        EmitterSet(emitters=(Emitter(0.0, 1.0),), cross_visibility=1.5)
    with pytest.raises(InvalidInputError):
        EmitterSet(emitters=(Emitter(0.0, 1.0),), pure_dephasing_rate=-0.1)


def test_catalog_builder_energies_relative_to_reference(catalog):
    es = emitters_from_catalog(catalog, ["4S"], reference="2P")
    expected = (catalog.get("4S").energy - catalog.get("2P").energy) * 1e3
    assert es.emitters[0].energy == pytest.approx(expected)
    assert es.emitters[0].lifetime == 5.1
    assert es.emitters[0].state.label == "4S"


def test_catalog_builder_uses_override_separation(catalog):
    es = emitters_from_catalog(catalog, ["4S", "4D2"])
    split = es.emitters[1].energy - es.emitters[0].energy
    assert split == pytest.approx(1.21)  # high-precision pair value
    plain = emitters_from_catalog(catalog, ["4S", "4D2"], use_split_overrides=False)
    split = plain.emitters[1].energy - plain.emitters[0].energy
    assert split == pytest.approx(1.13, abs=1e-9)  # bare energy difference


def test_catalog_builder_amplitudes_and_phases(catalog):
    es = emitters_from_catalog(catalog, ["4S", "4D2"], amplitudes=[1.0, 0.4],
                               phases=[0.0, 1.2], cross_visibility=0.5)
    assert es.emitters[1].amplitude == 0.4
    assert es.emitters[1].phase == 1.2
    assert es.cross_visibility == 0.5


def test_catalog_builder_validation(catalog):
    with pytest.raises(InvalidInputError):
        emitters_from_catalog(catalog, [])
    with pytest.raises(InvalidInputError):
        emitters_from_catalog(catalog, ["4S", "5S"], amplitudes=[1.0])
    with pytest.raises(NotFoundError):
        emitters_from_catalog(catalog, ["12S"])
