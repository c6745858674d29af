import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from symcool import units
from symcool.species import (
    Species, SpeciesError, SpeciesFileError, UnknownSpeciesError, apply_override, dump_species,
    load_species_file, make_pair, parse_species,
)

ENERGY = ["hartree", "eV", "meV", "invcm"]
LENGTH = ["bohr", "m", "um", "nm", "angstrom"]
TIME = ["aut", "s", "ms", "us", "ns"]
MASS = ["me", "amu"]


def test_hartree_in_ev():
    assert units.convert(27.211386, "eV", "hartree") == pytest.approx(1.0, rel=1e-15)


def test_bohr_in_metres():
    assert units.convert(5.29177e-11, "m", "bohr") == pytest.approx(1.0, rel=1e-15)


def test_amu_in_electron_masses():
    assert units.convert(1.0, "amu", "me") == pytest.approx(1822.888, rel=1e-15)


def test_au_time():
    assert units.convert(1.0, "aut", "s") == pytest.approx(2.4188843e-17, rel=1e-15)


def test_helpers_agree_with_convert():
    assert units.ev(2.0) == pytest.approx(units.convert(2.0, "eV", "hartree"), rel=1e-15)
    assert units.um(5.29) == pytest.approx(units.convert(5.29, "um", "bohr"), rel=1e-15)
    assert units.to_ms(1e12) == pytest.approx(units.convert(1e12, "aut", "ms"), rel=1e-15)


def test_angular_frequency():
    # tau = pi/omega is half a period: 0.5 us at 1 MHz
    assert units.convert(math.pi / units.angular_mhz(1.0), "aut", "us") == pytest.approx(0.5, rel=1e-12)


@pytest.mark.parametrize("family", [ENERGY, LENGTH, TIME, MASS])
@given(x=st.floats(1e-200, 1e200), data=st.data())
def test_round_trip(family, x, data):
    u = data.draw(st.sampled_from(family))
    back = units.convert(units.convert(x, u, "hartree" if family is ENERGY else family[0]),
                         "hartree" if family is ENERGY else family[0], u)
    assert back == pytest.approx(x, rel=1e-12)


def test_mismatched_units_name_both():
    with pytest.raises(units.UnitError, match="eV.*um|um.*eV"):
        units.convert(1.0, "eV", "um")


def test_unknown_unit():
    with pytest.raises(units.UnitError, match="furlong"):
        units.convert(1.0, "furlong", "m")


# -- species -------------------------------------------------------------------

def test_default_file_has_all_species(registry):
    assert set(registry) == {"MgH+", "HD+", "N2+", "H2+", "I2+", "Mg+", "Ca+", "Be+"}
    assert registry["N2+"].polarity == "apolar"
    assert registry["HD+"].polarity == "polar"
    assert not registry["Ca+"].is_molecule


def test_mgh_mg_mass_ratio(mgh):
    assert mgh.xi == pytest.approx(25 / 24, rel=1e-15)


def test_n2_ca_mass_ratio(n2):
    assert n2.xi == pytest.approx(0.7, rel=1e-15)


def test_equal_masses():
    x = Species("X+", 7.0)
    p = make_pair(x, x)
    assert p.xi == 1.0
    assert p.mu == pytest.approx(x.mass_au / 2, rel=1e-15)


masses = st.floats(0.5, 500.0)


@given(m1=masses, m2=masses)
def test_reduced_mass_properties(m1, m2):
    a, b = Species("A+", m1), Species("B+", m2)
    p, q = make_pair(a, b), make_pair(b, a)
    assert p.mu < min(a.mass_au, b.mass_au)
    assert p.mu == pytest.approx(a.mass_au / (1 + p.xi), rel=1e-13)
    assert p.xi * q.xi == pytest.approx(1.0, rel=1e-15)
    assert p.mu == pytest.approx(q.mu, rel=1e-15)


def test_charge_product():
    mol = Species("M+", 25.0, polarity="apolar", B=1e-5, QZ=1.0)
    at = Species("A+", 24.0).with_charge(10)
    assert make_pair(mol, at).q_prod == 10


@pytest.mark.parametrize("kwargs", [
    dict(mass=-1.0),
    dict(mass=1.0, charge=0),
    dict(mass=1.0, polarity="apolar", QZ=1.0),
    dict(mass=1.0, polarity="apolar", B=1e-5),
    dict(mass=1.0, polarity="apolar", B=1e-5, QZ=1.0, D=1.0),
    dict(mass=1.0, polarity="polar", B=1e-5),
    dict(mass=1.0, polarity="weird"),
])
def test_invalid_species(kwargs):
    with pytest.raises(SpeciesError):
        Species("X+", **kwargs)


def test_single_atom_file():
    reg = parse_species("[species.Yb+]\nmass_amu = 174\ncharge = 1\n")
    assert len(reg) == 1
    assert reg["Yb+"].mass == 174


def test_duplicate_species_reports_line():
    text = "[species.MgH+]\nmass_amu = 25\ncharge = 1\n\n[species.MgH+]\nmass_amu = 25\ncharge = 1\n"
    with pytest.raises(SpeciesFileError, match="MgH\\+") as exc:
        parse_species(text, "x.txt")
    assert exc.value.lineno == 5


def test_missing_field_reports_line():
    with pytest.raises(SpeciesFileError, match="charge") as exc:
        parse_species("# header\n[species.A+]\nmass_amu = 3\n")
    assert exc.value.lineno == 2


def test_negative_mass_reports_line():
    with pytest.raises(SpeciesFileError, match="mass") as exc:
        parse_species("[species.A+]\ncharge = 1\nmass_amu = -3\n")
    assert exc.value.lineno == 3


def test_unknown_key_and_bad_number():
    with pytest.raises(SpeciesFileError, match="colour"):
        parse_species("[species.A+]\nmass_amu = 3\ncharge = 1\ncolour = red\n")
    with pytest.raises(SpeciesFileError, match="not a number") as exc:
        parse_species("[species.A+]\nmass_amu = three\ncharge = 1\n")
    assert exc.value.lineno == 2


def test_unknown_species_lists_registry(registry):
    with pytest.raises(UnknownSpeciesError) as exc:
        registry["Xx+"]
    assert "MgH+" in str(exc.value) and "Be+" in str(exc.value)


def test_round_trip_is_bit_identical(registry):
    again = parse_species(dump_species(registry))
    assert list(again) == list(registry)
    for name in registry:
        assert again[name] == registry[name]


def test_species_file_from_path(tmp_path, registry):
    path = tmp_path / "sp.txt"
    path.write_text(dump_species(registry))
    assert dict(load_species_file(path)) == dict(registry)


def test_override_rotational_constant(registry):
    reg = apply_override(registry, "species.N2+.B_invcm=3.8448")
    assert reg["N2+"].B == pytest.approx(2 * registry["N2+"].B, rel=1e-12)
    assert reg["Ca+"] == registry["Ca+"]
    assert registry["N2+"].B != reg["N2+"].B  # original untouched


def test_override_errors(registry):
    with pytest.raises(SpeciesError):
        apply_override(registry, "species.N2+.B_invcm")
    with pytest.raises(SpeciesError):
        apply_override(registry, "species.N2+.spin=1")
    with pytest.raises(UnknownSpeciesError):
        apply_override(registry, "species.Xx+.mass_amu=3")
