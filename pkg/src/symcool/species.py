"""Ion species, scattering pairs and the plain-text species file.

The species file is a sectioned ``key = value`` format::

    # comment
    [species.N2+]
    mass_amu = 28
    charge = 1
    polarity = apolar
    B_invcm = 1.9224
    QZ_au = 2.0

Molecular constants are inputs, not ground truth: edit the file (or use
``--set species.<name>.<key>=<value>`` on the command line) to change them.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterator, Mapping

from .units import AMU_ME, HARTREE_INVCM

POLARITIES = ("atom", "apolar", "polar")
_KNOWN_KEYS = {"mass_amu", "charge", "polarity", "B_invcm", "B_hartree", "QZ_au", "D_au"}


class SpeciesError(ValueError):
    """Invalid species or pair definition."""


class SpeciesFileError(SpeciesError):
    """Parse or validation failure in a sectioned text file; carries the line number."""

    def __init__(self, message: str, lineno: int | None = None, source: str = "<text>"):
        self.lineno = lineno
        self.source = source
        where = f"{source}:{lineno}: " if lineno is not None else f"{source}: "
        super().__init__(where + message)


class UnknownSpeciesError(KeyError):
    def __init__(self, name: str, available):
        self.name = name
        self.available = sorted(available)
        super().__init__(name)

    def __str__(self) -> str:
        return f"unknown species {self.name!r}; available: {', '.join(self.available)}"


@dataclass(frozen=True)
class Section:
    name: str
    lineno: int
    entries: dict[str, tuple[str, int]]


def read_sections(text: str, source: str = "<text>") -> list[Section]:
    """Split ``[section]`` / ``key = value`` text into sections with line numbers.

    ``configparser`` would do the splitting but loses per-key line numbers,
    which every validation error here has to report.
    """
    sections: list[Section] = []
    seen: set[str] = set()
    current: Section | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise SpeciesFileError(f"malformed section header {raw.strip()!r}", lineno, source)
            name = line[1:-1].strip()
            if name in seen:
                raise SpeciesFileError(f"duplicate section [{name}]", lineno, source)
            seen.add(name)
            current = Section(name, lineno, {})
            sections.append(current)
            continue
        if "=" not in line:
            raise SpeciesFileError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        if current is None:
            raise SpeciesFileError("key outside of any section", lineno, source)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in current.entries:
            raise SpeciesFileError(f"duplicate key {key!r} in [{current.name}]", lineno, source)
        current.entries[key] = (value, lineno)
    return sections


@dataclass(frozen=True)
class Species:
    """An ion. ``mass`` is in amu; ``B``, ``QZ`` and ``D`` are in atomic units."""

    name: str
    mass: float
    charge: int = 1
    polarity: str = "atom"
    B: float | None = None
    QZ: float | None = None
    D: float | None = None

    def __post_init__(self):
        if self.polarity not in POLARITIES:
            raise SpeciesError(f"{self.name}: polarity must be one of {POLARITIES}, got {self.polarity!r}")
        if not self.mass > 0:
            raise SpeciesError(f"{self.name}: mass must be positive, got {self.mass}")
        if int(self.charge) != self.charge or self.charge < 1:
            raise SpeciesError(f"{self.name}: charge must be a positive integer, got {self.charge}")
        if self.polarity == "atom":
            return
        if self.B is None or not self.B > 0:
            raise SpeciesError(f"{self.name}: molecule needs a positive rotational constant B")
        if self.polarity == "apolar" and (self.QZ is None or self.D is not None):
            raise SpeciesError(f"{self.name}: apolar molecule needs QZ and no D")
        if self.polarity == "polar" and (self.D is None or self.QZ is not None):
            raise SpeciesError(f"{self.name}: polar molecule needs D and no QZ")

    @property
    def is_molecule(self) -> bool:
        return self.polarity != "atom"

    @property
    def mass_au(self) -> float:
        return self.mass * AMU_ME

    def with_charge(self, charge: int) -> "Species":
        return dataclasses.replace(self, charge=charge)


@dataclass(frozen=True)
class SpeciesPair:
    """Molecule/atom scattering pair with derived mass ratio and reduced mass.

    Attributes:
        mol: The molecular ion (the one being cooled).
        at: The coolant.
        xi: Mass ratio ``M_mol / M_at``.
        mu: Reduced mass in electron masses.
        q_prod: Charge product ``q_at * q_mol``.
    """

    mol: Species
    at: Species
    xi: float
    mu: float
    q_prod: int

    @property
    def m_mol(self) -> float:
        return self.mol.mass_au

    @property
    def m_at(self) -> float:
        return self.at.mass_au

    @property
    def q_at(self) -> int:
        return self.at.charge

    @property
    def label(self) -> str:
        return f"{self.mol.name}-{self.at.name}"


def make_pair(mol: Species, at: Species) -> SpeciesPair:
    if not isinstance(mol, Species) or not isinstance(at, Species):
        raise SpeciesError("make_pair expects two Species")
    m1, m2 = mol.mass_au, at.mass_au
    return SpeciesPair(
        mol=mol,
        at=at,
        xi=mol.mass / at.mass,
        mu=m1 * m2 / (m1 + m2),
        q_prod=mol.charge * at.charge,
    )


class SpeciesRegistry(Mapping[str, Species]):
    """Read-only name -> Species mapping; unknown lookups list what exists."""

    def __init__(self, species=()):
        self._data: dict[str, Species] = {}
        for sp in species:
            if sp.name in self._data:
                raise SpeciesError(f"duplicate species {sp.name!r}")
            self._data[sp.name] = sp

    def __getitem__(self, name: str) -> Species:
        try:
            return self._data[name]
        except KeyError:
            raise UnknownSpeciesError(name, self._data) from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def pair(self, mol: str, at: str) -> SpeciesPair:
        return make_pair(self[mol], self[at])

    def replaced(self, sp: Species) -> "SpeciesRegistry":
        return SpeciesRegistry([sp if s.name == sp.name else s for s in self._data.values()])


def _species_from_section(sec: Section, source: str) -> Species:
    name = sec.name.split(".", 1)[1].strip()
    if not name:
        raise SpeciesFileError("empty species name", sec.lineno, source)
    e = sec.entries
    for key, (_, lineno) in e.items():
        if key not in _KNOWN_KEYS:
            raise SpeciesFileError(f"[{sec.name}] unknown key {key!r}", lineno, source)

    def num(key: str, cast=float):
        if key not in e:
            return None
        value, lineno = e[key]
        try:
            return cast(value)
        except ValueError:
            raise SpeciesFileError(f"[{sec.name}] {key} is not a number: {value!r}", lineno, source) from None

    for key in ("mass_amu", "charge"):
        if key not in e:
            raise SpeciesFileError(f"[{sec.name}] missing mandatory field {key!r}", sec.lineno, source)
    if "B_invcm" in e and "B_hartree" in e:
        raise SpeciesFileError(f"[{sec.name}] give B_invcm or B_hartree, not both", e["B_hartree"][1], source)
    B = num("B_hartree")
    if B is None and "B_invcm" in e:
        B = num("B_invcm") / HARTREE_INVCM
    polarity = e.get("polarity", ("atom", sec.lineno))[0]
    mass = num("mass_amu")
    if not mass > 0:
        raise SpeciesFileError(f"[{sec.name}] mass must be positive, got {mass}", e["mass_amu"][1], source)
    try:
        return Species(
            name=name, mass=mass, charge=num("charge", int), polarity=polarity,
            B=B, QZ=num("QZ_au"), D=num("D_au"),
        )
    except SpeciesError as exc:
        raise SpeciesFileError(str(exc), sec.lineno, source) from None


def parse_species(text: str, source: str = "<text>") -> SpeciesRegistry:
    species = []
    for sec in read_sections(text, source):
        if not sec.name.startswith("species."):
            continue
        species.append(_species_from_section(sec, source))
    return SpeciesRegistry(species)


def load_species_file(path=None) -> SpeciesRegistry:
    """Load a species file; ``None`` loads the default file shipped with the package."""
    if path is None:
        text = resources.files("symcool").joinpath("data/species.txt").read_text()
        return parse_species(text, "species.txt")
    path = Path(path)
    return parse_species(path.read_text(), str(path))


def dump_species(registry: Mapping[str, Species]) -> str:
    """Serialise a registry so that ``parse_species(dump_species(r))`` equals ``r``."""
    lines = []
    for sp in registry.values():
        lines += [f"[species.{sp.name}]", f"mass_amu = {sp.mass!r}", f"charge = {sp.charge}",
                  f"polarity = {sp.polarity}"]
        if sp.B is not None:
            lines.append(f"B_hartree = {sp.B!r}")
        if sp.QZ is not None:
            lines.append(f"QZ_au = {sp.QZ!r}")
        if sp.D is not None:
            lines.append(f"D_au = {sp.D!r}")
        lines.append("")
    return "\n".join(lines)


def apply_override(registry: SpeciesRegistry, assignment: str) -> SpeciesRegistry:
    """Apply ``species.<name>.<key>=<value>`` to a copy of ``registry``."""
    target, sep, value = assignment.partition("=")
    if not sep or not target.startswith("species."):
        raise SpeciesError(f"override must look like species.<name>.<key>=<value>, got {assignment!r}")
    name, _, key = target[len("species."):].strip().rpartition(".")
    sp = registry[name]
    fields = {
        "mass_amu": sp.mass, "charge": sp.charge, "polarity": sp.polarity,
        "B_hartree": sp.B, "QZ_au": sp.QZ, "D_au": sp.D,
    }
    key = key.strip()
    if key == "B_invcm":
        key, value = "B_hartree", repr(float(value) / HARTREE_INVCM)
    if key not in fields:
        raise SpeciesError(f"unknown species key {key!r}")
    fields[key] = value.strip()
    body = "\n".join(f"{k} = {v}" for k, v in fields.items() if v is not None)
    sec_text = f"[species.{name}]\n{body}\n"
    return registry.replaced(parse_species(sec_text, "--set")[name])
