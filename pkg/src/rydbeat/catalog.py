"""Exciton state catalog: identities, measured energies/lifetimes, energy splits.

The embedded default catalog holds the measured yellow S and D series up to
n = 9, the green 1S exciton and the yellow 2P state, together with the
inverse-linewidth times hbar/Gamma used by the consistency validator.
Selected pair separations carry higher-precision override values (from
dedicated high-resolution spectroscopy); ``energy_split`` reports both the
catalog energy difference and the override.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .constants import HBAR_MEV_PS
from .errors import InvalidInputError, NotFoundError, ParseError

SERIES = ("S", "P", "D", "F")

_LABEL_RE = re.compile(r"^(\d+)([SPDF])([12g]?)$")


@dataclass(frozen=True, order=True)
class StateId:
    """Identity of one exciton state.

    ``sublevel`` distinguishes the two even-parity D states of a multiplet
    (1 = lower, 2 = higher energy); S and P states use 0.  ``series_color``
    separates the green 1S exciton from the yellow series.
    """

    n: int
    series: str
    sublevel: int = 0
    series_color: str = "yellow"

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInputError(f"n must be >= 1, got {self.n}")
        if self.series not in SERIES:
            raise InvalidInputError(f"unknown series {self.series!r}")
        if self.sublevel not in (0, 1, 2):
            raise InvalidInputError(f"sublevel must be 0, 1 or 2, got {self.sublevel}")
        if self.sublevel and self.series != "D":
            raise InvalidInputError("only D states carry sublevels 1/2")
        if self.series_color not in ("yellow", "green"):
            raise InvalidInputError(f"unknown series color {self.series_color!r}")

    @property
    def label(self) -> str:
        suffix = str(self.sublevel) if self.sublevel else ""
        color = "g" if self.series_color == "green" else ""
        return f"{self.n}{self.series}{suffix}{color}"

    def __str__(self) -> str:
        return self.label


def parse_label(label: str) -> StateId:
    """Parse a compact state label such as ``"4S"``, ``"4D2"`` or ``"1Sg"``."""
    m = _LABEL_RE.match(label.strip())
    if not m:
        raise InvalidInputError(f"cannot parse state label {label!r}")
    n, series, suffix = int(m.group(1)), m.group(2), m.group(3)
    if suffix == "g":
        return StateId(n, series, 0, "green")
    return StateId(n, series, int(suffix) if suffix else 0)


def _as_state(state) -> StateId:
    return state if isinstance(state, StateId) else parse_label(state)


@dataclass(frozen=True)
class StateRecord:
    """One catalog entry: energy, inverse linewidth and measured lifetime."""

    id: StateId
    energy: float  # eV
    hbar_over_gamma: float  # ps
    lifetime: float  # ps
    lifetime_err: float  # ps
    source: str = "measured"  # or "literature"
    hbar_over_gamma_err: float = 0.0  # ps

    def __post_init__(self):
        if self.energy <= 0:
            raise InvalidInputError(f"{self.id}: energy must be > 0")
        if self.lifetime <= 0 or self.hbar_over_gamma <= 0:
            raise InvalidInputError(f"{self.id}: lifetimes must be > 0")
        if self.source not in ("measured", "literature"):
            raise InvalidInputError(f"{self.id}: unknown source {self.source!r}")

    @property
    def linewidth_mev(self) -> float:
        """Spectral linewidth Gamma = hbar / (hbar/Gamma) in meV."""
        return HBAR_MEV_PS / self.hbar_over_gamma


@dataclass(frozen=True)
class EnergySplit:
    """Result of ``energy_split``: catalog difference plus optional override."""

    table_value: float | None  # meV, from catalog energies (None if a state has no record)
    override: float | None  # meV, from the override table

    @property
    def overridden(self) -> bool:
        return self.override is not None

    @property
    def value(self) -> float:
        """Preferred split: the override when present, else the table difference."""
        if self.override is not None:
            return self.override
        if self.table_value is None:
            raise NotFoundError("split has neither a table value nor an override")
        return self.table_value


class StateCatalog:
    """Ordered collection of :class:`StateRecord` plus pair-split overrides.

    Overrides are keyed on the unordered pair and may reference states that
    have no record of their own (e.g. an F state known only through its
    separation from a neighbour).
    """

    def __init__(self, records, split_overrides=()):
        self.records = list(records)
        self._by_id = {}
        for rec in self.records:
            if rec.id in self._by_id:
                raise InvalidInputError(f"duplicate state {rec.id}")
            self._by_id[rec.id] = rec
        self._check_ordering()
        self.split_overrides = {}
        for a, b, split in split_overrides:
            key = frozenset((_as_state(a), _as_state(b)))
            if len(key) == 1:
                raise InvalidInputError("split override needs two distinct states")
            # first occurrence wins when a pair is quoted twice
            self.split_overrides.setdefault(key, float(split))

    def _check_ordering(self):
        by_series = {}
        for rec in self.records:
            key = (rec.id.series_color, rec.id.series, rec.id.sublevel)
            by_series.setdefault(key, []).append(rec)
        for group in by_series.values():
            ns = [rec.id.n for rec in group]
            es = [rec.energy for rec in group]
            for (n1, e1), (n2, e2) in zip(zip(ns, es), zip(ns[1:], es[1:])):
                if n2 > n1 and e2 <= e1:
                    raise InvalidInputError(
                        f"energies must increase with n within a series ({n1} vs {n2})"
                    )

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __contains__(self, state):
        return _as_state(state) in self._by_id

    def get(self, state) -> StateRecord:
        sid = _as_state(state)
        try:
            return self._by_id[sid]
        except KeyError:
            raise NotFoundError(f"state {sid} not in catalog") from None

    def states(self):
        return list(self._by_id)

    def series(self, series, color="yellow"):
        """Records of one series, ordered as stored."""
        return [
            rec
            for rec in self.records
            if rec.id.series == series and rec.id.series_color == color
        ]

    # -- serialization ----------------------------------------------------

    def to_json_obj(self):
        states = []
        for rec in self.records:
            obj = {
                "label": rec.id.label,
                "n": rec.id.n,
                "series": rec.id.series,
                "sublevel": rec.id.sublevel,
                "energy_eV": rec.energy,
                "hbar_over_gamma_ps": rec.hbar_over_gamma,
                "lifetime_ps": rec.lifetime,
                "lifetime_err_ps": rec.lifetime_err,
                "source": rec.source,
            }
            if rec.hbar_over_gamma_err:
                obj["hbar_over_gamma_err_ps"] = rec.hbar_over_gamma_err
            states.append(obj)
        overrides = [
            {"a": min(p.label for p in key), "b": max(p.label for p in key), "split_meV": v}
            for key, v in self.split_overrides.items()
        ]
        overrides.sort(key=lambda o: (o["a"], o["b"]))
        return {"states": states, "split_overrides": overrides}

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_obj(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json_obj(cls, obj):
        if isinstance(obj, list):  # bare array form: states only
            obj = {"states": obj}
        try:
            records = []
            for entry in obj["states"]:
                sid = parse_label(entry["label"])
                if sid.n != entry["n"] or sid.series != entry["series"]:
                    raise ParseError(f"label {entry['label']!r} disagrees with n/series fields")
                records.append(
                    StateRecord(
                        id=sid,
                        energy=float(entry["energy_eV"]),
                        hbar_over_gamma=float(entry["hbar_over_gamma_ps"]),
                        lifetime=float(entry["lifetime_ps"]),
                        lifetime_err=float(entry["lifetime_err_ps"]),
                        source=entry.get("source", "measured"),
                        hbar_over_gamma_err=float(entry.get("hbar_over_gamma_err_ps", 0.0)),
                    )
                )
            overrides = [
                (o["a"], o["b"], float(o["split_meV"]))
                for o in obj.get("split_overrides", [])
            ]
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"malformed catalog JSON: {exc}") from exc
        return cls(records, overrides)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: {exc}") from exc
        return cls.from_json_obj(obj)


def energy_split(a, b, catalog: StateCatalog) -> EnergySplit:
    """Energy separation |E_a - E_b| of two states in meV.

    Returns both the catalog-energy difference and, when the pair has one,
    the override value; ``EnergySplit.value`` prefers the override.  States
    that only exist through an override (no record) are accepted as long as
    the override covers the pair.
    """
    sa, sb = _as_state(a), _as_state(b)
    if sa == sb:
        return EnergySplit(table_value=0.0, override=None)
    override = catalog.split_overrides.get(frozenset((sa, sb)))
    table = None
    if sa in catalog and sb in catalog:
        table = abs(catalog.get(sa).energy - catalog.get(sb).energy) * 1e3
    elif override is None:
        missing = sa if sa not in catalog else sb
        raise NotFoundError(f"state {missing} not in catalog and pair has no override")
    return EnergySplit(table_value=table, override=override)


def _rec(label, energy, hg, hg_err, tau, tau_err, source="measured"):
    return StateRecord(
        id=parse_label(label),
        energy=energy,
        hbar_over_gamma=hg,
        hbar_over_gamma_err=hg_err,
        lifetime=tau,
        lifetime_err=tau_err,
        source=source,
    )


#: Measured state catalog (energies in eV, times in ps).  Entries whose
#: inverse linewidth or energy comes from published high-resolution
#: spectroscopy rather than this setup are marked "literature".
DEFAULT_RECORDS = (
    _rec("1Sg", 2.15425, 0.75, 0.10, 0.74, 0.10),
    _rec("2S", 2.13763, 0.66, 0.04, 0.70, 0.12),
    _rec("3S", 2.16039, 2.85, 0.02, 3.1, 0.1),
    _rec("4S", 2.16554, 5.0, 0.05, 5.1, 0.2),
    _rec("5S", 2.16786, 11.02, 0.05, 11.4, 1.2, "literature"),
    _rec("6S", 2.16922, 19.37, 0.29, 19.0, 1.5, "literature"),
    _rec("7S", 2.17006, 20.57, 0.16, 20.0, 1.5, "literature"),
    _rec("8S", 2.17053, 19.37, 0.31, 21.5, 2.0, "literature"),
    _rec("9S", 2.17086, 18.81, 0.40, 22.0, 2.5, "literature"),
    _rec("2P", 2.14732, 0.33, 0.06, 0.48, 0.10),
    _rec("3D1", 2.16288, 2.5, 0.30, 3.2, 0.2),
    _rec("3D2", 2.16324, 2.4, 0.25, 3.2, 0.2),
    _rec("4D1", 2.16642, 3.0, 0.27, 5.7, 0.5),
    _rec("4D2", 2.16667, 1.8, 0.10, 5.7, 0.5),
    _rec("5D1", 2.16826, 3.5, 0.90, 10.5, 0.9),
    _rec("5D2", 2.16839, 5.98, 0.02, 10.5, 0.9, "literature"),
    _rec("6D", 2.16945, 9.4, 0.05, 17.5, 1.2, "literature"),
    _rec("7D", 2.17019, 11.02, 0.14, 19.0, 1.5, "literature"),
    _rec("8D", 2.17064, 12.91, 0.16, 22.0, 2.0, "literature"),
    _rec("9D", 2.17094, 17.32, 0.28, 23.0, 2.5, "literature"),
)

#: Higher-precision pair separations in meV.  The {7S,8S} pair is quoted
#: twice in the source data (0.47 and 0.48); the first value is kept.
DEFAULT_SPLIT_OVERRIDES = (
    ("4S", "4D2", 1.21),
    ("4S", "4D1", 0.93),
    ("4D2", "4F", 0.50),
    ("4D2", "4D1", 0.29),
    ("4D1", "4F", 0.21),
    ("5S", "5D2", 0.56),
    ("5S", "6D", 1.73),
    ("5S", "6S", 1.28),
    ("5S", "5D1", 0.43),
    ("5D2", "5D1", 0.13),
    ("6S", "6D", 0.42),
    ("6S", "7D", 1.06),
    ("6S", "7S", 0.76),
    ("7S", "7D", 0.30),
    ("7S", "8D", 0.72),
    ("7S", "8S", 0.47),
    ("8S", "8D", 0.23),
    ("8S", "9S", 0.33),
    ("8S", "7D", 0.17),
)


def default_catalog() -> StateCatalog:
    """Fresh copy of the embedded default catalog."""
    return StateCatalog(DEFAULT_RECORDS, DEFAULT_SPLIT_OVERRIDES)
