"""Dataset tables and their CSV schemas.

Two table shapes cover every measurement campaign:

* beampattern: rows are codebook beams, columns are turntable rotations.
  Header ``theta_n,phi_n,rot_<angle>,...`` preceded by one comment line
  ``# theta_t=<deg>`` recording the transmitter azimuth of the campaign.
* absorption: rows are codebook beams, columns are active-element counts.
  Header ``theta_n,phi_n,n_<count>,...``.

Powers are serialized with 6 decimal places (far below any measurement
precision), angles as plain integers when integral.  Readers accept an
optional column-name mapping so externally produced files with renamed
headers can be ingested without rewriting them.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NotFoundError, ParseError

POWER_SANITY_FLOOR_DBM = -200.0


class TableSlice(NamedTuple):
    """A copied table slice together with its index labels."""

    labels: np.ndarray
    values: np.ndarray


def _fmt_angle(v: float) -> str:
    return "%d" % round(v) if float(v) == round(v) else "%.6f" % v


def _fmt_power(v: float) -> str:
    return "%.6f" % v


def _as_beams(beams) -> np.ndarray:
    arr = np.asarray(beams, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError("beams must have shape (n, 2)")
    return arr


def _nearest(values: np.ndarray, key: float, count: int = 3) -> list:
    order = np.argsort(np.abs(values - key), kind="stable")[:count]
    return [float(v) for v in values[order]]


@dataclass(eq=False)
class BeampatternTable:
    """Received power (dBm) per codebook beam and turntable rotation."""

    beams: np.ndarray
    rotations: np.ndarray
    power_dbm: np.ndarray
    theta_t_deg: float = 0.0

    def __post_init__(self):
        self.beams = _as_beams(self.beams)
        self.rotations = np.asarray(self.rotations, dtype=float)
        self.power_dbm = np.asarray(self.power_dbm, dtype=float)
        if self.rotations.ndim != 1:
            raise DomainError("rotations must be 1-d")
        if self.power_dbm.shape != (self.beams.shape[0], self.rotations.size):
            raise DomainError(
                f"power matrix shape {self.power_dbm.shape} does not match "
                f"{self.beams.shape[0]} beams x {self.rotations.size} rotations")

    def __eq__(self, other):
        if not isinstance(other, BeampatternTable):
            return NotImplemented
        return (np.array_equal(self.beams, other.beams)
                and np.array_equal(self.rotations, other.rotations)
                and np.array_equal(self.power_dbm, other.power_dbm)
                and self.theta_t_deg == other.theta_t_deg)

    def validate(self) -> None:
        """Schema checks applied on top of the shape checks: ascending
        rotation axis, unique beams, sane finite powers."""
        if np.any(np.diff(self.rotations) <= 0):
            raise DomainError("rotations must be strictly ascending")
        keys = {(a, e) for a, e in map(tuple, self.beams)}
        if len(keys) != self.beams.shape[0]:
            raise DomainError("duplicate beams in table")
        if not np.all(np.isfinite(self.power_dbm)):
            raise DomainError("power matrix contains non-finite values")
        if np.any(self.power_dbm < POWER_SANITY_FLOOR_DBM):
            raise DomainError(
                f"power below sanity floor {POWER_SANITY_FLOOR_DBM} dBm")
        if not np.all(np.isfinite(self.theta_t_deg)):
            raise DomainError("theta_t must be finite")

    def row(self, beam) -> TableSlice:
        az, el = float(beam[0]), float(beam[1])
        hits = np.nonzero((self.beams[:, 0] == az)
                          & (self.beams[:, 1] == el))[0]
        if hits.size == 0:
            da = _nearest(self.beams[:, 0], az)
            de = _nearest(self.beams[:, 1], el)
            raise NotFoundError(
                f"beam ({az:g}, {el:g}) not in table; nearest azimuths "
                f"{da}, nearest elevations {de}")
        return TableSlice(self.rotations.copy(), self.power_dbm[hits[0]].copy())

    def column(self, rotation_deg: float) -> TableSlice:
        hits = np.nonzero(self.rotations == float(rotation_deg))[0]
        if hits.size == 0:
            raise NotFoundError(
                f"rotation {rotation_deg:g} not in table; nearest "
                f"{_nearest(self.rotations, float(rotation_deg))}")
        return TableSlice(self.beams.copy(), self.power_dbm[:, hits[0]].copy())


@dataclass(eq=False)
class AbsorptionTable:
    """Received power (dBm) per codebook beam and active-element count."""

    beams: np.ndarray
    active_counts: np.ndarray
    power_dbm: np.ndarray

    def __post_init__(self):
        self.beams = _as_beams(self.beams)
        self.active_counts = np.asarray(self.active_counts, dtype=int)
        self.power_dbm = np.asarray(self.power_dbm, dtype=float)
        if self.active_counts.ndim != 1:
            raise DomainError("active_counts must be 1-d")
        if self.power_dbm.shape != (self.beams.shape[0],
                                    self.active_counts.size):
            raise DomainError(
                f"power matrix shape {self.power_dbm.shape} does not match "
                f"{self.beams.shape[0]} beams x {self.active_counts.size} counts")

    def __eq__(self, other):
        if not isinstance(other, AbsorptionTable):
            return NotImplemented
        return (np.array_equal(self.beams, other.beams)
                and np.array_equal(self.active_counts, other.active_counts)
                and np.array_equal(self.power_dbm, other.power_dbm))

    def validate(self) -> None:
        if np.any(np.diff(self.active_counts) <= 0):
            raise DomainError("active_counts must be strictly ascending")
        for c in self.active_counts:
            side = int(round(np.sqrt(c)))
            if c < 1 or side * side != c:
                raise DomainError(f"non-square active count {c}")
        keys = {(a, e) for a, e in map(tuple, self.beams)}
        if len(keys) != self.beams.shape[0]:
            raise DomainError("duplicate beams in table")
        if not np.all(np.isfinite(self.power_dbm)):
            raise DomainError("power matrix contains non-finite values")
        if np.any(self.power_dbm < POWER_SANITY_FLOOR_DBM):
            raise DomainError(
                f"power below sanity floor {POWER_SANITY_FLOOR_DBM} dBm")

    def row(self, beam) -> TableSlice:
        az, el = float(beam[0]), float(beam[1])
        hits = np.nonzero((self.beams[:, 0] == az)
                          & (self.beams[:, 1] == el))[0]
        if hits.size == 0:
            da = _nearest(self.beams[:, 0], az)
            de = _nearest(self.beams[:, 1], el)
            raise NotFoundError(
                f"beam ({az:g}, {el:g}) not in table; nearest azimuths "
                f"{da}, nearest elevations {de}")
        return TableSlice(self.active_counts.copy(),
                          self.power_dbm[hits[0]].copy())

    def column(self, count: int) -> TableSlice:
        hits = np.nonzero(self.active_counts == int(count))[0]
        if hits.size == 0:
            raise NotFoundError(
                f"active count {count} not in table; nearest "
                f"{_nearest(self.active_counts.astype(float), float(count))}")
        return TableSlice(self.beams.copy(), self.power_dbm[:, hits[0]].copy())


# ---------------------------------------------------------------------------
# column-name mapping for externally produced files

_MAPPING_KEYS = ("theta_n", "phi_n", "rot_prefix", "n_prefix", "theta_t_key")

DEFAULT_MAPPING = {
    "theta_n": "theta_n",
    "phi_n": "phi_n",
    "rot_prefix": "rot_",
    "n_prefix": "n_",
    "theta_t_key": "theta_t",
}


def load_column_mapping(path) -> dict:
    """Parse ``key = value`` lines overriding the canonical column names."""
    mapping = {}
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}: line {ln}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _MAPPING_KEYS:
                raise ParseError(
                    f"{path}: line {ln}: unknown mapping key {key!r}; "
                    f"known keys: {', '.join(_MAPPING_KEYS)}")
            mapping[key] = value
    return mapping


def _resolve_mapping(mapping) -> dict:
    resolved = dict(DEFAULT_MAPPING)
    if mapping:
        for key in mapping:
            if key not in _MAPPING_KEYS:
                raise DomainError(f"unknown mapping key {key!r}")
        resolved.update(mapping)
    return resolved


# ---------------------------------------------------------------------------
# writers

def write_beampattern(table: BeampatternTable, path) -> None:
    table.validate()
    buf = io.StringIO()
    buf.write("# theta_t=%s\n" % _fmt_angle(table.theta_t_deg))
    buf.write("theta_n,phi_n,"
              + ",".join("rot_%s" % _fmt_angle(r) for r in table.rotations)
              + "\n")
    for (az, el), row in zip(table.beams, table.power_dbm):
        buf.write(_fmt_angle(az) + "," + _fmt_angle(el) + ","
                  + ",".join(_fmt_power(p) for p in row) + "\n")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def write_absorption(table: AbsorptionTable, path) -> None:
    table.validate()
    buf = io.StringIO()
    buf.write("theta_n,phi_n,"
              + ",".join("n_%d" % c for c in table.active_counts) + "\n")
    for (az, el), row in zip(table.beams, table.power_dbm):
        buf.write(_fmt_angle(az) + "," + _fmt_angle(el) + ","
                  + ",".join(_fmt_power(p) for p in row) + "\n")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


# ---------------------------------------------------------------------------
# readers

def _read_lines(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read().splitlines()


def _parse_rows(path, lines, start_ln, n_cols):
    beams, rows = [], []
    for ln, line in enumerate(lines, start=start_ln):
        parts = line.split(",")
        if len(parts) != 2 + n_cols:
            raise ParseError(f"{path}: line {ln}: expected {2 + n_cols} "
                             f"fields, got {len(parts)}")
        try:
            az, el = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(
                f"{path}: line {ln}: bad beam angles {parts[:2]!r}") from None
        vals = []
        for col, p in enumerate(parts[2:], start=1):
            try:
                vals.append(float(p))
            except ValueError:
                raise ParseError(f"{path}: line {ln}, data column {col}: "
                                 f"not a number: {p!r}") from None
        beams.append((az, el))
        rows.append(vals)
    if not beams:
        raise ParseError(f"{path}: no data rows")
    return np.array(beams, float), np.array(rows, float)


def read_beampattern(path, mapping: dict | None = None) -> BeampatternTable:
    names = _resolve_mapping(mapping)
    lines = _read_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty file")

    theta_t = 0.0
    body = lines
    start_ln = 1
    if lines[0].startswith("#"):
        comment = lines[0].lstrip("#").strip()
        key = names["theta_t_key"] + "="
        if not comment.startswith(key):
            raise ParseError(
                f"{path}: line 1: expected comment '# {names['theta_t_key']}"
                f"=<deg>', got {lines[0]!r}")
        try:
            theta_t = float(comment[len(key):])
        except ValueError:
            raise ParseError(f"{path}: line 1: bad {names['theta_t_key']} "
                             f"value {comment[len(key):]!r}") from None
        body = lines[1:]
        start_ln = 2

    if not body:
        raise ParseError(f"{path}: missing header row")
    header = body[0].split(",")
    if len(header) < 3 or header[0] != names["theta_n"] \
            or header[1] != names["phi_n"]:
        raise ParseError(
            f"{path}: line {start_ln}: header must start with "
            f"'{names['theta_n']},{names['phi_n']}'")
    prefix = names["rot_prefix"]
    rotations = []
    for col, name in enumerate(header[2:], start=3):
        if not name.startswith(prefix):
            raise ParseError(f"{path}: header column {col} ({name!r}) does "
                             f"not start with {prefix!r}")
        try:
            rotations.append(float(name[len(prefix):]))
        except ValueError:
            raise ParseError(f"{path}: header column {col} ({name!r}): "
                             f"bad rotation angle") from None

    beams, power = _parse_rows(path, body[1:], start_ln + 1, len(rotations))
    table = BeampatternTable(beams, np.array(rotations), power, theta_t)
    try:
        table.validate()
    except DomainError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return table


def read_absorption(path, mapping: dict | None = None) -> AbsorptionTable:
    names = _resolve_mapping(mapping)
    lines = _read_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty file")
    header = lines[0].split(",")
    if len(header) < 3 or header[0] != names["theta_n"] \
            or header[1] != names["phi_n"]:
        raise ParseError(f"{path}: line 1: header must start with "
                         f"'{names['theta_n']},{names['phi_n']}'")
    prefix = names["n_prefix"]
    counts = []
    for col, name in enumerate(header[2:], start=3):
        if not name.startswith(prefix):
            raise ParseError(f"{path}: header column {col} ({name!r}) does "
                             f"not start with {prefix!r}")
        tail = name[len(prefix):]
        try:
            count = int(tail)
        except ValueError:
            raise ParseError(f"{path}: header column {col} ({name!r}): "
                             f"bad active count") from None
        side = int(round(np.sqrt(count))) if count > 0 else 0
        if count < 1 or side * side != count:
            raise ParseError(f"{path}: header column {col} ({name!r}): "
                             f"non-square active count {count}")
        counts.append(count)

    beams, power = _parse_rows(path, lines[1:], 2, len(counts))
    table = AbsorptionTable(beams, np.array(counts, int), power)
    try:
        table.validate()
    except DomainError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return table


def read_table(path, mapping: dict | None = None):
    """Sniff the schema from the header and dispatch to the right reader."""
    names = _resolve_mapping(mapping)
    lines = _read_lines(path)
    header = None
    for line in lines:
        if not line.startswith("#"):
            header = line
            break
    if header is None:
        raise ParseError(f"{path}: no header row found")
    third = header.split(",")[2:3]
    if third and third[0].startswith(names["rot_prefix"]):
        return read_beampattern(path, mapping)
    if third and third[0].startswith(names["n_prefix"]):
        return read_absorption(path, mapping)
    raise ParseError(f"{path}: cannot identify schema from header {header!r}")
