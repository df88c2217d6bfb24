"""Planar surface-code lattice with twist-defect (dislocation) pairs.

Geometry and operator conventions
---------------------------------

Spins sit on the vertices of a ``width x height`` grid; site ids are
row-major (``id = row*width + col``). Every interior face of the grid hosts a
four-body plaquette operator. Letters follow one global sublattice rule:

    Z . X        face (r, c) acts with  Z on (r, c)      X on (r, c+1)
    . o .                               X on (r+1, c)    Z on (r+1, c+1)
    X . Z

so X sits on one diagonal of each face and Z on the other, and any two
edge-adjacent faces overlap on two spins with clashing letters (hence
commute), while diagonal neighbours overlap on one spin with equal letters.

A twist pair is created by a horizontal dislocation segment: face columns
``col_start..col_end`` of face row ``row`` are re-stitched into one fewer
face. Interior faces of the segment become sheared quadrilaterals (top edge
at columns c,c+1; bottom edge shifted right by one), and the two terminal
faces become pentagons that absorb one extra spin each:

    left pentagon                      right pentagon
    T1 T2 . .                          .  T1 T2 T3
    B1 B2 B3 .                         .  .  B1 B2

The pentagon operator keeps the alternating X/Z pattern on its four cycle
corners and acts with Y on the twist site (``B2`` on the left, ``T2`` on the
right). This is the unique letter assignment for which all operators commute
and the twist sites drop out of every operator's Majorana image.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _gf2
from .pauli import PauliString


class SizeError(ValueError):
    """Lattice dimensions too small."""


class GeometryError(ValueError):
    """Dislocation segment placement is invalid."""


@dataclass(frozen=True)
class Segment:
    """Horizontal dislocation: face row ``row``, face columns start..end."""

    row: int
    col_start: int
    col_end: int


@dataclass(frozen=True)
class Plaquette:
    id: int
    kind: str  # "square" or "pentagon"
    ordered_sites: tuple[int, ...]  # X,Z,X,Z corners (cyclic), then Y site
    orientation: str  # path circulation tag: "clockwise" / "counterclockwise"

    @property
    def sites(self) -> tuple[int, ...]:
        return self.ordered_sites


@dataclass(frozen=True)
class TwistDefect:
    id: int
    host_plaquette_id: int
    twist_site: int
    partner_twist_id: int
    segment_index: int


@dataclass(frozen=True)
class TwistLattice:
    width: int
    height: int
    segments: tuple[Segment, ...]
    plaquettes: tuple[Plaquette, ...]
    twists: tuple[TwistDefect, ...]
    coloring: dict[int, str] = field(repr=False)

    # -- site helpers ------------------------------------------------------

    @property
    def n_sites(self) -> int:
        return self.width * self.height

    @property
    def sites(self) -> range:
        return range(self.n_sites)

    def site_id(self, row: int, col: int) -> int:
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise GeometryError(f"site ({row}, {col}) outside the grid")
        return row * self.width + col

    def site_coords(self, site: int) -> tuple[int, int]:
        return divmod(site, self.width)

    def on_boundary(self, site: int) -> bool:
        r, c = self.site_coords(site)
        return r in (0, self.height - 1) or c in (0, self.width - 1)

    # -- plaquette helpers --------------------------------------------------

    def plaquette(self, plaq_id: int) -> Plaquette:
        if not (0 <= plaq_id < len(self.plaquettes)):
            raise KeyError(f"unknown plaquette id {plaq_id}")
        return self.plaquettes[plaq_id]

    def twist_pair(self, pair_index: int) -> tuple[TwistDefect, TwistDefect]:
        if not (0 <= pair_index < len(self.segments)):
            raise KeyError(f"unknown twist pair {pair_index}")
        return self.twists[2 * pair_index], self.twists[2 * pair_index + 1]

    @property
    def n_pairs(self) -> int:
        return len(self.segments)

    def stabilizer_matrix(self) -> np.ndarray:
        """Binary symplectic matrix with one row per plaquette operator."""
        idx = {s: s for s in self.sites}
        rows = [
            _gf2.symplectic_vector(plaquette_operator(self, p.id), idx)
            for p in self.plaquettes
        ]
        return np.array(rows, dtype=np.uint8)

    def logical_qubit_count(self) -> int:
        return self.n_sites - _gf2.rank(self.stabilizer_matrix())


_SQUARE_LETTERS = ("X", "Z", "X", "Z")
_PENTAGON_LETTERS = ("X", "Z", "X", "Z", "Y")


def _segment_sites(width: int, seg: Segment) -> set[tuple[int, int]]:
    rows = (seg.row, seg.row + 1)
    return {(r, c) for r in rows for c in range(seg.col_start, seg.col_end + 2)}


def build_lattice(
    width: int, height: int, twist_pairs: list[Segment] | list[tuple[int, int, int]]
) -> TwistLattice:
    """Build the planar lattice, re-stitching faces along each dislocation."""
    if width < 4 or height < 4:
        raise SizeError(f"lattice must be at least 4x4, got {width}x{height}")

    segments = tuple(
        seg if isinstance(seg, Segment) else Segment(*seg) for seg in twist_pairs
    )
    occupied: set[tuple[int, int]] = set()
    for seg in segments:
        if seg.col_end < seg.col_start + 2:
            raise GeometryError(
                f"segment {seg} too short: needs at least two terminal faces"
            )
        if not (1 <= seg.row <= height - 3):
            raise GeometryError(f"segment {seg} touches the top/bottom boundary")
        if not (1 <= seg.col_start and seg.col_end + 1 <= width - 2):
            raise GeometryError(f"segment {seg} touches the left/right boundary")
        sites = _segment_sites(width, seg)
        if occupied & sites:
            raise GeometryError(f"segment {seg} overlaps another segment")
        occupied |= sites

    def sid(r: int, c: int) -> int:
        return r * width + c

    def orientation(face_row: int) -> str:
        return "clockwise" if face_row % 2 == 0 else "counterclockwise"

    # key -> (kind, ordered_sites); keys sort row-major for deterministic ids
    faces: list[tuple[tuple[int, int], str, tuple[int, ...]]] = []
    segment_face_cols = {
        seg.row: set(range(seg.col_start, seg.col_end + 1)) for seg in segments
    }

    for r in range(height - 1):
        taken = segment_face_cols.get(r, set())
        for c in range(width - 1):
            if c not in taken:
                ordered = (sid(r, c + 1), sid(r + 1, c + 1), sid(r + 1, c), sid(r, c))
                faces.append(((r, c), "square", ordered))

    twist_records: list[tuple[tuple[int, int], int, int]] = []  # (face key, site, seg#)
    for seg_index, seg in enumerate(segments):
        r, c1, c2 = seg.row, seg.col_start, seg.col_end
        # left pentagon: twist on the bottom-middle spin
        left = (sid(r, c1 + 1), sid(r + 1, c1 + 2), sid(r + 1, c1), sid(r, c1),
                sid(r + 1, c1 + 1))
        faces.append(((r, c1), "pentagon", left))
        # sheared interior faces
        for c in range(c1 + 1, c2 - 1):
            ordered = (sid(r, c + 1), sid(r + 1, c + 2), sid(r + 1, c + 1), sid(r, c))
            faces.append(((r, c), "square", ordered))
        # right pentagon: twist on the top-middle spin
        right = (sid(r, c2 + 1), sid(r + 1, c2 + 1), sid(r + 1, c2), sid(r, c2 - 1),
                 sid(r, c2))
        faces.append(((r, c2 - 1), "pentagon", right))
        twist_records.append(((r, c2 - 1), sid(r, c2), seg_index))       # top twist
        twist_records.append(((r, c1), sid(r + 1, c1 + 1), seg_index))   # bottom twist

    faces.sort(key=lambda item: item[0])
    key_to_id = {key: i for i, (key, _, _) in enumerate(faces)}
    plaquettes = tuple(
        Plaquette(i, kind, ordered, orientation(key[0]))
        for i, (key, kind, ordered) in enumerate(faces)
    )

    twists = []
    for t, (face_key, site, seg_index) in enumerate(twist_records):
        partner = t + 1 if t % 2 == 0 else t - 1
        twists.append(TwistDefect(t, key_to_id[face_key], site, partner, seg_index))

    coloring = {
        key_to_id[(r, c)]: ("dark" if (r + c) % 2 == 0 else "light")
        for (r, c), kind, _ in faces
        if kind == "square" and c not in segment_face_cols.get(r, set())
    }

    return TwistLattice(width, height, segments, plaquettes, tuple(twists), coloring)


def plaquette_operator(lat: TwistLattice, plaq_id: int) -> PauliString:
    """X,Z,X,Z on the ordered corners (plus Y on a pentagon's twist site)."""
    p = lat.plaquette(plaq_id)
    letters = _SQUARE_LETTERS if p.kind == "square" else _PENTAGON_LETTERS
    return PauliString.from_dict(dict(zip(p.ordered_sites, letters)))


def all_plaquette_operators(lat: TwistLattice) -> list[PauliString]:
    return [plaquette_operator(lat, p.id) for p in lat.plaquettes]


def excitations_of(lat: TwistLattice, error: PauliString) -> set[int]:
    """Plaquettes whose operators anticommute with ``error``."""
    for site in error.sites:
        if not (0 <= site < lat.n_sites):
            raise GeometryError(f"error acts on off-lattice site {site}")
    return {
        p.id
        for p in lat.plaquettes
        if not plaquette_operator(lat, p.id).commutes_with(error)
    }


def twist_logicals(
    lat: TwistLattice, pair_index: int
) -> tuple[PauliString, PauliString]:
    """(Z_logical, X_logical) of one twist pair.

    Z_logical is the stabilizer-reduced spin form of the pair's Majorana
    parity. X_logical is found by a symplectic solve: it commutes with every
    plaquette and with the other pairs' logicals, anticommutes with this
    pair's Z_logical, and is then weight-reduced.
    """
    from . import jw  # local import: jw builds on this module

    z_logicals = [
        jw.reduce_by_stabilizers(
            jw.parity_operator(lat, jw.default_path(lat, pair), pair), lat
        )
        for pair in range(lat.n_pairs)
    ]
    z_logical = z_logicals[pair_index]

    site_index = {s: s for s in lat.sites}
    constraints: list[tuple[np.ndarray, int]] = []
    for op in all_plaquette_operators(lat):
        constraints.append((_gf2.symplectic_vector(op, site_index), 0))
    for j, z in enumerate(z_logicals):
        parity = 1 if j == pair_index else 0
        constraints.append((_gf2.symplectic_vector(z, site_index), parity))
    vec = _gf2.solve_symplectic(constraints, lat.n_sites)
    if vec is None:  # pragma: no cover - cannot happen on a valid lattice
        raise GeometryError("no logical X operator exists; lattice is inconsistent")
    x_logical = _gf2.pauli_from_vector(vec, list(lat.sites))
    x_logical = jw.reduce_by_stabilizers(x_logical, lat)
    return z_logical, x_logical


# -- lattice description files ----------------------------------------------


def lattice_spec_dumps(lat: TwistLattice) -> str:
    doc = {
        "format": "twistsim-lattice/1",
        "width": lat.width,
        "height": lat.height,
        "segments": [
            {"row": s.row, "col_start": s.col_start, "col_end": s.col_end}
            for s in lat.segments
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def lattice_spec_loads(text: str) -> TwistLattice:
    doc = json.loads(text)
    if doc.get("format") != "twistsim-lattice/1":
        raise ValueError(f"unsupported lattice file format: {doc.get('format')!r}")
    segments = [
        Segment(s["row"], s["col_start"], s["col_end"]) for s in doc["segments"]
    ]
    return build_lattice(doc["width"], doc["height"], segments)
