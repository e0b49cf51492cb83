"""Plain-text trajectory and topology I/O.

Both file formats are line-oriented UTF-8 text, documented in
``docs/formats.md``. No binary MD formats are read or written; loaders are
pure functions of the file bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError

BACKBONE_ROLES = ("N", "CA", "C", "O", "side_chain")

ChiQuadruple = tuple[int, int, int, int]


@dataclass(frozen=True)
class Topology:
    """Minimal per-atom topology: elements, radii, residues, backbone roles.

    ``chi_chain[r]`` is the ordered list of atom-index quadruples defining the
    chi-1..chi-5 torsions of residue ``r`` (possibly empty).
    """

    element: tuple[str, ...]
    vdw_radius: np.ndarray
    residue_index: np.ndarray
    backbone_role: tuple[str, ...]
    chi_chain: tuple[tuple[ChiQuadruple, ...], ...] = field(default=())

    @property
    def atom_count(self) -> int:
        return len(self.element)

    @property
    def residue_count(self) -> int:
        return int(self.residue_index[-1]) + 1 if self.atom_count else 0

    def atoms_of_residue(self, r: int) -> np.ndarray:
        return np.nonzero(self.residue_index == r)[0]

    def backbone_atom(self, r: int, role: str) -> int | None:
        """Atom index of residue ``r`` with the given role, or None."""
        mask = (self.residue_index == r) & (
            np.asarray(self.backbone_role) == role
        )
        idx = np.nonzero(mask)[0]
        return int(idx[0]) if idx.size else None

    def ca_atoms(self) -> np.ndarray:
        return np.nonzero(np.asarray(self.backbone_role) == "CA")[0]

    def validate(self) -> None:
        if self.atom_count == 0:
            raise ValidationError("topology has no atoms")
        if np.any(self.vdw_radius <= 0):
            bad = int(np.argmax(self.vdw_radius <= 0))
            raise ValidationError(
                f"atom {bad}: vdw_radius must be > 0, got {self.vdw_radius[bad]}"
            )
        if np.any(np.diff(self.residue_index) < 0):
            bad = int(np.argmax(np.diff(self.residue_index) < 0)) + 1
            raise ValidationError(
                f"atom {bad}: residue_index decreases "
                f"({self.residue_index[bad - 1]} -> {self.residue_index[bad]})"
            )
        if self.residue_index[0] != 0 or np.any(np.diff(self.residue_index) > 1):
            raise ValidationError(
                "residue_index must start at 0 and increase in steps of at most 1"
            )
        for r in range(self.residue_count):
            atoms = self.atoms_of_residue(r)
            for role in ("N", "CA", "C"):
                hits = [a for a in atoms if self.backbone_role[a] == role]
                if len(hits) > 1:
                    raise ValidationError(
                        f"residue {r}: more than one atom with backbone role {role}"
                    )
        if len(self.chi_chain) != self.residue_count:
            raise ValidationError(
                "chi_chain must have one (possibly empty) entry per residue"
            )
        for r, quads in enumerate(self.chi_chain):
            for quad in quads:
                if len(quad) != 4:
                    raise ValidationError(f"residue {r}: chi entry is not a quadruple")
                for a in quad:
                    if not (0 <= a < self.atom_count):
                        raise ValidationError(
                            f"residue {r}: chi atom index {a} out of range"
                        )


@dataclass(frozen=True)
class Trajectory:
    """Per-frame Cartesian coordinates (Angstrom) over a fixed topology."""

    topology: Topology
    frames: np.ndarray  # (n_frames, atom_count, 3) float64
    dt: float = 1.0  # time per frame, metadata only

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    def validate(self) -> None:
        if self.frames.ndim != 3 or self.frames.shape[2] != 3:
            raise ValidationError(f"frames must be (n, atoms, 3), got {self.frames.shape}")
        if self.n_frames < 1:
            raise ValidationError("trajectory must contain at least one frame")
        if self.frames.shape[1] != self.topology.atom_count:
            raise ValidationError(
                f"frame atom count {self.frames.shape[1]} does not match "
                f"topology atom count {self.topology.atom_count}"
            )
        if not np.all(np.isfinite(self.frames)):
            raise ValidationError("trajectory contains non-finite coordinates")


def _meaningful_lines(path):
    """Yield (line_number, stripped_line), skipping blanks and # comments."""
    with open(path, encoding="utf-8") as fh:
        for i, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield i, line


def load_topology(path) -> Topology:
    """Parse a topology file (see docs/formats.md) and validate it.

    Raises
    ------
    ParseError
        Malformed line, with its line number.
    ValidationError
        Well-formed file whose contents violate a topology invariant.
    """
    lines = _meaningful_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError(path, 0, "empty topology file") from None
    parts = header.split()
    if len(parts) != 2 or parts[0] != "atoms":
        raise ParseError(path, lineno, f"expected 'atoms N' header, got '{header}'")
    try:
        n_atoms = int(parts[1])
    except ValueError:
        raise ParseError(path, lineno, f"atom count '{parts[1]}' is not an integer") from None
    if n_atoms < 1:
        raise ParseError(path, lineno, "atom count must be >= 1")

    element, radius, resindex, role = [], [], [], []
    for _ in range(n_atoms):
        try:
            lineno, line = next(lines)
        except StopIteration:
            raise ParseError(path, lineno, f"expected {n_atoms} atom lines, file ended early") from None
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(path, lineno, f"expected 'element radius residue role', got '{line}'")
        el, rad_s, res_s, rl = parts
        try:
            rad = float(rad_s)
        except ValueError:
            raise ParseError(path, lineno, f"radius '{rad_s}' is not a number") from None
        try:
            res = int(res_s)
        except ValueError:
            raise ParseError(path, lineno, f"residue index '{res_s}' is not an integer") from None
        if rl not in BACKBONE_ROLES:
            raise ParseError(path, lineno, f"unknown backbone role '{rl}' (one of {BACKBONE_ROLES})")
        element.append(el)
        radius.append(rad)
        resindex.append(res)
        role.append(rl)

    n_res = resindex[-1] + 1 if resindex else 0
    chi: list[list[ChiQuadruple]] = [[] for _ in range(max(n_res, 0))]
    for lineno, line in lines:
        parts = line.split()
        if parts[0] != "chi":
            raise ParseError(path, lineno, f"unexpected line '{line}' after atom block")
        if len(parts) != 6:
            raise ParseError(path, lineno, "expected 'chi residue i1 i2 i3 i4'")
        try:
            vals = [int(p) for p in parts[1:]]
        except ValueError:
            raise ParseError(path, lineno, f"non-integer field in '{line}'") from None
        r = vals[0]
        if not (0 <= r < n_res):
            raise ValidationError(f"chi line {lineno}: residue {r} out of range")
        chi[r].append(tuple(vals[1:]))

    topo = Topology(
        element=tuple(element),
        vdw_radius=np.asarray(radius, dtype=np.float64),
        residue_index=np.asarray(resindex, dtype=np.int64),
        backbone_role=tuple(role),
        chi_chain=tuple(tuple(q) for q in chi),
    )
    topo.validate()
    return topo


def load_trajectory(path, topology: Topology, dt: float = 1.0) -> Trajectory:
    """Parse a multi-frame coordinate file against ``topology``.

    The file holds one ``frame i`` header per frame followed by one
    ``x y z`` line per atom; an optional ``dt value`` line may precede the
    first frame and overrides the ``dt`` argument.
    """
    frames: list[list[list[float]]] = []
    current: list[list[float]] | None = None
    n_atoms = topology.atom_count

    for lineno, line in _meaningful_lines(path):
        parts = line.split()
        if parts[0] == "dt":
            if frames or current is not None:
                raise ParseError(path, lineno, "dt line must come before the first frame")
            if len(parts) != 2:
                raise ParseError(path, lineno, "expected 'dt value'")
            try:
                dt = float(parts[1])
            except ValueError:
                raise ParseError(path, lineno, f"dt '{parts[1]}' is not a number") from None
            continue
        if parts[0] == "frame":
            if current is not None:
                if len(current) != n_atoms:
                    raise ParseError(
                        path, lineno,
                        f"frame {len(frames)} has {len(current)} coordinate lines, expected {n_atoms}",
                    )
                frames.append(current)
            if len(parts) != 2 or not parts[1].lstrip("-").isdigit():
                raise ParseError(path, lineno, f"expected 'frame i', got '{line}'")
            if int(parts[1]) != len(frames):
                raise ParseError(
                    path, lineno,
                    f"frame index {parts[1]} out of order (expected {len(frames)})",
                )
            current = []
            continue
        if current is None:
            raise ParseError(path, lineno, f"coordinates before any 'frame' header: '{line}'")
        if len(parts) != 3:
            raise ParseError(path, lineno, f"expected 'x y z', got '{line}'")
        try:
            current.append([float(p) for p in parts])
        except ValueError:
            raise ParseError(path, lineno, f"non-numeric coordinate in '{line}'") from None
        if len(current) > n_atoms:
            raise ParseError(path, lineno, f"frame {len(frames)} has more than {n_atoms} coordinate lines")

    if current is not None:
        if len(current) != n_atoms:
            raise ParseError(
                path, 0, f"last frame has {len(current)} coordinate lines, expected {n_atoms}"
            )
        frames.append(current)
    if not frames:
        raise ParseError(path, 0, "trajectory file contains no frames")

    traj = Trajectory(topology=topology, frames=np.asarray(frames, dtype=np.float64), dt=dt)
    traj.validate()
    return traj


def write_trajectory(traj: Trajectory, path) -> None:
    """Write ``traj`` in the documented format; exact float round-trip."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dt {float(traj.dt)!r}\n")
        for f in range(traj.n_frames):
            fh.write(f"frame {f}\n")
            for atom in traj.frames[f]:
                x, y, z = (float(v) for v in atom)
                fh.write(f"{x!r} {y!r} {z!r}\n")
