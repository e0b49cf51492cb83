"""Featurizers turning a Trajectory into the data matrix X.

X has one row per feature dimension and one column per time step. Six
featurizers are available (aligned C-alpha coordinates, backbone torsions,
heavy-atom minimum distances, side-chain torsions, per-residue SASA, and 3-D
shape histograms); ``assemble_features`` concatenates any subset row-wise in
a fixed canonical order.

Torsion, distance and SASA features depend only on internal geometry, so a
global rotation of the input leaves them unchanged. SASA achieves this
exactly by orienting its sphere point set along the frame's principal axes
(exact for frames with non-degenerate axes); the coordinate featurizer
canonicalizes the aligned pose the same way.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FeaturizerError, MoscitoError, ValidationError
from .trajio import Trajectory

CANONICAL_ORDER = ("coords", "backbone", "distances", "flex", "sasa", "shape")

SCALINGS = ("raw", "minmax01")


@dataclass
class FeatureMatrix:
    """Feature values (d_feat x n), per-row labels, and the applied scaling."""

    values: np.ndarray
    feature_labels: list[tuple[str, int]] = field(default_factory=list)
    scaling: str = "raw"

    @property
    def d_feat(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def validate(self) -> None:
        if self.values.ndim != 2:
            raise ValidationError(f"values must be 2-D, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("feature matrix contains non-finite values")
        if len(self.feature_labels) != self.d_feat:
            raise ValidationError(
                f"{len(self.feature_labels)} labels for {self.d_feat} feature rows"
            )
        if self.scaling not in SCALINGS:
            raise ValidationError(f"unknown scaling '{self.scaling}'")
        if self.scaling == "minmax01" and self.values.size:
            if self.values.min() < -1e-12 or self.values.max() > 1 + 1e-12:
                raise ValidationError("minmax01 matrix has entries outside [0, 1]")


# ---------------------------------------------------------------------------
# serialization

_BINARY_MAGIC = b"FMAT"


def write_feature_csv(fm: FeatureMatrix, path) -> None:
    """Write the documented CSV: a label header row, then one row per
    feature with one column per time step. Floats use shortest round-trip
    formatting, so identical matrices produce identical bytes."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(f"{name}:{idx}" for name, idx in fm.feature_labels) + "\n")
        for row in fm.values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_feature_csv(path, scaling: str = "raw") -> FeatureMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        labels = []
        for item in header.split(","):
            if item:
                name, _, idx = item.rpartition(":")
                labels.append((name, int(idx)))
        rows = [[float(v) for v in line.strip().split(",")] for line in fh if line.strip()]
    fm = FeatureMatrix(np.asarray(rows, dtype=np.float64), labels, scaling)
    fm.validate()
    return fm


def write_matrix_binary(values: np.ndarray, path) -> None:
    """Little-endian binary matrix: magic, version, rows, cols, row-major f64."""
    values = np.ascontiguousarray(values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_BINARY_MAGIC)
        fh.write(struct.pack("<IQQ", 1, values.shape[0], values.shape[1]))
        fh.write(values.tobytes())


def read_matrix_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _BINARY_MAGIC:
            raise ValidationError(f"bad magic {magic!r} in binary matrix file")
        version, rows, cols = struct.unpack("<IQQ", fh.read(20))
        if version != 1:
            raise ValidationError(f"unsupported binary matrix version {version}")
        data = np.frombuffer(fh.read(rows * cols * 8), dtype="<f8")
    return data.reshape(rows, cols).copy()


# ---------------------------------------------------------------------------
# rigid-body alignment

def kabsch_rotation(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Optimal least-squares rotation R (det +1) with P @ R ~= Q.

    Both point sets must already be centered on the origin.
    """
    C = P.T @ Q
    U, _, Vt = np.linalg.svd(C)
    d = np.sign(np.linalg.det(U @ Vt))
    return U @ np.diag([1.0, 1.0, d]) @ Vt


def rmsd(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.sum((A - B) ** 2, axis=-1))))


def center_and_align(traj: Trajectory, subset=None) -> Trajectory:
    """Center every frame on its subset centroid and rotate frames 1.. onto
    frame 0 with the optimal rigid rotation computed on the subset.

    ``subset`` defaults to all C-alpha atoms and must contain at least three
    atoms, otherwise the rotation is under-determined.
    """
    if subset is None:
        subset = traj.topology.ca_atoms()
    subset = np.asarray(subset, dtype=np.int64)
    if subset.size < 3:
        raise ValidationError(
            f"alignment subset has {subset.size} atoms; need at least 3"
        )
    frames = traj.frames.copy()
    centroids = frames[:, subset, :].mean(axis=1)
    frames -= centroids[:, None, :]
    ref = frames[0, subset, :]
    for f in range(1, frames.shape[0]):
        R = kabsch_rotation(frames[f, subset, :], ref)
        frames[f] = frames[f] @ R
    return Trajectory(topology=traj.topology, frames=frames, dt=traj.dt)


def _principal_orientation(coords: np.ndarray) -> np.ndarray:
    """Orthonormal axes of the centered point set, with data-driven signs.

    Covariant under global rotation (for non-degenerate gyration spectra),
    which makes point-sampling estimators built on it rotation invariant.
    """
    X = coords - coords.mean(axis=0)
    T = X.T @ X
    _, Q = np.linalg.eigh(T)
    proj = X @ Q
    for k in range(3):
        j = int(np.argmax(np.abs(proj[:, k])))
        if proj[j, k] < 0:
            Q[:, k] = -Q[:, k]
    return Q


# ---------------------------------------------------------------------------
# torsions

def dihedral(p1, p2, p3, p4) -> float:
    """Signed torsion angle in (-pi, pi] for the chain p1-p2-p3-p4.

    Positive angles follow the IUPAC convention (clockwise rotation of p4
    when sighting along p2 -> p3). Raises if either bonded triple is
    collinear, where the torsion plane is undefined.
    """
    angles = _dihedral_frames(
        np.asarray(p1, dtype=np.float64)[None],
        np.asarray(p2, dtype=np.float64)[None],
        np.asarray(p3, dtype=np.float64)[None],
        np.asarray(p4, dtype=np.float64)[None],
    )
    return float(angles[0])


def _dihedral_frames(p1, p2, p3, p4) -> np.ndarray:
    """Vectorized torsion over leading axis; inputs (F, 3)."""
    b1 = p2 - p1
    b2 = p3 - p2
    b3 = p4 - p3
    n1 = np.cross(b1, b2)
    n2 = np.cross(b2, b3)
    b2n = np.linalg.norm(b2, axis=-1)
    if np.any(b2n < 1e-12):
        raise ValidationError("central bond p3 - p2 is zero; torsion undefined")
    scale1 = np.linalg.norm(b1, axis=-1) * b2n
    scale2 = b2n * np.linalg.norm(b3, axis=-1)
    if np.any(np.linalg.norm(n1, axis=-1) < 1e-9 * scale1) or np.any(
        np.linalg.norm(n2, axis=-1) < 1e-9 * scale2
    ):
        raise ValidationError("collinear atoms; torsion plane undefined")
    y = b2n * np.sum(b1 * n2, axis=-1)
    x = np.sum(n1 * n2, axis=-1)
    ang = np.arctan2(y, x)
    # arctan2 lands in [-pi, pi]; fold the lower boundary onto +pi
    ang = np.where(ang <= -np.pi, np.pi, ang)
    return ang


def _torsion_series(traj: Trajectory, quads) -> np.ndarray:
    """Angles (n_quads, n_frames) for atom-index quadruples."""
    F = traj.frames
    out = np.empty((len(quads), traj.n_frames))
    for q, (a, b, c, d) in enumerate(quads):
        out[q] = _dihedral_frames(F[:, a], F[:, b], F[:, c], F[:, d])
    return out


def _angles_to_rows(angles: np.ndarray, representation: str) -> np.ndarray:
    if representation == "raw":
        return angles
    rows = np.empty((2 * angles.shape[0], angles.shape[1]))
    rows[0::2] = np.cos(angles)
    rows[1::2] = np.sin(angles)
    return rows


def backbone_torsions(traj: Trajectory, angles: str = "cossin") -> FeatureMatrix:
    """Phi/psi backbone torsions per frame.

    phi_i = dihedral(C_{i-1}, N_i, CA_i, C_i) for residues i >= 1 and
    psi_i = dihedral(N_i, CA_i, C_i, N_{i+1}) for i <= last-1. Rows hold the
    phi block then the psi block, in residue order. With
    ``angles="cossin"`` (default) each angle contributes adjacent (cos, sin)
    rows; ``"raw"`` emits the bare angle.
    """
    if angles not in ("cossin", "raw"):
        raise ValidationError(f"unknown angle representation '{angles}'")
    topo = traj.topology
    n_res = topo.residue_count
    if n_res < 2:
        raise ValidationError("backbone torsions need at least 2 residues")

    def need(r, role):
        a = topo.backbone_atom(r, role)
        if a is None:
            raise ValidationError(f"residue {r} is missing backbone atom {role}")
        return a

    quads = []
    for i in range(1, n_res):  # phi
        quads.append((need(i - 1, "C"), need(i, "N"), need(i, "CA"), need(i, "C")))
    for i in range(n_res - 1):  # psi
        quads.append((need(i, "N"), need(i, "CA"), need(i, "C"), need(i + 1, "N")))

    rows = _angles_to_rows(_torsion_series(traj, quads), angles)
    labels = [("backbone", i) for i in range(rows.shape[0])]
    return FeatureMatrix(rows, labels, "raw")


def flexible_torsions(traj: Trajectory) -> FeatureMatrix:
    """Side-chain chi torsions as (cos, sin) row pairs per defined quadruple."""
    quads = [quad for per_res in traj.topology.chi_chain for quad in per_res]
    if not quads:
        raise ValidationError("no flexible torsions defined")
    rows = _angles_to_rows(_torsion_series(traj, quads), "cossin")
    labels = [("flex", i) for i in range(rows.shape[0])]
    return FeatureMatrix(rows, labels, "raw")


# ---------------------------------------------------------------------------
# distances

def heavy_atom_min_distances(traj: Trajectory) -> FeatureMatrix:
    """exp(-d) of the minimal heavy-atom distance per residue pair.

    Pairs (i, j) with |i - j| <= 2 are skipped: their distance is fixed by
    bonding rather than conformation. Heavy atoms are all atoms whose
    element is not "H".
    """
    topo = traj.topology
    n_res = topo.residue_count
    if n_res < 4:
        raise ValidationError("minimum-distance features need at least 4 residues")
    heavy = [
        np.asarray([a for a in topo.atoms_of_residue(r) if topo.element[a] != "H"])
        for r in range(n_res)
    ]
    for r, atoms in enumerate(heavy):
        if atoms.size == 0:
            raise ValidationError(f"residue {r} has no heavy atoms")
    pairs = [(i, j) for i in range(n_res) for j in range(i + 3, n_res)]

    rows = np.empty((len(pairs), traj.n_frames))
    for f in range(traj.n_frames):
        coords = traj.frames[f]
        for p, (i, j) in enumerate(pairs):
            a = coords[heavy[i]]
            b = coords[heavy[j]]
            d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)
            rows[p, f] = np.exp(-np.sqrt(d2.min()))
    labels = [("distances", p) for p in range(len(pairs))]
    return FeatureMatrix(rows, labels, "raw")


# ---------------------------------------------------------------------------
# solvent accessible surface area

def unit_sphere_points(n: int) -> np.ndarray:
    """Deterministic golden-spiral point set on the unit sphere, (n, 3)."""
    k = np.arange(n)
    z = 1.0 - (2.0 * k + 1.0) / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = k * np.pi * (3.0 - np.sqrt(5.0))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def sasa_per_residue(
    traj: Trajectory,
    probe_radius: float = 1.4,
    sphere_points: int = 960,
    orient: str = "principal",
) -> FeatureMatrix:
    """Shrake-Rupley solvent accessible surface area summed per residue (A^2).

    Each atom's sphere is expanded by the probe radius and covered with a
    deterministic golden-spiral point set; a point is buried when it lies
    strictly inside any other atom's expanded sphere.

    With ``orient="principal"`` (default) the point set is oriented along
    the frame's principal axes, making the estimate exactly invariant under
    rigid rotations of the frame (for non-degenerate axes). ``"fixed"``
    keeps the global orientation, which instead makes the estimate exactly
    monotone under atom deletion.
    """
    if probe_radius < 0:
        raise ValidationError("probe_radius must be >= 0")
    if sphere_points < 32:
        raise ValidationError("sphere_points must be >= 32")
    if orient not in ("principal", "fixed"):
        raise ValidationError(f"unknown orientation mode '{orient}'")
    topo = traj.topology
    n_atoms = topo.atom_count
    radii = topo.vdw_radius + probe_radius
    base = unit_sphere_points(sphere_points)
    res_of = topo.residue_index

    rows = np.zeros((topo.residue_count, traj.n_frames))
    for f in range(traj.n_frames):
        coords = traj.frames[f]
        if orient == "principal":
            dirs = base @ _principal_orientation(coords).T
        else:
            dirs = base
        centers_d = np.linalg.norm(coords[:, None, :] - coords[None, :, :], axis=-1)
        for a in range(n_atoms):
            neighbors = np.nonzero(
                (centers_d[a] < radii[a] + radii) & (np.arange(n_atoms) != a)
            )[0]
            if neighbors.size == 0:
                accessible = sphere_points
            else:
                pts = coords[a] + radii[a] * dirs
                diff = pts[:, None, :] - coords[neighbors][None, :, :]
                buried = np.any(
                    np.sum(diff * diff, axis=-1) < radii[neighbors] ** 2, axis=1
                )
                accessible = int(sphere_points - buried.sum())
            area = 4.0 * np.pi * radii[a] ** 2 * accessible / sphere_points
            rows[res_of[a], f] += area
    labels = [("sasa", r) for r in range(topo.residue_count)]
    return FeatureMatrix(rows, labels, "raw")


# ---------------------------------------------------------------------------
# shape histogram

def icosahedron_directions() -> np.ndarray:
    """The 12 unit icosahedron vertex directions in canonical order."""
    g = (1.0 + np.sqrt(5.0)) / 2.0
    verts = []
    for a in (1.0, -1.0):
        for b in (g, -g):
            verts.append((a, b, 0.0))
    for a in (1.0, -1.0):
        for b in (g, -g):
            verts.append((0.0, a, b))
    for a in (g, -g):
        for b in (1.0, -1.0):
            verts.append((b, 0.0, a))
    v = np.asarray(verts)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


_N_SHELLS = 5
_N_SECTORS = 12


def shape_histogram(traj: Trajectory) -> FeatureMatrix:
    """Normalized 60-cell occupancy histogram (5 radial shells x 12 sectors).

    Each frame is centered on its centroid; shells split [0, r_max] of that
    frame into equal-width annuli and the sector is the icosahedron vertex
    direction with the largest dot product (smallest index wins ties). An
    atom at the origin counts toward cell (shell 0, sector 0). Cell values
    are atom counts divided by the atom total, so every column sums to 1.
    """
    topo = traj.topology
    if topo.atom_count == 0:
        raise ValidationError("shape histogram needs at least one atom")
    dirs = icosahedron_directions()
    rows = np.zeros((_N_SHELLS * _N_SECTORS, traj.n_frames))
    for f in range(traj.n_frames):
        coords = traj.frames[f] - traj.frames[f].mean(axis=0)
        r = np.linalg.norm(coords, axis=1)
        rmax = r.max()
        counts = np.zeros((_N_SHELLS, _N_SECTORS), dtype=np.int64)
        for a in range(topo.atom_count):
            if r[a] <= 0 or rmax <= 0:
                counts[0, 0] += 1
                continue
            shell = min(int(r[a] * _N_SHELLS / rmax), _N_SHELLS - 1)
            sector = int(np.argmax(dirs @ (coords[a] / r[a])))
            counts[shell, sector] += 1
        rows[:, f] = counts.ravel() / topo.atom_count
    labels = [("shape", i) for i in range(rows.shape[0])]
    return FeatureMatrix(rows, labels, "raw")


# ---------------------------------------------------------------------------
# coordinates and assembly

def cartesian_coords(traj: Trajectory) -> FeatureMatrix:
    """Flattened C-alpha coordinates after centering and alignment to frame 0.

    The aligned pose is rotated into the principal-axes frame of the first
    frame's C-alpha set, making the output independent of any global
    rotation of the input trajectory.
    """
    ca = traj.topology.ca_atoms()
    aligned = center_and_align(traj, ca)
    Q = _principal_orientation(aligned.frames[0, ca, :])
    coords = aligned.frames[:, ca, :] @ Q  # (F, n_ca, 3)
    rows = coords.reshape(traj.n_frames, -1).T
    labels = [("coords", i) for i in range(rows.shape[0])]
    return FeatureMatrix(rows, labels, "raw")


_FEATURIZERS = {
    "coords": cartesian_coords,
    "backbone": backbone_torsions,
    "distances": heavy_atom_min_distances,
    "flex": flexible_torsions,
    "sasa": sasa_per_residue,
    "shape": shape_histogram,
}


def scale_minmax01(values: np.ndarray) -> np.ndarray:
    """Affinely map each row to [0, 1]; constant rows map to 0."""
    lo = values.min(axis=1, keepdims=True)
    span = values.max(axis=1, keepdims=True) - lo
    out = np.zeros_like(values)
    nonconst = span[:, 0] > 0
    out[nonconst] = (values[nonconst] - lo[nonconst]) / span[nonconst]
    return out


def assemble_features(
    traj: Trajectory,
    selection,
    scaling: str = "minmax01",
    angles: str = "cossin",
    probe_radius: float = 1.4,
    sphere_points: int = 960,
) -> FeatureMatrix:
    """Concatenate the selected featurizers row-wise in canonical order.

    ``selection`` is any iterable of featurizer names out of
    ``CANONICAL_ORDER``; the output order never depends on the order given.
    Failures inside a featurizer are re-raised with its name attached.
    """
    names = set(selection)
    if not names:
        raise ValidationError("feature selection must not be empty")
    unknown = names - set(CANONICAL_ORDER)
    if unknown:
        raise ValidationError(f"unknown featurizers: {sorted(unknown)}")
    if scaling not in SCALINGS:
        raise ValidationError(f"unknown scaling '{scaling}'")

    blocks, labels = [], []
    for name in CANONICAL_ORDER:
        if name not in names:
            continue
        try:
            if name == "backbone":
                fm = backbone_torsions(traj, angles=angles)
            elif name == "sasa":
                fm = sasa_per_residue(traj, probe_radius, sphere_points)
            else:
                fm = _FEATURIZERS[name](traj)
        except MoscitoError as e:
            raise FeaturizerError(name, str(e)) from e
        blocks.append(fm.values)
        labels.extend(fm.feature_labels)

    values = np.vstack(blocks)
    if scaling == "minmax01":
        values = scale_minmax01(values)
    out = FeatureMatrix(values, labels, scaling)
    out.validate()
    return out
