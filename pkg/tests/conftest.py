import numpy as np
import pytest

from moscito.trajio import Topology, Trajectory


def make_topology(n_atoms, elements=None, radii=None, residues=None, roles=None, chi=None):
    """Hand-built topology with convenient defaults for geometry tests."""
    elements = elements or ["C"] * n_atoms
    radii = radii if radii is not None else [1.5] * n_atoms
    residues = residues if residues is not None else [0] * n_atoms
    roles = roles or (["CA"] + ["side_chain"] * (n_atoms - 1))
    n_res = residues[-1] + 1
    chi = chi if chi is not None else tuple(() for _ in range(n_res))
    topo = Topology(
        element=tuple(elements),
        vdw_radius=np.asarray(radii, dtype=np.float64),
        residue_index=np.asarray(residues, dtype=np.int64),
        backbone_role=tuple(roles),
        chi_chain=tuple(tuple(q) for q in chi),
    )
    topo.validate()
    return topo


def make_trajectory(topo, frames):
    traj = Trajectory(topology=topo, frames=np.asarray(frames, dtype=np.float64))
    traj.validate()
    return traj


@pytest.fixture
def backbone3():
    """Three-residue N/CA/C chain whose psi_1 torsion is exactly +pi/2."""
    topo = make_topology(
        9,
        residues=[0, 0, 0, 1, 1, 1, 2, 2, 2],
        roles=["N", "CA", "C"] * 3,
        elements=["N", "C", "C"] * 3,
    )
    coords = np.array(
        [
            [-2.0, 0.5, 0.3],   # N0
            [-1.5, -0.2, 0.0],  # CA0
            [-1.0, 0.8, 0.2],   # C0
            [0.0, 1.0, 0.0],    # N1
            [0.0, 0.0, 0.0],    # CA1
            [1.0, 0.0, 0.0],    # C1
            [1.0, 0.0, 1.0],    # N2
            [1.5, 0.7, 1.2],    # CA2
            [2.2, 0.3, 1.0],    # C2
        ]
    )
    return make_trajectory(topo, coords[None])


def rotation_matrix(axis, angle):
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    K = np.array(
        [[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]]
    )
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def random_rotation(rng):
    A = rng.standard_normal((3, 3))
    Q, R = np.linalg.qr(A)
    Q = Q @ np.diag(np.sign(np.diag(R)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q
