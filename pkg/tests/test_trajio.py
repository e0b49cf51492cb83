import numpy as np
import pytest

from moscito.errors import ParseError, ValidationError
from moscito.trajio import load_topology, load_trajectory, write_trajectory

MINIMAL_TOPOLOGY = """\
atoms 2
C 1.7 0 CA
C 1.7 1 CA
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_minimal_topology(tmp_path):
    topo = load_topology(write(tmp_path, "t.top", MINIMAL_TOPOLOGY))
    assert topo.atom_count == 2
    assert topo.residue_count == 2
    assert topo.element == ("C", "C")
    assert list(topo.ca_atoms()) == [0, 1]


def test_decreasing_residue_index_rejected(tmp_path):
    text = "atoms 3\nC 1.7 0 CA\nC 1.7 1 CA\nC 1.7 0 CA\n"
    with pytest.raises(ValidationError):
        load_topology(write(tmp_path, "t.top", text))


def test_negative_radius_rejected(tmp_path):
    text = "atoms 1\nC -1.0 0 CA\n"
    with pytest.raises(ValidationError):
        load_topology(write(tmp_path, "t.top", text))


def test_parse_errors_carry_line_numbers(tmp_path):
    with pytest.raises(ParseError) as err:
        load_topology(write(tmp_path, "t.top", "atoms two\n"))
    assert err.value.line == 1

    with pytest.raises(ParseError) as err:
        load_topology(write(tmp_path, "t.top", "atoms 1\nC 1.7 0 WAT\n"))
    assert err.value.line == 2

    with pytest.raises(ParseError) as err:
        load_topology(write(tmp_path, "t.top", "atoms 1\nC abc 0 CA\n"))
    assert err.value.line == 2


def test_duplicate_backbone_role_rejected(tmp_path):
    text = "atoms 2\nC 1.7 0 CA\nC 1.7 0 CA\n"
    with pytest.raises(ValidationError):
        load_topology(write(tmp_path, "t.top", text))


def test_chi_block_parsing(tmp_path):
    text = "atoms 4\nN 1.55 0 N\nC 1.7 0 CA\nC 1.7 0 C\nC 1.7 0 side_chain\nchi 0 0 1 2 3\n"
    topo = load_topology(write(tmp_path, "t.top", text))
    assert topo.chi_chain == (((0, 1, 2, 3),),)

    bad = text.replace("chi 0 0 1 2 3", "chi 0 0 1 2 9")
    with pytest.raises(ValidationError):
        load_topology(write(tmp_path, "t.top", bad))


def test_minimal_trajectory(tmp_path):
    topo = load_topology(write(tmp_path, "t.top", MINIMAL_TOPOLOGY))
    text = "frame 0\n0 0 0\n1 0 0\nframe 1\n0 0 1\n1 0 1\n"
    traj = load_trajectory(write(tmp_path, "t.trj", text), topo)
    assert traj.n_frames == 2
    assert traj.frames[1, 1, 2] == 1.0


def test_trajectory_errors(tmp_path):
    topo = load_topology(write(tmp_path, "t.top", MINIMAL_TOPOLOGY))
    with pytest.raises(ParseError):  # short frame
        load_trajectory(write(tmp_path, "a.trj", "frame 0\n0 0 0\n"), topo)
    with pytest.raises(ParseError):  # non-numeric coordinate
        load_trajectory(write(tmp_path, "b.trj", "frame 0\n0 0 x\n1 0 0\n"), topo)
    with pytest.raises(ParseError):  # zero frames
        load_trajectory(write(tmp_path, "c.trj", "\n"), topo)
    with pytest.raises(ParseError):  # out-of-order frame index
        load_trajectory(write(tmp_path, "d.trj", "frame 1\n0 0 0\n1 0 0\n"), topo)


def test_scientific_notation_and_dt(tmp_path):
    topo = load_topology(write(tmp_path, "t.top", MINIMAL_TOPOLOGY))
    text = "dt 0.25\nframe 0\n1e-3 -2.5E2 0\n1 0 0\n"
    traj = load_trajectory(write(tmp_path, "t.trj", text), topo)
    assert traj.dt == 0.25
    assert traj.frames[0, 0, 0] == 1e-3
    assert traj.frames[0, 0, 1] == -250.0


def test_round_trip_is_identity(tmp_path):
    topo = load_topology(write(tmp_path, "t.top", MINIMAL_TOPOLOGY))
    rng = np.random.default_rng(0)
    frames = rng.standard_normal((3, 2, 3)) * 17.3
    from moscito.trajio import Trajectory

    traj = Trajectory(topology=topo, frames=frames, dt=0.125)
    path = tmp_path / "rt.trj"
    write_trajectory(traj, path)
    back = load_trajectory(path, topo)
    assert back.dt == traj.dt
    assert np.array_equal(back.frames, traj.frames)  # exact, not approximate

    # writing the reloaded value reproduces the file byte for byte
    path2 = tmp_path / "rt2.trj"
    write_trajectory(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_unknown_element_symbols_allowed(tmp_path):
    text = "atoms 2\nXx 2.1 0 CA\nQq 1.1 1 CA\n"
    topo = load_topology(write(tmp_path, "t.top", text))
    assert topo.element == ("Xx", "Qq")


def test_loaders_are_pure(tmp_path):
    path = write(tmp_path, "t.top", MINIMAL_TOPOLOGY)
    a = load_topology(path)
    b = load_topology(path)
    assert a.element == b.element
    assert np.array_equal(a.vdw_radius, b.vdw_radius)
    assert np.array_equal(a.residue_index, b.residue_index)
