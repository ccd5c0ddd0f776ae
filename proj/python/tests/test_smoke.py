import math
import os

import numpy as np
import pytest

import sbshell

EXAMPLES = os.environ.get("SBSHELL_EXAMPLES", os.path.join(os.path.dirname(__file__), "..", "..", "data", "examples"))


def test_cases_listed():
    names = sbshell.list_cases()
    assert "square-shell" in names and "scordelis-lo" in names
    info = sbshell.case_info("hypar-t100")
    assert any(math.isclose(v, -0.93137e-4) for _, v, _ in info["references"])


def test_square_shell_h2_error():
    res = sbshell.run("square-shell", p=3, h="1/4")
    assert res.dof > 0
    assert res.h2 == pytest.approx(1.6228, rel=1e-3)
    assert res.values["peak"][2] == pytest.approx(1.0, abs=2e-3)


def test_lattice_shapes_and_zero_boundary():
    res = sbshell.run("square-shell", p=3, h="1/2")
    lat = res.lattice(2)
    n = lat["position"].shape[0]
    assert lat["displacement"].shape == (n, 3)
    assert lat["cells"].shape[1] == 4
    on_edge = np.isclose(lat["theta"][:, 0], 0.0)
    assert on_edge.any()
    assert np.abs(lat["displacement"][on_edge, 2]).max() < 1e-10


def test_problem_file_and_vtk(tmp_path):
    res = sbshell.run(os.path.join(EXAMPLES, "roof_hole.problem.json"), h="1/2")
    assert res.num_patches == 20
    out = tmp_path / "roof.vtk"
    res.write_vtk(str(out), 2)
    assert out.read_text().startswith("# vtk DataFile")


def test_partition_file(tmp_path):
    centres = sbshell.partition(os.path.join(EXAMPLES, "roof_hole.geometry.json"), str(tmp_path / "b.json"))
    assert len(centres) == 4
    assert (tmp_path / "b.json").exists()


def test_sweep_rates_and_errors():
    _, rates = sbshell.sweep("square-shell", ["1/4", "1/8"], p=3)
    assert 1.8 < rates["h2"] < 2.4
    with pytest.raises(ValueError):
        sbshell.sweep("square-shell", ["1/4"])
    with pytest.raises(ValueError):
        sbshell.run("no-such-case")
    assert sbshell.parse_mesh_size("1/8") == 8
