"""Python smoke tests for the _sci extension module."""

import json
import math
import os
import subprocess
import tempfile

import pytest

sci = pytest.importorskip("_sci")


def test_cantor_points():
    x = sci.CantorPoint("10|01")
    assert [x.bit_at(i) for i in range(1, 5)] == [1, 0, 0, 1]
    ones = sci.CantorPoint.all_ones()
    assert sci.ultrametric_distance(ones, sci.CantorPoint("110|0")) == 0.125
    assert sci.truncate_2adic(ones, 3) == 7
    # -1 + 1 = 0 in Z_2
    assert sci.add_2adic(ones, 1) == sci.CantorPoint.all_zeros()


def test_maps_and_sections():
    tau0 = sci.translation_map(0)
    assert tau0.kind == "translation"
    sec = sci.assemble_section(tau0, 2, 2)
    assert sec.is_permutation
    assert sci.lower_norm(sec, 0 + 0j, 2) == pytest.approx(1.0, abs=1e-12)
    assert sci.lower_norm(sec, 1j, 2) < 1e-12
    assert sci.verify_character_eigenpair(0, 3, 1) < 1e-12


def test_trees_and_measure():
    tree = sci.silver_tree([0], "1111", 4)
    assert sci.star_counts(tree) == [0, 1, 2, 3]
    f = sci.build_tree_map(tree, "odometer")
    assert sci.check_measure_preservation(f, 8) == 0.0


def test_spectral_sets():
    one = sci.SpectralSet([1 + 0j], 0.0)
    circle = sci.circle_grid(64)
    assert sci.hausdorff_distance(one, circle) == pytest.approx(2.0, abs=1e-3)
    roots = sci.roots_of_unity(4)
    assert len(roots.points) == 4


def test_tower():
    points, mesh, stabilized = sci.run_pseudospectrum_tower(
        json.dumps({"kind": "translation", "r": 0}), 0.05, [22, 26, 30], 2, 2
    )
    target = sci.roots_of_unity(4)
    got = sci.SpectralSet(points, 0.0)
    assert sci.hausdorff_distance(got, target) <= mesh + 0.05 + 2.0 / 30.0
    assert stabilized


def test_xi():
    exact = sci.xi_exact_threshold_random(2, 4, 7)
    value, stabilized = sci.run_xi_tower_threshold_random(2, 4, 7, 8)
    assert value == exact
    assert stabilized


def test_experiment_roundtrip(tmp_path):
    config = {
        "name": "smoke",
        "task": "pseudospectrum",
        "map": {"kind": "identity"},
        "p": 2,
        "epsilon": 0.3,
        "n2": [6, 8],
        "n1_rule": "one_index",
    }
    code, message = sci.run_experiment(json.dumps(config), str(tmp_path))
    assert code == 0, message
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["stabilized"] is True
    assert len(result["final_set"]) >= 1


def test_cli_binary(tmp_path):
    cli = os.environ.get("SCI_CLI")
    if not cli or not os.path.exists(cli):
        pytest.skip("SCI_CLI not provided")
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps(
            {
                "name": "cli-smoke",
                "task": "gadget_check",
                "map": {"kind": "single_toggle", "n": 2, "r": 3},
                "depth": 8,
            }
        )
    )
    out = tmp_path / "out"
    proc = subprocess.run(
        [cli, "gadget", "--config", str(config), "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    report = json.loads((out / "result.json").read_text())
    assert report["pass"] is True
    assert report["perturbation_bound"] == pytest.approx(math.ldexp(1.0, -4))
