import json

import numpy as np
import pytest

from gwtails import __version__
from gwtails.presets import get_preset
from gwtails.profile import COLUMNS, DensityProfile, provenance_lines


def test_disagreement_pairs():
    x = np.linspace(0, 1, 5)
    prof = DensityProfile(x, p_integral=x, p_right=x + 0.25, p_left=None)
    assert prof.disagreement() == {"p_integral-p_right": pytest.approx(0.25)}
    prof.p_left = x - 0.5
    d = prof.disagreement()
    assert set(d) == {"p_integral-p_right", "p_integral-p_left", "p_right-p_left"}
    assert d["p_right-p_left"] == pytest.approx(0.75)


def test_csv_roundtrip_with_missing_column(tmp_path):
    x = np.array([0.1, 0.2, 0.3])
    prof = DensityProfile(x, p_integral=np.array([1.0, 2.0, 1 / 3]), p_left=np.array([1.0, 2.0, 0.3]))
    f = tmp_path / "d.csv"
    prof.to_csv(f, header=["one", "two"])
    lines = f.read_text().splitlines()
    assert lines[:2] == ["# one", "# two"]
    assert lines[2].startswith("# max|p_integral-p_left| = ")
    assert lines[3] == "x," + ",".join(COLUMNS)
    assert lines[4].split(",")[2] == ""
    back = DensityProfile.from_csv(f)
    np.testing.assert_array_equal(back.x, x)
    np.testing.assert_array_equal(back.p_integral, prof.p_integral)
    assert back.p_right is None


def test_provenance_lines():
    m = get_preset("example2").model()
    lines = provenance_lines(m, "density", {"b": 2, "a": 1})
    assert lines[0] == f"gwtails {__version__}"
    assert lines[1] == "command: density"
    assert f"hash={m.model_hash()}" in lines[2]
    assert json.loads(lines[2].split(" ", 3)[3]) == m.to_json()
    assert lines[3] == 'parameters: {"a": 1, "b": 2}'
