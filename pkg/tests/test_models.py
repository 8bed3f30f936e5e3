import json
from pathlib import Path

import numpy as np
import pytest

from conftest import SIGMA_MINUS
from hpflow.models import ModelError, PRESETS, load_model, model_from_dict, model_to_dict, preset

DATA = Path(__file__).parent / "data"


def test_amplitude_damping_preset():
    m = preset("amplitude-damping")
    assert m.dim_h == 2
    np.testing.assert_array_equal(m.H, 0)
    np.testing.assert_array_equal(m.L[0], SIGMA_MINUS)


def test_presets_cover_required_set():
    assert set(PRESETS) == {"amplitude-damping", "dephasing", "random", "pure-hamiltonian"}
    np.testing.assert_allclose(preset("dephasing").L[0], np.diag([1, -1]) / np.sqrt(2))
    assert preset("pure-hamiltonian").d == 0


def test_random_preset_matches_golden_file():
    golden = model_from_dict(json.loads((DATA / "random_seed42.json").read_text()))
    m = preset("random", 42)
    assert (m.dim_h, m.d) == (3, 2)
    np.testing.assert_array_equal(m.H, golden.H)
    for a, b in zip(m.L, golden.L):
        np.testing.assert_array_equal(a, b)
    assert not np.array_equal(preset("random", 7).H, m.H)


def test_roundtrip_through_file(tmp_path):
    m = preset("random")
    path = tmp_path / "model.yaml"
    path.write_text(json.dumps(model_to_dict(m)))
    loaded = load_model(path)
    np.testing.assert_array_equal(loaded.H, m.H)
    assert load_model("dephasing").d == 1


def _doc(**over):
    doc = {"schema_version": 1, "dim_h": 2, "H": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]], "L": []}
    doc.update(over)
    return doc


@pytest.mark.parametrize(
    "doc, field, text",
    [
        (_doc(H=[[[0, 0], [0, 0], [0, 0]], [[0, 0], [0, 0], [0, 0]]]), "model.H", "2x2"),
        (_doc(H=[[[0, 0], [1, 0]], [[0, 0], [0, 0]]]), "model.H", "H not self-adjoint"),
        (_doc(dim_h=0), "model.dim_h", "positive"),
        (_doc(L=[[[[0, 0]]]]), "model.L[0]", "2x2"),
        (_doc(schema_version=9), "model.schema_version", "unsupported"),
        ({"dim_h": 2}, "model.H", "missing"),
        (_doc(H="abc"), "model.H", "[re, im]"),
    ],
)
def test_validation_errors(doc, field, text):
    with pytest.raises(ModelError) as info:
        model_from_dict(doc)
    assert info.value.field == field
    assert text in str(info.value)


def test_unknown_preset_and_missing_file():
    with pytest.raises(ModelError, match="unknown preset"):
        preset("nope")
    with pytest.raises(ModelError):
        load_model("/nonexistent/model.yaml")
