import json

import numpy as np
import pytest

from gpbogo.data import (
    dumps,
    load_potential,
    potential_from_dict,
    potential_to_dict,
    save_potential,
    write_csv,
    write_json,
)
from gpbogo.lattice import e_lambda
from gpbogo.potential import fourier_transform
from gpbogo.utils.errors import PreconditionError


def test_save_and_load(tmp_path, potential):
    path = tmp_path / "nested" / "potential.json"
    save_potential(potential, str(path))
    loaded = load_potential(str(path))
    assert loaded.kind == potential.kind
    assert loaded.R == potential.R
    assert fourier_transform(loaded, 2.0) == pytest.approx(fourier_transform(potential, 2.0))


def test_tabulated_default_range():
    pot = potential_from_dict({"kind": "tabulated", "samples": [[0, 2], [0.8, 0]]})
    assert pot.R == 0.8
    assert potential_to_dict(pot)["samples"] == [[0.0, 2.0], [0.8, 0.0]]


@pytest.mark.parametrize(
    "data",
    [
        [1, 2],
        {"V0": 1.0, "R": 1.0},
        {"kind": "gaussian", "V0": 1.0, "R": 1.0},
        {"kind": "square_well", "V0": 1.0},
        {"kind": "tabulated"},
    ],
)
def test_invalid_descriptions(data):
    with pytest.raises(PreconditionError):
        potential_from_dict(data)


def test_bad_files(tmp_path):
    with pytest.raises(PreconditionError):
        load_potential(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{kind: square_well")
    with pytest.raises(PreconditionError):
        load_potential(str(broken))


def test_json_is_deterministic(tmp_path):
    report = {"b": np.float64(1.5), "a": np.arange(3), "ok": np.bool_(True), "n": np.int64(4)}
    text = dumps(report)
    assert text == dumps(dict(reversed(list(report.items()))))
    assert json.loads(text) == {"a": [0, 1, 2], "b": 1.5, "n": 4, "ok": True}
    path = tmp_path / "report.json"
    assert write_json(report, str(path)) == path.read_text()
    assert json.loads(dumps(e_lambda(0, "ewald")))["method"] == "ewald"
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_csv(capsys):
    text = write_csv(["p", "count"], [(0.1, 6), (np.float64(1 / 3), 12)])
    assert capsys.readouterr().out == text
    lines = text.splitlines()
    assert lines == ["p,count", "0.1,6", f"{1 / 3!r},12"]
