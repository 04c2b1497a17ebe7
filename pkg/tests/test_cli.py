import hashlib

import numpy as np
import pytest

from phblowup.cli import main, run_command
from phblowup.config import PRESETS, format_matrix, parse_config, parse_matrix, preset_text
from phblowup.errors import ConfigError
from phblowup.systems import ConnectedSum, ModelSystem, Suspension
from phblowup.verifier.reports import PH_HEADER, read_csv

SMALL = """[system]
variant = product
A = [[1.2, 0], [0, 0.8333333333333334]]
B = [[2, 1], [1, 1]]

[verify]
n_max = 10
samples = 64
seed = 3
iters = 60
eps_list = [0.2, 0.1]
regions = core

[output]
dir = out
"""


@pytest.fixture
def small(tmp_path):
    path = tmp_path / "small.ini"
    path.write_text(SMALL)
    return path


def test_examples_writes_six_presets_idempotently(tmp_path):
    out = tmp_path / "ex"
    assert main(["examples", "--out", str(out)]) == 0
    files = sorted(p.name for p in out.iterdir())
    assert files == sorted(f"{n}.ini" for n in PRESETS) and len(files) == 6
    stamps = {p.name: (p.read_bytes(), p.stat().st_mtime_ns) for p in out.iterdir()}
    assert main(["examples", "--out", str(out)]) == 0
    assert {p.name: (p.read_bytes(), p.stat().st_mtime_ns) for p in out.iterdir()} == stamps


@pytest.mark.parametrize("name", list(PRESETS))
def test_presets_parse_and_build(name):
    cfg = parse_config(preset_text(name))
    obj = cfg.build()
    expected = {"double": ConnectedSum, "suspension": Suspension}.get(name, ModelSystem)
    assert isinstance(obj, expected)


def test_certify_outputs_are_byte_identical(small, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["certify", "--config", str(small), "--out", str(a)]) == 0
    assert main(["certify", "--config", str(small), "--out", str(b)]) == 0
    assert (a / "ph.csv").read_bytes() == (b / "ph.csv").read_bytes()
    meta, header, rows = read_csv(a / "ph.csv")
    assert meta["config_sha256"] == hashlib.sha256(SMALL.encode()).hexdigest()
    assert meta["seed"] == "3"
    assert header == PH_HEADER and [r[0] for r in rows] == ["stable", "center", "unstable"]


def test_seed_flag_overrides_config(small, tmp_path):
    assert main(["sweep", "--config", str(small), "--seed", "11", "--out", str(tmp_path)]) in (0, 2)
    meta, _, rows = read_csv(tmp_path / "sweep.csv")
    assert meta["seed"] == "11" and len(rows) == 2


def test_lemma_writes_one_block_per_region(small, tmp_path):
    assert run_command(["lemma", "--config", str(small), "--out", str(tmp_path)]) == 0
    _, _, rows = read_csv(tmp_path / "rates.csv")
    assert len(rows) == 10


def test_gluecheck_passes_on_double(tmp_path):
    cfg = tmp_path / "d.ini"
    cfg.write_text(preset_text("double").replace("samples = 1000", "samples = 200"))
    assert main(["gluecheck", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    _, header, rows = read_csv(tmp_path / "seam.csv")
    assert header == ("metric", "value")
    assert {r[0] for r in rows} == {"one_sided_gap", "analytic_gap", "swap_gap"}


def test_summary_prints_table(small, tmp_path, capsys):
    main(["sweep", "--config", str(small), "--out", str(tmp_path), "--summary"])
    out = capsys.readouterr().out
    assert "C_emp" in out and "spread" in out


@pytest.mark.parametrize("argv", [
    ["bogus", "--preset", "product"],
    ["certify", "--config", "/nonexistent/run.ini"],
    ["certify"],
    ["certify", "--preset", "nope"],
])
def test_bad_invocations_exit_1(argv, capsys):
    assert main(argv) == 1


def test_certify_rejects_connected_sum(tmp_path):
    assert main(["certify", "--preset", "double", "--out", str(tmp_path)]) == 1


@pytest.mark.parametrize("text", [
    "[verify]\nn_max = 3\n",
    "[system]\nvariant = torus\nA = [[2, 0], [0, 0.5]]\nB = [[2, 1], [1, 1]]\n",
    "[system]\nvariant = product\nA = [[2, 0], [0, 0.5]]\n",
    "[system]\nvariant = product\nA = [[1, 0], [0, 1]]\nB = [[2, 1], [1, 1]]\n",
    "[system]\nvariant = product\nA = [[2, 0], [0, 0.5]]\nB = [[2, 1], [1, 1]]\n[verify]\nn_max = ten\n",
    "[system]\nvariant = product\nA = [[2, 0]\nB = [[2, 1], [1, 1]]\n",
    "[system]\nvariant = product\nA = [[1.2, 0], [0, 0.8333333333333334]]\nB = [[2, 1], [1, 1]]\n"
    "[output]\nformats = csv, png\n",
])
def test_invalid_configs_raise(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_complex_matrix_round_trip():
    A = np.array([[1.2 * np.exp(0.3j), 0.1], [0, np.exp(-0.5j) / 1.2]])
    back = parse_matrix(format_matrix(A))
    assert np.iscomplexobj(back) and np.array_equal(back, A)
    assert parse_matrix("[[2, 1], [1, 1]]").dtype == float
    with pytest.raises(ConfigError):
        parse_matrix("[[[1, 2, 3], 0], [0, 1]]")
