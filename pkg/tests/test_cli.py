import io
import math
import sys
from pathlib import Path

import pytest

from main import resolve_workers, run
from utils.errors import UsageError


@pytest.fixture
def files(tmp_path):
    def make(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return make


def test_scan1d_series8(files, capsys):
    series = files("series8.csv", "3,1,7,0,4,1,6,3\n")
    config = files("sum.yaml", "instance: sum\n")
    assert run(["scan1d", "--input", series, "--config", config, "--workers", "2"]) == 0
    assert capsys.readouterr().out == "0,3,4,11,11,15,16,22,25\n"


def test_scan1d_interval(files, capsys):
    series = files("series8.csv", "3,1,7,0,4,1,6,3\n")
    config = files("sum.yaml", "instance: sum\n")
    assert run(["scan1d", "--input", series, "--config", config, "--interval", "2", "2"]) == 0
    assert run(["scan1d", "--input", series, "--config", config, "--interval", "2", "5"]) == 0
    assert capsys.readouterr().out == "0\n11\n"


def test_scan1d_output_is_worker_independent(files, capsys):
    series = files("s.csv", "\n".join(f"{(k * 37) % 11 - 5}.25" for k in range(50)) + "\n")
    config = files("mat.yaml", "instance: mat\nsemiring: tropical\nmat:\n  dims: [1, 2, 3]\n")
    outputs = []
    for workers in ("1", "3", "8"):
        assert run(["scan1d", "--input", series, "--config", config, "--workers", workers]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1] == outputs[2]
    assert outputs[0].startswith("[0,0] 1x1\n0.0\n")


def float_series(count):
    return "\n".join(f"{0.5 + 0.25 * math.sin(0.7 * k):.6f}" for k in range(count)) + "\n"


@pytest.mark.parametrize("config_text", [
    "instance: ssm\n",
    "instance: mat\nmat:\n  dims: [2]\n",
    "instance: iis\ntruncation: 3\n",
], ids=["ssm", "real-mat", "iis"])
def test_float_output_is_byte_identical_across_workers(files, capsys, config_text):
    series = files("s.csv", float_series(300))
    config = files("c.yaml", config_text)
    outputs = []
    for workers in ("1", "4", "7"):
        assert run(["scan1d", "--input", series, "--config", config, "--workers", workers]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1] == outputs[2]
    assert outputs[0].count("\n") > 300


def test_chunk_size_from_config(files, capsys):
    series = files("series8.csv", "3,1,7,0,4,1,6,3\n")
    config = files("sum.yaml", "instance: sum\nchunk_size: 3\n")
    assert run(["scan1d", "--input", series, "--config", config, "--workers", "2"]) == 0
    assert capsys.readouterr().out == "0,3,4,11,11,15,16,22,25\n"


def test_run_twice_after_stderr_was_closed(files, monkeypatch, capsys):
    series = files("series8.csv", "3,1,7,0,4,1,6,3\n")
    config = files("sum.yaml", "instance: sum\n")
    argv = ["-v", "scan1d", "--input", series, "--config", config, "--workers", "2"]

    first = io.StringIO()
    monkeypatch.setattr(sys, "stderr", first)
    assert run(argv) == 0
    first.close()

    second = io.StringIO()
    monkeypatch.setattr(sys, "stderr", second)
    assert run(argv) == 0
    assert "Built sum assignment with 8 cells" in second.getvalue()
    assert capsys.readouterr().out == "0,3,4,11,11,15,16,22,25\n" * 2


def test_scan1d_signature_blocks(files, capsys):
    series = files("s.csv", "1\n2\n")
    config = files("iss.yaml", "instance: iss\ntruncation: 2\n")
    assert run(["scan1d", "--input", series, "--config", config, "--workers", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "[0,0] words=1"
    assert out[1] == "e,1"
    assert "1,3" in out and "1.1,2" in out


def test_scan2d_rect_sum(files, capsys):
    image = files("ones.csv", "3 3 1\n" + "1\n" * 9)
    config = files("a.yaml", "instance: abelian2d\n")
    assert run(["scan2d", "--input", image, "--config", config, "--rect", "0", "3", "0", "3"]) == 0
    assert run(["scan2d", "--input", image, "--config", config, "--rect", "1", "2", "0", "3"]) == 0
    assert capsys.readouterr().out == "9.0\n3.0\n"


def test_scan2d_max_rect(files, capsys):
    image = files("v.csv", "2 2 1\n1\n5\n4\n-2\n")
    config = files("a.yaml", "instance: abelian2d\nabelian_op: max\n")
    assert run(["scan2d", "--input", image, "--config", config, "--rect", "1", "2", "0", "2"]) == 0
    assert capsys.readouterr().out == "4.0\n"


def test_scan2d_prefix_grid_is_worker_independent(files, capsys):
    image = files("ones.csv", "2 2 1\n" + "1\n" * 4)
    config = files("a.yaml", "instance: abelian2d\n")
    outputs = []
    for workers in ("1", "4"):
        assert run(["scan2d", "--input", image, "--config", config, "--workers", workers]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    lines = outputs[0].splitlines()
    assert len(lines) == 3
    assert lines[2].split(",")[2] == "4.0"


def test_scan2d_glimage_rect(files, capsys):
    pixels = "\n".join(f"{0.1 * k:.1f},{0.05 * k:.2f},0.2" for k in range(9))
    image = files("rgb.csv", "3 3 3\n" + pixels + "\n")
    config = files("g.yaml", "instance: glimage\n")
    assert run(["scan2d", "--input", image, "--config", config, "--rect", "0", "2", "0", "2",
                "--strategy", "leftmost"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "value 3x5"
    assert len(out) == 4


@pytest.mark.parametrize("argv", [
    [],
    ["scan1d"],
    ["scan1d", "--input", "x.csv"],
    ["transform", "--config", "c.yaml"],
    ["scan2d", "--input", "x", "--config", "c", "--rect", "0", "1"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert run(argv) == 1
    assert capsys.readouterr().err.startswith("error: ")


def test_config_errors_exit_1(files, capsys):
    series = files("s.csv", "1,2\n")
    assert run(["scan1d", "--input", series, "--config", files("c.yaml", "instance: median\n")]) == 1
    assert run(["scan1d", "--input", series, "--config", "nowhere.yaml"]) == 1
    assert "error:" in capsys.readouterr().err


def test_validation_errors_exit_2(files, capsys):
    series = files("s.csv", "3,1,7,0,4,1,6,3\n")
    config = files("sum.yaml", "instance: sum\n")
    assert run(["scan1d", "--input", series, "--config", config, "--interval", "0", "9"]) == 2
    assert run(["scan1d", "--input", series, "--config", config, "--interval", "3", "2"]) == 2

    rgb = files("rgb.csv", "1 2 3\n0,0,0\n1,1,1\n")
    abelian = files("a.yaml", "instance: abelian2d\n")
    assert run(["scan2d", "--input", rgb, "--config", abelian]) == 2

    ones = files("ones.csv", "2 2 1\n1\n1\n1\n1\n")
    assert run(["scan2d", "--input", ones, "--config", abelian, "--rect", "0", "3", "0", "1"]) == 2
    assert capsys.readouterr().out == ""


def test_numeric_errors_exit_3(files, capsys):
    series = files("s.csv", "0,0.5,1\n")
    config = files("ssm.yaml", "instance: ssm\nssm:\n  A: [[[.inf]]]\n")
    assert run(["scan1d", "--input", series, "--config", config]) == 3
    assert "non-finite" in capsys.readouterr().err


def test_check_passes(files, capsys):
    config = files("gl.yaml", "instance: glimage\nseed: 3\n")
    assert run(["check", "--config", config, "--samples", "20"]) == 0
    lines = capsys.readouterr().out.splitlines()
    names = [line.split()[0] for line in lines]
    assert names[:6] == ["FEEDBACK_HOM", "ACTION_HOM", "ACTION_COMPOSE", "ACTION_UNIT", "EQUI", "PEIF"]
    assert "INTERCHANGE" in names
    assert all(line.split()[2] == "0" for line in lines)


def test_check_normal_subgroup_config(capsys):
    config = Path(__file__).resolve().parent.parent / "src" / "config" / "normal_subgroup.yaml"
    assert run(["check", "--config", str(config), "--samples", "25", "--seed", "4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert {"EQUI", "PEIF", "INTERCHANGE"} <= {line.split()[0] for line in lines}
    assert all(line.split()[2] == "0" for line in lines)


def test_check_with_grid(files, capsys):
    image = files("v.csv", "2 2 1\n1\n5\n4\n-2\n")
    config = files("a.yaml", "instance: abelian2d\n")
    assert run(["check", "--config", config, "--samples", "5", "--input", image]) == 0
    last = capsys.readouterr().out.splitlines()[-1]
    assert last == "GRID_BOUNDARY 0.000e+00 0"


def test_bench_rows(capsys):
    assert run(["bench", "--sizes", "8", "--workers", "1", "2", "--dim", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "size,workers,seconds,compositions_per_second,speedup"
    assert [line.split(",")[:2] for line in lines[1:]] == [["8", "1"], ["8", "2"]]


def test_worker_resolution(monkeypatch):
    monkeypatch.setenv("FSCAN_WORKERS", "5")
    assert resolve_workers(None) == 5
    assert resolve_workers(2) == 2
    with pytest.raises(UsageError):
        resolve_workers(0)
