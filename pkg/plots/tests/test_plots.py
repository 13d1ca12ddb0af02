import json
import subprocess
import sys

import pytest

from fsplots.cli import main
from fsplots.render import curve_points, plot_rates, plot_slice, read_stats_csv
from fsplots.stats import likelihood_band

HEADER = "id,diameter,pitch,hold,basis,p,rounds,shots,errors,seconds,seed\n"


def write_csv(path, rows):
    path.write_text(HEADER + "".join(rows))


def two_group_csv(tmp_path):
    rows = []
    for pitch, pitch_str in ((None, ""), (5, "5")):
        for d, ex, ez in ((5, 40, 60), (9, 12, 20), (13, 4, 6)):
            for basis, errors in (("X", ex), ("Z", ez)):
                rows.append(f"mem,{d},{pitch_str},1,{basis},0.003,{d},100000,{errors},1.0,1\n")
    path = tmp_path / "stats.csv"
    write_csv(path, rows)
    return path


def test_one_curve_per_pitch_p_group(tmp_path):
    csv_path = two_group_csv(tmp_path)
    out = tmp_path / "rates.svg"
    curves = plot_rates(str(csv_path), str(out))
    assert set(curves) == {(None, 0.003), (5, 0.003)}
    assert [pt["diameter"] for pt in curves[(5, 0.003)]] == [5, 9, 13]
    assert out.read_text().startswith("<?xml")


def test_zero_error_band_upper_edge_closed_form(tmp_path):
    rows = [
        "mem,5,,1,X,0.001,5,100000,0,1.0,1\n",
        "mem,5,,1,Z,0.001,5,100000,0,1.0,1\n",
    ]
    path = tmp_path / "z.csv"
    write_csv(path, rows)
    for shots in (100, 100000, 12345678):
        low, high = likelihood_band(shots, 0)
        assert low == 0.0
        assert high == pytest.approx(1 - 1000 ** (-1 / shots), rel=1e-9)
    curves = curve_points(read_stats_csv(str(path)))
    [points] = curves.values()
    assert points[0]["low"] == 0.0
    assert points[0]["rate"] == 0.0


def test_incomplete_group_skipped_with_warning(tmp_path, capsys):
    rows = ["mem,5,,1,X,0.003,5,1000,3,1.0,1\n"]  # no Z row
    path = tmp_path / "partial.csv"
    write_csv(path, rows)
    out = tmp_path / "out.svg"
    curves = plot_rates(str(path), str(out))
    assert curves == {}
    assert "skipping" in capsys.readouterr().err


def test_rates_svg_deterministic(tmp_path):
    csv_path = two_group_csv(tmp_path)
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    plot_rates(str(csv_path), str(a))
    plot_rates(str(csv_path), str(b))
    assert a.read_bytes() == b.read_bytes()


def test_plain_curve_above_fractal_at_largest_diameter(tmp_path):
    # Error counts shaped like the p=0.003 benchmark outcome: the plain code
    # degrades with diameter while the fractal variant keeps improving.
    rows = []
    for pitch_str, errs in (("", (60, 400, 20000)), ("5", (90, 55, 30))):
        for d, e in zip((5, 15, 25), errs):
            for basis in "XZ":
                rows.append(f"mem,{d},{pitch_str},1,{basis},0.003,{d},100000,{e},1.0,1\n")
    path = tmp_path / "cmp.csv"
    write_csv(path, rows)
    curves = curve_points(read_stats_csv(str(path)))
    plain = curves[(None, 0.003)]
    frac = curves[(5, 0.003)]
    assert plain[-1]["rate"] > frac[-1]["rate"]
    assert plain[-1]["low"] > frac[-1]["high"]  # bands separate too


def test_slice_rendering(tmp_path):
    data = {
        "t": 3,
        "rows": 4,
        "cols": 4,
        "slices": [
            {"detector": 0, "basis": "X", "qubits": [[0, 0], [0, 1], [1, 0], [1, 1]]},
            {"detector": 1, "basis": "Z", "qubits": [[2, 0], [3, 0]]},
        ],
    }
    src = tmp_path / "slice.json"
    src.write_text(json.dumps(data))
    out = tmp_path / "slice.svg"
    assert plot_slice(str(src), str(out)) == 2
    assert out.read_text().startswith("<?xml")


def test_empty_slice_renders_empty_grid(tmp_path):
    src = tmp_path / "slice.json"
    src.write_text(json.dumps({"t": 0, "rows": 3, "cols": 3, "slices": []}))
    out = tmp_path / "empty.svg"
    assert plot_slice(str(src), str(out)) == 0
    assert out.exists()


def test_cli_exit_codes(tmp_path):
    assert main(["rates", "--csv", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o.svg")]) == 1
    src = tmp_path / "slice.json"
    src.write_text("{not json")
    assert main(["slice", "--json", str(src), "--out", str(tmp_path / "o.svg")]) == 1


@pytest.mark.acceptance
def test_secondary_acceptance(tmp_path):
    # Bands: errors=0 upper edges equal 1 - 1000^(-1/shots) to 1e-9 (above),
    # one curve per (pitch, p) group (above), and the d=27 f=3 slice SVGs
    # differ between two layers in different level-2 phases, with the slice
    # JSON produced through the primary CLI.
    circ = tmp_path / "d27.fsc"
    gen = subprocess.run(
        [sys.executable, "-m", "fractalshor.cli", "gen", "--diameter", "27", "--pitch", "3",
         "--basis", "X", "--rounds", "27", "--out", str(circ)],
        capture_output=True, text=True,
    )
    assert gen.returncode == 0, gen.stderr
    svgs = []
    for t in (10, 42):  # level-2 window period is 4*4^2 = 64 layers
        sl = tmp_path / f"slice{t}.json"
        rc = subprocess.run(
            [sys.executable, "-m", "fractalshor.cli", "slice", "--circuit", str(circ),
             "--t", str(t), "--out", str(sl)],
            capture_output=True, text=True,
        )
        assert rc.returncode == 0, rc.stderr
        out = tmp_path / f"slice{t}.svg"
        assert main(["slice", "--json", str(sl), "--out", str(out)]) == 0
        svgs.append(out.read_bytes())
    assert svgs[0] != svgs[1]
    print("[PASS] secondary plots: groups/bands verified; d=27 f=3 slices differ across level-2 phases")
