import json

import pytest

from ghostosc.cli import (CoeffRecord, ConfigError, CrossRecord, DensityRecord, DomainRecord,
                          LevelRecord, PhaseRecord, UncertaintyRecord, main, parse_range,
                          read_records)
from ghostosc.params import Branch, ModelParams, derive_aux
from ghostosc.recurrence import closed_spectrum

FLAG = ["--nu", "4", "--Omega", "-2"]


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_range_decimal_steps():
    assert parse_range("0:1:0.25") == [0, 0.25, 0.5, 0.75, 1.0]
    assert parse_range("0.1:0.35:0.1") == [0.1, 0.2, 0.3]
    assert parse_range("2.5") == [2.5]
    assert len(parse_range("-20:20:0.25")) == 161
    for bad in ("1:2", "a:b:c", "0:1:0", "0:1:-1"):
        with pytest.raises(ConfigError):
            parse_range(bad)


def test_spectrum_matches_library(capsys):
    code, out, _ = _run(capsys, "spectrum", *FLAG, "--g", "1", "--N", "4")
    assert code == 0
    doc = json.loads(out)
    assert set(doc) == {"config", "results", "errors"} and doc["errors"] == []
    recs = read_records(out, "json", LevelRecord)
    aux = derive_aux(ModelParams(4, -2, 1), Branch(-1, 1))
    ref = closed_spectrum(4, aux)
    assert [(r.n, r.sign) for r in recs] == [(lv.n, lv.sign) for lv in ref]
    assert [r.re_E for r in recs] == [lv.energy for lv in ref]


@pytest.mark.parametrize("cmd,cls,extra", [
    ("spectrum", LevelRecord, ["--N", "3"]),
    ("scan", LevelRecord, ["--N", "2", "--g", "0:2:0.5"]),
    ("state", CoeffRecord, ["--N", "3", "--n", "2", "--sign", "-"]),
    ("density", DensityRecord, ["--N", "2", "--res", "5,4"]),
    ("uncertainty", UncertaintyRecord, ["--N", "2", "--g", "0.5:1.5:0.5"]),
    ("classical", PhaseRecord, ["--steps", "11"]),
    ("validate", DomainRecord, []),
    ("crosscheck", CrossRecord, ["--N", "3"]),
])
def test_round_trip_csv_and_json(capsys, cmd, cls, extra):
    argv = [cmd, *FLAG, *(["--g", "1"] if "--g" not in extra else []), *extra]
    code, js, _ = _run(capsys, *argv, "--format", "json")
    assert code == 0
    code, cs, _ = _run(capsys, *argv, "--format", "csv")
    assert code == 0
    a, b = read_records(js, "json", cls), read_records(cs, "csv", cls)
    assert a and a == b
    assert cs.splitlines()[0].split(",") == cls.columns()


def test_output_is_deterministic(capsys, tmp_path):
    argv = ["scan", *FLAG, "--g", "0:3:0.5", "--N", "3", "--format", "csv"]
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.csv"
        assert main([*argv, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and len(outs[0]) > 100


def test_scan_keeps_going_past_bad_points(capsys):
    code, out, _ = _run(capsys, "scan", *FLAG, "--g", "13.8:14.2:0.1", "--N", "1", "--branch=-1,-1")
    assert code == 0
    doc = json.loads(out)
    bad = [r for r in doc["results"] if r["error"]]
    assert [r["g"] for r in bad] == [14.0] and bad[0]["error"] == "NotDegenerate"
    assert doc["errors"][0]["type"] == "NotDegenerate"
    # complex pairs past the boundary are emitted, not dropped
    beyond = [r for r in doc["results"] if r["g"] > 14.05]
    assert beyond and all(r["im_E"] != 0 for r in beyond)


def test_scan_includes_all_lower_levels(capsys):
    _, out, _ = _run(capsys, "scan", *FLAG, "--g", "1", "--N", "3")
    recs = read_records(out, "json", LevelRecord)
    assert len(recs) == sum(N + 1 for N in range(4))


def test_validate_degenerate_point(capsys):
    _, out, _ = _run(capsys, "validate", "--nu", "2", "--Omega", "-1", "--g", "3", "--format", "csv")
    recs = read_records(out, "csv", DomainRecord)
    assert len(recs) == 4
    assert all(r.degenerate and not r.gamma_map_valid and not r.normalisable for r in recs)


def test_validate_single_branch(capsys):
    _, out, _ = _run(capsys, "validate", *FLAG, "--g", "1", "--branch=-1,1")
    (r,) = read_records(out, "json", DomainRecord)
    assert (r.branch, r.normalisable, r.gamma_map_valid) == ("-1,+1", True, True)


def test_state_leading_coefficient(capsys):
    _, out, _ = _run(capsys, "state", *FLAG, "--g", "1", "--N", "2", "--format", "csv")
    recs = read_records(out, "csv", CoeffRecord)
    assert max(abs(r.re_c) for r in recs) == 1.0
    assert {(r.i, r.j) for r in recs} <= {(0, 0), (2, 0), (1, 1), (0, 2)}


def test_uncertainty_ground_value(capsys):
    _, out, _ = _run(capsys, "uncertainty", *FLAG, "--g", "1", "--N", "0")
    (r,) = read_records(out, "json", UncertaintyRecord)
    aux = derive_aux(ModelParams(4, -2, 1), Branch(-1, 1))
    D = aux.alpha * aux.beta - aux.gamma ** 2
    assert r.dx_dpx == pytest.approx(0.5 * (aux.alpha * aux.beta / D) ** 0.5, rel=1e-12)


def test_uncertainty_scan_records_domain_errors(capsys):
    code, out, _ = _run(capsys, "uncertainty", *FLAG, "--g", "13:15:1", "--N", "0")
    assert code == 0
    recs = read_records(out, "json", UncertaintyRecord)
    assert [r.error for r in recs][0] == "" and all(r.error for r in recs[1:])


@pytest.mark.parametrize("argv,code", [
    (["spectrum", *FLAG, "--g", "1:2", "--N", "1"], 2),
    (["spectrum", *FLAG, "--g", "1", "--N", "1", "--branch", "up"], 2),
    (["density", *FLAG, "--g", "1", "--res", "1,5"], 2),
    (["state", *FLAG, "--g", "0:1:0.5"], 2),
    (["state", *FLAG, "--g", "1", "--N", "2", "--n", "3", "--sign", "+"], 3),
    (["uncertainty", *FLAG, "--g", "1", "--branch=1,1"], 3),
    (["crosscheck", "--nu", "2", "--Omega", "-1", "--g", "3"], 3),
    (["classical", "--nu", "1", "--Omega", "1", "--g", "3"], 3),
])
def test_exit_codes(capsys, argv, code):
    got, _, err = _run(capsys, *argv)
    assert got == code
    assert err.strip()


def test_domain_error_names_type(capsys):
    _, _, err = _run(capsys, "uncertainty", *FLAG, "--g", "1", "--branch=1,1")
    assert err.startswith("NotNormalisable")


def test_crosscheck_failure_exits_four(capsys, monkeypatch):
    from ghostosc import fock
    monkeypatch.setattr(fock.CrossCheckEntry, "ok", lambda self, etol=0, stol=0: False)
    code, out, _ = _run(capsys, "crosscheck", *FLAG, "--g", "1", "--N", "1")
    assert code == 4
    assert all(not r.ok for r in read_records(out, "json", CrossRecord))


@pytest.mark.parametrize("cmd,extra", [
    ("density", ["--N", "2", "--res", "6,6"]),
    ("scan", ["--N", "2", "--g", "0:2:1"]),
    ("classical", ["--steps", "20"]),
])
def test_svg_written(capsys, tmp_path, cmd, extra):
    svg = tmp_path / "plot.svg"
    argv = [cmd, *FLAG, *(["--g", "1"] if "--g" not in extra else []), *extra, "--svg", str(svg)]
    assert main(argv) == 0
    text = svg.read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    capsys.readouterr()


def test_nonfinite_values_become_null(capsys):
    _, out, _ = _run(capsys, "scan", *FLAG, "--g", "14", "--N", "0", "--branch=-1,-1")
    r = json.loads(out)["results"][0]
    assert r["re_E"] is None and r["im_E"] is None
