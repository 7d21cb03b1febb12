import subprocess
import sys

import pytest

from sopnlab.cli import main
from sopnlab.core import directed_cycle, format_structure, transitive_tournament
from sopnlab.reports import Report, ReportError, parse_report


@pytest.fixture
def c3(tmp_path):
    p = tmp_path / "c3.str"
    p.write_text(format_structure(directed_cycle(3)))
    return p


def test_check_model_violation(tmp_path, c3, capsys):
    assert main(["check-model", "--structure", str(c3), "--theory", "dcf:3"]) == 1
    out = capsys.readouterr().out
    assert "violation: directed 3-cycle embeds at 0 1 2" in out


def test_check_model_success(tmp_path, capsys):
    p = tmp_path / "t.str"
    p.write_text(format_structure(transitive_tournament(4)))
    assert main(["check-model", "--structure", str(p), "--theory", "dcf:4"]) == 0
    assert "verdict: model" in capsys.readouterr().out


def test_missing_file(tmp_path, capsys):
    assert main(["check-model", "--structure", str(tmp_path / "nope"), "--theory", "trf"]) == 2
    assert "sopnlab:" in capsys.readouterr().err


@pytest.mark.parametrize("args", [[], ["bogus"], ["witness"], ["witness", "--theory", "zz"],
                                  ["witness", "--theory", "dcf:4", "--n", "3"]])
def test_usage_errors(args, capsys):
    assert main(args) == 2


def test_parse_errors_show_positions(tmp_path, c3, capsys):
    code = main(["strict-order", "--structure", str(c3), "--phi", "R(x,", "--split", "x;y"])
    assert code == 2
    assert "position 4" in capsys.readouterr().err


def test_bad_thread_setting(monkeypatch, c3):
    monkeypatch.setenv("SOPNLAB_THREADS", "zero")
    assert main(["check-model", "--structure", str(c3), "--theory", "dcf:3"]) == 2
    monkeypatch.setenv("SOPNLAB_THREADS", "0")
    assert main(["check-model", "--structure", str(c3), "--theory", "dcf:3"]) == 2


def test_witness_then_sop_check_then_recheck(tmp_path):
    w = tmp_path / "w.json"
    r = tmp_path / "r.txt"
    assert main(["witness", "--theory", "dcf:4", "--length", "6", "--out", str(w)]) == 0
    assert main(["--report", str(r), "sop-check", "--chain", str(w), "--n", "4"]) == 0
    rep = parse_report(r.read_text())
    assert rep.get("verdict") == "SOP_4-witnessed-at-desk-scale"
    assert main(["--report", str(tmp_path / "re.txt"), "recheck", str(r)]) == 0
    assert parse_report((tmp_path / "re.txt").read_text()).get("identical") == "True"


def test_sop_check_refutation_exits_one(tmp_path):
    w = tmp_path / "w.json"
    main(["witness", "--theory", "dcf:4", "--length", "7", "--out", str(w)])
    assert main(["--report", str(tmp_path / "r"), "sop-check", "--chain", str(w), "--n", "5"]) == 1
    assert "SOP_5-refuted-at-bound" in (tmp_path / "r").read_text()


def test_tampered_report_disagrees(tmp_path, c3):
    r = tmp_path / "r.txt"
    main(["--report", str(r), "check-model", "--structure", str(c3), "--theory", "dcf:3"])
    r.write_text(r.read_text().replace("verdict: violation", "verdict: model"))
    assert main(["--report", str(tmp_path / "o"), "recheck", str(r)]) == 1
    assert "verdict: disagrees" in (tmp_path / "o").read_text()


def test_amalgamate_and_cyclic(tmp_path):
    w = tmp_path / "w.json"
    main(["witness", "--theory", "dcf:3", "--length", "6", "--out", str(w)])
    assert main(["--report", str(tmp_path / "a"), "cyclic-amalgam", "--chain", str(w),
                 "--m", "3"]) == 1
    assert main(["--report", str(tmp_path / "b"), "amalgamate", "--theory", "dcf:3",
                 "--cyclic", "4", "--chain", str(w)]) == 0
    assert main(["recheck", str(tmp_path / "a")]) == 0
    assert main(["recheck", str(tmp_path / "b")]) == 0


def test_amalgamate_files(tmp_path):
    v = "vocab R/2 directed\n"
    (tmp_path / "m0").write_text(v + "universe 2\n")
    (tmp_path / "m1").write_text(v + "universe 3\nrel R 0 2\nrel R 2 1\n")
    (tmp_path / "m2").write_text(v + "universe 3\nrel R 1 2\nrel R 2 0\n")
    args = ["amalgamate", "--theory", "dcf:4", "--m0", tmp_path / "m0",
            "--m1", tmp_path / "m1", "--m2", tmp_path / "m2"]
    assert main([str(a) for a in ["--report", tmp_path / "r"] + args]) == 1
    text = (tmp_path / "r").read_text()
    assert "verdict: obstruction" in text and "directed 4-cycle" in text
    args[2] = "dcf:3"
    assert main([str(a) for a in ["--report", tmp_path / "r3"] + args]) == 0
    assert main(["recheck", str(tmp_path / "r3")]) == 0


def test_reduce_command(tmp_path, c3, capsys):
    assert main(["reduce", "--phi", "R(x,y)", "--split", "x;y", "--n", "3",
                 "--structure", str(c3), "--at", "0;1"]) == 0
    out = capsys.readouterr().out
    assert "phi_value: True" in out and "reduced_value: False" in out


def test_sop_sequence_command(capsys):
    assert main(["sop-sequence", "--theory", "ord:2", "--length", "4", "--bound", "3"]) == 0
    assert "exemplified at desk scale" in capsys.readouterr().out


def test_generic_and_recheck(tmp_path):
    out = tmp_path / "g.str"
    r = tmp_path / "r"
    assert main(["--report", str(r), "generic", "--theory", "dcf:3", "--size", "12",
                 "--closure", "1", "--seed", "7", "--out", str(out)]) == 0
    assert out.read_text().startswith("vocab R/2 directed")
    assert main(["--report", str(tmp_path / "c"), "recheck", str(r)]) == 0
    assert "independent_outstanding: 0" in (tmp_path / "c").read_text()


def test_invariant_commands(tmp_path):
    (tmp_path / "o").write_text(format_structure(transitive_tournament(10)))
    (tmp_path / "c").write_text("cut 9: 2 5 8\n")
    r1, r2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["--report", str(r1), "invariant-order", "--structure", str(tmp_path / "o"),
                 "--cuts", str(tmp_path / "c")]) == 0
    assert "cut.0.inv.6: {8}" in r1.read_text()
    assert main(["--report", str(r2), "invariant-model", "--structure", str(tmp_path / "o"),
                 "--phi", "R(x,y)", "--cuts", str(tmp_path / "c"), "--tail"]) == 0
    assert main(["recheck", str(r1)]) == 0 and main(["recheck", str(r2)]) == 0


def test_find_forbidden_and_strict_order(tmp_path, c3, capsys):
    assert main(["find-forbidden", "--structure", str(c3), "--theory", "dcf:3"]) == 1
    out = capsys.readouterr().out
    assert "pattern.directed 3-cycle: 3 embeddings" in out
    assert main(["strict-order", "--structure", str(c3), "--phi", "R(x,y)",
                 "--split", "x;y"]) == 1


def test_byte_identical_repeats(tmp_path):
    outs = []
    for i in range(2):
        r = tmp_path / f"r{i}"
        main(["--report", str(r), "generic", "--theory", "trf", "--size", "10",
              "--closure", "1", "--seed", "3"])
        outs.append(r.read_bytes())
    assert outs[0] == outs[1]


def test_console_script_entry_point(tmp_path, c3):
    proc = subprocess.run([sys.executable, "-m", "sopnlab.cli", "check-model", "--structure",
                           str(c3), "--theory", "dcf:3"], capture_output=True, text=True)
    assert proc.returncode == 1 and proc.stdout.startswith("report: check-model")


def test_report_format_round_trip():
    rep = Report("x").add("a", 1).block("b", "line one\n\n  indented\n").add("c", "z")
    text = rep.render()
    back = parse_report(text)
    assert back.render() == text and back.get("b") == "line one\n\n  indented"
    with pytest.raises(ReportError):
        parse_report("nothing here")
    with pytest.raises(ReportError):
        parse_report("report: x\nb: |\n  open\n")
    with pytest.raises(ReportError):
        Report("x").add("k", "two\nlines")
