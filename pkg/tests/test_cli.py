import io
import json

import pytest

from pagetime.cli import main
from pagetime.profile import load_profile

import synth


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_predict_worksheet_table():
    code, text = run("predict", "--manifest", "id-omg.csv", "--profile", "id-worksheet.profile", "--bpe", "2.05")
    assert code == 0
    label, value = text.rstrip().splitlines()[-1].rsplit(" ", 1)
    assert label.strip() == "Total Response Time (predicted)"
    assert float(value) == pytest.approx(15504.78, abs=0.05)


def test_predict_csv_with_measured():
    code, text = run("predict", "--manifest", "id-omg.csv", "--profile", "id-worksheet.profile",
                     "--bpe", "2.05", "--measured", "15154", "--format", "csv")
    assert code == 0
    assert text.splitlines()[-1] == "Predicted vs Actual (%),,,,,2.31"


def test_predict_is_deterministic():
    args = ("predict", "--manifest", "id-omg.csv", "--profile", "id-worksheet.profile", "--bpe", "2.05")
    assert run(*args) == run(*args)


def test_bpe_command():
    assert run("bpe", "--fb", "82.59", "--avg-cd", "48.65", "--round") == (0, "3\n")
    assert run("bpe", "--fb", "82.59", "--avg-cd", "109.29", "--round") == (0, "2\n")
    assert run("bpe", "--fb", "82.59", "--avg-cd", "48.65") == (0, "2.70\n")
    assert run("bpe", "--fb", "1", "--avg-cd", "0")[0] == 1


def test_validate_command():
    code, text = run("validate", "--pairs", "table11.csv")
    assert code == 0
    assert text.splitlines()[-1] == "mean 2.08% stddev 1.36%"
    code, text = run("validate", "--pairs", "table11.csv", "--format", "csv")
    assert text.splitlines()[-2:] == ["mean,,,2.08", "stddev,,,1.36"]


def test_render_command():
    assert run("render", "--total-kb", "444.9", "--requests", "27") == (
        0, "class Simple N 16.48 render_ms 328.82\n")


def test_simulate_command():
    code, text = run("simulate", "--manifest", "figure4-6.csv", "--sweep", "4")
    assert code == 0
    assert text == "k,makespan_ms\n1,4000.00\n2,2000.00\n3,2000.00\n4,1000.00\n"
    code, text = run("simulate", "--manifest", "bpe-example.csv", "--k", "5")
    assert text == "makespan_ms 500.00 connections_used 5 parallelism 5.00\n"
    code, text = run("simulate", "--manifest", "id-omg.csv", "--k", "2", "--schedule")
    assert code == 0 and text.splitlines()[0] == "doc_order,start_ms,end_ms,connection_index"
    assert len(text.splitlines()) == 28


def test_fit_command(tmp_path):
    measurements = tmp_path / "m.csv"
    synth.write_csv(measurements, 2000)
    server = tmp_path / "sp.csv"
    server.write_text("property,server_ms\n" + "".join(f"{k},{v}\n" for k, v in synth.SERVER_TIMES.items()))
    out = tmp_path / "zz.profile"
    code, text = run("fit", "--measurements", str(measurements), "--country", "ZZ", "--out", str(out),
                     "--server-times", str(server))
    assert code == 0
    profile = load_profile(out.read_bytes())
    synth.assert_recovered(profile)
    assert json.loads(text)["country"] == "ZZ"


def test_fit_then_predict_from_sizes(tmp_path):
    measurements = tmp_path / "m.csv"
    synth.write_csv(measurements, 2000)
    server = tmp_path / "sp.csv"
    server.write_text("property,server_ms\n" + "".join(f"{k},{v}\n" for k, v in synth.SERVER_TIMES.items()))
    profile = tmp_path / "zz.profile"
    run("fit", "--measurements", str(measurements), "--country", "ZZ", "--out", str(profile), "--server-times", str(server))
    manifest = tmp_path / "page.csv"
    manifest.write_text("url,mime,size_bytes,cd_ms,fb_ms\nhttp://a/,text/html,20000,,\nhttp://c/x.png,image/png,9000,,\n")
    code, text = run("predict", "--manifest", str(manifest), "--profile", str(profile), "--include-render")
    assert code == 0
    assert "Render time" in text


def test_missing_file_exit_1(capsys):
    code, _ = run("predict", "--manifest", "/nope/x.csv", "--profile", "id-worksheet.profile")
    assert code == 1
    assert "/nope/x.csv" in capsys.readouterr().err


def test_domain_error_exit_1(tmp_path):
    pairs = tmp_path / "p.csv"
    pairs.write_text("predicted_ms,measured_ms\n1,0\n")
    assert run("validate", "--pairs", str(pairs))[0] == 1


def test_incomplete_profile_exit_1(tmp_path):
    manifest = tmp_path / "page.csv"
    manifest.write_text("url,mime,size_bytes,cd_ms,fb_ms\nhttp://a/,text/html,20000,,\n")
    assert run("predict", "--manifest", str(manifest), "--profile", "id-worksheet.profile")[0] == 1


def test_usage_errors_exit_2(capsys):
    assert run("predict", "--bogus")[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("bpe", "--fb", "x", "--avg-cd", "1")[0] == 2


@pytest.mark.parametrize("command", ["fit", "predict", "bpe", "render", "simulate", "validate"])
def test_help(command, capsys):
    assert run(command, "--help")[0] == 0
    assert "usage" in capsys.readouterr().out
