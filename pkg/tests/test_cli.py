import json

from greens.cli import build_parser, main

EMPTY_RUN = ["--divisor", "[]", "--target", "[1, -4, -16]", "--precision", "6", "--log-level", "WARNING"]


def test_parser_defaults():
    args = build_parser().parse_args(["--divisor", "[]"])
    assert (args.p, args.k, args.precision) == (3, 4, 30)
    assert args.level_cutoff is None
    assert args.branch == 0
    assert build_parser().parse_args(["--divisor", "[]", "--level-cutoff", "7"]).level_cutoff == 7


def test_bad_prime_exits_with_config_error(capsys):
    assert main(["--p", "4", "--divisor", "[]"]) == 2
    err = capsys.readouterr().err
    assert err.startswith("❌ [config] p must be an odd prime")


def test_bad_divisor_exits_with_config_error(capsys):
    assert main(["--divisor", "[[1, [1, 0, 1]]]"]) == 2
    assert "❌" in capsys.readouterr().err


def test_degree_obstruction_exits_with_one(capsys):
    assert main(["--divisor", "[[1, [1, -1, -1]]]", "--precision", "6", "--log-level", "WARNING"]) == 1
    assert "❌ [degree]" in capsys.readouterr().err


def test_empty_divisor_gives_zero(capsys):
    assert main(EMPTY_RUN) == 0
    out = capsys.readouterr().out
    assert "degree_check: passed\n" in out
    assert "automorph: [[13, 32], [2, 5]]\n" in out
    assert "raising_constant: -2\n" in out
    assert "pairing_constant: -1/2\n" in out


def test_reruns_are_identical(capsys):
    main(EMPTY_RUN)
    first = capsys.readouterr().out
    main(EMPTY_RUN)
    assert capsys.readouterr().out == first


def test_outputs_to_files(tmp_path):
    report = tmp_path / "run.json"
    csv = tmp_path / "levels.csv"
    plot = tmp_path / "levels.html"
    assert main(EMPTY_RUN + ["--report", str(report), "--levels-csv", str(csv), "--plot", str(plot)]) == 0
    data = json.loads(report.read_text())
    assert data["pell"] == [18, 2]
    assert data["levels_used"] == 0
    assert csv.exists()
    assert not plot.exists()
