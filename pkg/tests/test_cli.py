import pytest

from conftest import FIXTURES
from typetower import cli
from typetower.classtable import parse_class_table, validate
from typetower.turing import parse_tm

F = FIXTURES
LAMBIG = str(F / "lambig.grammar")
SPECIAL = str(F / "lambig_specialized.simper")


def main(*argv):
    return cli.main([str(a) for a in argv])


def test_check_subtype_trace(capsys):
    code = main("check-subtype", F / "example1.ct", "--query-file", F / "example1.query", "--fuel", 15, "--trace")
    out = capsys.readouterr().out.splitlines()
    assert code == cli.EXIT_UNKNOWN
    assert out[0] == "Qr E E Z  <:  L N L N L N E E Z"
    assert out[-2] == "Ql L N L N L N E E Z  <:  E E Z"
    assert out[-1] == "Unknown"


def test_check_subtype_verdicts(capsys):
    assert main("check-subtype", F / "example1.ct", "Z <: Z") == cli.EXIT_ACCEPT
    assert main("check-subtype", F / "example1.ct", "L Z <: E Z") == cli.EXIT_REJECT
    assert main("check-subtype", F / "bad_even.ct", "A Z <: B Z") == cli.EXIT_INPUT
    assert "even length" in capsys.readouterr().err


def test_bad_inputs_exit_with_3(tmp_path, capsys):
    bad = tmp_path / "bad.tm"
    bad.write_text("states: a\n")
    assert main("run-tm", bad, "x") == cli.EXIT_INPUT
    assert main("run-tm", tmp_path / "missing.tm", "x") == cli.EXIT_INPUT
    assert main("fluent-check", LAMBIG, "a,x") == cli.EXIT_INPUT
    assert main("check-subtype", F / "example1.ct", "A B") == cli.EXIT_INPUT


def test_run_tm(capsys):
    assert main("run-tm", F / "binary_counter.tm", "0,0,0") == cli.EXIT_ACCEPT
    assert "qH: $ 0 0 0 [1]" in capsys.readouterr().out
    assert main("run-tm", F / "anbn.tm", "a,a,b") == cli.EXIT_REJECT
    assert main("run-tm", F / "anbn.tm", "a,b", "--fuel", 2) == cli.EXIT_UNKNOWN


def test_simper_run(capsys):
    assert main("simper-run", SPECIAL, "a,b,c,d") == cli.EXIT_ACCEPT
    assert main("simper-run", SPECIAL, "a,b,c") == cli.EXIT_REJECT
    assert "StuckEnd" in capsys.readouterr().out


def test_simper_to_tm_and_back(tmp_path):
    out = tmp_path / "p.tm"
    assert main("simper-to-tm", SPECIAL, "-o", out, "--symbols", "a,b,c,d") == cli.EXIT_ACCEPT
    m = parse_tm(out.read_text())
    assert len(m.states) == 894
    assert main("run-tm", out, "s_a,s_d", "--fuel", 10**6) == cli.EXIT_ACCEPT
    assert main("run-tm", out, "s_a", "--fuel", 10**6) == cli.EXIT_REJECT


def test_tm_to_java(tmp_path):
    out = tmp_path / "C.java"
    assert main("tm-to-java", F / "binary_counter.tm", "--input", "0,1", "-o", out) == cli.EXIT_ACCEPT
    text = out.read_text()
    assert "abstract class B<x>" in text and "class Main" in text


def test_grammar_to_simper(tmp_path, capsys):
    out = tmp_path / "p.simper"
    assert main("grammar-to-simper", LAMBIG, "-o", out) == cli.EXIT_ACCEPT
    assert out.read_text().startswith("if n == 0 { halt }")
    assert main("grammar-to-simper", F / "ab.grammar") == cli.EXIT_ACCEPT
    assert "T[0, n, 0] == 1" in capsys.readouterr().out


def test_grammar_to_java_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main("grammar-to-java", LAMBIG, "--simper", SPECIAL, "-o", d) == cli.EXIT_ACCEPT
    names = sorted(p.name for p in a.iterdir())
    assert names == ["Fluent.java", "README.md", "classes.ct", "grammar.txt", "manifest.txt", "parser.simper", "parser.tm"]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes(), n
    manifest = dict(line.split("=", 1) for line in (a / "manifest.txt").read_text().splitlines())
    assert manifest["ct.rules"] == manifest["ct.rules_expected"] == "107280"
    assert manifest["grammar.size"] == "32"
    assert "B.start.stop();" in (a / "README.md").read_text()
    assert validate(parse_class_table((a / "classes.ct").read_text())).ok


@pytest.mark.parametrize(
    "word, code",
    [("a,b,c,d", cli.EXIT_ACCEPT), ("abc", cli.EXIT_REJECT), ("", cli.EXIT_ACCEPT), ("d,a", cli.EXIT_REJECT)],
)
def test_fluent_check_all_layers(word, code, capsys):
    assert main("fluent-check", LAMBIG, word, "--simper", SPECIAL) == code
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split()[0] for ln in lines] == list(cli.LAYERS)


def test_fluent_check_single_layers(capsys):
    for layer in ("oracle", "simper"):
        assert main("fluent-check", LAMBIG, "a,d", "--layer", layer) == cli.EXIT_ACCEPT
    assert main("fluent-check", LAMBIG, "a,b,c,d", "--layer", "simper", "--fuel-simper", 3) == cli.EXIT_UNKNOWN
    capsys.readouterr()
    assert main("fluent-check", LAMBIG, "b", "--layer", "oracle,simper", "--simper", SPECIAL) == cli.EXIT_REJECT
    assert len(capsys.readouterr().out.splitlines()) == 2
    assert main("fluent-check", LAMBIG, "b", "--layer", "oracle,java") == cli.EXIT_INPUT


def test_disagreement_exits_with_4(monkeypatch, capsys):
    monkeypatch.setattr(cli, "layer_oracle", lambda p, w: cli.LayerResult(cli.Verdict.REJECT))
    assert main("fluent-check", LAMBIG, "a,d", "--layer", "all", "--simper", SPECIAL) == cli.EXIT_INTERNAL
    assert "DISAGREEMENT" in capsys.readouterr().out


def test_parse_word():
    assert cli.parse_word("a, b") == ["a", "b"]
    assert cli.parse_word("-") == []
    assert cli.parse_word("abc", ["a", "b", "c"]) == ["a", "b", "c"]
    with pytest.raises(cli.InputError):
        cli.parse_word("a,,b")


def test_agreement_ignores_unknown():
    R = cli.LayerResult
    V = cli.Verdict
    assert cli.agreement({"a": R(V.ACCEPT), "b": R(V.UNKNOWN)}) is V.ACCEPT
    assert cli.agreement({"a": R(V.ACCEPT), "b": R(V.REJECT)}) is None
    assert cli.agreement({"a": R(V.UNKNOWN)}) is V.UNKNOWN
