import json

import pytest

from conftest import DATA
from icsimp.cli import main


def run(capsys, *argv):
    args = [str(DATA / a) if (DATA / a).is_file() else a for a in argv]
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


GOLDEN = {
    ("simplify", "book"): "<- b($i,V1), V1 != $t.\n",
    ("simplify", "mutex"): "<- q(a).\n",
    ("simplify", "deletion"): "true.\n",
    ("simplify", "marriage"): (
        "<- parent($a,V1), not exists(V2,V3)[parent(V2,V3), parent($a,V3), woman(V2)].\n"
        "<- woman($a).\n"
    ),
    ("after", "book"): (
        "<- V1 = $i, V1 = $i, V2 = $t, V3 = $t, V2 != V3.\n"
        "<- b(V1,V2), V1 = $i, V3 = $t, V2 != V3.\n"
        "<- b(V1,V2), V1 = $i, V3 = $t, V2 != V3.\n"
        "<- b(V1,V2), b(V1,V3), V2 != V3.\n"
    ),
}


@pytest.mark.parametrize("cmd, name", sorted(GOLDEN))
def test_golden(capsys, cmd, name):
    code, out, _ = run(capsys, cmd, f"{name}.sch", f"{name}.upd")
    assert code == 0
    assert out == GOLDEN[cmd, name]


def test_deterministic(capsys):
    outs = {run(capsys, "simplify", "marriage.sch", "marriage.upd")[1] for _ in range(3)}
    assert len(outs) == 1


def test_unfold(capsys):
    code, out, _ = run(capsys, "unfold", "deletion.sch")
    assert code == 0
    assert out == "<- a(V1,V2), b(V2,V1), not exists(V3,V4)[a(1,V3), b(V3,V4), c(V4,V1)].\n"


def test_unfold_wrong_language(capsys):
    code, _, err = run(capsys, "unfold", "s1.sch", "--lang", "ls")
    assert code == 2 and err.startswith("error:")


class TestCheck:
    def test_s1(self, capsys):
        code, out, _ = run(capsys, "check", "s1.sch")
        assert code == 0
        assert "not in L_S (odd-parity star path s1* -> ⊥); in L_Sext" in out

    def test_s2(self, capsys):
        _, out, _ = run(capsys, "check", "s2.sch")
        assert out.startswith("schema: in L_S; in L_Sext")

    def test_structured(self, capsys):
        code, out, _ = run(capsys, "check", "marriage.sch", "marriage.upd", "--format", "structured")
        data = json.loads(out)
        assert code == 0
        assert data["stratified"] and data["update_class"] == "L_Sext"


class TestSimplify:
    def test_structured_mirrors_text(self, capsys):
        _, text, _ = run(capsys, "simplify", "mutex.sch", "mutex.upd")
        _, out, _ = run(capsys, "simplify", "mutex.sch", "mutex.upd", "--format", "structured")
        data = json.loads(out)
        assert data["theory"] == text.splitlines()
        assert data["saturation_cap_hits"] == 0

    def test_trace_goes_to_stderr(self, capsys):
        code, out, err = run(capsys, "simplify", "book.sch", "book.upd", "--trace")
        assert code == 0 and out == GOLDEN["simplify", "book"]
        assert "R2" in err

    def test_paranoid(self, capsys):
        code, out, _ = run(capsys, "simplify", "book.sch", "book.upd", "--paranoid", "--domain", "a,b")
        assert code == 0 and out == GOLDEN["simplify", "book"]

    def test_firing_cap(self, capsys):
        code, _, err = run(capsys, "simplify", "marriage.sch", "marriage.upd", "--max-firings", "1")
        assert code == 1 and "error:" in err


class TestVerify:
    def test_cwp_pass(self, capsys):
        code, out, _ = run(capsys, "verify", "mutex.sch", "mutex.upd", "--domain", "a,b")
        assert code == 0 and out.startswith("PASS CWP")

    def test_wp_fail(self, capsys, tmp_path):
        cand = tmp_path / "cand.sch"
        cand.write_text("<- q(a).\n")
        code, out, _ = run(capsys, "verify", "mutex.sch", "mutex.upd", str(cand),
                           "--mode", "wp", "--domain", "a,b", "--format", "structured")
        data = json.loads(out)
        assert code == 1 and not data["passed"]
        assert all(not c["updated_consistent"] for c in data["counterexamples"])

    def test_after_is_wp(self, capsys):
        code, out, _ = run(capsys, "verify", "book.sch", "book.upd", "--mode", "wp", "--domain", "a,b")
        assert code == 0 and "exhaustive" in out

    def test_budget(self, capsys):
        code, _, err = run(capsys, "verify", "marriage.sch", "marriage.upd", "--max-databases", "10")
        assert code == 2 and "budget" in err

    def test_sampled(self, capsys):
        code, out, _ = run(capsys, "verify", "marriage.sch", "marriage.upd", "--mode", "wp",
                           "--max-databases", "10", "--sample", "50")
        assert code == 0 and "sampled" in out


class TestEval:
    def test_consistent(self, capsys):
        code, out, _ = run(capsys, "eval", "marriage.sch", "marriage.edb")
        assert code == 0 and out.endswith("consistent\n") and "violated" not in out

    def test_violated(self, capsys, tmp_path):
        edb = tmp_path / "bad.edb"
        edb.write_text("man(a).\nwoman(a).\n")
        code, out, _ = run(capsys, "eval", "marriage.sch", str(edb))
        assert code == 1
        assert "violated: <- man(X), woman(X)." in out


class TestErrors:
    def test_missing_file(self, capsys):
        code, _, err = run(capsys, "simplify", "nope.sch", "book.upd")
        assert code == 2 and "cannot read" in err

    def test_parse_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.sch"
        bad.write_text("<- p(X\n")
        code, _, err = run(capsys, "check", str(bad))
        assert code == 2 and err.startswith("error:")

    def test_bad_param(self, capsys):
        code, _, _ = run(capsys, "eval", "marriage.sch", "marriage.edb", "--param", "oops")
        assert code == 2

    def test_usage(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["frobnicate"])
        assert e.value.code == 2
