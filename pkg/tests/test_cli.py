import io
import json
from importlib import resources
from pathlib import Path

import pytest

from ainfty import cli
from ainfty.dsl import NamedElement, load, parse, serialize, workspace_from
from ainfty.randgen import planted_cyclic_module, random_chain_map, random_complex, random_instance

DATA = Path(__file__).parent / "data"
SMALL = str(DATA / "small.ainf")


def ainf(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def golden_text():
    return resources.files("ainfty").joinpath("data/example.ainf").read_text(encoding="utf-8")


@pytest.fixture(scope="module")
def rand_file(tmp_path_factory):
    inst, maps, rng = random_instance(3, n_obj=1, transports=1)
    Phi, _ = maps[0]
    A2, A1 = Phi.source, Phi.target
    X = sorted(A2.objects)[0]
    elems = [
        NamedElement("b", A2.name, X, inst.mc(rng, X), True),
        NamedElement("zb", A2.name, X, A2.zero(), True),
    ]
    C, D = random_complex(rng, name="C"), random_complex(rng, name="D")
    f = random_chain_map(rng, C, D, "f")
    ws = workspace_from(A2.field, [A2, A1], elems, [Phi], complexes=[C, D], chainmaps=[f])
    path = tmp_path_factory.mktemp("rand") / "rand.ainf"
    path.write_text(serialize(ws), encoding="utf-8")
    return path, Phi.name, X


@pytest.fixture(scope="module")
def cyclic_file(tmp_path_factory):
    mod, e, _ = planted_cyclic_module(5)
    ws = workspace_from(mod.category.field, [mod.category],
                        [NamedElement("e", mod.category.name, None, e, False)], modules=[mod])
    path = tmp_path_factory.mktemp("cyc") / "cyc.ainf"
    path.write_text(serialize(ws), encoding="utf-8")
    return path, mod.name


# ---- check and mc ----------------------------------------------------------------

def test_check_small_passes():
    code, out, _ = ainf("check", SMALL)
    assert code == cli.EXIT_OK
    assert "functor equation F (arity <= 1): PASS" in out
    assert "module relations M: PASS" in out
    assert out.rstrip().endswith("overall: PASS")


def test_check_random_transported(rand_file):
    path, _, _ = rand_file
    code, out, _ = ainf("check", path)
    # zb = 0 on a curved object is declared but not MC
    assert code == cli.EXIT_FAIL
    assert "mc b on A2/X0: PASS" in out
    assert "mc zb on A2/X0: FAIL" in out
    assert "relations A2" in out and "relations A2 (arity <= 4): PASS" in out
    assert "functor equation Phi_A2 (arity <= 4): PASS" in out


def test_check_arity_above_cap_is_invalid():
    code, _, err = ainf("check", SMALL, "--arity", "9")
    assert code == cli.EXIT_INVALID
    assert "above cap" in err


def test_mc_exit_codes(rand_file, tmp_path):
    path, _, _ = rand_file
    assert ainf("mc", path, "--element", "b")[0] == cli.EXIT_OK
    code, out, _ = ainf("mc", path, "--element", "zb")
    assert code == cli.EXIT_FAIL and "residual" in out
    assert ainf("mc", SMALL, "--element", "e0")[0] == cli.EXIT_PRECONDITION
    assert ainf("mc", SMALL, "--element", "nope")[0] == cli.EXIT_INVALID


def test_mc_wrong_degree_on_golden(tmp_path):
    p = tmp_path / "ex.ainf"
    p.write_text(golden_text() + "mc b_wrong on L = x2\n", encoding="utf-8")
    code, _, err = ainf("mc", p, "--element", "b_wrong")
    assert code == cli.EXIT_PRECONDITION
    assert "degree 1" in err
    assert ainf("mc", p, "--element", "b")[0] == cli.EXIT_OK


def test_corrupted_golden_names_the_triple(tmp_path):
    text = golden_text().replace("op 2 : y21 y12 => x1\n", "op 2 : y21 y12 => 2*x1\n")
    p = tmp_path / "bad.ainf"
    p.write_text(text, encoding="utf-8")
    code, out, _ = ainf("check", p)
    assert code == cli.EXIT_FAIL
    assert "relations fiber (arity <= 4): FAIL" in out
    assert "(x1,y21,y12)" in out


# ---- deform, push, cohom, cone, solve-cyclic -----------------------------------

def test_deform_output_reparses_and_checks(rand_file, tmp_path):
    path, _, _ = rand_file
    code, out, err = ainf("deform", path, "--mc", "b")
    assert code == cli.EXIT_OK
    assert "curvature of A2_deformed vanishes: PASS" in err
    ws = parse(out)
    assert list(ws.categories) == ["A2_deformed"]
    target = tmp_path / "def.ainf"
    target.write_text(out, encoding="utf-8")
    code, out2, _ = ainf("check", target)
    assert code == cli.EXIT_OK, out2


def test_deform_writes_file(rand_file, tmp_path):
    path, _, _ = rand_file
    target = tmp_path / "o.ainf"
    code, out, _ = ainf("deform", path, "--mc", "b", "--out", target)
    assert code == cli.EXIT_OK
    assert f"written = {target}" in out
    assert "A2_deformed" in load(target).categories


def test_deform_ambiguous_and_non_mc(rand_file):
    path, _, _ = rand_file
    code, _, err = ainf("deform", path)
    assert code == cli.EXIT_PRECONDITION and "pick one with --mc" in err
    assert ainf("deform", path, "--mc", "zb")[0] == cli.EXIT_FAIL
    assert ainf("deform", SMALL)[0] == cli.EXIT_PRECONDITION


def test_push(rand_file):
    path, phi, X = rand_file
    code, out, _ = ainf("push", path, "--functor", phi, "--element", "b")
    assert code == cli.EXIT_OK
    assert f"pushforward {phi}_*b is Maurer-Cartan: PASS" in out
    assert f"object = {X}" in out
    assert ainf("push", path, "--functor", "G", "--element", "b")[0] == cli.EXIT_INVALID
    assert ainf("push", SMALL, "--functor", "F", "--element", "e0")[0] == cli.EXIT_PRECONDITION


def test_cohom_small_json():
    code, out, _ = ainf("cohom", SMALL, "--deg-min", "0", "--deg-max", "1", "--json")
    assert code == cli.EXIT_OK
    doc = json.loads(out)
    ranks = {c["name"]: c["data"]["ranks"] for c in doc["checks"]}
    assert ranks == {
        "cohomology A": {"0": 0, "1": 1},
        "cohomology C": {"0": 0, "1": 0},
        "cohomology D": {"0": 1, "1": 1},
    }


def test_cohom_curved_and_deformed(rand_file):
    path, _, _ = rand_file
    code, out, _ = ainf("cohom", path, "--deg-min", "0", "--deg-max", "2")
    assert code == cli.EXIT_OK
    assert "cohomology A2: INFO  [skipped: curved" in out
    code, out, _ = ainf("cohom", path, "--mc", "b", "--deg-min", "0", "--deg-max", "2")
    assert code == cli.EXIT_OK
    assert "cohomology A2_deformed(X0,X0): INFO" in out
    assert ainf("cohom", path, "--mc", "zb", "--deg-min", "0", "--deg-max", "2")[0] == cli.EXIT_FAIL


def test_cone():
    code, out, _ = ainf("cone", SMALL, "--map", "g")
    assert code == cli.EXIT_OK
    assert "long exact sequence ranks: PASS" in out
    assert "quasi_isomorphism = False" in out
    assert ainf("cone", SMALL, "--map", "h")[0] == cli.EXIT_INVALID


def test_solve_cyclic(cyclic_file):
    path, mname = cyclic_file
    code, out, _ = ainf("solve-cyclic", path, "--module", mname, "--element", "e")
    assert code == cli.EXIT_OK, out
    assert "cyclic equation residual vanishes: PASS" in out
    assert "b is positively filtered: PASS" in out
    assert ainf("solve-cyclic", path, "--module", "nope", "--element", "e")[0] == cli.EXIT_INVALID


# ---- example, fmt, field override, errors ---------------------------------------

def test_example_window_8():
    code, out, _ = ainf("example", "--window", "8")
    assert code == cli.EXIT_OK
    assert "m2(u,v) = 1_1 + 1_2 + 1_3: PASS" in out
    assert "engine 21, oracle 21" in out
    assert out.rstrip().endswith("overall: PASS")


def test_example_json_is_deterministic():
    a = ainf("example", "--window", "3", "--json")[1]
    b = ainf("example", "--window", "3", "--json")[1]
    assert a == b
    doc = json.loads(a)
    assert doc["overall"] == "pass"
    assert doc["outputs"]["report"]["config"]["N"] == 3


def test_example_too_small_window():
    code, _, err = ainf("example", "--window", "1")
    assert code == cli.EXIT_INVALID
    assert "invalid error" in err


def test_field_override(monkeypatch, tmp_path):
    monkeypatch.setenv("AINF_FIELD", "Fp 101")
    assert ainf("example", "--window", "2")[0] == cli.EXIT_OK
    monkeypatch.setenv("AINF_FIELD", "Fp 7")
    p = tmp_path / "s.ainf"
    p.write_text(Path(SMALL).read_text(encoding="utf-8"), encoding="utf-8")
    assert ainf("fmt", p)[0] == cli.EXIT_OK
    text = p.read_text(encoding="utf-8")
    assert "field Fp 7" in text
    assert "op 1 : e => 2*w" in text  # -3/2 = 2 mod 7
    monkeypatch.setenv("AINF_FIELD", "Fp 6")
    assert ainf("check", SMALL)[0] == cli.EXIT_INVALID


def test_fmt_in_place(tmp_path):
    src = Path(SMALL).read_text(encoding="utf-8")
    p = tmp_path / "s.ainf"
    p.write_text(src, encoding="utf-8")
    code, out, _ = ainf("fmt", p)
    assert code == cli.EXIT_OK and "rewritten" in out
    once = p.read_text(encoding="utf-8")
    assert once == serialize(parse(src))
    assert "unchanged" in ainf("fmt", p)[1]
    assert p.read_text(encoding="utf-8") == once


def test_parse_error_diagnostics(tmp_path):
    p = tmp_path / "bad.ainf"
    p.write_text("field Q\ncategory A\nobject P shift 0\ngen e : P -> P deg 0 filt 0\nop 2 : e f => e\n", encoding="utf-8")
    code, out, err = ainf("check", p, "--json")
    assert code == cli.EXIT_INVALID
    assert f"{p}:5:" in err and "unknown identifier 'f'" in err
    doc = json.loads(out)
    assert doc["overall"] == "error"
    assert doc["error"]["kind"] == "invalid"
    assert doc["error"]["diagnostics"][0]["line"] == 5


def test_missing_file_and_bad_argv(tmp_path):
    assert ainf("check", tmp_path / "absent.ainf")[0] == cli.EXIT_INVALID
    assert ainf("frobnicate")[0] == cli.EXIT_INVALID
    assert ainf("mc", SMALL)[0] == cli.EXIT_INVALID  # --element is required


def test_json_shape(rand_file):
    path, _, _ = rand_file
    code, out, _ = ainf("check", path, "--json")
    doc = json.loads(out)
    assert code == cli.EXIT_FAIL
    assert set(doc) == {"command", "overall", "truncation_flags", "checks", "outputs", "error"}
    assert doc["overall"] == "fail"
    assert {c["status"] for c in doc["checks"]} <= {"pass", "fail", "info"}
    assert ainf("check", path, "--json")[1] == out
