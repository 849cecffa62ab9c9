import csv
import io

import pytest

from gaussbonnet.cli import main
from gaussbonnet.cochains import parse_cochain1
from gaussbonnet.graph import parse_graph

DIPOLE = "v a 1.0\nv b 1.0\ne a b 1.0\n"
TRIANGLE = "v a 1\nv b 1\nv c 1\ne a b 1\ne b c 2\ne a c 0.5\n"


@pytest.fixture
def files(tmp_path):
    paths = {
        "dipole": "v a 1.0\nv b 1.0\ne a b 1.0\n",
        "source": "a 1.0\nb -1.0\n",
        "bad_source": "a 1.0\n",
        "triangle": TRIANGLE,
        "phi": "a b 1.0\nb c -0.5\nc a 2.0\n",
        "tree_source": "t.0 1.0\nt.1 -1.0\n",
        "broken": "v a 1\ne a b 1\n",
        "split": "v a 1\nv b 1\nv c 1\nv d 1\ne a b 1\ne c d 1\n",
        "split_source": "a 1\nb -1\n",
    }
    out = {}
    for name, text in paths.items():
        p = tmp_path / f"{name}.txt"
        p.write_text(text)
        out[name] = str(p)
    return out


def body(text):
    return "".join(line + "\n" for line in text.splitlines() if not line.startswith("#"))


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(io.StringIO(body(fh.read()))))


def test_gen(tmp_path, capsys):
    out = tmp_path / "tree.txt"
    assert main(["gen", "--kind", "tree", "--radius", "2", "--out", str(out)]) == 0
    g = parse_graph(out.read_text())
    assert g.n_vertices == 10
    assert "# command gen" in out.read_text()


def test_gen_stdout(capsys):
    assert main(["gen", "--kind", "ray", "--radius", "2"]) == 0
    assert parse_graph(capsys.readouterr().out).n_vertices == 3


def test_solve_dipole(files, tmp_path):
    out = tmp_path / "sol"
    assert main(["solve", "--graph", files["dipole"], "--source", files["source"], "--out", str(out)]) == 0
    g = parse_graph(DIPOLE)
    I = parse_cochain1(g, (out / "I.txt").read_text())
    assert abs(I("a", "b") - 1.0) <= 1e-12
    summary = dict(line.split() for line in body((out / "summary.txt").read_text()).splitlines())
    assert float(summary["residual_current"]) <= 1e-10
    assert summary["within_tolerance"] == "1"
    assert {"E0.txt", "I0.txt", "K0.txt"} <= {p.name for p in out.iterdir()}


def test_solve_nonzero_mean(files, tmp_path, capsys):
    code = main(["solve", "--graph", files["dipole"], "--source", files["bad_source"], "--out", str(tmp_path / "x")])
    assert code == 2
    assert "zero weighted mean" in capsys.readouterr().err
    assert not (tmp_path / "x" / "I.txt").exists()


def test_solve_disconnected(files, tmp_path):
    code = main(["solve", "--graph", files["split"], "--source", files["split_source"], "--out", str(tmp_path / "x")])
    assert code == 2


def test_solve_not_converged(files, tmp_path):
    code = main(["gen", "--kind", "grid2d", "--radius", "4", "--out", str(tmp_path / "g.txt")])
    (tmp_path / "s.txt").write_text("0,0 1\n1,1 -1\n")
    code = main(["solve", "--graph", str(tmp_path / "g.txt"), "--source", str(tmp_path / "s.txt"),
                 "--max-iter", "1", "--out", str(tmp_path / "x")])
    assert code == 3


def test_parse_error_exit_code(files, tmp_path, capsys):
    code = main(["solve", "--graph", files["broken"], "--out", str(tmp_path / "x")])
    assert code == 1
    assert "line 2" in capsys.readouterr().err


def test_usage_errors(tmp_path, files):
    assert main([]) == 1
    assert main(["solve", "--graph", files["dipole"]]) == 1
    assert main(["gen"]) == 1
    assert main(["export", "--graph", str(tmp_path / "missing.txt"), "--op", "d"]) == 1


def test_decompose(files, tmp_path):
    out = tmp_path / "dec"
    assert main(["decompose", "--graph", files["triangle"], "--phi", files["phi"], "--out", str(out)]) == 0
    report = dict(line.split() for line in body((out / "report.txt").read_text()).splitlines())
    assert abs(float(report["inner_harmonic_exact"])) <= 1e-8
    assert float(report["delta_harmonic_norm"]) <= 1e-8


def test_export(files, capsys):
    assert main(["export", "--graph", files["dipole"], "--op", "d", "--out", "-"]) == 0
    assert body(capsys.readouterr().out) == "a->b a -1.0\na->b b 1.0\n"


def test_diagnose_csv(tmp_path):
    out = tmp_path / "diag.csv"
    assert main(["diagnose", "--kind", "tree", "--radius", "4", "--iso-max-size", "4", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert set(rows[0]) == {"n", "quantity", "value"}
    got = {(r["n"], r["quantity"]): r["value"] for r in rows}
    assert got[("1", "isoperimetric")] == "3.0"
    assert got[("-1", "cutoff_violations_total")] == "0"
    assert float(got[("1", "positivity_d")]) > 0.1


def test_diagnose_graph_file(files, capsys):
    assert main(["diagnose", "--graph", files["triangle"], "--checks", "homogeneity,cutoff", "--radius", "2"]) == 0
    assert "homogeneity_max" in capsys.readouterr().out


def test_diagnose_unknown_check(files):
    assert main(["diagnose", "--graph", files["triangle"], "--checks", "curvature"]) == 1


def test_convergence_csv(files, tmp_path):
    out = tmp_path / "conv.csv"
    assert main(["convergence", "--kind", "tree", "--radii", "3,4,5", "--source", files["tree_source"],
                 "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [r["radius"] for r in rows] == ["3", "4", "5"]
    assert rows[0]["difference"] == ""
    assert all(float(r["difference"]) <= 1e-6 for r in rows[1:])


def test_check(tmp_path):
    out = tmp_path / "check.csv"
    assert main(["check", "--trials", "5", "--max-vertices", "20", "--seed", "3", "--out", str(out)]) == 0
    assert len(read_csv(out)) == 5


def run_twice(tmp_path, argv, outs):
    texts = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        args = [a.replace("@", str(d)) for a in argv]
        assert main(args) == 0
        texts.append([(d / o).read_bytes() for o in outs])
    return texts


@pytest.mark.parametrize("argv, outs", [
    (["gen", "--kind", "grid2d", "--radius", "3", "--out", "@/g.txt"], ["g.txt"]),
    (["solve", "--graph", "{triangle}", "--voltage", "{phi}", "--out", "@"],
     ["I.txt", "E0.txt", "I0.txt", "K0.txt", "summary.txt"]),
    (["decompose", "--graph", "{triangle}", "--phi", "{phi}", "--out", "@"],
     ["harmonic.txt", "exact.txt", "potential.txt", "report.txt"]),
    (["diagnose", "--kind", "ladder", "--radius", "4", "--out", "@/d.csv"], ["d.csv"]),
    (["convergence", "--kind", "tree", "--radii", "3,4", "--source", "{tree_source}", "--out", "@/c.csv"],
     ["c.csv"]),
    (["export", "--graph", "{triangle}", "--op", "D", "--out", "@/D.txt"], ["D.txt"]),
    (["check", "--trials", "3", "--seed", "9", "--out", "@/k.csv"], ["k.csv"]),
])
def test_deterministic(files, tmp_path, argv, outs):
    argv = [a.format(**files) for a in argv]
    first, second = run_twice(tmp_path, argv, outs)
    assert first == second
