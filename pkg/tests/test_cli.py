import json
import math

import pytest

from qgraph import cli
from qgraph import generators as G
from qgraph import io as qio
from qgraph.errors import ScanIncomplete
from qgraph.graph_core import DiscreteSpectrum
from qgraph.spectral_solver import MetricSpectrum


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def circle_file(tmp_path):
    path = tmp_path / "circle.json"
    qio.save_graph(G.cycle(2 * math.pi), path)
    return path


class TestGenerate:
    def test_lollipop(self, capsys):
        code, out, _ = run(capsys, "generate", "lollipop", "L₀=1", "ε=0.001")
        g = qio.loads_graph(out)
        assert code == 0 and g.E == 2 and g == G.lollipop(1.0, 0.001)

    def test_wheel(self, capsys):
        code, out, _ = run(capsys, "generate", "wheel", "6")
        assert code == 0 and json.loads(out)["kind"] == "combinatorial"
        assert qio.loads_graph(out) == G.wheel(6)

    def test_necklace(self, capsys):
        code, out, _ = run(capsys, "generate", "necklace", "4")
        assert code == 0 and json.loads(out)["kind"] == "metric"

    def test_pi_lengths(self, capsys):
        _, out, _ = run(capsys, "generate", "circle", "L=2pi")
        assert qio.loads_graph(out) == G.cycle(2 * math.pi)

    def test_to_file(self, capsys, tmp_path):
        target = tmp_path / "w.json"
        code, out, _ = run(capsys, "generate", "wheel", "4", "--out", target)
        assert code == 0 and out == "" and qio.load_graph(target) == G.wheel(4)

    @pytest.mark.parametrize("args", [("1", "0.5"), ("1,0.5",), ("lengths=1,0.5",)])
    def test_list_forms(self, capsys, args):
        _, out, _ = run(capsys, "generate", "flower", *args)
        assert qio.loads_graph(out) == G.flower([1.0, 0.5])

    def test_unknown_family(self, capsys):
        code, _, err = run(capsys, "generate", "teapot")
        assert code == 3 and "unknown family" in err

    def test_bad_parameter(self, capsys):
        assert run(capsys, "generate", "pumpkin", "1.0,-1.0")[0] == 3


class TestSpectrum:
    def test_circle(self, capsys, circle_file):
        code, out, _ = run(capsys, "spectrum", circle_file, "-n", 5)
        assert code == 0
        assert json.loads(out)["eigenvalues"] == pytest.approx([0, 1, 1, 4, 4], abs=1e-9)

    def test_star(self, capsys, tmp_path, unit_star):
        path = tmp_path / "star.json"
        qio.save_graph(unit_star, path)
        _, out, _ = run(capsys, "spectrum", path, "-n", 3)
        assert json.loads(out)["eigenvalues"] == pytest.approx([0, math.pi ** 2 / 4, math.pi ** 2 / 4], abs=1e-9)

    def test_p3(self, capsys, tmp_path, p3):
        path = tmp_path / "p3.json"
        qio.save_graph(p3, path)
        _, out, _ = run(capsys, "spectrum", path)
        assert json.loads(out)["eigenvalues"] == pytest.approx([0, 1, 3], abs=1e-12)

    def test_csv(self, capsys, circle_file):
        _, out, _ = run(capsys, "spectrum", circle_file, "-n", 3, "--format", "csv")
        assert out.splitlines()[0] == "index,lambda,sqrt_lambda,multiplicity"

    def test_directory_output(self, capsys, circle_file, tmp_path):
        out_dir = tmp_path / "out"
        out_dir.mkdir()
        assert run(capsys, "spectrum", circle_file, "-n", 3, "--out", out_dir)[0] == 0
        assert (out_dir / "spectrum.json").exists() and (out_dir / "spectrum.csv").exists()

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "spectrum", tmp_path / "nope.json")[0] == 3

    def test_invalid_graph(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"kind": "metric", "vertices": 2, "edges": [[0, 1, 0.0]]}))
        assert run(capsys, "spectrum", path)[0] == 3

    def test_incomplete_scan(self, capsys, circle_file, monkeypatch):
        def fail(*args, **kwargs):
            raise ScanIncomplete("located 2 of 3 eigenvalues", (0.0, 1.0))
        monkeypatch.setattr(cli, "eigenvalues", fail)
        code, _, err = run(capsys, "spectrum", circle_file)
        assert code == 2 and "located" in err


class TestBounds:
    def test_circle_holds(self, capsys, circle_file):
        code, out, _ = run(capsys, "bounds", circle_file, "-k", 8)
        assert code == 0
        assert all(r["verdict"] in ("Holds", "NotApplicable") for r in json.loads(out))

    def test_lollipop_rows(self, capsys, tmp_path):
        path = tmp_path / "lol.json"
        qio.save_graph(G.lollipop(0.9, 0.1), path)
        _, out, _ = run(capsys, "bounds", path, "-k", 6)
        ks = {r["k"] for r in json.loads(out) if r["id"] == "B23L"}
        assert set(range(2, 7)) <= ks

    def test_dirichlet_tree_has_b12(self, capsys, tmp_path):
        path = tmp_path / "tree.json"
        star = G.metric_star([1.0, 0.5, 0.8])
        qio.save_graph(type(star)(star.V, star.edges, frozenset({1, 2, 3})), path)
        _, out, _ = run(capsys, "bounds", path, "-k", 4)
        assert any(r["id"] == "B12" for r in json.loads(out))

    def test_violation_exit_code(self, capsys, circle_file, tmp_path):
        # a deliberately wrong spectrum breaks the lower bounds
        spec = tmp_path / "sp.json"
        spec.write_text(qio.dumps_spectrum(MetricSpectrum((0.0, 1e-3, 1e-3, 2e-3), "from_zero", 0.1, {})))
        assert run(capsys, "bounds", circle_file, "--spectrum", spec, "-k", 3)[0] == 1

    def test_mismatched_spectrum(self, capsys, tmp_path, p3):
        g, spec = tmp_path / "p3.json", tmp_path / "sp.json"
        qio.save_graph(p3, g)
        spec.write_text(qio.dumps_spectrum(DiscreteSpectrum((0.0, 1.0), "Laplacian")))
        assert run(capsys, "bounds", g, "--spectrum", spec)[0] == 3

    def test_p_needs_value(self, capsys, circle_file):
        assert run(capsys, "bounds", circle_file, "--p", 3)[0] == 3

    def test_csv(self, capsys, circle_file):
        _, out, _ = run(capsys, "bounds", circle_file, "-k", 3, "--format", "csv")
        assert out.startswith("id,")


class TestOtherCommands:
    def test_connectivity(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        qio.save_graph(G.regular_pumpkin_chain(3, 2, 6.0), path)
        _, out, _ = run(capsys, "connectivity", path)
        info = json.loads(out)
        assert info["discrete_edge_connectivity"] == 3 and info["metric_edge_connectivity"] == 2

    def test_plap(self, capsys, tmp_path):
        path = tmp_path / "p.json"
        qio.save_graph(G.path(3), path)
        code, out, _ = run(capsys, "plap", path, "--p", 2, "--restarts", 2)
        assert code == 0 and json.loads(out)["value"] == pytest.approx(1.0, abs=1e-6)

    def test_surgery_ops(self, capsys, circle_file):
        code, out, _ = run(capsys, "surgery", circle_file, "--op", "CutEdge edge=0 x=pi")
        g = qio.loads_graph(out)
        assert code == 0 and g.E == 2 and g.L == pytest.approx(2 * math.pi)

    def test_surgery_script(self, capsys, circle_file, tmp_path):
        script = tmp_path / "ops.json"
        script.write_text(json.dumps([{"kind": "AttachPendant", "params": {"vertex": 0, "length": 0.5}},
                                      {"kind": "DoubleEdges"}]))
        _, out, _ = run(capsys, "surgery", circle_file, "--script", script)
        assert qio.loads_graph(out).E == 4

    def test_surgery_needs_ops(self, capsys, circle_file):
        assert run(capsys, "surgery", circle_file)[0] == 3

    def test_sweep_is_deterministic(self, capsys):
        args = ("sweep", "lollipop", "--values", "0.1", "0.01", "-n", 3)
        a, b = run(capsys, *args)[1], run(capsys, *args)[1]
        assert a == b
        rows = a.splitlines()
        assert rows[0].startswith("param,lambda_1,lambda_2,lambda_3") and len(rows) == 3
        # the second eigenvalue of a lollipop with short pendant approaches that of the loop
        ratios = [float(r.split(",")[2]) / (4 * math.pi ** 2) for r in rows[1:]]
        assert abs(ratios[1] - 1) < abs(ratios[0] - 1)

    def test_verify_subset(self, capsys):
        code, out, _ = run(capsys, "verify", "--only", "10")
        assert code == 0 and "1/1 criteria passed" in out

    def test_verify_unknown_selector(self, capsys):
        assert run(capsys, "verify", "--only", "nonsense")[0] == 3

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["spectrum"])
        assert exc.value.code == 3
