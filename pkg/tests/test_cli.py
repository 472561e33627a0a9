import json

import pytest

from fanplex.cli import counterexample_report, main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["build", "lelek", "--budget", "40", "--seed", "7", "--out", str(root / "a.json")]) == 0
    assert main(["build", "lelek", "--budget", "40", "--seed", "8", "--out", str(root / "b.json")]) == 0
    assert main(["build", "poulsen", "--budget", "25", "--seed", "7", "--out", str(root / "p.json")]) == 0
    return root


def test_build_deterministic_bytes(workdir, capsys):
    again = workdir / "a_again.json"
    assert main(["build", "lelek", "--budget", "40", "--seed", "7", "--out", str(again)]) == 0
    capsys.readouterr()
    assert again.read_bytes() == (workdir / "a.json").read_bytes()


def test_build_budget_zero(tmp_path, capsys):
    out = tmp_path / "z.json"
    assert main(["build", "lelek", "--budget", "0", "--out", str(out)]) == 0
    capsys.readouterr()
    data = json.loads(out.read_text())
    assert len(data["sequence"]["objects"]) == 1
    assert data["log"] == []


def test_build_poulsen_dimension_arithmetic(workdir):
    data = json.loads((workdir / "p.json").read_text())
    dims = [obj["dim"] for obj in data["sequence"]["objects"]]
    assert dims[-1] == len(data["log"]) == 25


def test_build_rejects_bad_flags(tmp_path, capsys):
    assert main(["build", "banach", "--budget", "1", "--out", str(tmp_path / "x.json")]) == 2
    assert main(["build", "lelek", "--budget", "-3", "--out", str(tmp_path / "x.json")]) == 2
    capsys.readouterr()


def test_render_deterministic_and_missing_stage(workdir, capsys):
    svg1 = workdir / "a.svg"
    svg2 = workdir / "a2.svg"
    assert main(["render", "--in", str(workdir / "a.json"), "--stage", "12", "--svg", str(svg1)]) == 0
    assert main(["render", "--in", str(workdir / "a.json"), "--stage", "12", "--svg", str(svg2)]) == 0
    assert svg1.read_bytes() == svg2.read_bytes()
    assert main(["render", "--in", str(workdir / "a.json"), "--stage", "99", "--svg", str(svg2)]) == 2
    capsys.readouterr()


def test_render_simplex_bundle(workdir, capsys):
    out = workdir / "p.svg"
    assert main(["render", "--in", str(workdir / "p.json"), "--stage", "3", "--svg", str(out)]) == 0
    assert "dim=3" in out.read_text()
    capsys.readouterr()


def test_verify_axioms_and_lipschitz_and_fraisse(workdir, capsys):
    for bundle in ("a.json", "p.json"):
        for suite in ("axioms", "lipschitz", "fraisse"):
            code = main(["verify", "--in", str(workdir / bundle), "--suite", suite])
            out = capsys.readouterr().out
            assert code == 0
            assert json.loads(out)["ok"] is True


def test_verify_fraisse_detects_tampering(workdir, tmp_path, capsys):
    data = json.loads((workdir / "a.json").read_text())
    data["log"][5]["achieved"] = "1/2"
    data["log"][5]["eps"] = "1/4"
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(data))
    code = main(["verify", "--in", str(broken), "--suite", "fraisse"])
    out = capsys.readouterr().out
    assert code == 3
    report = json.loads(out)
    assert report["ok"] is False
    assert report["violations"][0]["index"] == 5


def test_verify_density_pass_and_fail(workdir, capsys):
    code = main(
        ["verify", "--in", str(workdir / "a.json"), "--suite", "density", "--mesh", "1/4", "--horizon", "max"]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert json.loads(out)["ok"] is True
    code = main(
        ["verify", "--in", str(workdir / "a.json"), "--suite", "density", "--mesh", "1/64", "--horizon", "10"]
    )
    capsys.readouterr()
    assert code == 3


def test_verify_density_requires_mesh(workdir, capsys):
    assert main(["verify", "--in", str(workdir / "a.json"), "--suite", "density"]) == 2
    capsys.readouterr()


def test_verify_density_writes_reports(workdir, tmp_path, capsys):
    csv = tmp_path / "curve.csv"
    plot = tmp_path / "curve.png"
    code = main(
        [
            "verify", "--in", str(workdir / "a.json"), "--suite", "density",
            "--mesh", "1/4", "--horizon", "max",
            "--csv", str(csv), "--plot", str(plot),
        ]
    )
    capsys.readouterr()
    assert code == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "horizon,worst_gap"
    assert len(lines) >= 2
    assert plot.stat().st_size > 0


def test_homogeneity_command(workdir, tmp_path, capsys):
    fan_file = tmp_path / "two_spike.json"
    fan_file.write_text(
        json.dumps(
            {"endpoints": [{"address": "0", "level": "1"}, {"address": "1", "level": "1/2"}]}
        )
    )
    code = main(
        ["homogeneity", "--a", str(workdir / "a.json"), "--b", str(workdir / "b.json"),
         "--fan", str(fan_file), "--eps", "1/8"]
    )
    out = capsys.readouterr().out
    assert code == 0
    report = json.loads(out)
    assert report["ok"] is True
    # Exact isomorphism is never claimed at finite depth between runs.
    code = main(
        ["homogeneity", "--a", str(workdir / "a.json"), "--b", str(workdir / "b.json"),
         "--fan", str(fan_file), "--eps", "0"]
    )
    capsys.readouterr()
    assert code == 3


def test_homogeneity_rejects_mixed_categories(workdir, tmp_path, capsys):
    fan_file = tmp_path / "f.json"
    fan_file.write_text(json.dumps({"endpoints": [{"address": "0", "level": "1"}]}))
    code = main(
        ["homogeneity", "--a", str(workdir / "a.json"), "--b", str(workdir / "p.json"),
         "--fan", str(fan_file), "--eps", "1/8"]
    )
    capsys.readouterr()
    assert code == 2


def test_counterexample_command(capsys):
    code = main(["counterexample", "--grid", "8"])
    out = capsys.readouterr().out
    assert code == 0
    report = json.loads(out)
    assert report["ok"] is True
    assert report["first_coordinate_preserved"] is True
    assert report["center_collapse_pair"]["image"] == ["1/2", "0"]


def test_counterexample_plot(tmp_path, capsys):
    plot = tmp_path / "shear.png"
    assert main(["counterexample", "--grid", "8", "--plot", str(plot)]) == 0
    capsys.readouterr()
    assert plot.stat().st_size > 0


def test_fan_figure(tmp_path):
    from fanplex import fans
    from fanplex.figures import save_fan_figure
    from fractions import Fraction as F

    fan = fans.FiniteFan(
        (fans.EndPoint("0", F(1)), fans.EndPoint("1", F(1, 2))), frozenset({0})
    )
    out = tmp_path / "fan.png"
    save_fan_figure(fan, out)
    assert out.stat().st_size > 0


def test_counterexample_report_grid_too_small():
    with pytest.raises(ValueError):
        counterexample_report(1)
    assert main(["counterexample", "--grid", "1"]) == 2


def test_usage_errors_exit_two(capsys):
    assert main(["frobnicate"]) == 2
    assert main(["build", "lelek", "--budget", "not-a-number", "--out", "x"]) == 2
    assert main([]) == 2
    capsys.readouterr()
