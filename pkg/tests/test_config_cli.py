import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from percolab import ValidationError, __version__
from percolab.cli import main
from percolab.config import KINDS, ExperimentConfig
from percolab.experiments import validate
from percolab.fixtures import FIXTURE_DIR, HASH_FILE, ORACLE_FILE

finite = st.floats(0, 1, allow_nan=False)
small = st.integers(0, 10**6)

configs = st.builds(
    ExperimentConfig,
    kind=st.sampled_from(KINDS),
    family=st.sampled_from(["tree:d=3", "tree:d=5", "treez:d=3,pc=0.37"]),
    p=st.none() | finite,
    p_grid=st.lists(finite, max_size=4),
    r_max=st.none() | small,
    samples=st.none() | small,
    seed=small,
    r_inf=st.none() | small,
    out=st.text("abcxyz/_-", min_size=1, max_size=10),
    threads=st.integers(1, 16),
    engine=st.sampled_from(["auto", "bfs", "gw"]),
    alpha_fracs=st.lists(finite, max_size=4),
    r_list=st.lists(small, max_size=4),
    L=st.none() | small,
    p_tilt=st.none() | finite,
    delta=st.none() | finite,
)


@given(configs)
@settings(max_examples=200)
def test_config_roundtrip(cfg):
    assert ExperimentConfig.from_text(cfg.to_text()) == cfg


def test_config_parse_errors(tmp_path):
    with pytest.raises(ValidationError):
        ExperimentConfig.from_text("kind = growth\nnonsense\n")
    with pytest.raises(ValidationError):
        ExperimentConfig.from_text("colour = red\n")
    with pytest.raises(ValidationError):
        ExperimentConfig.from_text("p = half\n")
    with pytest.raises(ValidationError):
        ExperimentConfig(kind="sandwich")
    cfg = ExperimentConfig.from_text("# comment\nkind = rates  # trailing\n\np_grid = 0.52, 0.6\n")
    assert cfg.kind == "rates" and cfg.p_grid == [0.52, 0.6]


def test_validate_diagnostics():
    assert validate(ExperimentConfig(kind="growth")) == []
    assert validate(ExperimentConfig(kind="rates")) == []
    assert any("supercritical required" in d for d in validate(ExperimentConfig(kind="ks", p=0.4)))
    assert any("alpha" in d for d in validate(ExperimentConfig(kind="genfun", alpha_fracs=[0.5, 1.0])))
    assert any("window" in d for d in
               validate(ExperimentConfig(kind="tauberian", r_list=[8, 64], r_max=32)))
    assert any("p_c unknown" in d for d in
               validate(ExperimentConfig(kind="ks", family="treez:d=3", p=0.6)))
    assert any("regular trees" in d for d in
               validate(ExperimentConfig(kind="triangle", family="treez:d=3")))
    assert any("gw" in d for d in
               validate(ExperimentConfig(kind="growth", family="treez:d=3", engine="gw")))
    assert validate(ExperimentConfig(family="cube:d=3"))[0].startswith("family")


def _run(tmp_path, name, *args):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


def test_growth_determinism(tmp_path):
    args = ("growth", "--p", "0.6", "--samples", "2000", "--seed", "7", "--r-max", "8")
    c1, o1 = _run(tmp_path, "a", *args)
    c2, o2 = _run(tmp_path, "b", *args)
    c3, o3 = _run(tmp_path, "c", *args, "--threads", "2")
    assert c1 == c2 == c3 == 0
    data = (o1 / "growth.csv").read_bytes()
    assert data == (o2 / "growth.csv").read_bytes() == (o3 / "growth.csv").read_bytes()
    assert data.startswith(b"r,mean_sphere,")
    s1 = json.loads((o1 / "summary.json").read_text())
    s2 = json.loads((o2 / "summary.json").read_text())
    assert s1["config"].pop("out") != s2["config"].pop("out")
    assert s1 == s2
    assert s1["schema_version"] == 1 and s1["code_version"] == __version__
    assert s1["config"]["seed"] == 7 and s1["config"]["p"] == 0.6
    assert s1["passed"] is True
    assert (o1 / "plot_growth.py").read_text().startswith('"""Plot growth.csv')


def test_bfs_engine_determinism(tmp_path):
    args = ("growth", "--family", "treez:d=3", "--p", "0.3", "--samples", "300", "--r-max", "4")
    c1, o1 = _run(tmp_path, "a", *args)
    c2, o2 = _run(tmp_path, "b", *args, "--threads", "3")
    assert c1 == c2 == 0
    assert (o1 / "growth.csv").read_bytes() == (o2 / "growth.csv").read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("kind = growth\np = 0.55\nsamples = 500\nr_max = 5\nseed = 3\n")
    code, out = _run(tmp_path, "o", "growth", "--config", str(cfg), "--seed", "4")
    assert code == 0
    conf = json.loads((out / "summary.json").read_text())["config"]
    assert conf["p"] == 0.55 and conf["seed"] == 4 and conf["samples"] == 500


def test_fixtures_regenerate_identically(tmp_path):
    code, out = _run(tmp_path, "fx", "fixtures")
    assert code == 0
    for name in (HASH_FILE, ORACLE_FILE):
        assert (out / name).read_bytes() == (FIXTURE_DIR / name).read_bytes()
    code, out = _run(tmp_path, "fx2", "oracle-fixtures")
    assert code == 0 and (out / HASH_FILE).exists()


def test_exit_codes(tmp_path, capsys):
    code, out = _run(tmp_path, "e1", "ks", "--p", "0.4")
    assert code == 3
    err = json.loads((out / "error.json").read_text())
    assert err["exit_code"] == 3 and "supercritical" in err["message"]

    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    code, out = _run(tmp_path, "e2", "growth", "--config", str(bad))
    assert code == 2 and json.loads((out / "error.json").read_text())["error"] == "ValidationError"

    code, out = _run(tmp_path, "e3", "growth", "--p", "0.99", "--r-max", "200", "--samples", "200")
    assert code == 4
    assert json.loads((out / "error.json").read_text())["attained"] >= 50

    code, out = _run(tmp_path, "e4", "triangle", "--p", "0.7", "--L", "10", "--k-list", "0")
    assert code == 6

    assert main(["validate", "--kind", "ks", "--p", "0.6"]) == 0
    assert main(["validate", "--kind", "ks", "--p", "0.4"]) == 3
    assert "supercritical required" in capsys.readouterr().out


def test_failed_check_exit(tmp_path):
    # too few survivors for a tight quenched-rate band: runs, writes, reports failure
    code, out = _run(tmp_path, "ks", "ks", "--p", "0.6", "--samples", "300",
                     "--min-survivors", "0", "--r-max", "40", "--delta", "0.0001")
    assert code == 1
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] is False
    assert summary["checks"]["fraction_within_ge_0.95"] is False
    assert (out / "ks.csv").exists()
