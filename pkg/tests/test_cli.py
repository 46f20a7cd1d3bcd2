"""Config parsing, command dispatch, file outputs, exit codes."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inls_lab.cli import (
    ConfigError,
    build_run_config,
    config_hash,
    headline_verdict,
    main,
    parse_config_text,
)
from inls_lab.classify import NOT_APPLICABLE, ClassificationEntry
from inls_lab.grid import build_grid, field_from_csv

from conftest import F1, solve

MINI = """\
params.n = 3
params.b = 0
params.c = 0
params.p = 2
"""

BASE = MINI + """\
grid.N = 1024
evolve.t_end = 0.3
evolve.sample_every = 5
initial.alpha = 0.5
"""


def pairs_of(text):
    return parse_config_text(text)


def write_config(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parser_values_comments_and_lines():
    pairs = parse_config_text(
        "# header\n\nparams.n = 3  # inline\n  grid.N=64\nname = a b c\n"
    )
    assert pairs["params.n"] == ("3", 3)
    assert pairs["grid.N"] == ("64", 4)
    assert pairs["name"] == ("a b c", 5)


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("params.n 3\n", "expected key = value"),
        ("a = 1\na = 2\n", "duplicate key"),
        ("= 3\n", "empty key"),
    ],
)
def test_parser_rejects(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config_text(text)


def test_config_hash_canonicalization():
    a = parse_config_text("x = 1\ny = 2\n")
    b = parse_config_text("# comment\ny = 2\n\nx = 1\n")
    c = parse_config_text("x = 1\ny = 3\n")
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(c)


@settings(max_examples=30, deadline=None)
@given(
    st.dictionaries(
        st.from_regex(r"[a-z]{1,8}(\.[a-z]{1,8})?", fullmatch=True),
        st.from_regex(r"[A-Za-z0-9_.,+-]{1,12}", fullmatch=True),
        min_size=1,
        max_size=6,
    ),
    st.randoms(),
)
def test_config_hash_is_order_insensitive(d, rnd):
    items = list(d.items())
    text1 = "\n".join(f"{k} = {v}" for k, v in items)
    rnd.shuffle(items)
    text2 = "\n".join(f"{k} = {v}  # noise" for k, v in items)
    assert config_hash(parse_config_text(text1)) == config_hash(parse_config_text(text2))


def test_build_run_config_defaults():
    cfg = build_run_config(pairs_of("params.n = 3\nparams.b = 0\nparams.c = 0\nparams.p = 2\n"))
    assert cfg.params == F1
    assert cfg.num_cells == 4096
    assert cfg.r_max == 30.0
    assert cfg.grading == 2.0
    assert cfg.potential.is_zero
    assert cfg.initial_kind == "ground_state_multiple"
    assert cfg.initial_alpha == 1.0
    assert cfg.classify_omega is None
    assert cfg.sweep_key is None
    assert cfg.out_dir == "out"
    assert cfg.evolution.dt0 == 1e-3
    assert cfg.sha == config_hash(pairs_of("params.n = 3\nparams.b = 0\nparams.c = 0\nparams.p = 2\n"))


@pytest.mark.parametrize(
    "extra,fragment",
    [
        ("grid.M = 2\n", r"line \d+: unknown key 'grid.M'"),
        ("grid.N = many\n", "expects an integer"),
        ("evolve.adaptivity = maybe\n", "expects true/false"),
        ("params.omega = abc\n", "expects a number"),
        ("initial.kind = soliton\n", "initial.kind must be one of"),
        ("initial.alpha = 0\n", "must be positive"),
        ("initial.kind = from_file\n", "requires initial.path"),
        ("initial.kind = from_file\ninitial.path = /no/such/file.csv\n", "does not exist"),
        ("classify.omega = abc\n", "expects 'optimal' or a number"),
        ("classify.omega = 0\n", "must be positive"),
        ("evolve.dt0 = 0\n", "evolve: "),
        ("sweep.values = ,\n", "sweep.values is empty"),
        ("potential.family = banana\n", "potential: "),
    ],
)
def test_build_run_config_rejects(extra, fragment):
    with pytest.raises(ConfigError, match=fragment):
        build_run_config(pairs_of(MINI + extra))


def test_invalid_params_report_their_origin():
    with pytest.raises(ConfigError, match="params: "):
        build_run_config(pairs_of("params.n = 3\nparams.b = 0\nparams.c = 0\nparams.p = 0\n"))
    with pytest.raises(ConfigError, match="missing required key 'params.b'"):
        build_run_config(pairs_of("params.n = 3\n"))


def test_classify_omega_forms():
    assert build_run_config(pairs_of(BASE + "classify.omega = optimal\n")).classify_omega is None
    assert build_run_config(pairs_of(BASE + "classify.omega = 2.5\n")).classify_omega == 2.5


def test_out_override_keeps_output_dir_consumed():
    # output.dir must count as used even when --out replaces it, or the
    # unknown-key sieve rejects valid configs.
    cfg = build_run_config(pairs_of(BASE + "output.dir = from_config\n"), out_override="cli_dir")
    assert cfg.out_dir == "cli_dir"
    cfg = build_run_config(pairs_of(BASE + "output.dir = from_config\n"))
    assert cfg.out_dir == "from_config"


def test_main_exit_codes(tmp_path, capsys):
    bad = write_config(tmp_path, BASE + "grid.M = 2\n")
    assert main(["groundstate", "--config", bad]) == 2
    assert "config error" in capsys.readouterr().err

    # N = 512 leaves the stationary identities above their gate, which
    # the solver reports as a failure rather than returning the profile.
    coarse = write_config(tmp_path, BASE.replace("grid.N = 1024", "grid.N = 512"))
    assert main(["groundstate", "--config", coarse, "--out", str(tmp_path / "g")]) == 1
    assert "error:" in capsys.readouterr().err


def test_check_potential_command(tmp_path, capsys):
    text = (
        "params.n = 3\nparams.b = -0.5\nparams.c = -0.5\nparams.p = 2\n"
        "potential.family = const_plus_gaussian\npotential.a = 1\n"
    )
    cfg = write_config(tmp_path, text)
    out = tmp_path / "pot"
    assert main(["check-potential", "--config", cfg, "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "(IV): Fails" in stdout
    assert "(I): Holds" in stdout
    report = json.loads((out / "assumptions.json").read_text())
    assert report["IV"]["status"] == "Fails"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "check-potential"
    assert set(manifest["versions"]) == {"inls-lab", "numpy", "scipy"}
    assert manifest["outputs"] == ["assumptions.json"]
    assert manifest["grid"]["N"] == 4096


def test_groundstate_command_outputs_and_determinism(tmp_path, capsys):
    text = BASE.replace("grid.N = 1024", "grid.N = 2048")
    cfg = write_config(tmp_path, text)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["groundstate", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["groundstate", "--config", cfg, "--out", str(out2)]) == 0
    assert "groundstate: residual" in capsys.readouterr().out

    g = build_grid(3, 0.0, r_max=30.0, N=2048, grading=2.0)
    prof = field_from_csv(g, out1 / "profile.csv")
    ref = solve(F1, 2048)
    assert np.max(np.abs(prof.values - ref.profile.values)) < 1e-12

    summary = json.loads((out1 / "groundstate.json").read_text())
    assert summary["m_omega"] == pytest.approx(ref.m_omega, rel=1e-12)
    assert summary["omega"] == 1.0

    for name in ("profile.csv", "groundstate.json", "manifest.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_evolve_command(tmp_path, capsys):
    text = (
        "params.n = 3\nparams.b = 0\nparams.c = 0\nparams.p = 2\n"
        "grid.N = 512\ninitial.kind = gaussian\ninitial.width = 1.5\n"
        "evolve.t_end = 0.05\nevolve.adaptivity = false\n"
    )
    cfg = write_config(tmp_path, text)
    out = tmp_path / "ev"
    assert main(["evolve", "--config", cfg, "--out", str(out)]) == 0
    assert "evolve: Completed" in capsys.readouterr().out
    assert (out / "trace.csv").exists()
    events = json.loads((out / "trace.events.json").read_text())["events"]
    assert events[-1]["kind"] == "Completed"
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["outputs"] == ["trace.csv", "trace.events.json"]


def test_evolve_from_file_roundtrip(tmp_path):
    from inls_lab.grid import RadialField, field_to_csv

    g = build_grid(3, 0.0, r_max=30.0, N=512, grading=2.0)
    datum = tmp_path / "datum.csv"
    field_to_csv(RadialField(g, np.exp(-g.nodes**2)), datum)
    text = (
        "params.n = 3\nparams.b = 0\nparams.c = 0\nparams.p = 2\n"
        "grid.N = 512\ninitial.kind = from_file\n"
        f"initial.path = {datum}\n"
        "evolve.t_end = 0.02\nevolve.adaptivity = false\n"
    )
    cfg = write_config(tmp_path, text)
    assert main(["evolve", "--config", cfg, "--out", str(tmp_path / "ff")]) == 0


def test_classify_command(tmp_path, capsys):
    cfg = write_config(tmp_path, BASE)
    out = tmp_path / "cls"
    assert main(["classify", "--config", cfg, "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "intercritical_threshold: GlobalCandidate" in stdout
    rows = json.loads((out / "classification.json").read_text())
    assert [r["id"] for r in rows] == [
        "mass_critical_threshold",
        "intercritical_threshold",
        "action_set_membership",
    ]
    assert rows[0]["verdict"] == "NotApplicable"
    assert rows[1]["verdict"] == "GlobalCandidate"
    freq = json.loads((out / "frequency.json").read_text())
    assert freq["f_omega0"] > 0


def test_sweep_parallel_matches_serial(tmp_path):
    text = BASE + "sweep.key = initial.alpha\nsweep.values = 0.5, 1.5\n"
    cfg = write_config(tmp_path, text)
    s1, s2 = tmp_path / "serial", tmp_path / "par"
    assert main(["sweep", "--config", cfg, "--out", str(s1)]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(s2), "--jobs", "2"]) == 0
    assert (s1 / "summary.csv").read_bytes() == (s2 / "summary.csv").read_bytes()

    lines = (s1 / "summary.csv").read_text().splitlines()
    assert lines[0] == "index,key,value,verdict,event,event_time,grad_growth"
    assert lines[1].split(",")[3] == "GlobalCandidate"
    assert lines[2].split(",")[3] == "BlowupCandidate"
    for i in range(2):
        assert (s1 / f"point_{i:03d}" / "classification.json").exists()
        assert (s1 / f"point_{i:03d}" / "manifest.json").exists()


def test_sweep_requires_axis(tmp_path):
    cfg = write_config(tmp_path, BASE)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s")]) == 2
    bogus = write_config(tmp_path, BASE + "sweep.key = bogus.key\nsweep.values = 1\n", "b.cfg")
    assert main(["sweep", "--config", bogus, "--out", str(tmp_path / "s2")]) == 2


def test_verify_command_exit_codes(monkeypatch, capsys):
    from inls_lab.verification import CheckResult

    ok = CheckResult("alpha", True, 1e-9, 1e-6)
    bad = CheckResult("beta", False, 2e-3, 1e-6, detail="exceeded")
    monkeypatch.setattr("inls_lab.verification.run_all", lambda: [ok, ok])
    assert main(["verify"]) == 0
    assert "2/2 checks passed" in capsys.readouterr().out
    monkeypatch.setattr("inls_lab.verification.run_all", lambda: [ok, bad])
    assert main(["verify"]) == 3
    stdout = capsys.readouterr().out
    assert "1/2 checks passed" in stdout
    assert "FAIL beta" in stdout


def test_headline_verdict_route_order():
    def entry(verdict):
        return ClassificationEntry("t", {}, verdict, ())

    assert headline_verdict([entry(NOT_APPLICABLE), entry("GlobalCandidate")]) == "GlobalCandidate"
    assert headline_verdict([entry(NOT_APPLICABLE)]) == NOT_APPLICABLE
    assert headline_verdict([entry("BlowupCandidate"), entry("GlobalCandidate")]) == "BlowupCandidate"
