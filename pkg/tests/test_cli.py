import csv
import hashlib
import json
import re
import textwrap

import pytest

from movingatom.cli import main

BASIC = """
    atom: {epsilon: 0.01, gamma_tilde: 0.01}
    grid: {start: 0.9, stop: 1.1, count: 21}
    formfactor: {kind: gaussian, cutoff: 10.0}
    seed: 7
"""


def write_config(tmp_path, text=BASIC, name="scenario.yaml"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


def run(args):
    return main([str(a) for a in args])


def read_manifest(out_dir):
    return json.loads((out_dir / "manifest.json").read_text())


def test_spectrum_run_and_manifest(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    assert run(["spectrum", "--config", cfg, "--out", out]) == 0
    manifest = read_manifest(out)
    assert manifest["tool"] == "movingatom"
    assert manifest["subcommand"] == "spectrum"
    assert manifest["config_sha256"] == hashlib.sha256(cfg.read_bytes()).hexdigest()
    assert manifest["options"]["seed"] == 7
    # output hashes must match the files on disk
    for name, digest in manifest["outputs"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest
    # no wall-clock leakage: manifests must be reproducible
    text = json.dumps(manifest)
    assert not re.search(r"\d{4}-\d{2}-\d{2}", text)  # no dates anywhere
    for key in ("timestamp", "created", "date", "hostname"):
        assert key not in manifest


def test_spectrum_csv_format(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    run(["spectrum", "--config", cfg, "--out", out])
    with open(out / "spectrum.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "w", "kappa_w", "error_estimate"]
    assert len(rows) == 22
    # every numeric cell is printed with 17 significant digits
    cell = rows[1][0]
    assert re.fullmatch(r"-?\d\.\d{16}e[+-]\d{2,3}", cell)
    assert float(rows[1][0]) == 0.9


def test_byte_identical_reruns(tmp_path):
    cfg = write_config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(["divergence", "--config", cfg, "--out", out1]) == 0
    assert run(["divergence", "--config", cfg, "--out", out2]) == 0
    names1 = sorted(p.name for p in out1.iterdir())
    names2 = sorted(p.name for p in out2.iterdir())
    assert names1 == names2
    for name in names1:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_probability_output(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "p"
    assert run(["probability", "--config", cfg, "--out", out]) == 0
    payload = json.loads((out / "probability.json").read_text())
    assert payload["converged"] is True
    assert payload["value"] > 0
    assert payload["formfactor"]["kind"] == "gaussian"


def test_rates_csv_columns(tmp_path):
    cfg = write_config(tmp_path, """
        atom: {epsilon: 0.01, gamma_tilde: 0.01}
        limit_ordering: {epsilons: [1.0e-2, 1.0e-3], window_points: 5}
    """)
    out = tmp_path / "r"
    assert run(["rates", "--config", cfg, "--out", out]) == 0
    with open(out / "rates.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["variant", "epsilon", "delta", "theta", "rate", "x_star"]
    assert len(rows) == 1 + 2 * 2  # two epsilons, two variants
    variants = {row[0] for row in rows[1:]}
    assert variants == {"unshifted", "shifted"}
    assert (out / "limit_ordering.json").exists()


def test_pattern_run(tmp_path):
    cfg = write_config(tmp_path, """
        atom: {epsilon: 0.0, gamma_tilde: 0.01}
        pattern: {mode: golden_rule, theta_points: 9}
    """)
    out = tmp_path / "pat"
    assert run(["pattern", "--config", cfg, "--out", out]) == 0
    with open(out / "pattern.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["theta_rad", "density"]
    assert len(rows) == 10
    assert float(rows[1][1]) == pytest.approx(0.0, abs=1e-15)  # axial zero


def test_oracle_run(tmp_path):
    cfg = write_config(tmp_path, """
        atom: {epsilon: 0.0, gamma_tilde: 1.0e-3}
        oracle: {modes: 201, half_width: 0.05, gamma_eff: 1.0e-3, lifetimes: 4,
                 time_step: 0.25, record_every: 400}
    """)
    out = tmp_path / "o"
    assert run(["oracle", "--config", cfg, "--out", out]) == 0
    payload = json.loads((out / "oracle.json").read_text())
    assert payload["norm_ok"] is True
    assert payload["rate_ratio"] == pytest.approx(1.0, abs=0.1)
    assert (out / "oracle_modes.csv").exists()


def test_missing_config_exits_2(tmp_path, capsys):
    assert run(["spectrum", "--config", tmp_path / "ghost.yaml",
                "--out", tmp_path / "x"]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_invalid_value_exits_2(tmp_path):
    cfg = write_config(tmp_path, "atom: {epsilon: -3}\n")
    assert run(["spectrum", "--config", cfg, "--out", tmp_path / "x"]) == 2


def test_unconverged_probability_exits_3(tmp_path, capsys):
    cfg = write_config(tmp_path, """
        atom: {epsilon: 0.01, gamma_tilde: 0.01}
        formfactor: {kind: gaussian, cutoff: 10.0}
        tolerances: {quadrature: 1.0e-15, max_panels: 16}
    """)
    assert run(["probability", "--config", cfg, "--out", tmp_path / "x"]) == 3
    assert "numerical" in capsys.readouterr().err


def test_unregularized_requests_exit_4(tmp_path, capsys):
    cfg = write_config(tmp_path, """
        atom: {epsilon: 0.01, gamma_tilde: 0.01}
        pattern: {mode: integrated}
    """)
    assert run(["pattern", "--config", cfg, "--out", tmp_path / "x"]) == 4
    assert "rejected" in capsys.readouterr().err
    # probability with neither formfactor nor an explicit upper limit
    cfg2 = write_config(tmp_path, "atom: {epsilon: 0.01, gamma_tilde: 0.01}\n",
                        name="bare.yaml")
    assert run(["probability", "--config", cfg2, "--out", tmp_path / "y"]) == 4


def test_probability_with_explicit_limit_is_allowed_without_formfactor(tmp_path):
    # a cutoff-regulated value is a legitimate (cutoff-dependent) request
    cfg = write_config(tmp_path, """
        atom: {epsilon: 0.01, gamma_tilde: 0.01}
        probability: {upper_limit: 100.0}
    """)
    out = tmp_path / "reg"
    assert run(["probability", "--config", cfg, "--out", out]) == 0
    payload = json.loads((out / "probability.json").read_text())
    assert payload["upper_limit"] == 100.0


def test_tol_override_recorded(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "t"
    assert run(["spectrum", "--config", cfg, "--out", out, "--tol", "1e-8"]) == 0
    manifest = read_manifest(out)
    assert manifest["options"]["tol"] == 1e-8
    assert manifest["resolved"]["tolerances"]["quadrature"] == 1e-8


def test_threads_flag_keeps_results(tmp_path):
    cfg = write_config(tmp_path)
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    assert run(["divergence", "--config", cfg, "--out", out1]) == 0
    assert run(["divergence", "--config", cfg, "--out", out2, "--threads", "4"]) == 0
    assert (out1 / "divergence.csv").read_bytes() == (out2 / "divergence.csv").read_bytes()


def test_argparse_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(["spectrum"])  # --config is required
    assert exc.value.code == 2
