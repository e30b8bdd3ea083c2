import json

import pytest

from intrinsic_holder.cli import load_config, main, parse_config
from intrinsic_holder.errors import ConfigParseError

LANG = {"layer_dims": [1, 1], "blocks": [[[1]]]}


def _write(tmp_path, cfg):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return str(p)


def test_negative_layer_dim_is_rejected_without_outputs(tmp_path):
    cfg = {"suite": "group-axioms", "seed": 1, "group": {"layer_dims": [-1, 1], "blocks": [[[1]]]}}
    out = tmp_path / "out"
    assert main(["run", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 2
    assert not out.exists()


@pytest.mark.parametrize("cfg", [
    {"seed": 1, "group": LANG},
    {"suite": "nope", "seed": 1, "group": LANG},
    {"suite": "group-axioms", "group": LANG},
    {"suite": "group-axioms", "seed": 1, "group": {"layer_dims": [1, 2], "blocks": [[[1, 1]]]}},
    {"suite": "group-axioms", "seed": 1, "group": LANG, "corpus": [{"id": "a", "profile": "unknown"}]},
])
def test_invalid_configs(cfg):
    with pytest.raises(ConfigParseError):
        parse_config(cfg)


def test_unparsable_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigParseError):
        load_config(p)
    assert main(["validate", "--config", str(p)]) == 2


def test_seed_override():
    cfg = parse_config({"suite": "group-axioms", "group": LANG}, seed=9)
    assert cfg.seed == 9


def test_validate_and_run_and_report(tmp_path, capsys):
    cfg = {"suite": "group-axioms", "seed": 3, "group": LANG,
           "params": {"n_triples": 500, "n_flow": 500, "n_norm": 500}}
    path = _write(tmp_path, cfg)
    assert main(["validate", "--config", path]) == 0
    out = tmp_path / "out"
    assert main(["run", "--config", path, "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] and summary["seed"] == 3
    assert {"associativity", "nilpotency", "langevin_increment"} <= {a["name"] for a in summary["assertions"]}
    assert (out / "group-axioms.csv").exists()
    capsys.readouterr()
    assert main(["report", "--out", str(out)]) == 0
    assert "PASS  associativity" in capsys.readouterr().out


def test_failed_assertion_gives_exit_1(tmp_path):
    cfg = {"suite": "group-axioms", "seed": 3, "group": LANG,
           "params": {"n_triples": 100, "n_flow": 100, "n_norm": 100, "norm_rtol": 0.0}}
    out = tmp_path / "out"
    assert main(["run", "--config", _write(tmp_path, cfg), "--out", str(out)]) == 1
    failed = [a for a in json.loads((out / "summary.json").read_text())["assertions"] if not a["passed"]]
    assert failed and all("value" in a and "invariant" in a for a in failed)


def test_identical_runs_are_byte_identical(tmp_path):
    cfg = {"suite": "taylor-identities", "seed": 5, "group": LANG,
           "corpus": [{"id": "bump", "profile": "bump", "radius": 2.0}],
           "params": {"n_polys": 12, "n_pairs": 500}}
    path = _write(tmp_path, cfg)
    blobs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        main(["run", "--config", path, "--out", str(out)])
        blobs.append((out / "summary.json").read_bytes())
    assert blobs[0] == blobs[1]
