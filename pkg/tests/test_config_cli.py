import csv

import pytest

from mlclean import ConfigError, load_dataset
from mlclean.cli import main
from mlclean.config import (
    method_to_pipeline,
    parse_config,
    pipeline_config_from_config,
    schema_from_config,
)

from conftest import TABLE_ROWS


CONFIG_TEXT = """\
# demographic tabular data
[schema]
id_column = ID
weight_column = Weight
name_columns = Name
numeric_features = Age
categorical_features = Gender
sensitive_column = Gender
sensitive_groups = M, F
label_column = Label

[sanitize]
k = 2
seed = 0

[split]
test_fraction = 0.0

[train]
epochs = 50
"""


class TestParseConfig:
    def test_sections_keys_comments(self):
        got = parse_config("[a]\nx = 1  # trailing\n# whole line\n\n[b]\ny = two words\n")
        assert got == {"a": {"x": "1"}, "b": {"y": "two words"}}

    def test_key_before_section(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("x = 1\n")

    def test_missing_equals(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("[a]\njust words\n")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("[a]\nx = 1\nx = 2\n")

    def test_empty_section_name(self):
        with pytest.raises(ConfigError):
            parse_config("[]\n")

    def test_unknown_key_rejected(self):
        cfg = parse_config(CONFIG_TEXT + "\n[reweigh]\nmdoe = X\n")
        with pytest.raises(ConfigError, match="mdoe"):
            pipeline_config_from_config(cfg)

    def test_schema_from_config(self):
        schema = schema_from_config(parse_config(CONFIG_TEXT))
        assert schema.id_column == "ID"
        assert schema.sensitive_groups == ("M", "F")
        assert schema.numeric_features == ("Age",)

    def test_schema_section_required(self):
        with pytest.raises(ConfigError, match="schema"):
            schema_from_config({})

    def test_method_map(self):
        cfg = parse_config(CONFIG_TEXT)
        assert method_to_pipeline(cfg, "None") is None
        assert method_to_pipeline(cfg, "MLCLEAN").mode == "MLCLEAN"
        assert method_to_pipeline(cfg, "MSC").stages == ("M", "S", "C")
        with pytest.raises(ConfigError):
            method_to_pipeline(cfg, "XYZ")


@pytest.fixture
def workdir(tmp_path):
    data = tmp_path / "data.csv"
    with open(data, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["ID", "Weight", "Name", "Gender", "Age", "Label"])
        writer.writerows(TABLE_ROWS)
    cfg = tmp_path / "run.cfg"
    cfg.write_text(CONFIG_TEXT)
    return tmp_path, data, cfg


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestCLI:
    def test_sanitize_command(self, workdir, schema):
        tmp, data, cfg = workdir
        code = run_cli("sanitize", data, "--config", cfg, "--out-dir", tmp / "out")
        assert code == 0
        cleaned = load_dataset(tmp / "out" / "sanitized.csv", schema)
        assert [r.id for r in cleaned.records] == ["e1", "e2", "e3", "e4", "e5"]
        report_rows = (tmp / "out" / "sanitize_report.csv").read_text().splitlines()
        assert report_rows[0] == "id,reason,distance,cluster"
        assert report_rows[1].startswith("e6,")

    def test_clean_command(self, workdir, schema):
        tmp, data, cfg = workdir
        code = run_cli("clean", data, "--config", cfg, "--out-dir", tmp / "out")
        assert code == 0
        cleaned = load_dataset(tmp / "out" / "cleaned.csv", schema)
        assert "m:e2+e3" in cleaned.ids()
        log = (tmp / "out" / "merge_log.csv").read_text()
        assert "m:e2+e3" in log

    def test_reweigh_command(self, workdir, schema):
        tmp, data, cfg = workdir
        code = run_cli("reweigh", data, "--config", cfg, "--out-dir", tmp / "out")
        assert code == 0
        out = load_dataset(tmp / "out" / "reweighed.csv", schema)
        # M negatives (e2, e3) are scaled by (1*1)/(2*2); everyone else keeps 1.0
        assert out.by_id("e2").weight == pytest.approx(0.25)
        assert out.by_id("e3").weight == pytest.approx(0.25)
        assert out.total_weight() == pytest.approx(4.5)

    def test_train_then_evaluate(self, workdir):
        tmp, data, cfg = workdir
        assert run_cli("train", data, "--config", cfg, "--out-dir", tmp / "out") == 0
        model = tmp / "out" / "model.txt"
        assert model.exists()
        code = run_cli(
            "evaluate", data, "--config", cfg, "--model", model, "--out-dir", tmp / "out"
        )
        assert code == 0
        metrics = (tmp / "out" / "metrics.csv").read_text().splitlines()
        assert metrics[0] == "accuracy,parity_ratio"

    def test_pipeline_command(self, workdir):
        tmp, data, cfg = workdir
        code = run_cli("pipeline", data, "--config", cfg, "--out-dir", tmp / "out")
        assert code == 0
        assert (tmp / "out" / "pipeline_report.csv").exists()
        assert "accuracy=" in (tmp / "out" / "pipeline_report.txt").read_text()

    def test_inject_and_ground_truth(self, workdir, schema):
        tmp, data, cfg = workdir
        code = run_cli("inject-poison", data, "--config", cfg, "--out-dir", tmp / "out")
        assert code == 0
        injected = load_dataset(tmp / "out" / "injected.csv", schema)
        assert len(injected) == 7  # ceil(0.1 * 6) = 1 poison record
        truth = (tmp / "out" / "ground_truth.csv").read_text().splitlines()
        assert truth[0] == "kind,id,related"
        assert truth[1].startswith("poison,p:0")

    def test_impact_command(self, workdir, capsys):
        tmp, data, cfg = workdir
        code = run_cli(
            "impact", data, "--config", cfg, "--ids", "e6", "--out-dir", tmp / "out"
        )
        assert code == 0
        assert "accuracy_delta=" in capsys.readouterr().out

    def test_bench_command(self, workdir):
        tmp, data, cfg = workdir
        bench_cfg = tmp / "bench.cfg"
        bench_cfg.write_text(CONFIG_TEXT + "\n[bench]\nmethods = SCM, MLCLEAN\n")
        code = run_cli("bench", data, "--config", bench_cfg, "--out-dir", tmp / "out")
        assert code == 0
        rows = (tmp / "out" / "bench.csv").read_text().splitlines()
        assert rows[1].startswith("None,")
        assert len(rows) == 4

    def test_seed_override(self, workdir, schema):
        tmp, data, cfg = workdir
        for run, seed in (("a", 5), ("b", 5)):
            assert (
                run_cli(
                    "inject-poison", data, "--config", cfg,
                    "--seed", seed, "--out-dir", tmp / run,
                )
                == 0
            )
        a = (tmp / "a" / "injected.csv").read_text()
        b = (tmp / "b" / "injected.csv").read_text()
        assert a == b


class TestExitCodes:
    def test_config_error_is_one(self, workdir):
        tmp, data, _ = workdir
        bad = tmp / "bad.cfg"
        bad.write_text("[schema]\nbogus_key = 1\n")
        assert run_cli("sanitize", data, "--config", bad) == 1

    def test_validation_error_is_one(self, workdir):
        tmp, _, cfg = workdir
        bad = tmp / "bad.csv"
        bad.write_text("ID,Weight,Name,Gender,Age,Label\ne1,1.0,John,M,abc,1\n")
        assert run_cli("sanitize", bad, "--config", cfg) == 1

    def test_infeasible_stage_is_two(self, workdir):
        tmp, data, cfg = workdir
        # upweighting the reference group itself is a no-op, but forcing a
        # pipeline whose M stage degenerates must exit 2: zero-weight group
        degenerate = tmp / "deg.csv"
        degenerate.write_text(
            "ID,Weight,Name,Gender,Age,Label\n"
            "e1,0.0,John,M,20,1\n"
            "e2,1.0,Sally,F,30,0\n"
            "e3,1.0,Sara,F,40,1\n"
        )
        assert run_cli("reweigh", degenerate, "--config", cfg) == 2

    def test_io_error_is_three(self, workdir):
        tmp, data, cfg = workdir
        assert run_cli("sanitize", tmp / "missing.csv", "--config", cfg) == 3
