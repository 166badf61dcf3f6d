import math

import numpy as np
import pytest

from mlclean import (
    Dataset,
    Schema,
    SchemaError,
    ValidationError,
    featurize,
    load_dataset,
    save_dataset,
)

from conftest import TABLE_ROWS, make_example


class TestSchema:
    def test_duplicate_columns_rejected(self):
        with pytest.raises(SchemaError):
            Schema(
                id_column="id",
                name_columns=("id",),
                numeric_features=(),
                categorical_features=(),
                sensitive_column="g",
                sensitive_groups=("A", "B"),
                label_column="id",
            )

    def test_groups_must_be_a_pair(self):
        with pytest.raises(SchemaError):
            Schema(
                id_column="id",
                name_columns=(),
                numeric_features=(),
                categorical_features=(),
                sensitive_column="g",
                sensitive_groups=("A", "B", "C"),
                label_column="y",
            )


class TestLoad:
    def test_loads_running_example(self, example_csv, schema):
        d = load_dataset(example_csv, schema)
        assert len(d) == 6
        assert d.by_id("e6").numeric["Age"] == 300
        assert all(r.weight == 1.0 for r in d.records)
        assert d.by_id("e2").provenance == frozenset({"e2"})

    def test_missing_weight_column_defaults_to_one(self, tmp_path, schema):
        from dataclasses import replace

        no_weight = replace(schema, weight_column=None)
        path = tmp_path / "no_weight.csv"
        lines = ["ID,Name,Gender,Age,Label"]
        lines += [f"{r[0]},{r[2]},{r[3]},{r[4]},{r[5]}" for r in TABLE_ROWS]
        path.write_text("\n".join(lines) + "\n")
        d = load_dataset(path, no_weight)
        assert [r.weight for r in d.records] == [1.0] * 6

    def test_missing_column_names_it(self, tmp_path, schema):
        path = tmp_path / "bad.csv"
        path.write_text("ID,Weight,Name,Age,Label\ne1,1.0,John,20,1\n")
        with pytest.raises(SchemaError, match="Gender"):
            load_dataset(path, schema)

    def test_non_binary_label_reports_row(self, tmp_path, schema):
        path = tmp_path / "bad.csv"
        path.write_text(
            "ID,Weight,Name,Gender,Age,Label\ne1,1.0,John,M,20,1\ne2,1.0,Joe,M,20,2\n"
        )
        with pytest.raises(ValidationError, match="row 3"):
            load_dataset(path, schema)

    def test_non_numeric_feature_reports_row_and_column(self, tmp_path, schema):
        path = tmp_path / "bad.csv"
        path.write_text("ID,Weight,Name,Gender,Age,Label\ne1,1.0,John,M,old,1\n")
        with pytest.raises(ValidationError, match="'Age'"):
            load_dataset(path, schema)

    def test_missing_cell_is_an_error(self, tmp_path, schema):
        path = tmp_path / "bad.csv"
        path.write_text("ID,Weight,Name,Gender,Age,Label\ne1,1.0,,M,20,1\n")
        with pytest.raises(ValidationError, match="Name"):
            load_dataset(path, schema)


class TestSaveRoundTrip:
    def test_round_trip_identity(self, example_csv, tmp_path, schema):
        d = load_dataset(example_csv, schema)
        out = tmp_path / "out.csv"
        save_dataset(d, out)
        again = load_dataset(out, schema)
        assert again == d

    def test_round_trip_preserves_total_weight(self, tmp_path, schema):
        rows = [(f"e{i}", 0.1 * i + 1, "N" * (i + 1), "M", 20 + i, i % 2) for i in range(9)]
        d = make_example(schema, rows)
        out = tmp_path / "out.csv"
        save_dataset(d, out)
        assert load_dataset(out, schema).total_weight() == d.total_weight()

    def test_merged_provenance_serialized_semicolon_joined(self, tmp_path, schema, example):
        from mlclean import resolve

        merged, _ = resolve(example)
        out = tmp_path / "merged.csv"
        save_dataset(merged, out)
        text = out.read_text()
        assert "e2;e3" in text
        assert load_dataset(out, schema) == merged

    def test_empty_dataset_writes_header_only(self, tmp_path, schema):
        d = Dataset(schema=schema, records=())
        out = tmp_path / "empty.csv"
        save_dataset(d, out)
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1
        assert load_dataset(out, schema) == d


class TestFeaturize:
    def test_standardized_anomalous_age(self, example):
        # Oracle: direct mean / population-std computation.
        ages = [20.0, 20.0, 20.0, 30.0, 40.0, 300.0]
        mean = sum(ages) / len(ages)
        std = math.sqrt(sum((a - mean) ** 2 for a in ages) / len(ages))
        expected = (300.0 - mean) / std
        fm = featurize(example)
        col = fm.columns.index("Age")
        assert fm.matrix[5, col] == pytest.approx(expected, abs=1e-12)
        assert fm.matrix[:, col].mean() == pytest.approx(0.0, abs=1e-12)
        assert fm.matrix[:, col].std() == pytest.approx(1.0, abs=1e-12)

    def test_constant_column_maps_to_zeros(self, schema):
        rows = [(f"e{i}", 1.0, "A" * (3 + i), "M", 5, 1 - i % 2) for i in range(3)]
        d = make_example(schema, rows)
        fm = featurize(d)
        assert np.all(fm.matrix[:, fm.columns.index("Age")] == 0.0)

    def test_one_hot_has_exactly_one_per_row(self, example):
        fm = featurize(example)
        onehot_cols = [i for i, c in enumerate(fm.columns) if c.startswith("Gender=")]
        assert len(onehot_cols) == 2
        assert np.all(fm.matrix[:, onehot_cols].sum(axis=1) == 1.0)

    def test_unstandardize_recovers_raw_values(self, example):
        fm = featurize(example)
        col = fm.columns.index("Age")
        raw = fm.unstandardize("Age", fm.matrix[:, col])
        expected = [r.numeric["Age"] for r in example.records]
        assert np.allclose(raw, expected, atol=1e-9)
