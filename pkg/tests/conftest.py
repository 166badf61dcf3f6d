import pytest

from mlclean import Dataset, Record, Schema

TABLE_ROWS = [
    ("e1", 1.0, "John", "M", 20, 1),
    ("e2", 1.0, "Joe", "M", 20, 0),
    ("e3", 1.0, "Joseph", "M", 20, 0),
    ("e4", 1.0, "Sally", "F", 30, 1),
    ("e5", 1.0, "Sally", "F", 40, 0),
    ("e6", 1.0, "Sally", "F", 300, 1),
]


@pytest.fixture
def schema():
    return Schema(
        id_column="ID",
        weight_column="Weight",
        name_columns=("Name",),
        numeric_features=("Age",),
        categorical_features=("Gender",),
        sensitive_column="Gender",
        sensitive_groups=("M", "F"),
        label_column="Label",
    )


def make_example(schema, rows=TABLE_ROWS):
    records = tuple(
        Record(
            id=rid,
            weight=w,
            names={"Name": name},
            numeric={"Age": float(age)},
            categorical={"Gender": gender},
            group=gender,
            label=label,
        )
        for rid, w, name, gender, age, label in rows
    )
    return Dataset(schema=schema, records=records)


@pytest.fixture
def example(schema):
    """The six-record running example: a duplicate pair and an anomalous age."""
    return make_example(schema)


@pytest.fixture
def example_csv(tmp_path):
    path = tmp_path / "example.csv"
    lines = ["ID,Weight,Name,Gender,Age,Label"]
    lines += [
        f"{rid},{w},{name},{gender},{age},{label}"
        for rid, w, name, gender, age, label in TABLE_ROWS
    ]
    path.write_text("\n".join(lines) + "\n")
    return path
