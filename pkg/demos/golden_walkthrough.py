"""Walk the six-record running example through every stage, one at a time.

The dataset has an obvious outlier (Sally, age 300), a pair of duplicate
records under different name abbreviations (Joe / Joseph), and a gender
imbalance in positive labels. Each stage fixes exactly one of these.
"""

from mlclean import (
    Dataset,
    KEEP_ONE,
    MergePolicy,
    Record,
    ReweighStrategy,
    Schema,
    UPWEIGHT_POSITIVES,
    resolve,
    reweigh,
    sanitize,
)

SCHEMA = Schema(
    id_column="ID",
    weight_column="Weight",
    name_columns=("Name",),
    numeric_features=("Age",),
    categorical_features=("Gender",),
    sensitive_column="Gender",
    sensitive_groups=("M", "F"),
    label_column="Label",
)

ROWS = [
    ("e1", "John", "M", 20, 1),
    ("e2", "Joe", "M", 20, 0),
    ("e3", "Joseph", "M", 20, 0),
    ("e4", "Sally", "F", 30, 1),
    ("e5", "Sally", "F", 40, 0),
    ("e6", "Sally", "F", 300, 1),
]


def build() -> Dataset:
    records = tuple(
        Record(
            id=rid,
            weight=1.0,
            names={"Name": name},
            numeric={"Age": float(age)},
            categorical={"Gender": gender},
            group=gender,
            label=label,
        )
        for rid, name, gender, age, label in ROWS
    )
    return Dataset(schema=SCHEMA, records=records)


def show(title: str, d: Dataset) -> None:
    print(f"\n{title}")
    for r in d.records:
        print(
            f"  {r.id:<10} {r.names['Name']:<8} {r.group} "
            f"age={r.numeric['Age']:<6g} label={r.label} weight={r.weight:g}"
        )


def main() -> None:
    d = build()
    show("Input", d)

    sanitized, report = sanitize(d, k=2, seed=0)
    flagged = ", ".join(f"{f.id} ({f.reason})" for f in report.flagged)
    print(f"\nSanitize with k=2 flags: {flagged}")
    show("After sanitization", sanitized)

    cleaned, log = resolve(sanitized)
    for entry in log.entries:
        print(
            f"\nClean merges {'+'.join(entry.constituents)} -> {entry.merged_id} "
            f"(weight {entry.weight:g}, label {entry.label})"
        )
    show("After cleaning", cleaned)

    reweighed, rw = reweigh(cleaned)
    print(f"\nReweigh: group ratios {rw.ratios_before} -> {rw.ratios_after}")
    show("After reweighing", reweighed)

    # the two worked upweighting values: 4.0 on the raw data, 2.0 after a
    # keep-one merge collapses the duplicate negatives into a single record
    up, _ = reweigh(d, ReweighStrategy(UPWEIGHT_POSITIVES))
    print(f"\nUpweighting positives on the raw data gives e1 weight {up.by_id('e1').weight:g}")
    merged, _ = resolve(d, policy=MergePolicy(weight_mode=KEEP_ONE))
    up2, _ = reweigh(merged, ReweighStrategy(UPWEIGHT_POSITIVES))
    print(f"After a keep-one merge it gives e1 weight {up2.by_id('e1').weight:g}")


if __name__ == "__main__":
    main()
