"""Sectioned key=value config files: parsing and object construction.

Grammar: UTF-8 text, ``[section]`` headers, one ``key = value`` per line,
``#`` starts a comment. Unknown sections or keys are errors, so typos fail
loudly instead of silently using defaults.
"""

from __future__ import annotations

from .errors import ConfigError
from .dataset import Schema
from .harness import DuplicateSpec, PoisonSpec
from .model import TrainConfig
from .pipeline import MLCLEAN, SEQUENCE, PipelineConfig
from .resolve import MatchRules, MergePolicy
from .reweigh import ReweighStrategy
from .sanitize import SanitizationPolicy


def parse_config(text: str) -> dict[str, dict[str, str]]:
    """Raw section -> key -> value mapping."""
    sections: dict[str, dict[str, str]] = {}
    current: dict[str, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigError(f"line {lineno}: empty section name")
            current = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key before any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in current:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        current[key] = value
    return sections


def load_config(path) -> dict[str, dict[str, str]]:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _take(section: dict[str, str], section_name: str, known: dict[str, object]):
    unknown = set(section) - set(known)
    if unknown:
        raise ConfigError(
            f"[{section_name}]: unknown keys {sorted(unknown)}"
        )
    out = dict(known)
    out.update(section)
    return out


def _as_bool(value, where: str) -> bool:
    if isinstance(value, bool):
        return value
    if value.lower() in ("true", "yes", "1"):
        return True
    if value.lower() in ("false", "no", "0"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {value!r}")


def _as_float(value, where: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None


def _as_int(value, where: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected an integer, got {value!r}") from None


def _as_list(value) -> tuple[str, ...]:
    if isinstance(value, tuple):
        return value
    return tuple(v.strip() for v in value.split(",") if v.strip())


def schema_from_config(config: dict[str, dict[str, str]]) -> Schema:
    if "schema" not in config:
        raise ConfigError("missing [schema] section")
    raw = _take(
        config["schema"],
        "schema",
        {
            "id_column": None,
            "weight_column": None,
            "name_columns": (),
            "numeric_features": (),
            "categorical_features": (),
            "sensitive_column": None,
            "sensitive_groups": None,
            "label_column": None,
        },
    )
    for required in ("id_column", "sensitive_column", "sensitive_groups", "label_column"):
        if raw[required] is None:
            raise ConfigError(f"[schema]: missing key {required!r}")
    groups = _as_list(raw["sensitive_groups"])
    if len(groups) != 2:
        raise ConfigError("[schema]: sensitive_groups must list exactly two groups")
    return Schema(
        id_column=raw["id_column"],
        weight_column=raw["weight_column"],
        name_columns=_as_list(raw["name_columns"]),
        numeric_features=_as_list(raw["numeric_features"]),
        categorical_features=_as_list(raw["categorical_features"]),
        sensitive_column=raw["sensitive_column"],
        sensitive_groups=(groups[0], groups[1]),
        label_column=raw["label_column"],
    )


def sanitize_policy_from_config(config) -> SanitizationPolicy:
    raw = _take(
        config.get("sanitize", {}),
        "sanitize",
        {"k": None, "seed": 0, "min_cluster_size": 2, "tau": 2.5},
    )
    return SanitizationPolicy(
        min_cluster_size=_as_int(raw["min_cluster_size"], "[sanitize] min_cluster_size"),
        tau=_as_float(raw["tau"], "[sanitize] tau"),
    )


def sanitize_k_seed(config) -> tuple[int | None, int]:
    raw = _take(
        config.get("sanitize", {}),
        "sanitize",
        {"k": None, "seed": 0, "min_cluster_size": 2, "tau": 2.5},
    )
    k = None if raw["k"] is None else _as_int(raw["k"], "[sanitize] k")
    return k, _as_int(raw["seed"], "[sanitize] seed")


def match_rules_from_config(config) -> MatchRules:
    raw = _take(
        config.get("resolve", {}),
        "resolve",
        {
            "min_prefix": 3,
            "numeric_tolerance": 0.0,
            "require_same_group": True,
            "weight_mode": "SUM_WEIGHTS",
        },
    )
    return MatchRules(
        min_prefix=_as_int(raw["min_prefix"], "[resolve] min_prefix"),
        numeric_tolerance=_as_float(
            raw["numeric_tolerance"], "[resolve] numeric_tolerance"
        ),
        require_same_group=_as_bool(
            raw["require_same_group"], "[resolve] require_same_group"
        ),
    )


def merge_policy_from_config(config) -> MergePolicy:
    raw = _take(
        config.get("resolve", {}),
        "resolve",
        {
            "min_prefix": 3,
            "numeric_tolerance": 0.0,
            "require_same_group": True,
            "weight_mode": "SUM_WEIGHTS",
        },
    )
    return MergePolicy(weight_mode=raw["weight_mode"])


def reweigh_strategy_from_config(config) -> ReweighStrategy:
    raw = _take(
        config.get("reweigh", {}), "reweigh", {"mode": "DOWNWEIGHT_NEGATIVES"}
    )
    return ReweighStrategy(mode=raw["mode"])


def train_config_from_config(config) -> TrainConfig:
    raw = _take(
        config.get("train", {}),
        "train",
        {
            "learning_rate": 0.1,
            "epochs": 500,
            "l2_lambda": 1e-4,
            "convergence_tol": 1e-8,
            "seed": 0,
        },
    )
    return TrainConfig(
        learning_rate=_as_float(raw["learning_rate"], "[train] learning_rate"),
        epochs=_as_int(raw["epochs"], "[train] epochs"),
        l2_lambda=_as_float(raw["l2_lambda"], "[train] l2_lambda"),
        convergence_tol=_as_float(raw["convergence_tol"], "[train] convergence_tol"),
        seed=_as_int(raw["seed"], "[train] seed"),
    )


def duplicate_spec_from_config(config) -> DuplicateSpec:
    raw = _take(
        config.get("duplicates", {}),
        "duplicates",
        {
            "rate": 0.2,
            "zipf_s": 2.0,
            "max_copies": 10,
            "abbreviation_prob": 0.5,
            "abbreviation_min": 3,
            "numeric_jitter": 0.0,
            "seed": 0,
        },
    )
    return DuplicateSpec(
        duplication_rate=_as_float(raw["rate"], "[duplicates] rate"),
        zipf_s=_as_float(raw["zipf_s"], "[duplicates] zipf_s"),
        max_copies=_as_int(raw["max_copies"], "[duplicates] max_copies"),
        abbreviation_prob=_as_float(
            raw["abbreviation_prob"], "[duplicates] abbreviation_prob"
        ),
        abbreviation_min=_as_int(raw["abbreviation_min"], "[duplicates] abbreviation_min"),
        numeric_jitter=_as_float(raw["numeric_jitter"], "[duplicates] numeric_jitter"),
        seed=_as_int(raw["seed"], "[duplicates] seed"),
    )


def poison_spec_from_config(config) -> PoisonSpec:
    raw = _take(
        config.get("poison", {}),
        "poison",
        {"epsilon": 0.1, "alpha": 3.0, "seed": 0},
    )
    return PoisonSpec(
        epsilon=_as_float(raw["epsilon"], "[poison] epsilon"),
        alpha=_as_float(raw["alpha"], "[poison] alpha"),
        seed=_as_int(raw["seed"], "[poison] seed"),
    )


def split_params(config) -> tuple[int, float, bool]:
    raw = _take(
        config.get("split", {}),
        "split",
        {"seed": 0, "test_fraction": 0.2, "sanitize_test": False},
    )
    return (
        _as_int(raw["seed"], "[split] seed"),
        _as_float(raw["test_fraction"], "[split] test_fraction"),
        _as_bool(raw["sanitize_test"], "[split] sanitize_test"),
    )


_METHOD_STAGES = {
    "S": ("S",),
    "C": ("C",),
    "M": ("M",),
    "SC": ("S", "C"),
    "SM": ("S", "M"),
    "CM": ("C", "M"),
    "MS": ("M", "S"),
    "MC": ("M", "C"),
    "MSC": ("M", "S", "C"),
    "SCM": ("S", "C", "M"),
    "SMC": ("S", "M", "C"),
    "CSM": ("C", "S", "M"),
    "CMS": ("C", "M", "S"),
    "MCS": ("M", "C", "S"),
}


def pipeline_config_from_config(
    config, mode: str | None = None, stages: tuple[str, ...] | None = None
) -> PipelineConfig:
    raw = _take(
        config.get("pipeline", {}), "pipeline", {"mode": "MLCLEAN", "stages": ""}
    )
    if mode is None:
        mode = raw["mode"].upper()
        if mode not in (SEQUENCE, MLCLEAN):
            raise ConfigError(f"[pipeline]: unknown mode {raw['mode']!r}")
    if stages is None:
        stages = tuple(s.upper() for s in _as_list(raw["stages"]))
    k, kmeans_seed = sanitize_k_seed(config)
    split_seed, test_fraction, sanitize_test = split_params(config)
    return PipelineConfig(
        mode=mode,
        stages=stages,
        k=k,
        kmeans_seed=kmeans_seed,
        sanitize_policy=sanitize_policy_from_config(config),
        match_rules=match_rules_from_config(config),
        merge_policy=merge_policy_from_config(config),
        reweigh_strategy=reweigh_strategy_from_config(config),
        train_config=train_config_from_config(config),
        split_seed=split_seed,
        test_fraction=test_fraction,
        sanitize_test=sanitize_test,
    )


def bench_methods(config) -> tuple[str, ...]:
    raw = _take(config.get("bench", {}), "bench", {"methods": "S,C,M,MSC,SCM,MLCLEAN"})
    return _as_list(raw["methods"])


def method_to_pipeline(config, method: str) -> PipelineConfig | None:
    """Map a bench method label (S, C, M, orderings, MLCLEAN, None) to a config."""
    label = method.upper()
    if label == "NONE":
        return None
    if label == "MLCLEAN":
        return pipeline_config_from_config(config, mode=MLCLEAN)
    if label in _METHOD_STAGES:
        return pipeline_config_from_config(
            config, mode=SEQUENCE, stages=_METHOD_STAGES[label]
        )
    raise ConfigError(f"[bench]: unknown method {method!r}")
