"""Flat ``key = value`` experiment configuration with a closed key registry.

Unknown keys are an error so typos cannot silently fall back to defaults.
Values are plain text: booleans are true/false, lists are comma-separated.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

__all__ = ["ExperimentConfig", "parse_config_file", "parse_overrides", "load_experiment_config"]


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip() != "")


@dataclass
class ExperimentConfig:
    # dataset
    kg1_facts: str = ""
    kg2_facts: str = ""
    anchors: str = ""
    temporal: bool = True
    calendar_base_year: int = 1995
    calendar_months: int = 324
    # name inputs: embedding files, or trigram hashing when left empty
    name_embeddings_1: str = ""
    name_embeddings_2: str = ""
    trigram_dim: int = 256
    # model components
    use_name: bool = True
    use_time: bool = True
    use_structure: bool = False
    whitening: bool = True
    whitening_dim: int = 64
    name_dim: int = 64
    time_dim: int = 64
    structure_dim: int = 64
    t2v_k: int = 31
    # random walks / skip-gram
    walk_beta: float = 0.9
    walks_per_node: int = 10
    walk_length: int = 40
    sg_dim: int = 64
    sg_window: int = 5
    sg_negatives: int = 5
    sg_epochs: int = 5
    sg_learning_rate: float = 0.025
    # training
    margin: float = 1.0
    negatives: int = 20
    epochs: int = 200
    learning_rate: float = 0.005
    batch_size: int = 512
    train_fraction: float = 0.3
    seed: int = 0
    # evaluation
    csls_k: int = 10
    hits: tuple[int, ...] = (1, 10)
    direction: str = "kg1->kg2"
    candidates: str = "test"
    # masking experiments
    mask_kind: str = "none"
    mask_ratios: tuple[float, ...] = (0.0,)
    # sampling
    target_kg1: int = 0
    target_kg2: int = 0
    batch_fraction: float = 0.05
    max_js_divergence: float = 0.05
    # output
    out_dir: str = ""

    def resolved_text(self) -> str:
        """All keys and effective values, one ``key = value`` line each."""
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            elif isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def validate(self):
        if not (self.use_name or self.use_time or self.use_structure):
            raise ValueError("all model components disabled")
        if self.direction not in ("kg1->kg2", "kg2->kg1"):
            raise ValueError(f"bad direction {self.direction!r}")
        if self.candidates not in ("test", "full"):
            raise ValueError(f"bad candidates mode {self.candidates!r}")
        if self.mask_kind not in ("none", "structure", "name"):
            raise ValueError(f"bad mask_kind {self.mask_kind!r}")
        if not self.mask_ratios:
            raise ValueError("mask_ratios must be non-empty")
        for r in self.mask_ratios:
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"mask ratio {r} outside [0, 1]")


_PARSERS = {
    bool: _parse_bool,
    int: int,
    float: float,
    str: lambda s: s,
    tuple[int, ...]: _parse_ints,
    tuple[float, ...]: _parse_floats,
}

_FIELD_TYPES = {
    "hits": tuple[int, ...],
    "mask_ratios": tuple[float, ...],
}


def _field_registry() -> dict[str, type]:
    defaults = ExperimentConfig()
    return {
        f.name: _FIELD_TYPES.get(f.name, type(getattr(defaults, f.name)))
        for f in fields(ExperimentConfig)
    }


def parse_config_file(path: str) -> dict[str, str]:
    """Read raw ``key = value`` pairs; comments (#) and blank lines are skipped."""
    raw: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = stripped.split("=", 1)
            raw[key.strip()] = value.strip()
    return raw


def parse_overrides(pairs: list[str]) -> dict[str, str]:
    """Parse repeated ``--set key=value`` CLI overrides."""
    raw: dict[str, str] = {}
    for item in pairs:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    return raw


def load_experiment_config(
    config_path: str | None = None, overrides: dict[str, str] | None = None
) -> ExperimentConfig:
    """Build a typed config from an optional file plus overrides; unknown keys error."""
    registry = _field_registry()
    raw: dict[str, str] = {}
    if config_path:
        raw.update(parse_config_file(config_path))
    if overrides:
        raw.update(overrides)
    cfg = ExperimentConfig()
    for key, text in raw.items():
        if key not in registry:
            raise ValueError(f"unknown configuration key {key!r}")
        parser = _PARSERS[registry[key]]
        try:
            setattr(cfg, key, parser(text))
        except ValueError as exc:
            raise ValueError(f"bad value for {key!r}: {exc}") from None
    return cfg
