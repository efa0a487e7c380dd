"""Run configuration: defaults, flat config-file parsing, canonical hashing.

The config file is flat ``key = value`` lines (``#`` comments allowed); keys
match the field names below, with ``lambda`` accepted for ``lambda_``. Flags
given on the command line override file values, which override defaults.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Optional

from .candidates import FILTER_NAMES
from .errors import ConfigError
from .validation import (
    check_filter_order,
    check_positive_int,
    check_rank_mode,
    check_unit_interval,
)

PROVIDER_MODES = ("cache-only", "cache+remote")
STRICTNESS = ("fail-open", "fail-closed")
ENDPOINT_ENV_VAR = "NEGKB_MODEL_ENDPOINT"

# Fields that change the produced negations; everything else (output paths,
# parallelism, dump switches) stays out of the config hash.
_SEMANTIC_FIELDS = (
    "gamma",
    "lambda_",
    "tau",
    "beta",
    "hypernym_k",
    "top_k",
    "rank_mode",
    "use_siblings",
    "use_kb_filter",
    "use_lm_filter",
    "use_generic_filter",
    "use_ranking",
    "filter_order",
    "probe_template",
    "strictness",
    "provider_mode",
    "sibling_horizon",
    "seed",
)


@dataclass
class RunConfig:
    gamma: int = 30
    lambda_: float = 0.7
    tau: int = 50
    beta: float = 0.05
    hypernym_k: int = 5
    top_k: int = 1000
    rank_mode: str = "strict"
    use_siblings: bool = True
    use_kb_filter: bool = True
    use_lm_filter: bool = True
    use_generic_filter: bool = True
    use_ranking: bool = True
    filter_order: tuple[str, ...] = FILTER_NAMES
    probe_template: str = "[MASK] {phrase}."
    provider_mode: str = "cache-only"
    strictness: str = "fail-open"
    sibling_horizon: Optional[int] = None
    seed: int = 0
    workers: int = 1
    dump_candidates: bool = False
    kb_path: Optional[str] = None
    taxonomy_path: Optional[str] = None
    embeddings_path: Optional[str] = None
    sim_cache_path: Optional[str] = None
    probe_cache_path: Optional[str] = None
    concept_filter_path: Optional[str] = None
    out_dir: Optional[str] = None

    def validate(self) -> "RunConfig":
        try:
            check_positive_int("gamma", self.gamma)
            check_unit_interval("lambda", self.lambda_)
            check_positive_int("tau", self.tau)
            check_unit_interval("beta", self.beta)
            check_positive_int("hypernym_k", self.hypernym_k)
            check_positive_int("top_k", self.top_k)
            check_rank_mode(self.rank_mode)
            check_filter_order(self.filter_order)
            check_positive_int("workers", self.workers)
            if self.sibling_horizon is not None:
                check_positive_int("sibling_horizon", self.sibling_horizon)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.provider_mode not in PROVIDER_MODES:
            raise ConfigError(f"provider_mode must be one of {PROVIDER_MODES}")
        if self.strictness not in STRICTNESS:
            raise ConfigError(f"strictness must be one of {STRICTNESS}")
        needs_sim = self.use_kb_filter or self.use_ranking
        if needs_sim and not self.sim_cache_path and self.provider_mode == "cache-only":
            raise ConfigError("enabled similarity stages need a sim cache in cache-only mode")
        if self.use_lm_filter and not self.probe_cache_path and self.provider_mode == "cache-only":
            raise ConfigError("the LM filter needs a probe cache in cache-only mode")
        return self

    @property
    def fail_closed(self) -> bool:
        return self.strictness == "fail-closed"

    def semantic_dict(self) -> dict[str, Any]:
        full = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v
                for k, v in full.items() if k in _SEMANTIC_FIELDS}


def file_digest(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_hash(config: RunConfig, input_digests: dict[str, str]) -> str:
    """Hash of the semantic parameters plus the input file digests."""
    payload = {"params": config.semantic_dict(), "inputs": dict(sorted(input_digests.items()))}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


_FIELD_ALIASES = {"lambda": "lambda_"}
_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value: str) -> Any:
    raw = value.strip()
    if (raw.startswith('"') and raw.endswith('"')) or (raw.startswith("'") and raw.endswith("'")):
        return raw[1:-1]
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "null"):
        return None
    if key == "filter_order":
        return tuple(part.strip() for part in raw.split(",") if part.strip())
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def parse_config_file(path: str | Path) -> dict[str, Any]:
    """Read a flat ``key = value`` file into RunConfig field overrides."""
    overrides: dict[str, Any] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = _FIELD_ALIASES.get(key.strip(), key.strip())
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
            overrides[key] = _coerce(key, value)
    return overrides


def build_config(
    file_overrides: dict[str, Any] | None = None,
    flag_overrides: dict[str, Any] | None = None,
) -> RunConfig:
    """Defaults, then config-file values, then command-line flags."""
    merged: dict[str, Any] = {}
    merged.update(file_overrides or {})
    merged.update({k: v for k, v in (flag_overrides or {}).items() if v is not None})
    unknown = set(merged) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    if "filter_order" in merged:
        merged["filter_order"] = tuple(merged["filter_order"])
    return RunConfig(**merged).validate()
