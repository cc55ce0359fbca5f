"""Relational store for samples, models and per-sample measurements.

The store is append-only. Records are frozen dataclasses, so views produced by
filtering (contamination exclusion, missing-data simulation) can share them
with the parent store without copying.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

METRICS = ("binary", "numeric", "preference")
OUTCOMES = ("win", "loss", "tie")
_OUTCOME_VALUE = {"win": 1.0, "loss": 0.0, "tie": 0.5}
_MIRROR = {"win": "loss", "loss": "win", "tie": "tie"}

SAMPLES_FILE = "samples.jsonl"
MODELS_FILE = "models.jsonl"
MEASUREMENTS_FILE = "measurements.jsonl"


class StoreError(ValueError):
    """Base class for store validation failures."""


class DuplicateId(StoreError):
    pass


class DuplicateBaseline(StoreError):
    pass


class DimensionMismatch(StoreError):
    pass


class UnknownSample(StoreError):
    pass


class UnknownModel(StoreError):
    pass


class MalformedValue(StoreError):
    pass


class IntegrityError(StoreError):
    pass


class ParseError(StoreError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = path
        self.lineno = lineno


@dataclass(frozen=True)
class Sample:
    id: str
    benchmark: str = ""
    dataset: str = ""
    task: str | None = None
    metadata: Mapping[str, str] = field(default_factory=dict)
    text: str | None = None
    embedding: tuple[float, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise MalformedValue("sample id must be a non-empty string")
        if self.embedding is not None:
            emb = tuple(float(x) for x in self.embedding)
            if not emb:
                raise MalformedValue(f"sample {self.id!r}: empty embedding")
            if not all(math.isfinite(x) for x in emb):
                raise MalformedValue(f"sample {self.id!r}: non-finite embedding entry")
            if not any(emb):
                raise MalformedValue(f"sample {self.id!r}: zero-norm embedding")
            object.__setattr__(self, "embedding", emb)
        object.__setattr__(self, "metadata", dict(self.metadata))

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "benchmark": self.benchmark,
            "dataset": self.dataset,
            "task": self.task,
            "metadata": dict(self.metadata),
            "text": self.text,
            "embedding": list(self.embedding) if self.embedding is not None else None,
        }


@dataclass(frozen=True)
class Model:
    id: str
    name: str = ""
    source: str = ""
    is_baseline: bool = False
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise MalformedValue("model id must be a non-empty string")
        object.__setattr__(self, "metadata", dict(self.metadata))

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "source": self.source,
            "is_baseline": self.is_baseline,
            "metadata": dict(self.metadata),
        }


@dataclass(frozen=True)
class Measurement:
    """One (sample, model, metric, value) cell.

    Preference records carry the opposing model in ``opponent`` and the result
    from this model's point of view in ``outcome``; ``value`` is 1, 0 or 0.5
    for win, loss and tie.
    """

    sample_id: str
    model_id: str
    metric: str
    value: float
    opponent: str | None = None
    outcome: str | None = None

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "model_id": self.model_id,
            "metric": self.metric,
            "value": self.value,
            "opponent": self.opponent,
            "outcome": self.outcome,
        }

    @property
    def battle_key(self) -> tuple[str, str, str]:
        """Key shared by the two halves of one preference battle."""
        a, b = sorted((self.model_id, self.opponent or ""))
        return (self.sample_id, a, b)


def _check_value(m: Measurement) -> None:
    if m.metric not in METRICS:
        raise MalformedValue(f"unknown metric {m.metric!r}")
    if isinstance(m.value, bool) or not isinstance(m.value, (int, float)):
        raise MalformedValue(f"value must be a number, got {m.value!r}")
    if m.metric == "binary":
        if m.value not in (0, 1):
            raise MalformedValue(f"binary value must be 0 or 1, got {m.value!r}")
    elif m.metric == "numeric":
        if not math.isfinite(m.value):
            raise MalformedValue(f"numeric value must be finite, got {m.value!r}")
    else:
        if m.outcome not in OUTCOMES:
            raise MalformedValue(f"preference outcome must be one of {OUTCOMES}, got {m.outcome!r}")
        if not m.opponent:
            raise MalformedValue("preference record needs an opponent")
        if m.opponent == m.model_id:
            raise MalformedValue(f"model {m.model_id!r} cannot play itself")
        if m.value != _OUTCOME_VALUE[m.outcome]:
            raise MalformedValue(
                f"preference value {m.value!r} inconsistent with outcome {m.outcome!r}"
            )
    if m.metric != "preference" and (m.opponent is not None or m.outcome is not None):
        raise MalformedValue(f"{m.metric} record must not carry opponent/outcome")


class Store:
    """Samples, models and an append-only measurement log.

    Writers must hold exclusive access; readers treat the store as an
    immutable snapshot.
    """

    def __init__(self, embedding_dim: int | None = None):
        if embedding_dim is not None and embedding_dim <= 0:
            raise ValueError("embedding_dim must be positive")
        self.embedding_dim = embedding_dim
        self.samples: dict[str, Sample] = {}
        self.models: dict[str, Model] = {}
        self.measurements: list[Measurement] = []
        self._by_sample: dict[str, list[int]] = {}
        self._keys: set[tuple] = set()
        self._baseline: str | None = None

    # -- inserts ---------------------------------------------------------

    def insert_sample(self, s: Sample) -> Store:
        if s.id in self.samples:
            raise DuplicateId(f"sample {s.id!r} already present")
        if s.embedding is not None:
            if self.embedding_dim is None:
                self.embedding_dim = len(s.embedding)
            elif len(s.embedding) != self.embedding_dim:
                raise DimensionMismatch(
                    f"sample {s.id!r} has {len(s.embedding)}-dim embedding, store is {self.embedding_dim}-dim"
                )
        self.samples[s.id] = s
        return self

    def insert_model(self, m: Model) -> Store:
        if m.id in self.models:
            raise DuplicateId(f"model {m.id!r} already present")
        if m.is_baseline:
            if self._baseline is not None:
                raise DuplicateBaseline(
                    f"store already has baseline {self._baseline!r}; cannot add {m.id!r}"
                )
            self._baseline = m.id
        self.models[m.id] = m
        return self

    def insert_measurement(self, meas: Measurement) -> Store:
        if meas.sample_id not in self.samples:
            raise UnknownSample(f"unknown sample {meas.sample_id!r}")
        if meas.model_id not in self.models:
            raise UnknownModel(f"unknown model {meas.model_id!r}")
        _check_value(meas)
        if meas.metric == "preference" and meas.opponent not in self.models:
            raise UnknownModel(f"unknown opponent {meas.opponent!r}")
        key = _record_key(meas)
        if key in self._keys:
            raise DuplicateId(f"duplicate measurement {key}")
        self._append(meas, key)
        return self

    def insert_battle(self, sample_id: str, model_a: str, model_b: str, outcome: str) -> Store:
        """Insert both halves of a preference battle; ``outcome`` is from ``model_a``'s side."""
        if outcome not in OUTCOMES:
            raise MalformedValue(f"outcome must be one of {OUTCOMES}, got {outcome!r}")
        first = Measurement(sample_id, model_a, "preference", _OUTCOME_VALUE[outcome], model_b, outcome)
        mirror = _MIRROR[outcome]
        second = Measurement(sample_id, model_b, "preference", _OUTCOME_VALUE[mirror], model_a, mirror)
        # validate both before touching the log
        for m in (first, second):
            if m.sample_id not in self.samples:
                raise UnknownSample(f"unknown sample {m.sample_id!r}")
            if m.model_id not in self.models:
                raise UnknownModel(f"unknown model {m.model_id!r}")
            _check_value(m)
            if _record_key(m) in self._keys:
                raise DuplicateId(f"duplicate measurement {_record_key(m)}")
        self._append(first, _record_key(first))
        self._append(second, _record_key(second))
        return self

    def _append(self, meas: Measurement, key: tuple) -> None:
        self._by_sample.setdefault(meas.sample_id, []).append(len(self.measurements))
        self.measurements.append(meas)
        self._keys.add(key)

    # -- reads -----------------------------------------------------------

    @property
    def baseline(self) -> str | None:
        return self._baseline

    def measurements_for(self, sample_id: str) -> list[Measurement]:
        return [self.measurements[i] for i in self._by_sample.get(sample_id, ())]

    def measured_sample_ids(self) -> list[str]:
        return list(self._by_sample)

    def validate(self) -> None:
        """Check store-wide invariants that single inserts cannot enforce."""
        if self.models and self._baseline is None:
            raise IntegrityError("store has no baseline model")
        halves: dict[tuple, list[Measurement]] = {}
        for m in self.measurements:
            if m.metric == "preference":
                halves.setdefault(m.battle_key, []).append(m)
        for key, pair in halves.items():
            if len(pair) != 2 or pair[0].outcome != _MIRROR[pair[1].outcome]:
                raise IntegrityError(f"preference battle {key} lacks a consistent mirror record")

    def embedding_matrix(self, ids: Iterable[str] | None = None) -> tuple[list[str], np.ndarray]:
        ids = [i for i in (self.samples if ids is None else ids) if self.samples[i].embedding is not None]
        if not ids:
            return [], np.zeros((0, self.embedding_dim or 0))
        return ids, np.array([self.samples[i].embedding for i in ids], dtype=float)

    def __len__(self) -> int:
        return len(self.measurements)

    def __repr__(self) -> str:
        return (
            f"Store(samples={len(self.samples)}, models={len(self.models)}, "
            f"measurements={len(self.measurements)}, baseline={self._baseline!r})"
        )

    # -- views -----------------------------------------------------------

    def view(
        self,
        sample_ids: Iterable[str] | None = None,
        keep_measurement: Iterable[bool] | None = None,
    ) -> Store:
        """Read-only style subset sharing records with this store.

        ``sample_ids`` restricts samples (and their measurements);
        ``keep_measurement`` is a mask aligned with ``self.measurements``.
        All models are kept.
        """
        keep_s = set(self.samples) if sample_ids is None else set(sample_ids)
        out = Store(self.embedding_dim)
        out.samples = {k: v for k, v in self.samples.items() if k in keep_s}
        out.models = dict(self.models)
        out._baseline = self._baseline
        mask = [True] * len(self.measurements) if keep_measurement is None else list(keep_measurement)
        if len(mask) != len(self.measurements):
            raise ValueError("measurement mask has wrong length")
        for m, keep in zip(self.measurements, mask):
            if keep and m.sample_id in keep_s:
                out._append(m, _record_key(m))
        return out

    def exclude(self, sample_ids: Iterable[str]) -> Store:
        """Contamination filter: view without the given sample ids."""
        drop = set(sample_ids)
        return self.view([s for s in self.samples if s not in drop])


def _record_key(m: Measurement) -> tuple:
    if m.metric == "preference":
        return (m.sample_id, m.model_id, m.opponent)
    return (m.sample_id, m.model_id)


# module-level spellings of the insert operations
def insert_sample(store: Store, s: Sample) -> Store:
    return store.insert_sample(s)


def insert_model(store: Store, m: Model) -> Store:
    return store.insert_model(m)


def insert_measurement(store: Store, meas: Measurement) -> Store:
    return store.insert_measurement(meas)


# -- persistence -------------------------------------------------------------


def _dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, allow_nan=False)


def _read_jsonl(path) -> Iterable[tuple[int, dict]]:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise ParseError(path, lineno, "expected a JSON object")
            yield lineno, obj


def _str_map(obj, path, lineno) -> dict[str, str]:
    if obj is None:
        return {}
    if not isinstance(obj, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in obj.items()):
        raise ParseError(path, lineno, "metadata must map strings to strings")
    return obj


def _req(obj: dict, key: str, path, lineno):
    if key not in obj:
        raise ParseError(path, lineno, f"missing field {key!r}")
    return obj[key]


def _parse_sample(obj, path, lineno) -> Sample:
    try:
        emb = obj.get("embedding")
        return Sample(
            id=_req(obj, "id", path, lineno),
            benchmark=obj.get("benchmark") or "",
            dataset=obj.get("dataset") or "",
            task=obj.get("task"),
            metadata=_str_map(obj.get("metadata"), path, lineno),
            text=obj.get("text"),
            embedding=tuple(emb) if emb is not None else None,
        )
    except (MalformedValue, TypeError) as exc:
        raise ParseError(path, lineno, str(exc)) from None


def _parse_model(obj, path, lineno) -> Model:
    base = obj.get("is_baseline", False)
    if not isinstance(base, bool):
        raise ParseError(path, lineno, "is_baseline must be a boolean")
    try:
        return Model(
            id=_req(obj, "id", path, lineno),
            name=obj.get("name") or "",
            source=obj.get("source") or "",
            is_baseline=base,
            metadata=_str_map(obj.get("metadata"), path, lineno),
        )
    except MalformedValue as exc:
        raise ParseError(path, lineno, str(exc)) from None


def _parse_measurement(obj, path, lineno) -> Measurement:
    return Measurement(
        sample_id=_req(obj, "sample_id", path, lineno),
        model_id=_req(obj, "model_id", path, lineno),
        metric=_req(obj, "metric", path, lineno),
        value=_req(obj, "value", path, lineno),
        opponent=obj.get("opponent"),
        outcome=obj.get("outcome"),
    )


def load(
    samples_path,
    models_path,
    measurements_path,
    embedding_dim: int | None = None,
    require_baseline: bool = True,
) -> Store:
    """Build a store from the three JSONL files.

    Raises ParseError (with line number) for malformed lines and
    IntegrityError for dangling references or unpaired preference records.
    """
    store = Store(embedding_dim)
    for lineno, obj in _read_jsonl(samples_path):
        s = _parse_sample(obj, samples_path, lineno)
        try:
            store.insert_sample(s)
        except StoreError as exc:
            raise ParseError(samples_path, lineno, str(exc)) from None
    for lineno, obj in _read_jsonl(models_path):
        m = _parse_model(obj, models_path, lineno)
        try:
            store.insert_model(m)
        except StoreError as exc:
            raise ParseError(models_path, lineno, str(exc)) from None
    for lineno, obj in _read_jsonl(measurements_path):
        meas = _parse_measurement(obj, measurements_path, lineno)
        try:
            store.insert_measurement(meas)
        except (UnknownSample, UnknownModel) as exc:
            raise IntegrityError(f"{measurements_path}:{lineno}: {exc}") from None
        except StoreError as exc:
            raise ParseError(measurements_path, lineno, str(exc)) from None
    if require_baseline or store.baseline is not None:
        store.validate()
    return store


def load_dir(directory, **kwargs) -> Store:
    d = Path(directory)
    return load(d / SAMPLES_FILE, d / MODELS_FILE, d / MEASUREMENTS_FILE, **kwargs)


def save(store: Store, directory) -> None:
    """Write the store as samples.jsonl, models.jsonl and measurements.jsonl."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, records in (
        (SAMPLES_FILE, store.samples.values()),
        (MODELS_FILE, store.models.values()),
        (MEASUREMENTS_FILE, store.measurements),
    ):
        with (d / name).open("w", encoding="utf-8", newline="\n") as fh:
            for r in records:
                fh.write(_dumps(r.to_json()))
                fh.write("\n")
