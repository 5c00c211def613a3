"""Lexical-system data model: file formats, validation, deterministic subsampling.

A system is a fixed, ordered set of word categories, each carrying one set of
visual exemplar embeddings and one set of linguistic exemplar embeddings.  The
manifest's word order is canonical everywhere downstream (similarity-matrix
rows, permutation indices, CSV row order).  Vectors are stored as float64 and
serialised with shortest round-trip decimals, so save -> load is bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import rng

MODALITIES = ("visual", "linguistic")
WORD_TYPES = ("noun", "verb")

_STREAM_VISUAL = 0
_STREAM_LINGUISTIC = 1


class LexAlignError(Exception):
    """Base class for domain failures (CLI exit code 1)."""


class LoadError(LexAlignError):
    """Input file content could not be interpreted as a lexical system."""


class SubsampleError(LexAlignError):
    """A subsampling request exceeded a word's available exemplars."""


@dataclass(frozen=True)
class WordEntry:
    word: str
    word_type: str
    visual: np.ndarray  # (n_visual, dim_visual) float64
    linguistic: np.ndarray  # (n_linguistic, dim_linguistic) float64


@dataclass(frozen=True)
class LexicalSystem:
    name: str
    words: tuple[WordEntry, ...]
    dim_visual: int
    dim_linguistic: int

    @property
    def n_words(self) -> int:
        return len(self.words)

    def word_labels(self) -> list[str]:
        return [w.word for w in self.words]

    def exemplars(self, word_index: int, modality: str) -> np.ndarray:
        entry = self.words[word_index]
        if modality == "visual":
            return entry.visual
        if modality == "linguistic":
            return entry.linguistic
        raise ValueError(f"unknown modality {modality!r}")


@dataclass(frozen=True)
class SystemView:
    """A per-word selection of exemplar indices, sampled without replacement."""

    base: LexicalSystem
    visual_sel: tuple[np.ndarray, ...]
    linguistic_sel: tuple[np.ndarray, ...]

    @property
    def n_words(self) -> int:
        return self.base.n_words

    def selected(self, word_index: int, modality: str) -> np.ndarray:
        sel = self.visual_sel if modality == "visual" else self.linguistic_sel
        return self.base.exemplars(word_index, modality)[sel[word_index]]


@dataclass
class ValidationIssue:
    severity: str
    word: str
    message: str


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(i.severity == "error" for i in self.issues)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "issues": [
                {"severity": i.severity, "word": i.word, "message": i.message}
                for i in self.issues
            ],
        }


def full_view(system: LexicalSystem) -> SystemView:
    """View selecting every exemplar of every word, in stored order."""
    vsel = tuple(np.arange(len(w.visual)) for w in system.words)
    lsel = tuple(np.arange(len(w.linguistic)) for w in system.words)
    return SystemView(system, vsel, lsel)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def load_system(manifest_path, embeddings_path) -> LexicalSystem:
    """Load and cross-check manifest.json + embeddings.jsonl.

    Content errors name the offending word and, for embedding records, the
    1-based line number.  OS-level failures propagate as OSError.
    """
    with open(manifest_path, "r", encoding="utf-8") as f:
        try:
            manifest = json.load(f)
        except json.JSONDecodeError as e:
            raise LoadError(f"manifest parse failure: {e}") from e

    for key in ("name", "dim_visual", "dim_linguistic", "words"):
        if key not in manifest:
            raise LoadError(f"manifest missing required key {key!r}")
    dim_visual = int(manifest["dim_visual"])
    dim_linguistic = int(manifest["dim_linguistic"])
    if dim_visual < 1 or dim_linguistic < 1:
        raise LoadError("embedding dimensionalities must be positive")

    declared: dict[str, dict] = {}
    order: list[str] = []
    for rec in manifest["words"]:
        word = rec.get("word")
        if not isinstance(word, str) or not word:
            raise LoadError(f"manifest word entry without a word label: {rec!r}")
        if word in declared:
            raise LoadError(f"duplicate word {word!r} in manifest")
        wtype = rec.get("type")
        if wtype not in WORD_TYPES:
            raise LoadError(f"word {word!r}: type must be one of {WORD_TYPES}, got {wtype!r}")
        n_vis = int(rec.get("n_visual", 0))
        n_ling = int(rec.get("n_linguistic", 0))
        if n_vis < 1 or n_ling < 1:
            raise LoadError(f"word {word!r}: exemplar counts must be >= 1")
        declared[word] = {"type": wtype, "n_visual": n_vis, "n_linguistic": n_ling}
        order.append(word)
    if len(order) < 2:
        raise LoadError("a lexical system needs at least 2 words")

    dims = {"visual": dim_visual, "linguistic": dim_linguistic}
    counts = {"visual": "n_visual", "linguistic": "n_linguistic"}
    store: dict[str, dict[str, dict[int, np.ndarray]]] = {
        w: {"visual": {}, "linguistic": {}} for w in order
    }

    with open(embeddings_path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise LoadError(f"embeddings line {lineno}: parse failure: {e}") from e
            word = rec.get("word")
            if word not in declared:
                raise LoadError(
                    f"embeddings line {lineno}: word {word!r} absent from manifest"
                )
            modality = rec.get("modality")
            if modality not in MODALITIES:
                raise LoadError(
                    f"embeddings line {lineno}: word {word!r}: bad modality {modality!r}"
                )
            index = rec.get("index")
            if not isinstance(index, int) or index < 0:
                raise LoadError(
                    f"embeddings line {lineno}: word {word!r}: bad index {index!r}"
                )
            vec = np.asarray(rec.get("vector"), dtype=np.float64)
            if vec.ndim != 1 or len(vec) != dims[modality]:
                raise LoadError(
                    f"embeddings line {lineno}: word {word!r}: {modality} vector "
                    f"length {vec.size} != expected {dims[modality]}"
                )
            if not np.isfinite(vec).all():
                raise LoadError(
                    f"embeddings line {lineno}: word {word!r}: non-finite component "
                    f"in {modality} exemplar {index}"
                )
            slot = store[word][modality]
            if index in slot:
                raise LoadError(
                    f"embeddings line {lineno}: word {word!r}: duplicate "
                    f"{modality} index {index}"
                )
            slot[index] = vec

    entries = []
    for word in order:
        info = declared[word]
        mats = {}
        for modality in MODALITIES:
            expected = info[counts[modality]]
            got = store[word][modality]
            missing = [i for i in range(expected) if i not in got]
            if missing or len(got) != expected:
                raise LoadError(
                    f"word {word!r}: {modality} exemplar indices not dense "
                    f"0..{expected - 1} (got {sorted(got)})"
                )
            mats[modality] = _freeze(np.vstack([got[i] for i in range(expected)]))
        entries.append(
            WordEntry(word, info["type"], mats["visual"], mats["linguistic"])
        )
    return LexicalSystem(str(manifest["name"]), tuple(entries), dim_visual, dim_linguistic)


def save_system(system: LexicalSystem, manifest_path, embeddings_path) -> None:
    """Write the canonical manifest + jsonl pair; floats keep full precision."""
    manifest = {
        "name": system.name,
        "dim_visual": system.dim_visual,
        "dim_linguistic": system.dim_linguistic,
        "words": [
            {
                "word": w.word,
                "type": w.word_type,
                "n_visual": len(w.visual),
                "n_linguistic": len(w.linguistic),
            }
            for w in system.words
        ],
    }
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    with open(embeddings_path, "w", encoding="utf-8") as f:
        for w in system.words:
            for modality, mat in (("visual", w.visual), ("linguistic", w.linguistic)):
                for i, vec in enumerate(mat):
                    f.write(
                        json.dumps(
                            {
                                "word": w.word,
                                "modality": modality,
                                "index": i,
                                "vector": vec.tolist(),
                            }
                        )
                    )
                    f.write("\n")


def validate(system: LexicalSystem) -> ValidationReport:
    """Enumerate every invariant violation; never raises on bad data."""
    report = ValidationReport()
    err = lambda word, msg: report.issues.append(ValidationIssue("error", word, msg))

    if system.n_words < 2:
        err("", f"system has {system.n_words} words, needs at least 2")
    seen: set[str] = set()
    for w in system.words:
        if w.word in seen:
            err(w.word, "duplicate word label")
        seen.add(w.word)
        if w.word_type not in WORD_TYPES:
            err(w.word, f"bad word type {w.word_type!r}")
        for modality, mat, dim in (
            ("visual", w.visual, system.dim_visual),
            ("linguistic", w.linguistic, system.dim_linguistic),
        ):
            if len(mat) < 1:
                err(w.word, f"no {modality} exemplars")
                continue
            if mat.ndim != 2 or mat.shape[1] != dim:
                err(
                    w.word,
                    f"{modality} exemplar length {mat.shape[-1]} != declared {dim}",
                )
                continue
            bad = ~np.isfinite(mat)
            if bad.any():
                for i in np.unique(np.nonzero(bad)[0]):
                    err(w.word, f"non-finite component in {modality} exemplar {i}")
    return report


def subsample(system: LexicalSystem, k_visual: int, k_linguistic: int, seed: int) -> SystemView:
    """Per-word uniform sampling without replacement, deterministic in seed.

    Each (word, modality) draws from its own stream mix(seed, word_index,
    modality_tag), taking the first k entries of a full permutation of the
    available indices: growing k with the same seed extends the previous
    selection (prefix property).
    """
    if k_visual < 1 or k_linguistic < 1:
        raise SubsampleError("subsample counts must be >= 1")
    for w in system.words:
        for k, mat, label in (
            (k_visual, w.visual, "visual"),
            (k_linguistic, w.linguistic, "linguistic"),
        ):
            if k > len(mat):
                raise SubsampleError(
                    f"word {w.word!r}: requested {k} {label} exemplars, "
                    f"only {len(mat)} available"
                )
    word_streams = rng.keys(seed, system.n_words)  # word i's stream is mix(seed, i)
    vsel = _select_modality(
        word_streams, [len(w.visual) for w in system.words], k_visual, _STREAM_VISUAL
    )
    lsel = _select_modality(
        word_streams, [len(w.linguistic) for w in system.words], k_linguistic, _STREAM_LINGUISTIC
    )
    return SystemView(system, vsel, lsel)


def _select_modality(word_streams, counts, k, tag) -> tuple[np.ndarray, ...]:
    """Per-word prefix selections; uniform counts use one batched draw."""
    seeds = rng.mix_array(word_streams, tag)
    if len(set(counts)) == 1:
        perms = rng.batch_permutations(seeds, counts[0])
        return tuple(perms[i, :k] for i in range(len(counts)))
    return tuple(
        rng.sample_without_replacement(int(seeds[i]), counts[i], k)
        for i in range(len(counts))
    )
