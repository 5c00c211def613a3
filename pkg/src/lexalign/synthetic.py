"""Synthetic lexical systems with known ground truth, for tests and demos.

Three families: aligned systems whose modalities share a latent structure
(alignment improves as exemplars aggregate), two-type systems with controlled
within-category spread per word type (variability ratios are known from the
generator), and null systems with independent modalities (relative alignment
is uniform under permutation).
"""

from __future__ import annotations

import numpy as np

from .data_model import LexicalSystem, WordEntry


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def _entries(words, types, vis, ling) -> tuple[WordEntry, ...]:
    return tuple(
        WordEntry(w, t, _freeze(v), _freeze(l))
        for w, t, v, l in zip(words, types, vis, ling)
    )


def aligned_system(
    n_words: int = 30,
    latent_dim: int = 5,
    dim_visual: int = 16,
    dim_linguistic: int = 12,
    n_visual: int = 20,
    n_linguistic: int = 20,
    noise: float = 3.0,
    seed: int = 0,
    name: str = "synthetic-aligned",
) -> LexicalSystem:
    """Both modalities are linear views of one latent vector per word + noise.

    With noise 3.0 and latent_dim 5, a single exemplar is heavily corrupted but
    aggregating ~8 exemplars recovers the shared structure almost perfectly.
    """
    g = np.random.default_rng(seed)
    latent = g.standard_normal((n_words, latent_dim))
    map_v = g.standard_normal((latent_dim, dim_visual)) / np.sqrt(latent_dim)
    map_l = g.standard_normal((latent_dim, dim_linguistic)) / np.sqrt(latent_dim)
    vis = [
        latent[i] @ map_v + noise * g.standard_normal((n_visual, dim_visual))
        for i in range(n_words)
    ]
    ling = [
        latent[i] @ map_l + noise * g.standard_normal((n_linguistic, dim_linguistic))
        for i in range(n_words)
    ]
    words = [f"w{i:03d}" for i in range(n_words)]
    types = ["noun" if i % 2 == 0 else "verb" for i in range(n_words)]
    return LexicalSystem(name, _entries(words, types, vis, ling), dim_visual, dim_linguistic)


def two_type_system(
    n_nouns: int = 210,
    n_verbs: int = 210,
    dim_visual: int = 64,
    dim_linguistic: int = 64,
    n_visual: int = 20,
    n_linguistic: int = 20,
    noun_spread: float = 1.0,
    verb_spread: float = 2.0,
    center_scale: float = 4.0,
    seed: int = 0,
    name: str = "synthetic-two-type",
) -> LexicalSystem:
    """Noun/verb categories around random centers with per-type visual spread.

    Visual exemplars of a type-s word scatter with std s around the word's
    center, so the expected visual-variability ratio verbs:nouns equals
    verb_spread / noun_spread.  Linguistic spread is common to both types.
    """
    g = np.random.default_rng(seed)
    n = n_nouns + n_verbs
    centers_v = center_scale * g.standard_normal((n, dim_visual))
    centers_l = center_scale * g.standard_normal((n, dim_linguistic))
    types = ["noun"] * n_nouns + ["verb"] * n_verbs
    spreads = [noun_spread] * n_nouns + [verb_spread] * n_verbs
    vis = [
        centers_v[i] + spreads[i] * g.standard_normal((n_visual, dim_visual))
        for i in range(n)
    ]
    ling = [
        centers_l[i] + noun_spread * g.standard_normal((n_linguistic, dim_linguistic))
        for i in range(n)
    ]
    words = [f"n{i:03d}" for i in range(n_nouns)] + [f"v{i:03d}" for i in range(n_verbs)]
    return LexicalSystem(name, _entries(words, types, vis, ling), dim_visual, dim_linguistic)


def null_system(
    n_words: int = 30,
    dim_visual: int = 8,
    dim_linguistic: int = 8,
    n_visual: int = 1,
    n_linguistic: int = 1,
    seed: int = 0,
    name: str = "synthetic-null",
) -> LexicalSystem:
    """Independent Gaussian embeddings per modality: no true alignment."""
    g = np.random.default_rng(seed)
    vis = [g.standard_normal((n_visual, dim_visual)) for _ in range(n_words)]
    ling = [g.standard_normal((n_linguistic, dim_linguistic)) for _ in range(n_words)]
    words = [f"w{i:03d}" for i in range(n_words)]
    types = ["noun" if i % 2 == 0 else "verb" for i in range(n_words)]
    return LexicalSystem(name, _entries(words, types, vis, ling), dim_visual, dim_linguistic)
