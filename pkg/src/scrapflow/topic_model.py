"""Text preprocessing and latent-topic modeling of firm descriptions.

Documents are bags of preprocessed tokens; a topic model is fit by collapsed
Gibbs sampling with fixed symmetric priors, and the topic count is selected
by perplexity on a held-out document split.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._gibbs import gibbs_sweep, init_assignments
from .stopwords import DEFAULT_STOPWORDS
from .util import derive_rng, derive_seed_sequence

log = logging.getLogger(__name__)

_WORD_RE = re.compile(r"[a-z]+")
_VOWELS = frozenset("aeiou")
MIN_TOKEN_LENGTH = 4  # tokens shorter than this are dropped
FOLD_IN_ITERATIONS = 50


def lemmatize(token: str) -> str:
    """Light rule-based suffix folding.

    Plurals fold unconditionally ("metals" -> "metal", "companies" ->
    "company", "boxes" -> "box"). "-ing"/"-ed" strip only off a doubled
    final consonant ("scrapping" -> "scrap") so that stems the suffix is
    integral to ("recycling") survive intact.
    """
    if len(token) > 4 and token.endswith("ies"):
        token = token[:-3] + "y"
    elif token.endswith("es") and token[:-2].endswith(("s", "x", "z", "ch", "sh")):
        token = token[:-2]
    elif len(token) > 3 and token.endswith("s") and not token.endswith("ss"):
        token = token[:-1]
    for suffix in ("ing", "ed"):
        if token.endswith(suffix):
            stem = token[: -len(suffix)]
            if (
                len(stem) >= 5
                and stem[-1] == stem[-2]
                and stem[-1] not in _VOWELS
            ):
                return stem[:-1]
    return token


def preprocess(text: str, stopwords: Iterable[str] = DEFAULT_STOPWORDS) -> list[str]:
    """Lowercase, split on non-letter runs, fold suffixes, then drop tokens
    of length <= 3 and stopwords (checked on the folded form)."""
    stopset = stopwords if isinstance(stopwords, frozenset) else frozenset(stopwords)
    out = []
    for raw in _WORD_RE.findall(text.lower()):
        token = lemmatize(raw)
        if len(token) < MIN_TOKEN_LENGTH or token in stopset:
            continue
        out.append(token)
    return out


@dataclass(frozen=True)
class Corpus:
    """Documents as token-id arrays over a shared vocabulary."""

    documents: tuple[np.ndarray, ...]  # int32 token ids, one array per document
    vocabulary: tuple[str, ...]  # id -> token
    token_counts: np.ndarray  # per-id corpus frequency
    dropped_empty: int = 0  # input documents empty after preprocessing
    dropped_oov: int = 0  # tokens outside an imposed vocabulary

    @property
    def n_documents(self) -> int:
        return len(self.documents)

    @property
    def vocabulary_size(self) -> int:
        return len(self.vocabulary)

    @property
    def total_tokens(self) -> int:
        return int(sum(len(d) for d in self.documents))

    def subset(self, indices: Sequence[int]) -> "Corpus":
        """New corpus over the same vocabulary keeping the given documents."""
        docs = tuple(self.documents[i] for i in indices)
        counts = np.zeros(self.vocabulary_size, dtype=np.int64)
        for d in docs:
            counts += np.bincount(d, minlength=self.vocabulary_size)
        return Corpus(
            documents=docs,
            vocabulary=self.vocabulary,
            token_counts=counts,
            dropped_empty=0,
            dropped_oov=0,
        )


def build_corpus(
    token_docs: Iterable[Sequence[str]],
    vocabulary: Sequence[str] | None = None,
) -> Corpus:
    """Map token documents to id arrays.

    Without a vocabulary, one is built from the tokens (sorted, so ids are
    deterministic). With one, unknown tokens are dropped and counted, for
    folding new text into a fitted model's term space. Documents empty after
    mapping are dropped and counted.
    """
    docs = [list(d) for d in token_docs]
    if vocabulary is None:
        vocab = tuple(sorted({t for d in docs for t in d}))
    else:
        vocab = tuple(vocabulary)
    index = {t: i for i, t in enumerate(vocab)}
    if len(index) != len(vocab):
        raise ValueError("vocabulary contains duplicate tokens")
    id_docs: list[np.ndarray] = []
    dropped_empty = 0
    dropped_oov = 0
    counts = np.zeros(len(vocab), dtype=np.int64)
    for d in docs:
        ids = []
        for t in d:
            i = index.get(t)
            if i is None:
                dropped_oov += 1
                continue
            ids.append(i)
        if not ids:
            dropped_empty += 1
            continue
        arr = np.asarray(ids, dtype=np.int32)
        counts += np.bincount(arr, minlength=len(vocab))
        id_docs.append(arr)
    if dropped_empty:
        log.info("dropped %d empty document(s) after preprocessing", dropped_empty)
    return Corpus(
        documents=tuple(id_docs),
        vocabulary=vocab,
        token_counts=counts,
        dropped_empty=dropped_empty,
        dropped_oov=dropped_oov,
    )


@dataclass(frozen=True)
class LdaModel:
    """Fitted topic model: row-stochastic topic-word and document-topic
    matrices plus the sampler state needed to reproduce the fit."""

    n_topics: int
    topic_word: np.ndarray  # (K, V), rows sum to 1
    doc_topic: np.ndarray  # (D, K), rows sum to 1
    doc_topic_prior: float
    topic_word_prior: float
    seed: int
    iterations: int
    vocabulary: tuple[str, ...]
    assignments: np.ndarray  # final per-token topic labels, document order


def _flatten(corpus: Corpus) -> tuple[np.ndarray, np.ndarray]:
    doc_ids = np.concatenate(
        [np.full(len(d), i, dtype=np.int32) for i, d in enumerate(corpus.documents)]
    )
    word_ids = np.concatenate([d for d in corpus.documents]).astype(np.int32)
    return doc_ids, word_ids


def fit_lda(
    corpus: Corpus,
    n_topics: int,
    iterations: int = 200,
    seed: int = 0,
    doc_topic_prior: float | None = None,
    topic_word_prior: float = 0.1,
) -> LdaModel:
    """Collapsed Gibbs fit; deterministic for fixed inputs and seed.

    The document-topic prior defaults to 50 / n_topics, the topic-word prior
    to 0.1. Uniform variates are pre-generated per sweep from a labeled
    stream, so repeated fits reproduce identical assignments.
    """
    if n_topics < 1:
        raise ValueError(f"n_topics must be >= 1, got {n_topics}")
    if corpus.n_documents == 0:
        raise ValueError("corpus has no documents")
    total = corpus.total_tokens
    if n_topics > total:
        raise ValueError(f"n_topics {n_topics} exceeds total token count {total}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    alpha = 50.0 / n_topics if doc_topic_prior is None else float(doc_topic_prior)
    beta = float(topic_word_prior)
    if alpha <= 0 or beta <= 0:
        raise ValueError("priors must be positive")

    D, V, K = corpus.n_documents, corpus.vocabulary_size, n_topics
    doc_ids, word_ids = _flatten(corpus)
    z = np.zeros(total, dtype=np.int32)
    n_dk = np.zeros((D, K), dtype=np.int32)
    n_wk = np.zeros((V, K), dtype=np.int32)
    n_k = np.zeros(K, dtype=np.int32)

    rng = derive_rng(seed, "lda-gibbs")
    init_assignments(doc_ids, word_ids, z, n_dk, n_wk, n_k, rng.random(total))
    for _ in range(iterations):
        gibbs_sweep(doc_ids, word_ids, z, n_dk, n_wk, n_k, alpha, beta, rng.random(total))

    topic_word = (n_wk.T + beta) / (n_k[:, None] + V * beta)
    doc_lengths = np.array([len(d) for d in corpus.documents], dtype=np.float64)
    doc_topic = (n_dk + alpha) / (doc_lengths[:, None] + K * alpha)
    return LdaModel(
        n_topics=K,
        topic_word=topic_word,
        doc_topic=doc_topic,
        doc_topic_prior=alpha,
        topic_word_prior=beta,
        seed=seed,
        iterations=iterations,
        vocabulary=corpus.vocabulary,
        assignments=z,
    )


def _fold_in_mixture(model: LdaModel, counts: np.ndarray) -> np.ndarray:
    """Document-topic weights for an unseen document, topic_word frozen.

    Fixed-point iteration on the mixture: responsibilities under the current
    theta, then theta re-estimated from expected topic counts plus the
    prior. Deterministic (uniform start, fixed iteration count).
    """
    K = model.n_topics
    words = np.nonzero(counts)[0]
    c = counts[words].astype(np.float64)
    phi = model.topic_word[:, words]  # (K, n_distinct)
    theta = np.full(K, 1.0 / K)
    alpha = model.doc_topic_prior
    length = float(c.sum())
    for _ in range(FOLD_IN_ITERATIONS):
        r = theta[:, None] * phi  # (K, n_distinct)
        r /= r.sum(axis=0, keepdims=True)
        theta = (alpha + (r * c[None, :]).sum(axis=1)) / (K * alpha + length)
    return theta


def held_out_perplexity(model: LdaModel, held_out: Corpus) -> float:
    """exp(- mean per-token log-likelihood) on unseen documents.

    Uses document completion: each document's bag of tokens is split
    deterministically in two (token ids in sorted order, alternating), the
    mixture is folded in on one half, and the likelihood is scored on the
    other; both directions are scored and pooled. Scoring the same tokens
    the mixture was fitted on would reward extra topics for adapting to
    per-document sampling noise, which never lets perplexity rise past the
    true topic count; completion makes that adaptivity worthless and
    restores the selection signal.

    Held-out documents must share the model's vocabulary (build them with
    build_corpus(..., vocabulary=model.vocabulary), which drops and counts
    out-of-vocabulary tokens).
    """
    if held_out.vocabulary != model.vocabulary:
        raise ValueError("held-out corpus vocabulary differs from the model's")
    if held_out.n_documents == 0 or held_out.total_tokens == 0:
        raise ValueError("held-out corpus is empty")
    total_ll = 0.0
    total_tokens = 0
    V = model.topic_word.shape[1]
    for doc in held_out.documents:
        ids = np.sort(doc)
        halves = (ids[0::2], ids[1::2])
        for evaluate, estimate in (halves, halves[::-1]):
            if evaluate.size == 0:  # odd single-token documents
                continue
            theta = _fold_in_mixture(model, np.bincount(estimate, minlength=V))
            eval_counts = np.bincount(evaluate, minlength=V)
            words = np.nonzero(eval_counts)[0]
            mix = theta @ model.topic_word[:, words]
            total_ll += float(eval_counts[words] @ np.log(mix))
            total_tokens += int(evaluate.size)
    return float(np.exp(-total_ll / total_tokens))


@dataclass(frozen=True)
class TopicCountSelection:
    selected: int
    curve: tuple[tuple[int, float], ...]  # (n_topics, held-out perplexity)
    n_holdout: int
    holdout_indices: tuple[int, ...]


def select_topic_count(
    corpus: Corpus,
    k_grid: Sequence[int],
    holdout_fraction: float = 0.1,
    seed: int = 0,
    iterations: int = 200,
    doc_topic_prior: float | None = None,
    topic_word_prior: float = 0.1,
) -> TopicCountSelection:
    """Pick the topic count minimizing held-out perplexity over a grid.

    The holdout is sampled uniformly without replacement from the documents;
    each grid fit runs with its own seed derived from the master seed and
    the candidate count, so grid points are independent and the whole sweep
    is reproducible. Ties break toward the smaller count.
    """
    grid = sorted(set(int(k) for k in k_grid))
    if not grid:
        raise ValueError("k_grid is empty")
    if not 0.0 < holdout_fraction < 1.0:
        raise ValueError("holdout_fraction must be in (0, 1)")
    D = corpus.n_documents
    n_holdout = max(1, int(round(holdout_fraction * D)))
    if n_holdout >= D:
        raise ValueError(f"corpus too small: {D} document(s), holdout {n_holdout}")
    rng = derive_rng(seed, "holdout-split")
    holdout_idx = np.sort(rng.choice(D, size=n_holdout, replace=False))
    train_idx = np.setdiff1d(np.arange(D), holdout_idx)
    train = corpus.subset(train_idx.tolist())
    held = corpus.subset(holdout_idx.tolist())
    curve = []
    for k in grid:
        fit_seed = int(derive_seed_sequence(seed, "grid-fit", f"K={k}").generate_state(1)[0])
        model = fit_lda(
            train,
            k,
            iterations=iterations,
            seed=fit_seed,
            doc_topic_prior=doc_topic_prior,
            topic_word_prior=topic_word_prior,
        )
        perp = held_out_perplexity(model, held)
        log.info("topic grid: K=%d held-out perplexity %.3f", k, perp)
        curve.append((k, perp))
    selected = min(curve, key=lambda kp: (kp[1], kp[0]))[0]
    return TopicCountSelection(
        selected=selected,
        curve=tuple(curve),
        n_holdout=n_holdout,
        holdout_indices=tuple(int(i) for i in holdout_idx),
    )


def top_terms(model: LdaModel, topic: int, n: int) -> list[tuple[str, float]]:
    """n highest-probability terms of one topic, ties lexicographic."""
    if not 0 <= topic < model.n_topics:
        raise ValueError(f"topic {topic} out of range for K={model.n_topics}")
    if n < 1:
        raise ValueError("n must be >= 1")
    row = model.topic_word[topic]
    order = sorted(range(len(row)), key=lambda w: (-row[w], model.vocabulary[w]))
    return [(model.vocabulary[w], float(row[w])) for w in order[: min(n, len(row))]]


def corpus_topic_contributions(model: LdaModel, corpus: Corpus) -> np.ndarray:
    """Token-weighted average of document mixtures: the share of the corpus
    each topic accounts for. Sums to 1."""
    if model.doc_topic.shape[0] != corpus.n_documents:
        raise ValueError("model was not fit on this corpus")
    lengths = np.array([len(d) for d in corpus.documents], dtype=np.float64)
    weights = lengths / lengths.sum()
    return weights @ model.doc_topic
