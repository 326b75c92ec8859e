"""Latent Dirichlet allocation fitted by collapsed Gibbs sampling."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .corpus import Corpus
from .rng import seed_state

logger = logging.getLogger(__name__)


class LdaError(ValueError):
    pass


@dataclass(frozen=True)
class LdaConfig:
    T: int
    alpha: float | None = None  # None means 5.0 / T
    beta: float = 0.01
    sweeps: int = 1000
    seed: int = 0
    top_k: int = 10

    def __post_init__(self):
        if self.T < 1:
            raise LdaError("T must be >= 1")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 5.0 / self.T)
        if not self.alpha > 0 or not self.beta > 0:
            raise LdaError("alpha and beta must be > 0")
        if self.sweeps < 1:
            raise LdaError("sweeps must be >= 1")
        if self.top_k < 1:
            raise LdaError("top_k must be >= 1")


@dataclass(frozen=True)
class TopicModel:
    words: tuple[str, ...]
    doc_ids: tuple[str, ...]
    phi: np.ndarray  # T x W
    theta: np.ndarray  # D x T
    z: np.ndarray  # topic of every token, documents concatenated
    tokens: np.ndarray  # word id of every token
    doc_offsets: np.ndarray  # token range of document d is offsets[d]:offsets[d+1]
    n_dt: np.ndarray
    n_tw: np.ndarray
    n_t: np.ndarray
    config: LdaConfig
    dropped_docs: tuple[str, ...] = ()

    @property
    def T(self) -> int:
        return self.phi.shape[0]

    def doc_index(self, doc_id: str) -> int:
        try:
            return self.doc_ids.index(doc_id)
        except ValueError:
            raise LdaError(f"unknown document {doc_id!r}") from None


# -- compiled sampler -------------------------------------------------------

@njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def _next_double(s):
    s0 = s[0]
    s1 = s[1]
    s2 = s[2]
    s3 = s[3]
    result = _rotl(s1 * np.uint64(5), 7) * np.uint64(9)
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return float(result >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _draw_uniforms(s, n):
    out = np.empty(n)
    for i in range(n):
        out[i] = _next_double(s)
    return out


@njit(cache=True)
def _initialize(tokens, docs, z, n_dt, n_tw, n_t, T, s):
    for i in range(tokens.shape[0]):
        t = int(_next_double(s) * T)
        z[i] = t
        n_dt[docs[i], t] += 1
        n_tw[t, tokens[i]] += 1
        n_t[t] += 1


@njit(cache=True)
def _sweep(tokens, docs, z, n_dt, n_tw, n_t, alpha, beta, w_beta, s, weights):
    T = weights.shape[0]
    for i in range(tokens.shape[0]):
        w = tokens[i]
        d = docs[i]
        t = z[i]
        n_dt[d, t] -= 1
        n_tw[t, w] -= 1
        n_t[t] -= 1
        total = 0.0
        for k in range(T):
            total += (n_dt[d, k] + alpha) * (n_tw[k, w] + beta) / (n_t[k] + w_beta)
            weights[k] = total
        u = _next_double(s) * total
        t = T - 1
        for k in range(T):
            if u < weights[k]:
                t = k
                break
        z[i] = t
        n_dt[d, t] += 1
        n_tw[t, w] += 1
        n_t[t] += 1


# -- public API ---------------------------------------------------------------

def _encode(corpus: Corpus, vocabulary: Sequence[str] | None):
    if vocabulary is None:
        words = sorted(corpus.word_counts())
    else:
        words = sorted(set(vocabulary))
    index = {w: j for j, w in enumerate(words)}
    kept_ids, dropped, streams = [], [], []
    for doc in corpus.documents:
        ids = [index[t] for t in doc.tokens if t in index]
        if ids:
            kept_ids.append(doc.id)
            streams.append(ids)
        else:
            dropped.append(doc.id)
    if dropped:
        logger.warning("dropped %d document(s) empty after vocabulary restriction: %s",
                       len(dropped), ", ".join(dropped))
    if not streams:
        raise LdaError("no tokens left to model")
    offsets = np.zeros(len(streams) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(s) for s in streams])
    tokens = np.array([w for s in streams for w in s], dtype=np.int64)
    docs = np.repeat(np.arange(len(streams), dtype=np.int64), np.diff(offsets))
    return tuple(words), tuple(kept_ids), tuple(dropped), tokens, docs, offsets


def fit_lda(
    corpus: Corpus,
    cfg: LdaConfig,
    vocabulary: Sequence[str] | None = None,
    callback: Callable[[int, "TopicModel"], None] | None = None,
) -> TopicModel:
    """Fit LDA by collapsed Gibbs sampling.

    Tokens outside ``vocabulary`` are ignored (all corpus words by default);
    documents left empty are dropped with a warning. Each token's topic is
    resampled from

        P(z = t | rest) ~ (n_dt + alpha) * (n_tw + beta) / (n_t + W * beta)

    for ``cfg.sweeps`` passes, and phi/theta are smoothed point estimates from
    the final counts. Identical corpus and config give identical output.
    ``callback(sweep, model)`` is called after every sweep when given.
    """
    if len(corpus) == 0:
        raise LdaError("empty corpus")
    words, doc_ids, dropped, tokens, docs, offsets = _encode(corpus, vocabulary)
    W, D, T = len(words), len(doc_ids), cfg.T
    if W < T:
        logger.warning("fewer words (%d) than topics (%d)", W, T)

    state = np.array(seed_state(cfg.seed), dtype=np.uint64)
    z = np.zeros(len(tokens), dtype=np.int64)
    n_dt = np.zeros((D, T), dtype=np.int64)
    n_tw = np.zeros((T, W), dtype=np.int64)
    n_t = np.zeros(T, dtype=np.int64)
    weights = np.zeros(T)
    _initialize(tokens, docs, z, n_dt, n_tw, n_t, T, state)

    def snapshot() -> TopicModel:
        return _assemble(words, doc_ids, dropped, tokens, offsets, z, n_dt, n_tw, n_t, cfg)

    alpha, beta = float(cfg.alpha), float(cfg.beta)
    if callback is None:
        for _ in range(cfg.sweeps):
            _sweep(tokens, docs, z, n_dt, n_tw, n_t, alpha, beta, W * beta, state, weights)
    else:
        for sweep in range(cfg.sweeps):
            _sweep(tokens, docs, z, n_dt, n_tw, n_t, alpha, beta, W * beta, state, weights)
            callback(sweep + 1, snapshot())
    return snapshot()


def _assemble(words, doc_ids, dropped, tokens, offsets, z, n_dt, n_tw, n_t, cfg) -> TopicModel:
    W, T = len(words), cfg.T
    phi = (n_tw + cfg.beta) / (n_t[:, None] + W * cfg.beta)
    lengths = n_dt.sum(axis=1)
    theta = (n_dt + cfg.alpha) / (lengths[:, None] + T * cfg.alpha)
    arrays = [a.copy() for a in (phi, theta, z, tokens, offsets, n_dt, n_tw, n_t)]
    for a in arrays:
        a.setflags(write=False)
    phi, theta, z, tokens, offsets, n_dt, n_tw, n_t = arrays
    return TopicModel(words, doc_ids, phi, theta, z, tokens, offsets, n_dt, n_tw, n_t, cfg, dropped)


def top_words(model: TopicModel, k: int | None = None) -> list[list[tuple[str, float]]]:
    """Per topic, the ``k`` most probable words (ties broken by ascending word)."""
    k = model.config.top_k if k is None else k
    if not 1 <= k <= len(model.words):
        raise LdaError(f"k must lie in [1, {len(model.words)}]")
    lists = []
    for t in range(model.T):
        row = model.phi[t]
        order = sorted(range(len(row)), key=lambda j: (-row[j], model.words[j]))[:k]
        lists.append([(model.words[j], float(row[j])) for j in order])
    return lists


def dominant_topic(model: TopicModel, doc_id: str) -> int:
    """0-based topic with the largest share in a document (lowest index on ties)."""
    return int(np.argmax(model.theta[model.doc_index(doc_id)]))


def dominant_topics(model: TopicModel) -> list[int]:
    return [int(i) for i in np.argmax(model.theta, axis=1)]


def perplexity(model: TopicModel, corpus: Corpus | None = None) -> float:
    """exp(-(1/N) sum over tokens of log sum_t theta_dt * phi_tw).

    Scores the training tokens when ``corpus`` is None; otherwise every
    document must be known to the model and every word in its vocabulary.
    """
    mix = model.theta @ model.phi  # D x W
    if corpus is None:
        docs = np.repeat(np.arange(len(model.doc_ids)), np.diff(model.doc_offsets))
        probs = mix[docs, model.tokens]
    else:
        index = {w: j for j, w in enumerate(model.words)}
        probs = []
        for doc in corpus.documents:
            d = model.doc_index(doc.id)
            for tok in doc.tokens:
                if tok not in index:
                    raise LdaError(f"word {tok!r} is not in the model vocabulary")
                probs.append(mix[d, index[tok]])
        probs = np.array(probs)
    if probs.size == 0:
        raise LdaError("no tokens to score")
    assert np.all(probs > 0), "zero-probability token despite smoothing"
    return float(math.exp(-np.log(probs).sum() / probs.size))


def uniform_model_like(model: TopicModel) -> TopicModel:
    """Same shapes as ``model`` with uniform phi; a baseline for perplexity."""
    phi = np.full_like(model.phi, 1.0 / model.phi.shape[1])
    return replace(model, phi=phi)
