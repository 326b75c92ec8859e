"""Acceptance suite: one or more tests per criterion, summarised at the end of the run.

Each test carries ``@pytest.mark.criterion(number, title)``; conftest prints a
PASS/FAIL line per criterion after the session. A criterion passes only when
every test marked with it passes.
"""

from __future__ import annotations

import hashlib
import importlib.util
import statistics
import time
from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from cowordmap.compare import chi_square, cramers_v, import_partition, permutation_p_value
from cowordmap.corpus import bundled_path, corpus_from_texts, corpus_statistics, generate_synthetic_corpus
from cowordmap.factors import correlation_matrix, pca_varimax
from cowordmap.lda import LdaConfig, fit_lda, top_words
from cowordmap.matrix import cosine_matrix, read_matrix_csv
from cowordmap.network import (
    CowordNetwork,
    build_network,
    isolate_count,
    louvain_partition,
    modularity,
    read_pajek_net,
)
from cowordmap.pipeline import PipelineConfig, build_working_set, run_pipeline
from oracles import brute_force_max_modularity, chi_square_exact, chi_square_sf_mp, cramers_v_exact

ROOT = Path(__file__).resolve().parents[1]
MEDIUM_SHA256 = "e21df23699125aa66f0b7941b3cf9f9c6d8baf6dbba6037504c777d2ed46b82a"


def within(value, target, rel):
    return abs(value - target) <= rel * target


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("default")
    cfg = PipelineConfig(out=str(out))
    return cfg, run_pipeline(cfg), out


# -- 1 ------------------------------------------------------------------------

@pytest.mark.criterion(1, "Manifesto corpus statistics")
def test_c1_corpus_statistics(manifesto, stoplist):
    stats = corpus_statistics(manifesto, stoplist)
    _, vocab, _ = build_working_set(PipelineConfig(), manifesto, stoplist)
    print(f"\n  documents {stats['documents']}, unique {stats['unique_words']}, tokens {stats['tokens']}, "
          f"post-stopword {stats['unique_after_stopwords']}, vocabulary {len(vocab)}")
    assert stats["documents"] == 26
    assert within(stats["unique_words"], 724, 0.05)
    assert within(stats["tokens"], 1926, 0.05)
    assert within(stats["unique_after_stopwords"], 550, 0.05)
    assert within(len(vocab), 75, 0.10)


# -- 2 ------------------------------------------------------------------------

@pytest.mark.criterion(2, "five-factor varimax model")
def test_c2_factor_model(manifesto, stoplist):
    start = time.perf_counter()
    _, _, m = build_working_set(PipelineConfig(), manifesto, stoplist)
    fm = pca_varimax(correlation_matrix(m), 5)
    elapsed = time.perf_counter() - start
    print(f"\n  explained variance {100 * fm.explained_variance_fraction:.2f}% in {elapsed:.2f}s")
    assert abs(100 * fm.explained_variance_fraction - 47.04) <= 3.0
    rows = [fm.words.index(w) for w in ("google", "released", "scholar", "web")]
    loads = fm.loadings[rows]
    common = [j for j in range(fm.k) if np.all(np.abs(loads[:, j]) > 0.6)]
    print(f"  google/released/scholar/web loadings on factor {common}: {np.round(loads[:, common].ravel(), 3)}")
    assert common
    assert elapsed < 10.0


# -- 3 ------------------------------------------------------------------------

@pytest.mark.criterion(3, "modularity and Louvain oracle suite")
def test_c3_hand_fixtures():
    triangles = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    bridged = CowordNetwork.from_edges(6, triangles + [(2, 3)])
    assert abs(modularity(bridged, [0, 0, 0, 1, 1, 1]) - 5 / 14) <= 1e-12
    assert abs(modularity(bridged, [0] * 6)) <= 1e-12
    assert abs(modularity(CowordNetwork.from_edges(6, triangles), [0, 0, 0, 1, 1, 1]) - 0.5) <= 1e-12


def _suite_graphs():
    # every connected graph with 2..7 nodes, then seeded random connected 8-node graphs
    for g in nx.graph_atlas_g()[1:]:
        if g.number_of_nodes() >= 2 and nx.is_connected(g):
            yield g
    rng = np.random.default_rng(8)
    made = 0
    while made < 200:
        g = nx.gnp_random_graph(8, float(rng.uniform(0.2, 0.7)), seed=int(rng.integers(2 ** 31)))
        if nx.is_connected(g):
            made += 1
            yield g


@pytest.mark.criterion(3, "modularity and Louvain oracle suite")
def test_c3_louvain_within_005_of_brute_force():
    failures = []
    total = 0
    for g in _suite_graphs():
        a = nx.to_numpy_array(g, nodelist=sorted(g))
        net = CowordNetwork(tuple(map(str, range(len(a)))), (1,) * len(a), a)
        gap = brute_force_max_modularity(a) - louvain_partition(net).modularity_q
        total += 1
        if gap > 0.05:
            failures.append((len(a), round(gap, 4)))
    print(f"\n  {total} graphs, {len(failures)} with gap > 0.05; worst {max((f[1] for f in failures), default=0)}")
    assert not failures, f"{len(failures)} of {total} graphs: Louvain more than 0.05 below the optimum"


# -- 4 ------------------------------------------------------------------------

def _load_generator():
    spec = importlib.util.spec_from_file_location("make_medium_fixture", ROOT / "scripts" / "make_medium_fixture.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


@pytest.mark.criterion(4, "threshold behaviour on the medium fixture")
def test_c4_fixture_is_pinned():
    path = bundled_path("medium_matrix.csv")
    assert hashlib.sha256(path.read_bytes()).hexdigest() == MEDIUM_SHA256
    gen = _load_generator()
    regenerated = gen.generate(**gen.DEFAULTS)
    fixture = read_matrix_csv(path)
    assert regenerated.words == fixture.words
    np.testing.assert_array_equal(regenerated.counts, fixture.counts)


@pytest.mark.criterion(4, "threshold behaviour on the medium fixture")
def test_c4_threshold_behaviour():
    m = read_matrix_csv(bundled_path("medium_matrix.csv"))
    assert m.shape[1] == 56
    sim, freqs = cosine_matrix(m), m.column_sums()
    low = louvain_partition(build_network(sim, freqs, 0.1))
    net_high = build_network(sim, freqs, 0.2)
    high = louvain_partition(net_high)
    print(f"\n  tau 0.1: Q = {low.modularity_q:.3f}; tau 0.2: isolates {isolate_count(net_high)}, "
          f"Q = {high.modularity_q:.3f}")
    assert 0.30 <= low.modularity_q <= 0.42
    assert isolate_count(net_high) >= 20
    assert high.modularity_q >= 0.70


# -- 5 ------------------------------------------------------------------------

def _check_counts(model):
    assert model.n_t.sum() == len(model.tokens)
    np.testing.assert_array_equal(model.n_tw.sum(axis=1), model.n_t)
    np.testing.assert_array_equal(model.n_dt.sum(axis=0), model.n_t)
    np.testing.assert_array_equal(np.bincount(model.z, minlength=model.T), model.n_t)
    np.testing.assert_allclose(model.phi.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(model.theta.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.criterion(5, "LDA correctness")
def test_c5_invariants_every_sweep(manifesto):
    corpora = [
        corpus_from_texts(["a b a c", "c d d", "b a", "d c c a"]),
        generate_synthetic_corpus(3, 15, 20, 4, seed=1)[0],
        manifesto,
    ]
    for c in corpora:
        fit_lda(c, LdaConfig(T=4, sweeps=20, seed=1), callback=lambda s, m: _check_counts(m))


def _aligned_purity(lists, T):
    overlap = np.zeros((T, T))
    for t, words in enumerate(lists):
        for w, _ in words:
            overlap[t, int(w[1:w.index("w")])] += 1  # synthetic words are t{block}w{i}
    r, c = linear_sum_assignment(-overlap)
    return overlap[r, c].sum() / sum(len(x) for x in lists)


@pytest.mark.criterion(5, "LDA correctness")
def test_c5_synthetic_block_recovery():
    purities = []
    for seed in range(10):
        corpus, _ = generate_synthetic_corpus(5, 100, 100, 20, seed=seed)
        model = fit_lda(corpus, LdaConfig(T=5, seed=seed))
        purities.append(_aligned_purity(top_words(model, 10), 5))
    print(f"\n  aligned top-10 purity per seed: {[round(float(p), 2) for p in purities]}")
    assert sum(p >= 0.9 for p in purities) >= 8


@pytest.mark.criterion(5, "LDA correctness")
def test_c5_single_topic_exact(manifesto):
    model = fit_lda(manifesto, LdaConfig(T=1, sweeps=3))
    assert set(model.z.tolist()) == {0}
    np.testing.assert_array_equal(model.theta, 1.0)
    counts = np.bincount(model.tokens, minlength=len(model.words))
    beta, n, W = model.config.beta, len(model.tokens), len(model.words)
    np.testing.assert_allclose(model.phi[0], (counts + beta) / (n + W * beta), rtol=1e-14)


# -- 6 ------------------------------------------------------------------------

STAT_TABLES = [
    [[40, 30, 35], [25, 45, 30]],
    [[20, 15, 10, 12], [10, 18, 22, 15], [14, 10, 12, 20]],
    [[35, 20], [22, 33], [18, 30]],
    [[18, 22, 30], [26, 20, 14], [16, 28, 22]],
    [[33, 17, 21], [19, 29, 24]],
]


@pytest.mark.criterion(6, "chi-square and Cramer's V oracle")
@pytest.mark.parametrize("table", STAT_TABLES)
def test_c6_statistics_oracle(table):
    t = np.array(table)
    chi2, df, p = chi_square(t)
    v = cramers_v(chi2, int(t.sum()), *t.shape)
    exact = float(chi_square_exact(table))
    assert chi2 == pytest.approx(exact, rel=1e-9)
    assert df == (t.shape[0] - 1) * (t.shape[1] - 1)
    assert v == pytest.approx(cramers_v_exact(table), rel=1e-9)
    assert p == pytest.approx(chi_square_sf_mp(exact, df), rel=1e-9)
    p_perm, se = permutation_p_value(t, n_perm=2000, seed=0)
    assert abs(p_perm - p) <= 3 * se, f"permutation {p_perm} vs asymptotic {p} (se {se})"


# -- 7 ------------------------------------------------------------------------

@pytest.mark.criterion(7, "topics vs co-word clusters, over LDA seeds")
def test_c7_lda_vs_louvain_over_seeds(tmp_path):
    vs, ps = [], []
    for seed in range(10):
        cfg = PipelineConfig(topics=5, top_k=10, seed=seed, svg=False, figures=False, out=str(tmp_path / str(seed)))
        a = run_pipeline(cfg).associations["word_topic_vs_cluster"]
        vs.append(a["cramers_v"])
        ps.append(a["p_value"])
    med = statistics.median(vs)
    nonsig = sum(p > 0.05 for p in ps)
    print(f"\n  V per seed {[round(v, 3) for v in vs]}; median {med:.3f}; p > 0.05 in {nonsig}/10")
    assert med < 0.6
    assert nonsig > 5


@pytest.mark.criterion(7, "topics vs co-word clusters, over LDA seeds")
def test_c7_louvain_rerun_agrees(default_run):
    a = default_run[1].associations["cluster_vs_cluster_rerun"]
    assert a["cramers_v"] == pytest.approx(1.0, abs=1e-12)


# -- 8 ------------------------------------------------------------------------

@pytest.mark.criterion(8, "determinism")
def test_c8_identical_runs_identical_bytes(default_run, tmp_path):
    cfg, _, out = default_run
    run_pipeline(PipelineConfig.from_text(cfg.to_text().replace(f"out = {cfg.out}", f"out = {tmp_path}")))
    for name in ("report.json", "map.svg"):
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes(), name


# -- 9 ------------------------------------------------------------------------

@pytest.mark.criterion(9, "Pajek round trip")
def test_c9_pajek_round_trip(default_run):
    _, report, out = default_run
    net = read_pajek_net(out / report.files["pajek_net"])
    part = import_partition(out / report.files["pajek_clu"], out / report.files["pajek_net"])
    assert part.nodes == net.words
    assert abs(modularity(net, part.assignment) - report.network["modularity"]) <= 1e-9
