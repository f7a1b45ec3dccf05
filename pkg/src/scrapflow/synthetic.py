"""Deterministic synthetic data generators.

The licensed trade and firm-registry sources cannot ship with the package,
so fixtures and oracle tests draw from generators with known ground truth:
planted topic mixtures, a trade network with engineered hub structure, a
firm registry with controlled industry-code shares, and a country table
generated from stated regression coefficients. Each generator is a pure
function of its seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topic_model import Corpus
from .util import derive_rng

# ---------------------------------------------------------------------------
# Planted-topic corpus

@dataclass(frozen=True)
class PlantedCorpus:
    corpus: Corpus
    topic_word: np.ndarray  # (K, V) generating distributions
    doc_topic: np.ndarray  # (D, K) generating mixtures


def planted_topic_corpus(
    n_docs: int = 500,
    vocab_size: int = 200,
    n_topics: int = 3,
    mean_doc_length: int = 24,
    seed: int = 0,
    off_block_mass: float = 0.05,
    mixture_concentration: float = 0.15,
) -> PlantedCorpus:
    """Corpus drawn from block-structured topics over disjoint vocabulary
    blocks; low mixture concentration makes most documents near-pure, which
    keeps the planted structure recoverable. Short documents keep the
    per-topic token mass small, so over-fragmented fits pay a visible
    smoothing penalty in held-out perplexity."""
    rng = derive_rng(seed, "planted-corpus")
    V, K = vocab_size, n_topics
    vocabulary = tuple(f"w{i:03d}" for i in range(V))
    topic_word = np.full((K, V), off_block_mass / V)
    bounds = np.linspace(0, V, K + 1).astype(int)
    for k in range(K):
        block = slice(bounds[k], bounds[k + 1])
        # Zipf weights within each block: the long tail of rare block words
        # is expensive to re-estimate from fragmented topics, which keeps
        # held-out perplexity from drifting down past the true topic count.
        ranks = np.arange(1, bounds[k + 1] - bounds[k] + 1, dtype=np.float64)
        topic_word[k, block] += (1.0 - off_block_mass) * (1.0 / ranks) / (1.0 / ranks).sum()
    topic_word /= topic_word.sum(axis=1, keepdims=True)

    doc_topic = rng.dirichlet(np.full(K, mixture_concentration), size=n_docs)
    lengths = np.maximum(rng.poisson(mean_doc_length, size=n_docs), 20)
    documents = []
    counts = np.zeros(V, dtype=np.int64)
    for d in range(n_docs):
        topics = rng.choice(K, size=lengths[d], p=doc_topic[d])
        words = np.empty(lengths[d], dtype=np.int32)
        for k in range(K):
            mask = topics == k
            if mask.any():
                words[mask] = rng.choice(V, size=int(mask.sum()), p=topic_word[k])
        counts += np.bincount(words, minlength=V)
        documents.append(words)
    corpus = Corpus(
        documents=tuple(documents),
        vocabulary=vocabulary,
        token_counts=counts,
        dropped_empty=0,
        dropped_oov=0,
    )
    return PlantedCorpus(corpus=corpus, topic_word=topic_word, doc_topic=doc_topic)


def match_topics_cosine(planted: np.ndarray, fitted: np.ndarray) -> tuple[tuple[int, ...], float]:
    """Best assignment of fitted to planted topics and its minimum cosine.

    Exhaustive over permutations (topic counts here are small); returns the
    permutation p with fitted[p[k]] matched to planted[k], maximizing the
    worst-case cosine similarity.
    """
    from itertools import permutations

    def cos(a: np.ndarray, b: np.ndarray) -> float:
        return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))

    K = planted.shape[0]
    best, best_min = None, -1.0
    for perm in permutations(range(fitted.shape[0]), K):
        worst = min(cos(planted[k], fitted[perm[k]]) for k in range(K))
        if worst > best_min:
            best, best_min = perm, worst
    assert best is not None
    return best, best_min


# ---------------------------------------------------------------------------
# Trade fixture

TRADE_COUNTRIES = (
    "AUT BEL BGR CHE CHN CZE DEU DNK ESP FIN FRA GBR GRC HRV HUN IND ITA "
    "LUX NLD POL PRT ROU SVK SWE TUR USA"
).split()

SCRAP_CODES = ("720410", "720421", "720449")
NOISE_CODES = ("720711", "721420", "260111")


def synthetic_trade_rows(seed: int = 0, years: tuple[int, int] = (2007, 2021)) -> list[dict]:
    """BACI-style rows (t,i,j,k,v,q) with hub-and-spoke structure: a few
    heavy corridors on top of a sparse random background, plus deliberate
    malformed rows (self-loop, bad quantity, out-of-range year) so ingest
    skip accounting is exercised by the shipped fixture."""
    rng = derive_rng(seed, "trade-fixture")
    rows: list[dict] = []
    n = len(TRADE_COUNTRIES)
    # heavy corridors into two hub importers and out of one hub exporter
    hubs_in = ("TUR", "IND")
    hub_out = "DEU"
    base = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            exp, imp = TRADE_COUNTRIES[i], TRADE_COUNTRIES[j]
            if rng.random() < 0.18:
                base[(exp, imp)] = float(np.exp(rng.normal(8.0, 1.2)))  # ~3 kt median
        # guarantee hub corridors exist
    for imp in hubs_in:
        for exp in ("DEU", "FRA", "GBR", "NLD", "USA", "ITA"):
            if exp != imp:
                base[(exp, imp)] = float(np.exp(rng.normal(12.0, 0.4)))  # ~160 kt
    for imp in ("POL", "CZE", "AUT", "BEL"):
        base[(hub_out, imp)] = float(np.exp(rng.normal(11.0, 0.4)))

    for (exp, imp), flow in sorted(base.items()):
        code = SCRAP_CODES[int(rng.integers(len(SCRAP_CODES)))]
        for year in range(years[0], years[1] + 1):
            if rng.random() < 0.15:  # some years unobserved
                continue
            qty = flow * float(np.exp(rng.normal(0.0, 0.35)))
            rows.append(
                {
                    "t": year,
                    "i": exp,
                    "j": imp,
                    "k": code,
                    "v": round(qty * 0.35, 3),  # ~350 USD/tonne in kUSD
                    "q": round(qty, 3),
                }
            )
    # background noise in other commodities (filtered out by prefix)
    for _ in range(300):
        i, j = rng.choice(n, size=2, replace=False)
        rows.append(
            {
                "t": int(rng.integers(years[0], years[1] + 1)),
                "i": TRADE_COUNTRIES[i],
                "j": TRADE_COUNTRIES[j],
                "k": NOISE_CODES[int(rng.integers(len(NOISE_CODES)))],
                "v": round(float(np.exp(rng.normal(7.0, 1.0))), 3),
                "q": round(float(np.exp(rng.normal(8.0, 1.0))), 3),
            }
        )
    # deliberate data defects
    rows.append({"t": 2010, "i": "DEU", "j": "DEU", "k": "720410", "v": 1.0, "q": 10.0})
    rows.append({"t": 2012, "i": "FRA", "j": "ITA", "k": "720421", "v": 2.0, "q": "NA"})
    rows.append({"t": 1999, "i": "GBR", "j": "ESP", "k": "720449", "v": 3.0, "q": 5.0})
    return rows


# ---------------------------------------------------------------------------
# Firm registry fixture

# Countries that get a large matched population (>= 30 firms, so the
# extrapolation uses their own CDFs) vs small ones (pooled fallback).
LARGE_FIRM_COUNTRIES = ("DEU", "FRA", "GBR", "ITA", "POL", "ESP", "SWE")
SMALL_FIRM_COUNTRIES = ("AUT", "BEL", "CZE", "FIN", "HRV", "LUX", "ROU")

# Target industry-code mix for matched firms (share of coded firms).
NAICS_MIX = (("4239", 0.468), ("4235", 0.185), ("5629", 0.077), ("4246", 0.033), ("4231", 0.237))

_THEME_PHRASES = (
    (  # collection and processing of recovered metal
        "collection and recycling of scrap metal",
        "processing of ferrous scrap and metal waste",
        "operates a scrapyard for end of life vehicles",
        "shredding and sorting of mixed metal scrap",
        "recovery of secondary raw materials from industrial waste",
        "baling and shearing of heavy melting scrap",
    ),
    (  # trading and wholesale
        "wholesale of scrap metal and secondary steel products",
        "international trading of ferrous scrap cargoes",
        "brokerage of recycled metal between foundries and exporters",
        "purchase and sale of scrap iron copper and aluminium",
        "export of sorted scrap grades to overseas mills",
        "distribution of remelting scrap ingots",
    ),
    (  # dismantling and demolition services
        "demolition of industrial plants and recovery of structural steel",
        "dismantling of ships and railway equipment for scrap",
        "decommissioning services generating scrap metal streams",
        "salvage of obsolete machinery and equipment scrap",
        "site clearance with on site scrap segregation",
        "cutting and breaking of retired vessels",
    ),
)

_UNMATCHED_DESCRIPTIONS = (
    "manufacture of precision gears and industrial drives",
    "software development for logistics planning",
    "construction of skyscraper office towers",
    "web scraper development and data extraction services",
    "bakery products and confectionery manufacture",
    "retail sale of household furniture",
    "passenger transport by coach and bus",
    "dairy farming and milk processing",
)


def synthetic_registry_rows(seed: int = 0) -> list[dict]:
    """Firm registry rows with a controlled matched population.

    Matched firms get theme-mixed scrap descriptions, a fixed industry-code
    mix, and lognormal revenue/employees with correlated sizes; unmatched
    firms (including token-prefix decoys like "skyscraper" and excluded
    "scraper" tokens) dilute the registry.
    """
    rng = derive_rng(seed, "registry-fixture")
    rows: list[dict] = []
    firm_no = 0

    def add_matched(country: str) -> None:
        nonlocal firm_no
        firm_no += 1
        # latent size factor drives both revenue and employees (correlated)
        size = float(np.exp(rng.normal(0.0, 1.0)))
        revenue = round(6.0e6 * size * float(np.exp(rng.normal(0.0, 0.6))), 2)
        employees = max(1, int(round(22.0 * size * float(np.exp(rng.normal(0.0, 0.5))))))
        u = rng.random()
        acc = 0.0
        naics = ""
        for code, share in NAICS_MIX:
            acc += share
            if u < acc:
                naics = code
                break
        if rng.random() < 0.08:
            naics = ""  # missing industry code
        theme_weights = rng.dirichlet((0.4, 0.4, 0.4))
        n_phrases = int(rng.integers(2, 5))
        phrases = []
        for _ in range(n_phrases):
            theme = int(rng.choice(3, p=theme_weights))
            pool = _THEME_PHRASES[theme]
            phrases.append(pool[int(rng.integers(len(pool)))])
        overview = ". ".join(phrases).capitalize() + "."
        row = {
            "id": f"F{firm_no:05d}",
            "country": country,
            "naics4": naics,
            "revenue": "" if rng.random() < 0.12 else repr(revenue),
            "employees": "" if rng.random() < 0.10 else str(employees),
            "full overview": overview,
            "main products and services": phrases[0],
            "main activity": "",
            "primary business line": "",
        }
        rows.append(row)

    def add_unmatched(country: str) -> None:
        nonlocal firm_no
        firm_no += 1
        desc = _UNMATCHED_DESCRIPTIONS[int(rng.integers(len(_UNMATCHED_DESCRIPTIONS)))]
        rows.append(
            {
                "id": f"F{firm_no:05d}",
                "country": country,
                "naics4": "",
                "revenue": repr(round(3.0e6 * float(np.exp(rng.normal(0.0, 1.0))), 2)),
                "employees": str(max(1, int(rng.integers(1, 200)))),
                "full overview": desc,
                "main products and services": "",
                "main activity": desc,
                "primary business line": "",
            }
        )

    for country in LARGE_FIRM_COUNTRIES:
        for _ in range(int(rng.integers(45, 70))):
            add_matched(country)
        for _ in range(int(rng.integers(10, 20))):
            add_unmatched(country)
    for country in SMALL_FIRM_COUNTRIES:
        for _ in range(int(rng.integers(4, 16))):
            add_matched(country)
        for _ in range(int(rng.integers(3, 8))):
            add_unmatched(country)
    return rows


# ---------------------------------------------------------------------------
# Regression fixture

OBSERVATION_COUNTRIES = (
    "AUT", "BEL", "CZE", "DEU", "ESP", "FIN", "FRA", "GBR", "HRV", "ITA", "LUX", "POL", "ROU", "SWE",
)

# Generating coefficients in the canonical regressor order
# (exports, imports, n_firms, bof_capacity, revenue, employees).
GENERATING_COEFFICIENTS = (-0.00096, 0.0018, 79.0, 0.0, 0.0, 0.0)


def synthetic_observations(seed: int = 0, noise: float = 0.05) -> list[dict]:
    """14-country observation rows with capacity generated from the stated
    coefficients times (1 + noise). Firm counts, employment, and revenue are
    correlated but not collinear, and trade terms are kept small enough that
    generated capacity stays positive."""
    rng = derive_rng(seed, "observations-fixture")
    rows = []
    for country in OBSERVATION_COUNTRIES:
        n_firms = float(rng.integers(15, 650))
        exports = float(np.exp(rng.normal(12.6, 0.9)))  # ~3e5 t/yr median
        imports = float(np.exp(rng.normal(12.6, 0.9)))
        employees = n_firms * float(rng.uniform(10.0, 45.0))
        revenue = n_firms * float(rng.uniform(2.0e6, 1.4e7))
        bof = float(rng.uniform(0.0, 25000.0))
        x = (exports, imports, n_firms, bof, revenue, employees)
        capacity = sum(b * v for b, v in zip(GENERATING_COEFFICIENTS, x))
        capacity *= 1.0 + noise * float(rng.standard_normal())
        if capacity <= 0.0:
            capacity = abs(capacity) + 1.0
        rows.append(
            {
                "country": country,
                "eaf_capacity_kt_per_year": round(capacity, 3),
                "exports_t_per_year": round(exports, 1),
                "imports_t_per_year": round(imports, 1),
                "n_firms": int(n_firms),
                "employees": round(employees, 1),
                "revenue_usd_per_year": round(revenue, 2),
                "bof_capacity_kt_per_year": round(bof, 1),
            }
        )
    return rows


# ---------------------------------------------------------------------------
# Capacity plans (announced expansion pipeline, kt/yr, 14 European countries)

PLANNED_EAF_KT = (
    ("AUT", 2450.0),
    ("BEL", 2500.0),
    ("HRV", 220.0),
    ("CZE", 3500.0),
    ("FIN", 5100.0),
    ("FRA", 6500.0),
    ("DEU", 17600.0),
    ("ITA", 2500.0),
    ("LUX", 250.0),
    ("POL", 1000.0),
    ("ROU", 4100.0),
    ("ESP", 1700.0),
    ("SWE", 9200.0),
    ("GBR", 760.0),
)


def capacity_rows() -> list[dict]:
    return [{"country": c, "planned_eaf_kt_per_year": repr(v)} for c, v in PLANNED_EAF_KT]
