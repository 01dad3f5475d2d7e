"""Title terms: extraction, binary counting, co-occurrence, clustering.

Noun phrases are approximated by stopword-delimited chunking: a title is
split into punctuation-bounded segments, segments break at stopwords (and
at numeric-only tokens), and every contiguous sub-phrase of a chunk up to
``max_phrase_len`` tokens is a candidate term. Counting is binary per
title: repeating a phrase inside one title never changes any count.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from pathlib import Path

import networkx as nx

from .community import ModularityParams, Partition, detect_communities

_WORD_RE = re.compile(r"[^\W_]+(?:['’-][^\W_]+)*")
_DIGITS_RE = re.compile(r"^\d+$")


def default_stopwords() -> frozenset[str]:
    text = (
        resources.files("mentionmap") / "data" / "stopwords_en.txt"
    ).read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One token per line, UTF-8; blank lines ignored."""
    words = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(w.strip().lower() for w in words if w.strip())


@dataclass
class TermConfig:
    """Extraction thresholds. ``min_occurrences=10`` suits real-scale
    corpora; use 1 for small fixtures."""

    min_occurrences: int = 10
    max_phrase_len: int = 3
    stopwords: frozenset[str] = field(default_factory=default_stopwords)

    def __post_init__(self) -> None:
        if self.min_occurrences < 1:
            raise ValueError("min_occurrences must be >= 1")
        if self.max_phrase_len < 1:
            raise ValueError("max_phrase_len must be >= 1")


@dataclass
class Term:
    surface: str
    doc_frequency: int


def _chunks(title: str, stopwords: frozenset[str]) -> list[list[str]]:
    """Stopword-free token runs; punctuation, stopwords and numeric-only
    tokens all end a run."""
    chunks: list[list[str]] = []
    current: list[str] = []
    pos = 0
    lowered = title.lower()
    for match in _WORD_RE.finditer(lowered):
        gap = lowered[pos:match.start()]
        token = match.group()
        if gap.strip():          # punctuation between tokens splits the run
            if current:
                chunks.append(current)
            current = []
        if token in stopwords or _DIGITS_RE.match(token):
            if current:
                chunks.append(current)
            current = []
        else:
            current.append(token)
        pos = match.end()
    if current:
        chunks.append(current)
    return chunks


def candidate_phrases(title: str, config: TermConfig) -> set[str]:
    """All contiguous sub-phrases (up to max_phrase_len tokens) of the
    title's chunks. A set: within-title repetition is invisible."""
    phrases: set[str] = set()
    for chunk in _chunks(title, config.stopwords):
        m = len(chunk)
        for i in range(m):
            for j in range(i + 1, min(i + config.max_phrase_len, m) + 1):
                phrases.add(" ".join(chunk[i:j]))
    return phrases


def title_contains(title: str, term: str, config: TermConfig) -> bool:
    return term in candidate_phrases(title, config)


def extract_terms(titles: list[str], config: TermConfig) -> list[Term]:
    """Binary document frequencies over the titles, thresholded."""
    counts: dict[str, int] = {}
    for title in titles:
        for phrase in candidate_phrases(title, config):
            counts[phrase] = counts.get(phrase, 0) + 1
    return [
        Term(surface=s, doc_frequency=c)
        for s, c in sorted(counts.items())
        if c >= config.min_occurrences
    ]


@dataclass
class CoOccurrence:
    """Binary-counted joint frequencies over a retained vocabulary.

    ``pairs`` maps each sorted term pair to the number of distinct titles
    containing both; the diagonal is implicitly zero.
    """

    terms: list[str]                       # sorted vocabulary
    occurrences: dict[str, int]            # term -> binary doc frequency
    pairs: dict[tuple[str, str], int]

    @property
    def total_pairs(self) -> int:
        return sum(self.pairs.values())


def build_cooccurrence(
    terms: list[Term], titles: list[str], config: TermConfig
) -> CoOccurrence:
    vocab = {t.surface for t in terms}
    occurrences = {t.surface: t.doc_frequency for t in terms}
    pairs: dict[tuple[str, str], int] = {}
    for title in titles:
        present = sorted(candidate_phrases(title, config) & vocab)
        for a, b in combinations(present, 2):
            pairs[(a, b)] = pairs.get((a, b), 0) + 1
    return CoOccurrence(
        terms=sorted(vocab), occurrences=occurrences, pairs=pairs
    )


def association_strength(co: CoOccurrence) -> dict[tuple[str, str], float]:
    """s_ij = c_ij / (w_i * w_j); zero pairs are simply absent."""
    return {
        (a, b): c / (co.occurrences[a] * co.occurrences[b])
        for (a, b), c in co.pairs.items()
        if c > 0
    }


def similarity_graph(co: CoOccurrence, weighting: str = "association") -> nx.Graph:
    """Weighted term graph for clustering (association | cooccurrence)."""
    G = nx.Graph()
    G.add_nodes_from(co.terms)
    if weighting == "association":
        for (a, b), s in association_strength(co).items():
            G.add_edge(a, b, weight=s)
    elif weighting == "cooccurrence":
        for (a, b), c in co.pairs.items():
            if c > 0:
                G.add_edge(a, b, weight=float(c))
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    return G


def cluster_map(
    co: CoOccurrence,
    params: ModularityParams,
    weighting: str = "association",
) -> Partition:
    """Communities of the term similarity graph."""
    return detect_communities(similarity_graph(co, weighting), params)


@dataclass
class TermMap:
    """The assembled map: vocabulary, counts, geometry and clusters."""

    config: TermConfig
    terms: list[str]
    doc_frequency: dict[str, int]
    term_docs: dict[str, tuple[str, ...]]       # term -> sorted supporting DOIs
    cooccurrence: CoOccurrence | None = None
    coordinates: dict[str, tuple[float, float]] | None = None
    layout_objective: float | None = None
    constraint_residual: float | None = None
    clusters: dict[str, int] | None = None


def build_term_map(corpus, config: TermConfig) -> TermMap:
    """Extract terms and co-occurrences from the mentioned publications."""
    pubs = corpus.mentioned_publications()
    titles = [p.title for p in pubs]
    terms = extract_terms(titles, config)
    co = build_cooccurrence(terms, titles, config)
    vocab = {t.surface for t in terms}
    term_docs: dict[str, list[str]] = {t.surface: [] for t in terms}
    for pub in pubs:
        for phrase in candidate_phrases(pub.title, config) & vocab:
            term_docs[phrase].append(pub.doi)
    return TermMap(
        config=config,
        terms=[t.surface for t in terms],
        doc_frequency={t.surface: t.doc_frequency for t in terms},
        term_docs={t: tuple(sorted(d)) for t, d in term_docs.items()},
        cooccurrence=co,
    )


def write_term_map_csv(tm: TermMap, path: str | Path) -> None:
    """CSV ``term,doc_frequency,x,y,cluster``; plottable and diffable."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["term", "doc_frequency", "x", "y", "cluster"])
        for term in tm.terms:
            x, y = (tm.coordinates or {}).get(term, (0.0, 0.0))
            cluster = (tm.clusters or {}).get(term, 0)
            writer.writerow(
                [term, tm.doc_frequency[term], f"{x:.9f}", f"{y:.9f}", cluster]
            )


def read_term_map_csv(path: str | Path, config: TermConfig | None = None) -> TermMap:
    """Rebuild a minimal TermMap (no co-occurrence, no supporting docs)."""
    coordinates: dict[str, tuple[float, float]] = {}
    clusters: dict[str, int] = {}
    doc_frequency: dict[str, int] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            term = row["term"]
            doc_frequency[term] = int(row["doc_frequency"])
            coordinates[term] = (float(row["x"]), float(row["y"]))
            clusters[term] = int(row["cluster"])
    return TermMap(
        config=config or TermConfig(min_occurrences=1),
        terms=sorted(doc_frequency),
        doc_frequency=doc_frequency,
        term_docs={},
        coordinates=coordinates,
        clusters=clusters,
    )


def attach_docs(tm: TermMap, corpus) -> None:
    """Recompute term -> supporting DOIs against a corpus (after CSV load)."""
    vocab = set(tm.terms)
    max_len = max((len(t.split()) for t in vocab), default=1)
    config = TermConfig(
        min_occurrences=1,
        max_phrase_len=max(max_len, tm.config.max_phrase_len),
        stopwords=tm.config.stopwords,
    )
    docs: dict[str, list[str]] = {t: [] for t in vocab}
    for pub in corpus.mentioned_publications():
        for phrase in candidate_phrases(pub.title, config) & vocab:
            docs[phrase].append(pub.doi)
    tm.term_docs = {t: tuple(sorted(d)) for t, d in docs.items()}
