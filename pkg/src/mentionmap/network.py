"""The weighted two-mode publication-actor graph and its derivatives.

Node identity: papers are their canonical DOI; actors are
``"<class>:<actor_id>"`` where the class is twitter/news/policy for the
three deep-dive platforms and the platform token otherwise, so the same
organization acting in two roles is two nodes. Edge weight is the raw
mention count (an actor can mention the same paper repeatedly).

Tie-breaking is by ascending identifier everywhere, for bit-reproducible
outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import networkx as nx

from .errors import EmptySelection, InvalidFraction
from .records import PlatformKind, platform_class
from .store import LinkedCorpus

PAPER_KIND = "paper"


@dataclass
class AttentionGraph:
    """Bipartite attention graph wrapper around a networkx Graph.

    Paper nodes carry ``kind="paper"``; actor nodes carry their platform
    class as kind. Strictly bipartite by construction.
    """

    graph: nx.Graph
    platforms: frozenset[PlatformKind]

    @property
    def paper_nodes(self) -> list[str]:
        return sorted(
            v for v, d in self.graph.nodes(data=True) if d["kind"] == PAPER_KIND
        )

    @property
    def actor_nodes(self) -> list[str]:
        return sorted(
            v for v, d in self.graph.nodes(data=True) if d["kind"] != PAPER_KIND
        )

    def actor_nodes_of_class(self, cls: str) -> list[str]:
        return sorted(
            v for v, d in self.graph.nodes(data=True) if d["kind"] == cls
        )

    @property
    def total_weight(self) -> int:
        return sum(d["weight"] for _, _, d in self.graph.edges(data=True))

    def node_kind(self, node: str) -> str:
        return self.graph.nodes[node]["kind"]

    def is_bipartite_consistent(self) -> bool:
        """Every edge joins a paper to an actor."""
        for u, v in self.graph.edges():
            kinds = {self.node_kind(u) == PAPER_KIND, self.node_kind(v) == PAPER_KIND}
            if kinds != {True, False}:
                return False
        return True

    def class_node_share(self) -> dict[str, float]:
        """Share of all nodes per kind (papers included under 'paper')."""
        total = self.graph.number_of_nodes()
        shares: dict[str, float] = {}
        for _, d in self.graph.nodes(data=True):
            shares[d["kind"]] = shares.get(d["kind"], 0.0) + 1.0
        return {k: v / total for k, v in shares.items()} if total else {}

    def class_link_share(self) -> dict[str, tuple[float, float]]:
        """Per actor class: (share of edges, share of mention weight).

        Both denominators are reported because "share of links" is
        ambiguous between distinct edges and repeated mentions.
        """
        edge_counts: dict[str, int] = {}
        weight_sums: dict[str, int] = {}
        total_edges = 0
        total_weight = 0
        for u, v, d in self.graph.edges(data=True):
            kind = self.node_kind(u) if self.node_kind(u) != PAPER_KIND else self.node_kind(v)
            edge_counts[kind] = edge_counts.get(kind, 0) + 1
            weight_sums[kind] = weight_sums.get(kind, 0) + d["weight"]
            total_edges += 1
            total_weight += d["weight"]
        return {
            kind: (
                edge_counts[kind] / total_edges if total_edges else 0.0,
                weight_sums[kind] / total_weight if total_weight else 0.0,
            )
            for kind in sorted(edge_counts)
        }


def actor_node_id(platform: PlatformKind, actor_id: str) -> str:
    return f"{platform_class(platform)}:{actor_id}"


def build_graph(
    corpus: LinkedCorpus, platforms: set[PlatformKind]
) -> AttentionGraph:
    """One actor node per (class, actor_id); edge weight = linked mention
    count between the pair. Only papers touched by the selection appear."""
    if not platforms:
        raise EmptySelection("platform selection is empty")
    weights: dict[tuple[str, str], int] = {}
    actor_names: dict[str, str] = {}
    actor_kinds: dict[str, str] = {}
    for i, mention in enumerate(corpus.mentions):
        if mention.platform not in platforms or not corpus.is_linked(i):
            continue
        actor = actor_node_id(mention.platform, mention.actor_id)
        weights[(actor, mention.doi)] = weights.get((actor, mention.doi), 0) + 1
        actor_names.setdefault(actor, mention.actor_name)
        actor_kinds.setdefault(actor, platform_class(mention.platform))

    G = nx.Graph()
    papers = sorted({doi for _, doi in weights})
    for doi in papers:
        title = corpus.publication_for(doi).title
        G.add_node(doi, kind=PAPER_KIND, label=title)
    for actor in sorted(actor_names):
        G.add_node(actor, kind=actor_kinds[actor], label=actor_names[actor])
    for (actor, doi) in sorted(weights):
        G.add_edge(actor, doi, weight=weights[(actor, doi)])
    return AttentionGraph(graph=G, platforms=frozenset(platforms))


@dataclass
class ActorDistribution:
    """How many distinct papers each actor of one class mentions."""

    histogram: dict[int, int]            # distinct-paper count -> actors
    mean: float | None
    standard_deviation: float | None     # population SD
    total_actors: int

    def share(self, k: int) -> float:
        if self.total_actors == 0:
            return 0.0
        return 100.0 * self.histogram.get(k, 0) / self.total_actors


def actor_distribution(graph: AttentionGraph, cls: str) -> ActorDistribution:
    """Distribution of distinct papers mentioned per actor of a class."""
    counts = [graph.graph.degree(a) for a in graph.actor_nodes_of_class(cls)]
    histogram: dict[int, int] = {}
    for c in counts:
        histogram[c] = histogram.get(c, 0) + 1
    total = len(counts)
    if total == 0:
        return ActorDistribution(histogram={}, mean=None,
                                 standard_deviation=None, total_actors=0)
    mean = sum(counts) / total
    variance = sum((c - mean) ** 2 for c in counts) / total
    return ActorDistribution(
        histogram=histogram, mean=mean,
        standard_deviation=math.sqrt(variance), total_actors=total,
    )


def select_display_nodes(graph: AttentionGraph, fraction: float) -> list[str]:
    """Top ceil(fraction * |V|) nodes by weighted degree, ties by id.

    This selection stage is monotone in the fraction; the component
    restriction applied afterwards by :func:`filter_for_display` is not
    guaranteed to be.
    """
    if not 0.0 < fraction <= 1.0:
        raise InvalidFraction(f"fraction must be in (0, 1], got {fraction}")
    G = graph.graph
    keep = math.ceil(fraction * G.number_of_nodes())
    ranked = sorted(
        G.nodes(), key=lambda v: (-G.degree(v, weight="weight"), v)
    )
    return ranked[:keep]


def filter_for_display(graph: AttentionGraph, fraction: float) -> AttentionGraph:
    """Subgraph induced by the top weighted-degree nodes, restricted to its
    largest connected component (component ties broken by smallest id)."""
    selected = select_display_nodes(graph, fraction)
    sub = graph.graph.subgraph(selected)
    if sub.number_of_nodes() == 0:
        return AttentionGraph(graph=nx.Graph(), platforms=graph.platforms)
    components = sorted(
        nx.connected_components(sub), key=lambda c: (-len(c), min(c))
    )
    core = sub.subgraph(components[0]).copy()
    return AttentionGraph(graph=core, platforms=graph.platforms)


def project_comention(graph: AttentionGraph, side: str) -> nx.Graph:
    """Unipartite projection: same-side nodes linked by the number of
    shared opposite-side neighbors (unweighted overlap count)."""
    if side == "papers":
        nodes = graph.paper_nodes
    elif side == "actors":
        nodes = graph.actor_nodes
    else:
        raise ValueError(f"side must be 'papers' or 'actors', got {side!r}")
    G = graph.graph
    proj = nx.Graph()
    proj.add_nodes_from(nodes)
    node_set = set(nodes)
    for other in sorted(set(G.nodes()) - node_set):
        neighbors = sorted(n for n in G.neighbors(other) if n in node_set)
        for i, u in enumerate(neighbors):
            for v in neighbors[i + 1:]:
                w = proj.get_edge_data(u, v, default={"weight": 0})["weight"]
                proj.add_edge(u, v, weight=w + 1)
    return proj


# -- serialization ---------------------------------------------------------

def export_graph(graph: AttentionGraph, fmt: str, path: str | Path) -> None:
    """Write graphml (kind/label/weight attributes) or a tab-separated
    edge list (kind recoverable from node ids)."""
    path = Path(path)
    if fmt == "graphml":
        nx.write_graphml(graph.graph, path, named_key_ids=True)
    elif fmt == "edgelist":
        lines = ["source\ttarget\tweight"]
        for u, v, d in sorted(graph.graph.edges(data=True)):
            lines.append(f"{u}\t{v}\t{d['weight']}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown export format {fmt!r}")


def _kind_from_node_id(node: str) -> str:
    if ":" in node and not node.startswith("10."):
        return node.split(":", 1)[0]
    return PAPER_KIND


def import_graph(path: str | Path, platforms=frozenset()) -> AttentionGraph:
    """Inverse of export_graph; format sniffed from the file."""
    path = Path(path)
    if path.suffix == ".graphml":
        G = nx.read_graphml(path)
        H = nx.Graph()
        for v, d in G.nodes(data=True):
            H.add_node(
                v,
                kind=d.get("kind", _kind_from_node_id(v)),
                label=d.get("label", v),
            )
        for u, v, d in G.edges(data=True):
            H.add_edge(u, v, weight=int(d.get("weight", 1)))
        return AttentionGraph(graph=H, platforms=frozenset(platforms))
    G = nx.Graph()
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline()
        if header.strip() != "source\ttarget\tweight":
            raise ValueError(f"unrecognized edge list header in {path}")
        for line in fh:
            if not line.strip():
                continue
            u, v, w = line.rstrip("\n").split("\t")
            for node in (u, v):
                if node not in G:
                    G.add_node(node, kind=_kind_from_node_id(node), label=node)
            G.add_edge(u, v, weight=int(w))
    return AttentionGraph(graph=G, platforms=frozenset(platforms))
