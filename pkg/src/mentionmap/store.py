"""Linked corpus container, descriptive statistics and snapshots.

The corpus is immutable after construction: any number of readers may share
it. The snapshot format is a versioned, checksummed single file so the
expensive publication-mention join is paid once and reloaded in seconds.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .errors import SnapshotCorrupt, VersionMismatch
from .records import (
    MentionRecord,
    PlatformKind,
    PublicationRecord,
    platform_class,
)

SNAPSHOT_MAGIC = "#mentionmap-snapshot"
SNAPSHOT_VERSION = 1


def display_share(count: int, total: int) -> float:
    """Percentage rounded half-up to one decimal, exact over the rationals.

    Rounding is done in decimal arithmetic so table cells are reproducible
    from the printed counts alone.
    """
    if total == 0:
        return 0.0
    cell = (Decimal(count) * 100) / Decimal(total)
    return float(cell.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def exact_share(count: int, total: int) -> float:
    """Unrounded percentage; 0.0 for an empty denominator."""
    if total == 0:
        return 0.0
    return 100.0 * count / total


class LinkedCorpus:
    """Publications and mentions joined on DOI.

    ``mentions`` keeps file order; each mention is linked iff its DOI
    matches a DOI-bearing publication. The actor index is derived purely
    from the mention list (see :meth:`rebuild_actor_index`).
    """

    def __init__(
        self,
        publications: list[PublicationRecord],
        mentions: list[MentionRecord],
    ) -> None:
        self.publications = publications
        self.mentions = mentions
        self._doi_index: dict[str, int] = {}
        for i, pub in enumerate(publications):
            if pub.doi is not None and pub.doi not in self._doi_index:
                self._doi_index[pub.doi] = i
        self._linked = [m.doi in self._doi_index for m in mentions]
        self._actor_index: dict[tuple[str, str], list[int]] | None = None

    # -- linking ---------------------------------------------------------

    def is_linked(self, i: int) -> bool:
        return self._linked[i]

    def linked_mentions(self) -> list[MentionRecord]:
        return [m for m, ok in zip(self.mentions, self._linked) if ok]

    @property
    def linked_count(self) -> int:
        return sum(self._linked)

    @property
    def unlinked_count(self) -> int:
        return len(self.mentions) - self.linked_count

    def publication_for(self, doi: str) -> PublicationRecord:
        return self.publications[self._doi_index[doi]]

    def has_doi(self, doi: str) -> bool:
        return doi in self._doi_index

    def distinct_mentioned_dois(self) -> set[str]:
        return {m.doi for m, ok in zip(self.mentions, self._linked) if ok}

    def mentioned_publications(self) -> list[PublicationRecord]:
        """Publications with at least one linked mention, in DOI order."""
        return [self.publication_for(d) for d in sorted(self.distinct_mentioned_dois())]

    # -- actor index -----------------------------------------------------

    def actor_index(self) -> dict[tuple[str, str], list[int]]:
        """(platform_class, actor_id) -> indices of that actor's linked mentions."""
        if self._actor_index is None:
            self._actor_index = self.rebuild_actor_index()
        return self._actor_index

    def rebuild_actor_index(self) -> dict[tuple[str, str], list[int]]:
        index: dict[tuple[str, str], list[int]] = {}
        for i, mention in enumerate(self.mentions):
            if not self._linked[i]:
                continue
            key = (platform_class(mention.platform), mention.actor_id)
            index.setdefault(key, []).append(i)
        return index


@dataclass
class PlatformRow:
    platform: PlatformKind
    mention_count: int
    mention_share: float          # display-rounded, one decimal
    mention_share_exact: float
    mentioned_paper_count: int
    mentioned_paper_share: float  # display-rounded, one decimal
    mentioned_paper_share_exact: float


@dataclass
class PlatformStats:
    """Per-platform mention and paper counts with display shares.

    Mention shares use the linked-mention total as denominator; paper
    shares use the distinct-mentioned-papers total (they need not sum to
    100 because a paper can appear under several platforms).
    """

    rows: dict[PlatformKind, PlatformRow]
    total_mentions: int
    total_distinct_papers: int

    def row(self, platform: PlatformKind) -> PlatformRow:
        return self.rows[platform]

    def ordered_rows(self) -> list[PlatformRow]:
        """Rows by descending mention count, ties by platform token."""
        return sorted(
            self.rows.values(),
            key=lambda r: (-r.mention_count, r.platform.value),
        )


def platform_stats(corpus: LinkedCorpus) -> PlatformStats:
    """Descriptive statistics of linked mentions per platform."""
    mention_counts = {p: 0 for p in PlatformKind}
    papers: dict[PlatformKind, set[str]] = {p: set() for p in PlatformKind}
    for i, mention in enumerate(corpus.mentions):
        if not corpus.is_linked(i):
            continue
        mention_counts[mention.platform] += 1
        papers[mention.platform].add(mention.doi)
    total = sum(mention_counts.values())
    distinct_total = len(set().union(*papers.values())) if total else 0
    rows = {}
    for platform in PlatformKind:
        mc = mention_counts[platform]
        pc = len(papers[platform])
        rows[platform] = PlatformRow(
            platform=platform,
            mention_count=mc,
            mention_share=display_share(mc, total),
            mention_share_exact=exact_share(mc, total),
            mentioned_paper_count=pc,
            mentioned_paper_share=display_share(pc, distinct_total),
            mentioned_paper_share_exact=exact_share(pc, distinct_total),
        )
    return PlatformStats(
        rows=rows, total_mentions=total, total_distinct_papers=distinct_total
    )


@dataclass
class CoverageReport:
    """Corpus coverage: DOI availability and mention reach."""

    total_publications: int
    publications_with_doi: int
    doi_share: float          # percent of all publications, display-rounded
    distinct_mentioned: int
    mentioned_share: float    # percent of DOI-bearing publications


def coverage_stats(corpus: LinkedCorpus) -> CoverageReport:
    total = len(corpus.publications)
    with_doi = sum(1 for p in corpus.publications if p.doi is not None)
    mentioned = len(corpus.distinct_mentioned_dois())
    return CoverageReport(
        total_publications=total,
        publications_with_doi=with_doi,
        doi_share=display_share(with_doi, total),
        distinct_mentioned=mentioned,
        mentioned_share=display_share(mentioned, with_doi),
    )


# -- snapshot persistence ------------------------------------------------

def _pub_to_json(pub: PublicationRecord) -> str:
    return json.dumps(
        {
            "kind": "pub",
            "doi": pub.doi,
            "title": pub.title,
            "year": pub.year,
            "source": pub.source,
            "categories": sorted(pub.categories),
        },
        ensure_ascii=False,
        sort_keys=True,
        separators=(",", ":"),
    )


def _mention_to_json(m: MentionRecord) -> str:
    return json.dumps(
        {
            "kind": "mention",
            "mention_id": m.mention_id,
            "platform": m.platform.value,
            "actor_id": m.actor_id,
            "actor_name": m.actor_name,
            "actor_meta": m.actor_meta,
            "doi": m.doi,
            "timestamp": m.timestamp.isoformat(),
        },
        ensure_ascii=False,
        sort_keys=True,
        separators=(",", ":"),
    )


def save_snapshot(corpus: LinkedCorpus, path: str | Path) -> None:
    """Write the corpus as a versioned, checksummed single file.

    The payload is the canonical record serialization, so saving a reloaded
    snapshot reproduces the file byte for byte.
    """
    lines = [_pub_to_json(p) for p in corpus.publications]
    lines += [_mention_to_json(m) for m in corpus.mentions]
    payload = "".join(line + "\n" for line in lines)
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{SNAPSHOT_MAGIC} v{SNAPSHOT_VERSION}\n")
        fh.write(payload)
        fh.write(f"#sha256 {digest}\n")


def load_snapshot(path: str | Path) -> LinkedCorpus:
    """Reload a snapshot; linking is recomputed deterministically."""
    from datetime import datetime

    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SnapshotCorrupt(f"cannot read snapshot {path}: {exc}") from exc
    lines = text.split("\n")
    if not lines or not lines[0].startswith(SNAPSHOT_MAGIC):
        raise SnapshotCorrupt("missing snapshot magic header")
    version_token = lines[0][len(SNAPSHOT_MAGIC):].strip()
    if version_token != f"v{SNAPSHOT_VERSION}":
        raise VersionMismatch(f"unsupported snapshot version: {version_token!r}")
    if len(lines) < 2 or not lines[-2].startswith("#sha256 "):
        raise SnapshotCorrupt("missing checksum trailer (truncated snapshot?)")
    expected = lines[-2][len("#sha256 "):].strip()
    payload = "".join(line + "\n" for line in lines[1:-2])
    digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
    if digest != expected:
        raise SnapshotCorrupt("snapshot checksum mismatch")

    publications: list[PublicationRecord] = []
    mentions: list[MentionRecord] = []
    for line in lines[1:-2]:
        try:
            obj = json.loads(line)
            if obj["kind"] == "pub":
                publications.append(
                    PublicationRecord(
                        doi=obj["doi"],
                        title=obj["title"],
                        year=obj["year"],
                        source=obj["source"],
                        categories=set(obj["categories"]),
                    )
                )
            elif obj["kind"] == "mention":
                mentions.append(
                    MentionRecord(
                        mention_id=obj["mention_id"],
                        platform=PlatformKind(obj["platform"]),
                        actor_id=obj["actor_id"],
                        actor_name=obj["actor_name"],
                        actor_meta=obj["actor_meta"],
                        doi=obj["doi"],
                        timestamp=datetime.fromisoformat(obj["timestamp"]),
                    )
                )
            else:
                raise ValueError(f"unknown record kind {obj['kind']!r}")
        except SnapshotCorrupt:
            raise
        except Exception as exc:
            raise SnapshotCorrupt(f"bad snapshot record: {exc}") from exc
    return LinkedCorpus(publications=publications, mentions=mentions)
