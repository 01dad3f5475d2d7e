"""Bulk ingestion: publication exports, mention streams, DOI linking.

Bulk exports are dirty; malformed rows never abort a run. Every parse
returns an :class:`IngestReport` whose counters reconcile exactly with the
number of rows read, so exclusions stay quantifiable.

Input formats:

* publications: UTF-8 TSV with header ``doi, title, year, source,
  categories``; categories separated by ``;``.
* mentions: UTF-8, one JSON object per line with keys ``mention_id,
  platform, actor_id, actor_name, actor_meta, doi, timestamp`` (RFC 3339
  timestamp).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator

from .errors import FileUnreadable, NotADoi
from .records import MentionRecord, PlatformKind, PublicationRecord
from .store import LinkedCorpus

_DOI_PREFIXES = (
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi:",
)

_DOI_SHAPE = re.compile(r"^10\.[^/\s]+/\S+$")

_PUB_HEADER = ["doi", "title", "year", "source", "categories"]


def normalize_doi(raw: str) -> str:
    """Canonicalize a DOI: strip resolver prefixes, trim, lowercase.

    Raises NotADoi when the residue does not match the ``10.*/*`` shape.
    Idempotent on every accepted value.
    """
    value = raw.strip()
    lowered = value.lower()
    for prefix in _DOI_PREFIXES:
        if lowered.startswith(prefix):
            value = value[len(prefix):]
            lowered = lowered[len(prefix):]
            break
    value = value.strip().lower()
    if not _DOI_SHAPE.match(value):
        raise NotADoi(f"not a DOI: {raw!r}")
    return value


@dataclass
class IngestReport:
    """Row accounting for one parse pass.

    Invariant: rows_read = rows_accepted + rows_without_doi + rows_malformed
    + duplicate_keys. ``rows_without_doi`` rows are retained for publication
    parsing (they keep denominators honest) but skipped for mentions.
    """

    rows_read: int = 0
    rows_accepted: int = 0
    rows_without_doi: int = 0
    rows_malformed: int = 0
    duplicate_keys: int = 0

    def reconciles(self) -> bool:
        return self.rows_read == (
            self.rows_accepted
            + self.rows_without_doi
            + self.rows_malformed
            + self.duplicate_keys
        )

    def as_dict(self) -> dict[str, int]:
        return {
            "rows_read": self.rows_read,
            "rows_accepted": self.rows_accepted,
            "rows_without_doi": self.rows_without_doi,
            "rows_malformed": self.rows_malformed,
            "duplicate_keys": self.duplicate_keys,
        }

    def as_text(self) -> str:
        """Flat key-value block for logs and report files."""
        return "\n".join(f"{k} = {v}" for k, v in self.as_dict().items())


def _iter_lines(source: str | Path | Iterable[str]) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            with path.open("r", encoding="utf-8") as fh:
                yield from fh
        except OSError as exc:
            raise FileUnreadable(f"cannot read {path}: {exc}") from exc
    else:
        yield from source


def parse_publications(
    source: str | Path | Iterable[str],
) -> tuple[list[PublicationRecord], IngestReport]:
    """Parse a publication TSV export.

    Rows lacking a parseable DOI are retained with ``doi=None`` and counted
    in ``rows_without_doi``; duplicate DOIs keep the first occurrence.
    """
    report = IngestReport()
    records: list[PublicationRecord] = []
    seen: set[str] = set()
    lines = _iter_lines(source)

    try:
        header_line = next(lines)
    except StopIteration:
        return records, report
    header = [c.strip() for c in header_line.rstrip("\n").split("\t")]
    if header != _PUB_HEADER:
        raise FileUnreadable(
            f"unexpected publications header: {header!r} (want {_PUB_HEADER!r})"
        )

    for line in lines:
        line = line.rstrip("\n")
        if not line:
            continue
        report.rows_read += 1
        cols = line.split("\t")
        if len(cols) != 5:
            report.rows_malformed += 1
            continue
        raw_doi, title, raw_year, src, raw_cats = cols
        try:
            year = int(raw_year.strip())
        except ValueError:
            report.rows_malformed += 1
            continue
        categories = {c.strip() for c in raw_cats.split(";") if c.strip()}
        try:
            doi = normalize_doi(raw_doi)
        except NotADoi:
            doi = None
        try:
            record = PublicationRecord(
                doi=doi, title=title, year=year, source=src.strip(),
                categories=categories,
            )
        except ValueError:
            report.rows_malformed += 1
            continue
        if doi is None:
            report.rows_without_doi += 1
            records.append(record)
            continue
        if doi in seen:
            report.duplicate_keys += 1
            continue
        seen.add(doi)
        report.rows_accepted += 1
        records.append(record)
    return records, report


def _parse_timestamp(raw: str) -> datetime:
    # RFC 3339; Python 3.10's fromisoformat does not accept a 'Z' suffix.
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


def parse_mentions(
    source: str | Path | Iterable[str],
) -> tuple[list[MentionRecord], IngestReport]:
    """Parse a newline-delimited mention stream.

    Unknown platform tokens, bad timestamps and other structural problems
    count as malformed and skip the line; records come back in file order.
    Duplicate mention_ids keep the first occurrence.
    """
    report = IngestReport()
    records: list[MentionRecord] = []
    seen_ids: set[str] = set()

    for line in _iter_lines(source):
        line = line.strip()
        if not line:
            continue
        report.rows_read += 1
        try:
            obj = json.loads(line)
            mention_id = str(obj["mention_id"])
            platform = PlatformKind.from_token(str(obj["platform"]))
            actor_id = str(obj["actor_id"])
            actor_name = str(obj.get("actor_name", actor_id))
            actor_meta = obj.get("actor_meta")
            if actor_meta is not None and not isinstance(actor_meta, dict):
                raise ValueError("actor_meta must be an object")
            timestamp = _parse_timestamp(str(obj["timestamp"]))
            raw_doi = str(obj["doi"])
        except Exception:
            report.rows_malformed += 1
            continue
        try:
            doi = normalize_doi(raw_doi)
        except NotADoi:
            report.rows_without_doi += 1
            continue
        if mention_id in seen_ids:
            report.duplicate_keys += 1
            continue
        try:
            record = MentionRecord(
                mention_id=mention_id, platform=platform, actor_id=actor_id,
                actor_name=actor_name, doi=doi, timestamp=timestamp,
                actor_meta=actor_meta,
            )
        except ValueError:
            report.rows_malformed += 1
            continue
        seen_ids.add(mention_id)
        report.rows_accepted += 1
        records.append(record)
    return records, report


def link_corpus(
    pubs: list[PublicationRecord], mentions: list[MentionRecord]
) -> LinkedCorpus:
    """Join mentions to publications on canonical DOI.

    Mentions whose DOI matches a DOI-bearing publication are linked;
    unmatched mentions are retained but flagged unlinked. Mismatches are
    data, not errors.
    """
    return LinkedCorpus(publications=list(pubs), mentions=list(mentions))
