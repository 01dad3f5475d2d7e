"""Everything layered on the base structures: per-platform overlay scores,
actor rankings, account classification with bot shares, and phrase-by-month
heatmaps.

All operations are pure functions over the immutable corpus/term map.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyRange, MalformedLabelFile, UnknownPlatform
from .records import PlatformKind
from .store import LinkedCorpus
from .terms import TermMap

ACCOUNT_TYPES = frozenset(
    {"bot", "academic", "journal", "press", "professional", "company",
     "physician", "unknown"}
)

#: Bot heuristics are suggestive, never authoritative: a papers-feed name,
#: a broadcast profile (barely follows anyone, posts in bulk), or a heavy
#: repeat-mention ratio.
BOT_NAME_SUFFIX = "papers"
BOT_MAX_FOLLOWING = 15
BOT_MIN_LIFETIME_POSTS = 10000
REPEAT_HEAVY_RATIO = 50.0


def to_platform(platform: PlatformKind | str) -> PlatformKind:
    if isinstance(platform, PlatformKind):
        return platform
    try:
        return PlatformKind(platform)
    except ValueError:
        raise UnknownPlatform(f"unknown platform token: {platform!r}") from None


def _platform_paper_counts(corpus: LinkedCorpus, platform: PlatformKind) -> dict[str, int]:
    """doi -> linked mention count on the platform."""
    counts: dict[str, int] = {}
    for i, mention in enumerate(corpus.mentions):
        if corpus.is_linked(i) and mention.platform == platform:
            counts[mention.doi] = counts.get(mention.doi, 0) + 1
    return counts


# ---------------------------------------------------------------------------
# Overlay scores (platform intensity on the term map)
# ---------------------------------------------------------------------------

@dataclass
class OverlayScore:
    term: str
    value: float      # mean (or sum) of the platform's mentions per paper
    support: int      # number of supporting publications


def overlay_scores(
    termmap: TermMap,
    corpus: LinkedCorpus,
    platform: PlatformKind | str,
    statistic: str = "mean",
) -> list[OverlayScore]:
    """Per term: platform mention intensity over the distinct publications
    whose titles contain it. Supporting papers with zero mentions on this
    platform still count toward the mean. Terms without support are omitted.
    """
    platform = to_platform(platform)
    if statistic not in ("mean", "sum"):
        raise ValueError(f"statistic must be 'mean' or 'sum', got {statistic!r}")
    counts = _platform_paper_counts(corpus, platform)
    scores: list[OverlayScore] = []
    for term in termmap.terms:
        docs = termmap.term_docs.get(term, ())
        support = len(docs)
        if support == 0:
            continue
        total = sum(counts.get(doi, 0) for doi in docs)
        value = total / support if statistic == "mean" else float(total)
        scores.append(OverlayScore(term=term, value=value, support=support))
    return scores


def write_overlay_csv(scores: list[OverlayScore], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["term", "value", "support"])
        for s in scores:
            writer.writerow([s.term, f"{s.value:.9g}", s.support])


def read_overlay_csv(path: str | Path) -> dict[str, float]:
    values: dict[str, float] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            values[row["term"]] = float(row["value"])
    return values


# ---------------------------------------------------------------------------
# Actor rankings
# ---------------------------------------------------------------------------

@dataclass
class RankedActor:
    actor_id: str
    display_name: str
    platform_class: str
    distinct_papers: int
    total_mentions: int
    repeat_ratio: float
    repeat_heavy: bool


@dataclass
class ActorRanking:
    platform_class: str
    rows: list[RankedActor]


def top_actors(corpus: LinkedCorpus, platform_class: str, n: int) -> ActorRanking:
    """Busiest actors of a class: total mentions descending, ties by
    distinct papers (desc) then actor id. Rows whose mentions-per-paper
    ratio reaches REPEAT_HEAVY_RATIO are flagged repeat-heavy."""
    rows: list[RankedActor] = []
    for (cls, actor_id), idxs in corpus.actor_index().items():
        if cls != platform_class:
            continue
        mentions = [corpus.mentions[i] for i in idxs]
        distinct = len({m.doi for m in mentions})
        total = len(mentions)
        ratio = total / distinct if distinct else 0.0
        rows.append(
            RankedActor(
                actor_id=actor_id,
                display_name=mentions[0].actor_name,
                platform_class=cls,
                distinct_papers=distinct,
                total_mentions=total,
                repeat_ratio=ratio,
                repeat_heavy=ratio >= REPEAT_HEAVY_RATIO,
            )
        )
    rows.sort(key=lambda r: (-r.total_mentions, -r.distinct_papers, r.actor_id))
    return ActorRanking(platform_class=platform_class, rows=rows[:n])


def write_ranking_csv(ranking: ActorRanking, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["rank", "actor_id", "name", "class", "distinct_papers",
             "total_mentions", "repeat_ratio", "repeat_heavy"]
        )
        for i, r in enumerate(ranking.rows, start=1):
            writer.writerow(
                [i, r.actor_id, r.display_name, r.platform_class,
                 r.distinct_papers, r.total_mentions, f"{r.repeat_ratio:.9g}",
                 int(r.repeat_heavy)]
            )


def ranking_table(ranking: ActorRanking) -> str:
    """Aligned text table for terminals."""
    header = ["#", "actor", "papers", "mentions", "ratio"]
    rows = [
        [str(i), r.display_name, str(r.distinct_papers),
         str(r.total_mentions), f"{r.repeat_ratio:.1f}" + ("*" if r.repeat_heavy else "")]
        for i, r in enumerate(ranking.rows, start=1)
    ]
    widths = [max(len(h), *(len(r[c]) for r in rows)) if rows else len(h)
              for c, h in enumerate(header)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header)]
    lines += [fmt.format(*r) for r in rows]
    if any(r.repeat_heavy for r in ranking.rows):
        lines.append("* repeat-heavy (mentions/papers >= "
                     f"{REPEAT_HEAVY_RATIO:g})")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Account classification and bot shares
# ---------------------------------------------------------------------------

@dataclass
class AccountLabel:
    actor_id: str
    type: str         # one of ACCOUNT_TYPES
    source: str       # manual | heuristic


def read_manual_labels(path: str | Path) -> dict[str, str]:
    """CSV ``actor_id,type``; a leading header row is tolerated."""
    labels: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise MalformedLabelFile(f"cannot read label file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        cols = [c.strip() for c in line.split(",")]
        if lineno == 1 and cols == ["actor_id", "type"]:
            continue
        if len(cols) != 2:
            raise MalformedLabelFile(f"line {lineno}: expected 2 columns")
        actor_id, kind = cols
        if kind not in ACCOUNT_TYPES:
            raise MalformedLabelFile(f"line {lineno}: unknown type {kind!r}")
        labels[actor_id] = kind
    return labels


def _heuristic_type(
    name: str, following: int | None, lifetime_posts: int | None, ratio: float
) -> str:
    if name.lower().endswith(BOT_NAME_SUFFIX):
        return "bot"
    if (
        following is not None
        and lifetime_posts is not None
        and following <= BOT_MAX_FOLLOWING
        and lifetime_posts >= BOT_MIN_LIFETIME_POSTS
    ):
        return "bot"
    if ratio >= REPEAT_HEAVY_RATIO:
        return "bot"
    return "unknown"


def classify_accounts(
    corpus: LinkedCorpus,
    manual_labels: str | Path | dict[str, str] | None = None,
    heuristics_enabled: bool = True,
) -> list[AccountLabel]:
    """Exactly one label per distinct actor id; manual labels always win,
    heuristics fill the gaps, everything else is unknown."""
    if manual_labels is None:
        manual: dict[str, str] = {}
    elif isinstance(manual_labels, dict):
        manual = dict(manual_labels)
    else:
        manual = read_manual_labels(manual_labels)

    info: dict[str, dict] = {}
    for (cls, actor_id), idxs in corpus.actor_index().items():
        entry = info.setdefault(
            actor_id,
            {"name": corpus.mentions[idxs[0]].actor_name, "following": None,
             "posts": None, "tweets": 0, "tweet_dois": set()},
        )
        for i in idxs:
            mention = corpus.mentions[i]
            if mention.platform == PlatformKind.TWEET:
                entry["tweets"] += 1
                entry["tweet_dois"].add(mention.doi)
                meta = mention.actor_meta or {}
                if entry["following"] is None and "following_count" in meta:
                    entry["following"] = int(meta["following_count"])
                if entry["posts"] is None and "lifetime_post_count" in meta:
                    entry["posts"] = int(meta["lifetime_post_count"])

    labels: list[AccountLabel] = []
    for actor_id in sorted(info):
        if actor_id in manual:
            labels.append(
                AccountLabel(actor_id=actor_id, type=manual[actor_id], source="manual")
            )
            continue
        entry = info[actor_id]
        if heuristics_enabled:
            ratio = (
                entry["tweets"] / len(entry["tweet_dois"])
                if entry["tweet_dois"] else 0.0
            )
            kind = _heuristic_type(
                entry["name"], entry["following"], entry["posts"], ratio
            )
        else:
            kind = "unknown"
        labels.append(AccountLabel(actor_id=actor_id, type=kind, source="heuristic"))
    return labels


def bot_share(
    corpus: LinkedCorpus,
    labels: list[AccountLabel],
    scope: set[str] | None = None,
) -> tuple[float, float]:
    """(percent of all tweets by bot-labeled actors in scope, percent of
    all distinct tweeted papers those bots reached)."""
    bot_ids = {l.actor_id for l in labels if l.type == "bot"}
    if scope is not None:
        bot_ids &= set(scope)
    total_tweets = 0
    tweeted_papers: set[str] = set()
    bot_tweets = 0
    bot_papers: set[str] = set()
    for i, mention in enumerate(corpus.mentions):
        if not corpus.is_linked(i) or mention.platform != PlatformKind.TWEET:
            continue
        total_tweets += 1
        tweeted_papers.add(mention.doi)
        if mention.actor_id in bot_ids:
            bot_tweets += 1
            bot_papers.add(mention.doi)
    tweet_share = 100.0 * bot_tweets / total_tweets if total_tweets else 0.0
    paper_share = (
        100.0 * len(bot_papers) / len(tweeted_papers) if tweeted_papers else 0.0
    )
    return tweet_share, paper_share


# ---------------------------------------------------------------------------
# Phrase-by-month heatmaps
# ---------------------------------------------------------------------------

@dataclass
class PhraseHeatmap:
    platform: PlatformKind
    phrases: list[str]                    # ranked row order
    months: list[str]                     # ascending calendar months
    cells: dict[tuple[str, str], int]
    row_totals: dict[str, int]
    cell_mode: str                        # papers | mentions


def _month_span(start: str, end: str) -> list[str]:
    y0, m0 = (int(p) for p in start.split("-"))
    y1, m1 = (int(p) for p in end.split("-"))
    if (y0, m0) > (y1, m1):
        raise EmptyRange(f"empty month range {start}..{end}")
    months = []
    y, m = y0, m0
    while (y, m) <= (y1, m1):
        months.append(f"{y:04d}-{m:02d}")
        m += 1
        if m > 12:
            y, m = y + 1, 1
    return months


def noun_phrase_heatmap(
    corpus: LinkedCorpus,
    termmap: TermMap,
    platform: PlatformKind | str,
    top_n: int,
    date_range: tuple[str, str] | None = None,
    cell_mode: str = "papers",
) -> PhraseHeatmap:
    """Rows: top_n phrases by row total; columns: calendar months. A cell
    counts distinct linked papers containing the phrase with at least one
    platform mention that month (or raw mentions with cell_mode='mentions').
    """
    platform = to_platform(platform)
    if cell_mode not in ("papers", "mentions"):
        raise ValueError(f"cell_mode must be 'papers' or 'mentions', got {cell_mode!r}")

    month_doi_counts: dict[str, dict[str, int]] = {}
    for i, mention in enumerate(corpus.mentions):
        if not corpus.is_linked(i) or mention.platform != platform:
            continue
        bucket = month_doi_counts.setdefault(mention.month, {})
        bucket[mention.doi] = bucket.get(mention.doi, 0) + 1

    if date_range is None:
        if not month_doi_counts:
            raise EmptyRange("no mentions to derive a date range from")
        observed = sorted(month_doi_counts)
        months = _month_span(observed[0], observed[-1])
    else:
        months = _month_span(date_range[0], date_range[1])

    cells: dict[tuple[str, str], int] = {}
    totals: dict[str, int] = {}
    for phrase in termmap.terms:
        docs = set(termmap.term_docs.get(phrase, ()))
        total = 0
        for month in months:
            bucket = month_doi_counts.get(month, {})
            if cell_mode == "papers":
                count = sum(1 for doi in docs if doi in bucket)
            else:
                count = sum(bucket.get(doi, 0) for doi in docs)
            cells[(phrase, month)] = count
            total += count
        totals[phrase] = total
    ranked = sorted(termmap.terms, key=lambda p: (-totals[p], p))[:top_n]
    return PhraseHeatmap(
        platform=platform,
        phrases=ranked,
        months=months,
        cells={(p, m): cells[(p, m)] for p in ranked for m in months},
        row_totals={p: totals[p] for p in ranked},
        cell_mode=cell_mode,
    )


def write_heatmap_csv(hm: PhraseHeatmap, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["phrase", "total", *hm.months])
        for phrase in hm.phrases:
            writer.writerow(
                [phrase, hm.row_totals[phrase]]
                + [hm.cells[(phrase, m)] for m in hm.months]
            )
