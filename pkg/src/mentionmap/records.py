"""Canonical record types shared across the pipeline.

Every ingestion source must produce these types; downstream modules never
look at raw file rows. ``PlatformKind`` is a closed enumeration: no other
platform token is constructible, unknown tokens are rejected at parse time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import UnknownPlatform


class PlatformKind(enum.Enum):
    """The 16 canonical mention platforms."""

    TWEET = "tweet"
    NEWS_STORY = "news_story"
    FACEBOOK_POST = "facebook_post"
    BLOG_POST = "blog_post"
    PATENT = "patent"
    GOOGLEPLUS_POST = "googleplus_post"
    WIKIPEDIA_PAGE = "wikipedia_page"
    POLICY_DOCUMENT = "policy_document"
    F1000_POST = "f1000_post"
    REDDIT_POST = "reddit_post"
    PEER_REVIEW = "peer_review"
    WEIBO_POST = "weibo_post"
    VIDEO = "video"
    QA_POST = "qa_post"
    PIN = "pin"
    LINKEDIN_POST = "linkedin_post"

    @classmethod
    def from_token(cls, token: str) -> "PlatformKind":
        try:
            return cls(token)
        except ValueError:
            raise UnknownPlatform(f"unknown platform token: {token!r}") from None


#: Human-readable platform labels, used by the stats table.
PLATFORM_LABELS: dict[PlatformKind, str] = {
    PlatformKind.TWEET: "Tweet",
    PlatformKind.NEWS_STORY: "News story",
    PlatformKind.FACEBOOK_POST: "Facebook post",
    PlatformKind.BLOG_POST: "Blog post",
    PlatformKind.PATENT: "Patent",
    PlatformKind.GOOGLEPLUS_POST: "Google+ post",
    PlatformKind.WIKIPEDIA_PAGE: "Wikipedia page",
    PlatformKind.POLICY_DOCUMENT: "Policy document",
    PlatformKind.F1000_POST: "F1000 post",
    PlatformKind.REDDIT_POST: "Reddit post",
    PlatformKind.PEER_REVIEW: "Peer review",
    PlatformKind.WEIBO_POST: "Weibo post",
    PlatformKind.VIDEO: "Video",
    PlatformKind.QA_POST: "Q&A post",
    PlatformKind.PIN: "Pin",
    PlatformKind.LINKEDIN_POST: "LinkedIn post",
}


#: Actor node class per platform. The three platforms analysed in depth get
#: their own classes; any other platform's actors are classed by its token.
PLATFORM_CLASSES: dict[PlatformKind, str] = {
    PlatformKind.TWEET: "twitter",
    PlatformKind.NEWS_STORY: "news",
    PlatformKind.POLICY_DOCUMENT: "policy",
}


def platform_class(platform: PlatformKind) -> str:
    """Actor-node class for a platform (twitter / news / policy / token)."""
    return PLATFORM_CLASSES.get(platform, platform.value)


@dataclass
class PublicationRecord:
    """One indexed paper.

    ``doi`` is the canonical lowercase form or None when the source row had
    no parseable DOI (such records are kept for totals but can never link).
    """

    doi: str | None
    title: str
    year: int
    source: str = ""
    categories: set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        self.title = self.title.strip()
        if not self.title:
            raise ValueError("publication title must be non-empty")
        if not 1900 <= self.year <= 2100:
            raise ValueError(f"publication year out of range: {self.year}")


@dataclass
class MentionRecord:
    """One mention event: an actor referencing a publication on a platform."""

    mention_id: str
    platform: PlatformKind
    actor_id: str
    actor_name: str
    doi: str
    timestamp: datetime
    actor_meta: dict | None = None

    def __post_init__(self) -> None:
        if not self.actor_id:
            raise ValueError("actor_id must be non-empty")
        if self.timestamp.tzinfo is None:
            self.timestamp = self.timestamp.replace(tzinfo=timezone.utc)
        else:
            self.timestamp = self.timestamp.astimezone(timezone.utc)

    @property
    def month(self) -> str:
        """Calendar month key, e.g. '2016-03'."""
        return f"{self.timestamp.year:04d}-{self.timestamp.month:02d}"
