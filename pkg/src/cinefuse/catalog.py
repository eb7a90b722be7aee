"""Catalog ingestion: load, validate, and merge the four input datasets.

The merged store is keyed by movie id. Critic reviews join on id + normalized
title (lossy: unmatched rows are dropped and counted); ratings and implicit
events must resolve or the load fails.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import CinefuseError, DataFormatError, UnknownEntityError


@dataclass(frozen=True)
class RatingScale:
    """Fixed rating scale; values must land on `step` increments."""

    min: float = 0.5
    max: float = 5.0
    step: float = 0.5

    def contains(self, value: float) -> bool:
        if not (self.min - 1e-9 <= value <= self.max + 1e-9):
            return False
        steps = (value - self.min) / self.step
        return abs(steps - round(steps)) < 1e-9

    def values(self) -> list[float]:
        n = int(round((self.max - self.min) / self.step)) + 1
        return [round(self.min + i * self.step, 10) for i in range(n)]

    def clamp(self, value: float) -> float:
        return min(self.max, max(self.min, value))


@dataclass(frozen=True)
class Movie:
    movie_id: int
    title: str
    genres: frozenset[str]
    summary: str = ""
    release_year: int | None = None


@dataclass(frozen=True)
class Rating:
    user_id: int
    movie_id: int
    value: float
    timestamp: int | None = None


@dataclass(frozen=True)
class CriticReview:
    movie_id: int
    source: str
    review_text: str
    raw_score: float


@dataclass(frozen=True)
class ImplicitEvent:
    user_id: int
    movie_id: int
    watched: bool
    watch_fraction: float
    watch_count: int


@dataclass
class Catalog:
    """Merged, validated store. Treat as immutable after load."""

    movies: dict[int, Movie]
    ratings: list[Rating]
    reviews: list[CriticReview]
    implicit: list[ImplicitEvent]
    title_index: dict[str, int]
    scale: RatingScale = field(default_factory=RatingScale)
    dropped_reviews: int = 0
    # all movie ids per normalized title, for year-hint disambiguation
    title_groups: dict[str, tuple[int, ...]] = field(default_factory=dict)

    def genre_universe(self) -> list[str]:
        genres = set()
        for m in self.movies.values():
            genres.update(m.genres)
        return sorted(genres)


def normalize_title(title: str) -> str:
    """Lowercase, strip punctuation, collapse whitespace."""
    return re.sub(r"[^0-9a-z]+", " ", title.lower()).strip()


_YEAR_SUFFIX = re.compile(r"^(?P<base>.*?)\s*\((?P<year>\d{4})\)\s*$")


def resolve_title(catalog: Catalog, query: str) -> int:
    """Resolve a title (optionally '<title> (YYYY)') to a movie id.

    Ambiguous titles prefer an exact year match when the query carries one,
    otherwise the lowest movie id wins.
    """
    year = None
    m = _YEAR_SUFFIX.match(query)
    if m:
        base, year = m.group("base"), int(m.group("year"))
        norm = normalize_title(base)
        if norm not in catalog.title_groups:
            norm = normalize_title(query)  # year may be part of the real title
            year = None
    else:
        norm = normalize_title(query)
    ids = catalog.title_groups.get(norm)
    if not ids:
        raise UnknownEntityError(f"no movie titled '{query}' in catalog")
    if year is not None:
        for mid in ids:
            if catalog.movies[mid].release_year == year:
                return mid
    return ids[0]


def closest_titles(catalog: Catalog, query: str, n: int = 5) -> list[str]:
    """Closest catalog titles to a query, for error messages."""
    import difflib

    norm = normalize_title(query)
    by_norm = {}
    for mid in sorted(catalog.movies):
        by_norm.setdefault(normalize_title(catalog.movies[mid].title), catalog.movies[mid].title)
    matches = difflib.get_close_matches(norm, list(by_norm), n=n, cutoff=0.3)
    return [by_norm[m] for m in matches]


def _read_rows(path, expected_header):
    path = Path(path)
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot open: {exc}", path=path) from None
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file, expected header", path=path, line=1) from None
        if [h.strip() for h in header] != expected_header:
            raise DataFormatError(
                f"bad header {header!r}, expected {expected_header!r}", path=path, line=1
            )
        rows = []
        while True:
            try:
                row = next(reader)
            except StopIteration:
                break
            if not row:
                continue
            if len(row) != len(expected_header):
                raise DataFormatError(
                    f"expected {len(expected_header)} fields, got {len(row)}",
                    path=path,
                    line=reader.line_num,
                )
            rows.append((reader.line_num, row))
    return rows


def _parse_int(value, path, line, fld, optional=False):
    value = value.strip()
    if value == "":
        if optional:
            return None
        raise DataFormatError("missing required integer", path=path, line=line, field=fld)
    try:
        return int(value)
    except ValueError:
        raise DataFormatError(f"not an integer: {value!r}", path=path, line=line, field=fld) from None


def _parse_float(value, path, line, fld):
    try:
        return float(value.strip())
    except ValueError:
        raise DataFormatError(f"not a number: {value!r}", path=path, line=line, field=fld) from None


def _parse_bool(value, path, line, fld):
    v = value.strip().lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise DataFormatError(f"not a boolean: {value!r}", path=path, line=line, field=fld)


def load_catalog(
    movies_path,
    ratings_path,
    reviews_path,
    implicit_path=None,
    scale: RatingScale | None = None,
) -> Catalog:
    """Load and merge the movie, rating, review, and implicit-event files.

    Reviews whose (movie id, normalized title) pair fails to match a catalog
    movie are dropped; the count lands in `Catalog.dropped_reviews`. Any other
    referential or schema problem raises DataFormatError.
    """
    scale = scale or RatingScale()

    movies: dict[int, Movie] = {}
    for line, row in _read_rows(movies_path, ["movieId", "title", "genres", "year", "summary"]):
        mid = _parse_int(row[0], movies_path, line, "movieId")
        title = row[1].strip()
        if not title:
            raise DataFormatError("empty title", path=movies_path, line=line, field="title")
        if mid in movies:
            raise DataFormatError(f"duplicate movieId {mid}", path=movies_path, line=line, field="movieId")
        genres = frozenset(g.strip() for g in row[2].split("|") if g.strip())
        year = _parse_int(row[3], movies_path, line, "year", optional=True)
        movies[mid] = Movie(mid, title, genres, summary=row[4], release_year=year)

    ratings: list[Rating] = []
    seen_pairs = set()
    for line, row in _read_rows(ratings_path, ["userId", "movieId", "rating", "timestamp"]):
        uid = _parse_int(row[0], ratings_path, line, "userId")
        mid = _parse_int(row[1], ratings_path, line, "movieId")
        value = _parse_float(row[2], ratings_path, line, "rating")
        ts = _parse_int(row[3], ratings_path, line, "timestamp", optional=True)
        if mid not in movies:
            raise DataFormatError(f"unknown movieId {mid}", path=ratings_path, line=line, field="movieId")
        if not scale.contains(value):
            raise DataFormatError(
                f"value out of scale at line {line}: {value}", path=ratings_path, line=line, field="rating"
            )
        if (uid, mid) in seen_pairs:
            raise DataFormatError(
                f"duplicate rating for user {uid}, movie {mid}", path=ratings_path, line=line
            )
        seen_pairs.add((uid, mid))
        ratings.append(Rating(uid, mid, value, ts))

    reviews: list[CriticReview] = []
    dropped = 0
    for line, row in _read_rows(reviews_path, ["movieId", "title", "source", "rawScore", "reviewText"]):
        mid = _parse_int(row[0], reviews_path, line, "movieId")
        raw = _parse_float(row[3], reviews_path, line, "rawScore")
        if not (0.0 <= raw <= 5.0):
            raise DataFormatError(
                f"rawScore {raw} outside [0, 5]", path=reviews_path, line=line, field="rawScore"
            )
        movie = movies.get(mid)
        if movie is None or normalize_title(row[1]) != normalize_title(movie.title):
            dropped += 1
            continue
        reviews.append(CriticReview(mid, source=row[2], review_text=row[4], raw_score=raw))

    implicit: list[ImplicitEvent] = []
    if implicit_path is not None:
        header = ["userId", "movieId", "watched", "watchFraction", "watchCount"]
        for line, row in _read_rows(implicit_path, header):
            uid = _parse_int(row[0], implicit_path, line, "userId")
            mid = _parse_int(row[1], implicit_path, line, "movieId")
            watched = _parse_bool(row[2], implicit_path, line, "watched")
            frac = _parse_float(row[3], implicit_path, line, "watchFraction")
            count = _parse_int(row[4], implicit_path, line, "watchCount")
            if mid not in movies:
                raise DataFormatError(f"unknown movieId {mid}", path=implicit_path, line=line, field="movieId")
            if not (0.0 <= frac <= 1.0):
                raise DataFormatError(
                    f"watchFraction {frac} outside [0, 1]", path=implicit_path, line=line, field="watchFraction"
                )
            if count < 0:
                raise DataFormatError("negative watchCount", path=implicit_path, line=line, field="watchCount")
            if not watched and frac != 0.0:
                raise DataFormatError(
                    "watchFraction must be 0 when watched is false",
                    path=implicit_path,
                    line=line,
                    field="watchFraction",
                )
            implicit.append(ImplicitEvent(uid, mid, watched, frac, count))

    groups: dict[str, list[int]] = {}
    for mid in sorted(movies):
        groups.setdefault(normalize_title(movies[mid].title), []).append(mid)
    title_groups = {norm: tuple(ids) for norm, ids in groups.items()}
    title_index = {norm: ids[0] for norm, ids in title_groups.items()}

    return Catalog(
        movies=movies,
        ratings=ratings,
        reviews=reviews,
        implicit=implicit,
        title_index=title_index,
        scale=scale,
        dropped_reviews=dropped,
        title_groups=title_groups,
    )


@dataclass
class CatalogStats:
    per_year: dict[int, int]
    per_month: dict[int, int]
    unknown_year: int
    unknown_month: int
    rating_histogram: dict[float, int]


def summary_stats(catalog: Catalog) -> CatalogStats:
    """Per-year / per-month movie counts plus a rating histogram.

    The movies schema carries release year only, so every movie's month is
    unknown; the month map stays empty and the unknown bucket holds them all.
    """
    per_year: dict[int, int] = {}
    unknown_year = 0
    for movie in catalog.movies.values():
        if movie.release_year is None:
            unknown_year += 1
        else:
            per_year[movie.release_year] = per_year.get(movie.release_year, 0) + 1
    histogram = {v: 0 for v in catalog.scale.values()}
    for r in catalog.ratings:
        histogram[round(r.value, 10)] += 1
    return CatalogStats(
        per_year=dict(sorted(per_year.items())),
        per_month={},
        unknown_year=unknown_year,
        unknown_month=len(catalog.movies),
        rating_histogram=histogram,
    )


def train_test_split(
    catalog: Catalog, holdout_fraction: float, seed: int
) -> tuple[Catalog, list[Rating]]:
    """Deterministic holdout split that never orphans a user or movie.

    A rating moves to the test set only while its user and movie keep at
    least one other rating in train, so every test rating's entities stay
    predictable. Train + test partition the original ratings exactly.
    """
    if not (0.0 < holdout_fraction < 1.0):
        raise CinefuseError(f"holdout_fraction must be in (0, 1), got {holdout_fraction}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(catalog.ratings))
    target = int(holdout_fraction * len(catalog.ratings))

    user_counts: dict[int, int] = {}
    movie_counts: dict[int, int] = {}
    for r in catalog.ratings:
        user_counts[r.user_id] = user_counts.get(r.user_id, 0) + 1
        movie_counts[r.movie_id] = movie_counts.get(r.movie_id, 0) + 1

    test_idx = set()
    for i in order:
        if len(test_idx) >= target:
            break
        r = catalog.ratings[int(i)]
        if user_counts[r.user_id] >= 2 and movie_counts[r.movie_id] >= 2:
            test_idx.add(int(i))
            user_counts[r.user_id] -= 1
            movie_counts[r.movie_id] -= 1

    train_ratings = [r for i, r in enumerate(catalog.ratings) if i not in test_idx]
    test_ratings = [catalog.ratings[i] for i in sorted(test_idx)]
    train = replace(catalog, ratings=train_ratings)
    return train, test_ratings
