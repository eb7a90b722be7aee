"""Collaborative-filtering engine.

Builds the sparse user x item rating matrix, computes pairwise similarity
matrices (pearson / cosine / jaccard, optionally feature-weighted), selects
KNN neighborhoods, predicts unseen ratings by weighted deviation from the
mean, and produces candidate sets. Implicit events can densify the matrix
with pseudo-ratings without ever touching explicit entries.

Conventions, fixed here because the similarity literature leaves them open:
  * pearson is the correlation of the two entities' ratings over their
    co-rated set, with means taken over that set (weighted means when a
    weight vector is supplied);
  * cosine treats each entity's ratings as a sparse vector (missing = 0),
    so the dot product runs over the co-rated set while each norm runs over
    the entity's own rated set;
  * jaccard ignores values and compares rated sets;
  * pairs sharing fewer than `min_overlap` ratings score 0 under every
    metric, and zero-variance vectors score 0 under pearson;
  * neighbor eligibility everywhere requires a nonzero co-count, and ties
    break by ascending id.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import Catalog, ImplicitEvent, RatingScale
from .errors import CinefuseError, UnknownEntityError

DEFAULT_MIN_OVERLAP = 2
DEFAULT_K = 20
DEFAULT_LIKE_THRESHOLD = 3.5

SOURCE_NONE = 0
SOURCE_EXPLICIT = 1
SOURCE_IMPLICIT = 2


@dataclass
class RatingMatrix:
    """Dense-with-NaN user x item matrix plus per-axis means and source flags."""

    user_ids: tuple[int, ...]
    item_ids: tuple[int, ...]
    values: np.ndarray  # (n_users, n_items), NaN where unrated
    sources: np.ndarray  # uint8, SOURCE_* codes
    scale: RatingScale
    user_index: dict[int, int] = field(repr=False, default_factory=dict)
    item_index: dict[int, int] = field(repr=False, default_factory=dict)
    user_means: np.ndarray = field(repr=False, default=None)
    item_means: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self.user_index = {u: i for i, u in enumerate(self.user_ids)}
        self.item_index = {m: j for j, m in enumerate(self.item_ids)}
        with np.errstate(invalid="ignore"):
            self.user_means = np.nanmean(self.values, axis=1)
            self.item_means = np.nanmean(self.values, axis=0)

    @property
    def entry_count(self) -> int:
        return int(np.count_nonzero(~np.isnan(self.values)))

    def rating(self, user_id: int, movie_id: int) -> float | None:
        v = self.values[self.user_index[user_id], self.item_index[movie_id]]
        return None if np.isnan(v) else float(v)


def build_rating_matrix(catalog: Catalog) -> RatingMatrix:
    """One matrix entry per explicit rating; means computed per axis."""
    if not catalog.ratings:
        raise CinefuseError("no ratings")
    user_ids = tuple(sorted({r.user_id for r in catalog.ratings}))
    item_ids = tuple(sorted({r.movie_id for r in catalog.ratings}))
    uix = {u: i for i, u in enumerate(user_ids)}
    mix = {m: j for j, m in enumerate(item_ids)}
    values = np.full((len(user_ids), len(item_ids)), np.nan)
    sources = np.zeros((len(user_ids), len(item_ids)), dtype=np.uint8)
    for r in catalog.ratings:
        values[uix[r.user_id], mix[r.movie_id]] = r.value
        sources[uix[r.user_id], mix[r.movie_id]] = SOURCE_EXPLICIT
    return RatingMatrix(user_ids, item_ids, values, sources, catalog.scale)


@dataclass
class SimilarityMatrix:
    axis: str  # "user" or "item"
    metric: str  # pearson | cosine | jaccard | fuzzy
    ids: tuple[int, ...]
    values: np.ndarray  # (n, n), symmetric, in [-1, 1]
    co_counts: np.ndarray  # (n, n) int, co-rated dimension counts
    min_overlap: int
    index: dict[int, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        self.index = {e: i for i, e in enumerate(self.ids)}


def _pair_pearson(x, y, w):
    sw = w.sum()
    if sw <= 0.0:
        return 0.0
    xm = float((w * x).sum() / sw)
    ym = float((w * y).sum() / sw)
    dx, dy = x - xm, y - ym
    vx = float((w * dx * dx).sum())
    vy = float((w * dy * dy).sum())
    if vx <= 1e-15 or vy <= 1e-15:
        return 0.0
    return float((w * dx * dy).sum() / np.sqrt(vx * vy))


def similarity_matrix(
    matrix: RatingMatrix,
    axis: str,
    metric: str = "pearson",
    weights=None,
    min_overlap: int = DEFAULT_MIN_OVERLAP,
) -> SimilarityMatrix:
    """Full pairwise similarity matrix along one axis.

    `weights`, when given, must index the co-rated dimension (items for the
    user axis, users for the item axis) and be nonnegative; each dimension's
    contribution to the metric is scaled by its weight. All-ones weights
    reproduce the unweighted metric exactly.
    """
    if axis not in ("user", "item"):
        raise CinefuseError(f"axis must be 'user' or 'item', got {axis!r}")
    if metric not in ("pearson", "cosine", "jaccard"):
        raise CinefuseError(f"unknown metric {metric!r}")

    if axis == "user":
        vals, ids = matrix.values, matrix.user_ids
    else:
        vals, ids = matrix.values.T, matrix.item_ids
    n, d = vals.shape

    if weights is None:
        w = np.ones(d)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (d,):
            raise CinefuseError(f"weight vector of length {w.size}, expected {d}")
        if np.any(w < 0):
            raise CinefuseError("negative weight")

    mask = ~np.isnan(vals)
    filled = np.where(mask, vals, 0.0)
    co = (mask.astype(np.int64) @ mask.astype(np.int64).T).astype(np.int64)

    sims = np.zeros((n, n))
    if metric == "cosine":
        # norms over each entity's own rated set
        norms = np.sqrt(((filled**2) * w).sum(axis=1))
    for i in range(n):
        for j in range(i + 1, n):
            if co[i, j] < min_overlap:
                continue
            both = mask[i] & mask[j]
            if metric == "pearson":
                s = _pair_pearson(vals[i][both], vals[j][both], w[both])
            elif metric == "cosine":
                denom = norms[i] * norms[j]
                s = float((w[both] * vals[i][both] * vals[j][both]).sum() / denom) if denom > 0 else 0.0
            else:  # jaccard on rated sets, values ignored
                union = mask[i] | mask[j]
                wu = float(w[union].sum())
                s = float(w[both].sum() / wu) if wu > 0 else 0.0
            sims[i, j] = sims[j, i] = s
    np.clip(sims, -1.0, 1.0, out=sims)
    np.fill_diagonal(sims, 1.0)
    return SimilarityMatrix(axis, metric, ids, sims, co, min_overlap)


@dataclass
class NeighborSet:
    target_id: int
    neighbors: list[tuple[int, float]]  # (neighbor id, similarity), sim desc, id asc


def _eligible_sorted(sim: SimilarityMatrix, pos: int):
    """All co-counted neighbors of `pos`, similarity desc then id asc."""
    out = []
    for j, other in enumerate(sim.ids):
        if j == pos or sim.co_counts[pos, j] <= 0:
            continue
        out.append((other, float(sim.values[pos, j])))
    out.sort(key=lambda t: (-t[1], t[0]))
    return out


def knn_neighbors(sim: SimilarityMatrix, target_id: int, k: int) -> NeighborSet:
    """Top-k neighbors with nonzero co-count; may return fewer than k."""
    if k < 1:
        raise CinefuseError(f"k must be >= 1, got {k}")
    if target_id not in sim.index:
        raise UnknownEntityError(f"unknown {sim.axis} id {target_id}")
    return NeighborSet(target_id, _eligible_sorted(sim, sim.index[target_id])[:k])


@dataclass
class Prediction:
    value: float
    fallback: bool  # True when no usable neighbor rated the movie


def predict_rating(
    matrix: RatingMatrix,
    sim: SimilarityMatrix,
    user_id: int,
    movie_id: int,
    k: int = DEFAULT_K,
) -> Prediction:
    """Weighted-deviation KNN prediction, clamped to the rating scale.

    User-axis similarity gives the user-based form
        mean(u) + sum(s * (r_v - mean(v))) / sum(|s|)
    over the k nearest co-counted users who rated the movie; item-axis
    similarity gives the mirrored item-based form. With no usable neighbor
    (none rated it, or all similarities are exactly 0) the target's own mean
    is returned with the fallback flag set.
    """
    if user_id not in matrix.user_index:
        raise UnknownEntityError(f"unknown user id {user_id}")
    if movie_id not in matrix.item_index:
        raise UnknownEntityError(f"unknown movie id {movie_id}")
    ui = matrix.user_index[user_id]
    mj = matrix.item_index[movie_id]

    if sim.axis == "user":
        base = float(matrix.user_means[ui])
        pos = sim.index[user_id]
        candidates = [
            (other, s)
            for other, s in _eligible_sorted(sim, pos)
            if not np.isnan(matrix.values[matrix.user_index[other], mj])
        ]
        candidates = candidates[:k]
        num = den = 0.0
        for other, s in candidates:
            oi = matrix.user_index[other]
            num += s * (float(matrix.values[oi, mj]) - float(matrix.user_means[oi]))
            den += abs(s)
    else:
        base = float(matrix.item_means[mj])
        pos = sim.index[movie_id]
        candidates = [
            (other, s)
            for other, s in _eligible_sorted(sim, pos)
            if not np.isnan(matrix.values[ui, matrix.item_index[other]])
        ]
        candidates = candidates[:k]
        num = den = 0.0
        for other, s in candidates:
            oj = matrix.item_index[other]
            num += s * (float(matrix.values[ui, oj]) - float(matrix.item_means[oj]))
            den += abs(s)

    if not candidates or den == 0.0:
        return Prediction(matrix.scale.clamp(base), fallback=True)
    return Prediction(matrix.scale.clamp(base + num / den), fallback=False)


@dataclass
class CFCandidate:
    movie_id: int
    score: float
    origin: str  # user_user | item_item | both


def recommend_cf(
    matrix: RatingMatrix,
    sim_user: SimilarityMatrix | None,
    sim_item: SimilarityMatrix | None,
    mode: str,
    target: int,
    n: int,
    k: int = DEFAULT_K,
    like_threshold: float = DEFAULT_LIKE_THRESHOLD,
    min_shared: int = 2,
) -> list[CFCandidate]:
    """CF candidate movies for a target user (user_user/both) or seed movie.

    user_user: movies the target has not rated that at least `min_shared` of
    the target's KNN users rated at or above `like_threshold`, ordered by
    predicted rating. item_item: the movies most similar to the seed. both:
    union of the two (item seeds = the user's liked movies), keeping each
    movie's max score. Ties always break by ascending movie id.
    """
    if mode not in ("user_user", "item_item", "both"):
        raise CinefuseError(f"unknown mode {mode!r}")

    if mode == "item_item":
        if sim_item is None:
            raise CinefuseError("item_item mode requires an item similarity matrix")
        if target not in sim_item.index:
            raise UnknownEntityError(f"unknown movie id {target}")
        ranked = _eligible_sorted(sim_item, sim_item.index[target])
        return [CFCandidate(mid, s, "item_item") for mid, s in ranked[:n]]

    if target not in matrix.user_index:
        raise UnknownEntityError(f"unknown user id {target}")
    ui = matrix.user_index[target]
    rated = {m for m in matrix.item_ids if not np.isnan(matrix.values[ui, matrix.item_index[m]])}

    scores: dict[int, CFCandidate] = {}

    if mode in ("user_user", "both"):
        if sim_user is None:
            raise CinefuseError(f"{mode} mode requires a user similarity matrix")
        neighbors = knn_neighbors(sim_user, target, k).neighbors
        liked_by: dict[int, int] = {}
        for other, _ in neighbors:
            oi = matrix.user_index[other]
            for m in matrix.item_ids:
                v = matrix.values[oi, matrix.item_index[m]]
                if not np.isnan(v) and v >= like_threshold:
                    liked_by[m] = liked_by.get(m, 0) + 1
        for m in sorted(liked_by):
            if liked_by[m] >= min_shared and m not in rated:
                pred = predict_rating(matrix, sim_user, target, m, k)
                scores[m] = CFCandidate(m, pred.value, "user_user")

    if mode == "both":
        if sim_item is None:
            raise CinefuseError("both mode requires an item similarity matrix")
        seeds = sorted(m for m in rated if matrix.values[ui, matrix.item_index[m]] >= like_threshold)
        for seed in seeds:
            if seed not in sim_item.index:
                continue
            for mid, s in _eligible_sorted(sim_item, sim_item.index[seed]):
                if mid in rated:
                    continue
                prev = scores.get(mid)
                if prev is None:
                    scores[mid] = CFCandidate(mid, s, "item_item")
                elif s > prev.score:
                    scores[mid] = CFCandidate(mid, s, "both" if prev.origin != "item_item" else "item_item")
                elif prev.origin == "user_user":
                    scores[mid] = CFCandidate(mid, prev.score, "both")

    ranked = sorted(scores.values(), key=lambda c: (-c.score, c.movie_id))
    return ranked[:n]


@dataclass(frozen=True)
class ImplicitBlend:
    """Blend coefficients for pseudo-ratings; must sum to 1."""

    alpha_watch: float = 0.2
    alpha_fraction: float = 0.5
    alpha_freq: float = 0.3
    freq_cap: int = 10


def augment_implicit(
    matrix: RatingMatrix, events: list[ImplicitEvent], params: ImplicitBlend | None = None
) -> RatingMatrix:
    """New matrix with pseudo-ratings filled into explicitly-unrated cells.

    pseudo = scale_max * (a_w*[watched] + a_f*fraction + a_q*min(count, F)/F),
    clamped into the rating scale. Explicit entries are never overwritten;
    when several events hit one cell the last one wins. Users or movies seen
    only in events become new rows/columns. Means are recomputed.
    """
    params = params or ImplicitBlend()
    total = params.alpha_watch + params.alpha_fraction + params.alpha_freq
    if abs(total - 1.0) > 1e-9:
        raise CinefuseError(f"blend coefficients must sum to 1, got {total}")
    if params.freq_cap < 1:
        raise CinefuseError(f"freq_cap must be >= 1, got {params.freq_cap}")

    pseudo: dict[tuple[int, int], float] = {}
    for ev in events:
        raw = (
            params.alpha_watch * (1.0 if ev.watched else 0.0)
            + params.alpha_fraction * ev.watch_fraction
            + params.alpha_freq * min(ev.watch_count, params.freq_cap) / params.freq_cap
        )
        pseudo[(ev.user_id, ev.movie_id)] = matrix.scale.clamp(matrix.scale.max * raw)

    user_ids = tuple(sorted(set(matrix.user_ids) | {u for u, _ in pseudo}))
    item_ids = tuple(sorted(set(matrix.item_ids) | {m for _, m in pseudo}))
    uix = {u: i for i, u in enumerate(user_ids)}
    mix = {m: j for j, m in enumerate(item_ids)}
    values = np.full((len(user_ids), len(item_ids)), np.nan)
    sources = np.zeros((len(user_ids), len(item_ids)), dtype=np.uint8)

    for i, u in enumerate(matrix.user_ids):
        for j, m in enumerate(matrix.item_ids):
            if not np.isnan(matrix.values[i, j]):
                values[uix[u], mix[m]] = matrix.values[i, j]
                sources[uix[u], mix[m]] = matrix.sources[i, j]

    for (u, m), v in pseudo.items():
        if sources[uix[u], mix[m]] == SOURCE_EXPLICIT:
            continue
        values[uix[u], mix[m]] = v
        sources[uix[u], mix[m]] = SOURCE_IMPLICIT

    return RatingMatrix(user_ids, item_ids, values, sources, matrix.scale)


def save_similarity(sim: SimilarityMatrix, path) -> None:
    """Write a similarity cache; byte-identical for identical inputs.

    Layout: a header line (axis, metric, entity count, min_overlap), the
    entity ids, the row-major similarity entries, then the co-count rows so
    a reload is lossless. Floats use shortest round-trip repr.
    """
    n = len(sim.ids)
    lines = [f"axis={sim.axis} metric={sim.metric} n={n} min_overlap={sim.min_overlap}"]
    lines.append("ids=" + ",".join(str(i) for i in sim.ids))
    for i in range(n):
        lines.append(" ".join(repr(float(v)) for v in sim.values[i]))
    lines.append("co_counts")
    for i in range(n):
        lines.append(" ".join(str(int(c)) for c in sim.co_counts[i]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_similarity(path) -> SimilarityMatrix:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    try:
        header = dict(kv.split("=", 1) for kv in lines[0].split())
        n = int(header["n"])
        ids = tuple(int(x) for x in lines[1].removeprefix("ids=").split(","))
        values = np.array([[float(x) for x in lines[2 + i].split()] for i in range(n)])
        assert lines[2 + n] == "co_counts"
        co = np.array(
            [[int(x) for x in lines[3 + n + i].split()] for i in range(n)], dtype=np.int64
        )
    except (KeyError, ValueError, IndexError, AssertionError) as exc:
        raise CinefuseError(f"corrupt similarity cache {path}: {exc}") from None
    if len(ids) != n or values.shape != (n, n) or co.shape != (n, n):
        raise CinefuseError(f"corrupt similarity cache {path}: shape mismatch")
    return SimilarityMatrix(
        header["axis"], header["metric"], ids, values, co, int(header["min_overlap"])
    )
