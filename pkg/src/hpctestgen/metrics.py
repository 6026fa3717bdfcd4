"""Evaluation metrics: compilation rate, the auto-rubric, construct
targeting rate, coverage aggregation, and K-means clustering of compiler
error messages with Elbow selection and silhouette assessment.

The rubric is an automated proxy for manual scoring: it combines the
synthesizer's declared assertions, structural evidence from the critic, and
the harness verdict. Reports label it "auto-rubric".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np


class EmptyInput(Exception):
    pass


class DegenerateInput(Exception):
    pass


def round_pct(value):
    """Percentages carry 1 decimal, round-half-up (65.25 -> 65.3)."""
    return float(Decimal(repr(value)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def compilation_rate(results):
    """Percentage of compile results that succeeded."""
    results = list(results)
    if not results:
        raise EmptyInput("no compile results")
    successes = sum(1 for r in results if getattr(r, "success", False))
    return round_pct(100.0 * successes / len(results))


# ---------------------------------------------------------------------------
# Auto-rubric
# ---------------------------------------------------------------------------


@dataclass
class RubricScore:
    parallel_relevance: int  # 0..2
    assertion_correctness: int  # 0..2

    @property
    def functionally_correct(self):
        return self.parallel_relevance == 2 and self.assertion_correctness == 2

    def to_dict(self):
        return {
            "parallel_relevance": self.parallel_relevance,
            "assertion_correctness": self.assertion_correctness,
            "functionally_correct": self.functionally_correct,
        }


# Verdicts consistent with each test type's expected behavior. Hang-prone
# scenarios legitimately end in a timeout; consistency probes legitimately
# flag buggy targets via an assertion failure.
_HANG_TYPES = (
    "MPI_Potential_Deadlock_Order_Mismatch",
    "MPI_Deadlock_Conditional_Barrier",
    "OMP_Barrier_All_Threads",
)
_DETECTOR_TYPES = (
    "OMP_Race_Shared_Accumulation",
    "OMP_Missing_Privatization",
    "OMP_Task_Missing_Taskwait",
    "MPI_Collective_Reach_All_Ranks",
)


def consistent_verdicts(test_type):
    allowed = {"pass"}
    if test_type in _HANG_TYPES:
        allowed.add("timeout_deadlock")
    if test_type in _DETECTOR_TYPES:
        allowed.add("assertion_failure")
    return allowed


_OMP_USE_RE = re.compile(r"#\s*pragma\s+omp|\bomp_[a-z_]+\s*\(")
_MPI_USE_RE = re.compile(r"\bMPI_[A-Z][A-Za-z_]*\s*\(")
_VALUE_ASSERT_RE = re.compile(r"MC_CHECK_EQ_(INT|DOUBLE)\s*\(|MC_CHECK\s*\(")


def score_rubric(test, recipe, run_result, metadata=None):
    """Parallel relevance and assertion correctness on the 0-2 scales."""
    text = test.source_text
    uses_parallel = bool(_OMP_USE_RE.search(text) or _MPI_USE_RE.search(text))
    spec = test.launch_spec
    scale = spec.num_processes if spec.model == "mpi" else spec.num_threads

    if not uses_parallel:
        relevance = 0
    elif (scale or 1) <= 1 and recipe.test_type != "MPI_Collective_Degenerate_Comm":
        relevance = 1  # trivial setup: runs with one thread/process
    else:
        relevance = 2

    assertions = list(test.declared_assertions)
    has_assert_text = bool(_VALUE_ASSERT_RE.search(text))
    if not assertions and not has_assert_text:
        assertion = 0
    else:
        verdict_ok = run_result is not None and run_result.verdict in consistent_verdicts(recipe.test_type)
        strong = any(a.kind in ("value", "count") for a in assertions) or (
            # completion checks realize a completion-style suggested method
            any(a.kind == "completion" for a in assertions)
            and "completion" in recipe.suggested_assertion_method.lower()
        )
        if strong and verdict_ok:
            assertion = 2
        else:
            assertion = 1
    return RubricScore(parallel_relevance=relevance, assertion_correctness=assertion)


def fully_correct_rate(run_results):
    """Share of runs whose every check passed (verdict == pass)."""
    results = list(run_results)
    if not results:
        raise EmptyInput("no run results")
    good = sum(1 for r in results if r.verdict == "pass")
    return round_pct(100.0 * good / len(results))


@dataclass
class TargetingRate:
    identified_constructs: int
    functionally_tested: int

    @property
    def rate_pct(self):
        if self.identified_constructs == 0:
            return None
        return round_pct(100.0 * self.functionally_tested / self.identified_constructs)

    def to_dict(self):
        return {
            "identified_constructs": self.identified_constructs,
            "functionally_tested": self.functionally_tested,
            "rate_pct": self.rate_pct,
        }


def targeting_rate(recipes, scores_by_recipe_id):
    """Distinct constructs with at least one functionally correct test over
    distinct constructs identified as needing a test."""
    identified = set()
    tested = set()
    for recipe in recipes:
        construct = recipe.construct_id or recipe.target_construct
        identified.add(construct)
        score = scores_by_recipe_id.get(recipe.test_id)
        if score is not None and score.functionally_correct:
            tested.add(construct)
    return TargetingRate(identified_constructs=len(identified), functionally_tested=len(tested))


# ---------------------------------------------------------------------------
# Error clustering: normalization, tf-idf, Lloyd's K-means, Elbow, silhouette
# ---------------------------------------------------------------------------

_PATH_RE = re.compile(r"(/|[A-Za-z]:\\)?[\w.\-\\/]+\.(?:cpp|cc|cxx|hpp|hh|h|o|so)\b")
_QUOTED_RE = re.compile(r"'[^']*'|\"[^\"]*\"|`[^`]*`|‘[^’]*’")
_NUM_RE = re.compile(r"\b\d+\b")


def normalize_message(message):
    """Mask paths, quoted identifiers, and numbers so clustering keys on the
    error shape, not the specific file."""
    text = _PATH_RE.sub(" <path> ", message)
    text = _QUOTED_RE.sub(" <id> ", text)
    text = _NUM_RE.sub(" <num> ", text)
    return re.sub(r"\s+", " ", text).strip().lower()


def _tokenize(message):
    return re.findall(r"[a-z<>][a-z0-9_<>]+", message)


def vectorize_messages(messages):
    """Term-frequency matrix with inverse-document-frequency weighting,
    L2-normalized rows. Returns (matrix, vocabulary)."""
    normalized = [normalize_message(m) for m in messages]
    token_lists = [_tokenize(m) for m in normalized]
    vocab = sorted({t for toks in token_lists for t in toks})
    index = {t: i for i, t in enumerate(vocab)}
    n, d = len(messages), len(vocab)
    tf = np.zeros((n, max(d, 1)))
    for row, toks in enumerate(token_lists):
        for tok in toks:
            tf[row, index[tok]] += 1.0
    df = (tf > 0).sum(axis=0)
    idf = np.log((1.0 + n) / (1.0 + df)) + 1.0
    mat = tf * idf
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return mat / norms, vocab


def _dsquared_seed(points, k, rng):
    """Distance-squared weighted seeding: spread initial centroids apart."""
    n = len(points)
    centroids = [points[rng.integers(n)]]
    for _ in range(1, k):
        d2 = np.min(
            ((points[:, None, :] - np.asarray(centroids)[None, :, :]) ** 2).sum(axis=2), axis=1
        )
        total = d2.sum()
        if total <= 0:
            centroids.append(points[rng.integers(n)])
            continue
        centroids.append(points[rng.choice(n, p=d2 / total)])
    return np.asarray(centroids, dtype=float)


# Below this many candidate seedings, enumerate every k-subset of points as
# initial centroids instead of sampling; on tiny inputs that reliably lands
# in the global optimum's basin.
_EXHAUSTIVE_SEED_LIMIT = 200


def _seedings(points, k, seed, restarts):
    n = len(points)
    from math import comb

    if comb(n, k) <= _EXHAUSTIVE_SEED_LIMIT:
        import itertools as _it

        for combo in _it.combinations(range(n), k):
            yield points[list(combo)].copy()
        return
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        yield _dsquared_seed(points, k, rng)


def kmeans_fit(points, k, seed=0, restarts=10, tol=1e-6, max_iter=300):
    """Lloyd's algorithm, best over the seeding pool.

    Small inputs enumerate every k-subset of points as initial centroids;
    larger ones use ``restarts`` distance-squared-weighted random seedings.
    Returns (labels, centroids, sse, sse_trace) for the best run; the trace
    is that run's per-iteration SSE (non-increasing).
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    if k < 1 or k > n:
        raise ValueError(f"k must be in [1, {n}]")
    best = None
    for centroids in _seedings(points, k, seed, restarts):
        trace = []
        labels = np.zeros(n, dtype=int)
        for _it in range(max_iter):
            dists = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
            labels = dists.argmin(axis=1)
            sse = float(dists[np.arange(n), labels].sum())
            trace.append(sse)
            new_centroids = centroids.copy()
            for j in range(k):
                members = points[labels == j]
                if len(members):
                    new_centroids[j] = members.mean(axis=0)
                else:  # re-seed an empty cluster at the farthest point
                    new_centroids[j] = points[dists[np.arange(n), labels].argmax()]
            shift = float(np.abs(new_centroids - centroids).max())
            centroids = new_centroids
            if shift < tol:
                break
        dists = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = dists.argmin(axis=1)
        sse = float(dists[np.arange(n), labels].sum())
        trace.append(sse)
        if best is None or sse < best[2]:
            best = (labels, centroids, sse, trace)
    return best


def silhouette_mean(points, labels):
    """Mean silhouette coefficient; None when undefined (k < 2)."""
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    unique = np.unique(labels)
    if len(unique) < 2:
        return None
    n = len(points)
    diffs = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diffs**2).sum(axis=2))
    scores = np.zeros(n)
    for i in range(n):
        own = labels[i]
        own_mask = (labels == own) & (np.arange(n) != i)
        if not own_mask.any():
            scores[i] = 0.0  # singleton convention
            continue
        a = dist[i, own_mask].mean()
        b = min(dist[i, labels == other].mean() for other in unique if other != own)
        scores[i] = (b - a) / max(a, b) if max(a, b) > 0 else 0.0
    return float(scores.mean())


def choose_k_elbow(points, k_max=10, seed=0, restarts=10):
    """Elbow rule: k with the largest second difference of the SSE curve."""
    n = len(points)
    k_cap = min(k_max, n)
    sse_by_k = {}
    for k in range(1, k_cap + 1):
        _, _, sse, _ = kmeans_fit(points, k, seed=seed, restarts=restarts)
        sse_by_k[k] = sse
    if k_cap < 3:
        return 1 if k_cap == 1 else (2 if sse_by_k[1] > 0 else 1), sse_by_k
    best_k, best_d2 = 1, -np.inf
    for k in range(2, k_cap):
        d2 = sse_by_k[k - 1] - 2.0 * sse_by_k[k] + sse_by_k[k + 1]
        if d2 > best_d2:
            best_k, best_d2 = k, d2
    return best_k, sse_by_k


@dataclass
class ErrorCluster:
    centroid_terms: list[str]
    member_messages: list[str]
    size: int

    def to_dict(self):
        return {
            "centroid_terms": list(self.centroid_terms),
            "member_messages": list(self.member_messages),
            "size": self.size,
        }


@dataclass
class ClusteringResult:
    k: int
    clusters: list[ErrorCluster]
    sse: float
    silhouette: float | None
    sse_by_k: dict[int, float] = field(default_factory=dict)

    def to_dict(self):
        return {
            "k": self.k,
            "clusters": [c.to_dict() for c in self.clusters],
            "sse": self.sse,
            "silhouette": self.silhouette,
            "sse_by_k": {str(k): v for k, v in sorted(self.sse_by_k.items())},
        }


def cluster_errors(messages, k=None, seed=0, restarts=10):
    """Cluster compiler error messages; Elbow picks k when unset."""
    messages = list(messages)
    if not messages:
        raise EmptyInput("no messages to cluster")
    if k is None and len(messages) < 2:
        raise EmptyInput("need at least 2 messages to choose k")

    normalized = {normalize_message(m) for m in messages}
    if len(normalized) == 1:
        # All messages identical: one cluster, silhouette undefined.
        cluster = ErrorCluster(
            centroid_terms=_tokenize(next(iter(normalized)))[:5],
            member_messages=messages,
            size=len(messages),
        )
        return ClusteringResult(k=1, clusters=[cluster], sse=0.0, silhouette=None)

    points, vocab = vectorize_messages(messages)
    sse_by_k = {}
    if k is None:
        k, sse_by_k = choose_k_elbow(points, seed=seed, restarts=restarts)
    labels, centroids, sse, _trace = kmeans_fit(points, k, seed=seed, restarts=restarts)

    clusters = []
    for j in range(k):
        members = [messages[i] for i in range(len(messages)) if labels[i] == j]
        order = np.argsort(-centroids[j])
        terms = [vocab[t] for t in order[:5] if centroids[j][t] > 0]
        clusters.append(ErrorCluster(centroid_terms=terms, member_messages=members, size=len(members)))
    clusters.sort(key=lambda c: (-c.size, c.centroid_terms))
    silhouette = silhouette_mean(points, labels) if k > 1 else None
    return ClusteringResult(k=k, clusters=clusters, sse=sse, silhouette=silhouette, sse_by_k=sse_by_k)


# ---------------------------------------------------------------------------
# Aggregate report
# ---------------------------------------------------------------------------


@dataclass
class MetricsReport:
    compilation_rate_pct: float | None
    fully_correct_pct: float | None
    rubric_by_test: dict[str, dict]
    targeting: dict
    coverage_summary: dict | None
    error_clusters: list[dict]

    def to_dict(self):
        return {
            "rubric_kind": "auto-rubric",
            "compilation_rate_pct": self.compilation_rate_pct,
            "fully_correct_pct": self.fully_correct_pct,
            "rubric_by_test": dict(sorted(self.rubric_by_test.items())),
            "targeting": self.targeting,
            "coverage_summary": self.coverage_summary,
            "error_clusters": self.error_clusters,
        }


def build_report(compile_results, run_results, rubric_by_test, targeting, coverage=None, clusters=None):
    comp = compilation_rate(compile_results) if compile_results else None
    full = fully_correct_rate(run_results) if run_results else None
    return MetricsReport(
        compilation_rate_pct=comp,
        fully_correct_pct=full,
        rubric_by_test={k: v.to_dict() for k, v in rubric_by_test.items()},
        targeting=targeting.to_dict(),
        coverage_summary=coverage.to_dict() if coverage else None,
        error_clusters=[c.to_dict() for c in (clusters.clusters if clusters else [])],
    )


def render_summary(report):
    """Plain-text table for terminals."""
    lines = ["metric                         value", "-" * 42]
    t = report.targeting
    rows = [
        ("compilation_rate_pct", report.compilation_rate_pct),
        ("fully_correct_pct", report.fully_correct_pct),
        ("targeting.identified", t["identified_constructs"]),
        ("targeting.functionally_tested", t["functionally_tested"]),
        ("targeting.rate_pct", t["rate_pct"] if t["rate_pct"] is not None else "undefined"),
    ]
    for name, value in rows:
        lines.append(f"{name:30s} {value}")
    return "\n".join(lines)
