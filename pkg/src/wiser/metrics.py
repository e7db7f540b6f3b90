"""Graph-matching evaluation: Smatch, fine-grained metrics, agreement, stats.

Smatch searches for the injective variable mapping between two graphs that
maximizes the number of matched triples, then scores precision against the
predicted graph's triples and recall against the gold graph's. The search
runs one seeded start (greedy pairing of equal concepts) plus random
restarts, each improved by single-reassign/swap hill climbing; an
exhaustive oracle is available for small graphs. Fine-grained metrics are
Smatch over a transformed or restricted triple set, or bag F1 where no
alignment is needed. All scoring is deterministic for a fixed seed.
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Mapping, Sequence

from .convert import strip_sense
from .graph import SemGraph, Triple, extract_triples, invert_role, normalize

METRIC_NAMES = (
    "smatch", "unlabeled", "no_wsd", "concepts", "srl", "xsrl",
    "reentrancies", "negations", "named_entity",
)

# Fine-grained metric ordering used for default reporting.
DEFAULT_METRICS = (
    "smatch", "unlabeled", "no_wsd", "concepts", "xsrl",
    "reentrancies", "negations", "named_entity",
)

SRL_ROLES = frozenset(f":ARG{i}" for i in range(7))

# Thematic roles observed for converted numbered arguments; the xSRL
# restriction set for the wiser scheme.
WISER_CORE_ROLES = (
    "theme", "actor", "benefactive", "end", "start", "instrument",
    "attribute", "location", "cause", "purpose", "topic", "accompanier",
    "extent", "comparison", "asset", "domain", "mod", "manner",
    "direction", "path", "cause-of", "degree", "subevent", "quantity",
    "value", "time", "part-of", "duration", "theme-of", "range", "poss",
    "example", "consist-of", "concession", "frequency",
)

AMR_XSRL_NONCORE = (
    "accompanier", "beneficiary", "destination", "instrument",
    "location", "purpose", "source", "topic",
)


def xsrl_role_set(scheme: str) -> frozenset[str]:
    """Role labels included in the xSRL restriction for a scheme."""
    if scheme == "wiser":
        return frozenset(":" + r for r in WISER_CORE_ROLES)
    if scheme == "amr":
        return SRL_ROLES | frozenset(":" + r for r in AMR_XSRL_NONCORE)
    raise ValueError(f"unknown scheme {scheme!r}; expected 'wiser' or 'amr'")


@dataclass(frozen=True)
class ScoreEntry:
    metric: str
    matched: int
    total_pred: int
    total_gold: int

    @property
    def precision(self) -> float:
        return self.matched / self.total_pred if self.total_pred else 0.0

    @property
    def recall(self) -> float:
        return self.matched / self.total_gold if self.total_gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def line(self) -> str:
        return (f"{self.metric}\t{self.precision:.4f}\t{self.recall:.4f}\t{self.f1:.4f}"
                f"\t{self.matched}\t{self.total_pred}\t{self.total_gold}")


def combine_entries(metric: str, entries: Iterable[ScoreEntry]) -> ScoreEntry:
    """Micro-average: pool matched and total counts across pairs."""
    matched = pred = gold = 0
    for e in entries:
        matched += e.matched
        pred += e.total_pred
        gold += e.total_gold
    return ScoreEntry(metric, matched, pred, gold)


@dataclass(frozen=True)
class Alignment:
    """Injective partial variable mapping and its matched-triple count."""

    mapping: tuple[tuple[str, str], ...]
    matched: int


@dataclass(frozen=True)
class _View:
    """Triples prepared for matching plus the variables they mention."""

    variables: tuple[str, ...]
    triples: tuple[Triple, ...]
    triple_set: frozenset[Triple]
    concepts: tuple[tuple[str, str], ...]

    @classmethod
    def from_triples(cls, triples: Iterable[Triple]) -> "_View":
        triples = tuple(sorted(set(triples)))
        variables = set()
        concepts = []
        for t in triples:
            variables.add(t.source)
            if t.kind == "relation":
                variables.add(t.target)
            if t.kind == "instance":
                concepts.append((t.source, t.label))
        return cls(
            variables=tuple(sorted(variables)),
            triples=triples,
            triple_set=frozenset(triples),
            concepts=tuple(sorted(concepts)),
        )


def _graph_view(g: SemGraph) -> _View:
    return _View.from_triples(extract_triples(normalize(g)))


def _match_count(view_a: _View, view_b: _View, mapping: Mapping[str, str]) -> int:
    matched = 0
    b_set = view_b.triple_set
    for kind, source, label, target in view_a.triples:
        ms = mapping.get(source)
        if ms is None:
            continue
        if kind == "relation":
            mt = mapping.get(target)
            if mt is not None and Triple(kind, ms, label, mt) in b_set:
                matched += 1
        elif Triple(kind, ms, label, target) in b_set:
            matched += 1
    return matched


def _seeded_start(view_a: _View, view_b: _View) -> dict[str, str]:
    by_concept: dict[str, list[str]] = defaultdict(list)
    for var, concept in view_b.concepts:
        by_concept[concept].append(var)
    for vars_ in by_concept.values():
        vars_.sort()
    mapping: dict[str, str] = {}
    used: set[str] = set()
    for var, concept in view_a.concepts:
        for candidate in by_concept.get(concept, ()):
            if candidate not in used:
                mapping[var] = candidate
                used.add(candidate)
                break
    return mapping


def _random_start(view_a: _View, view_b: _View, rng: random.Random) -> dict[str, str]:
    targets: list[str | None] = list(view_b.variables)
    if len(targets) < len(view_a.variables):
        targets += [None] * (len(view_a.variables) - len(targets))
    rng.shuffle(targets)
    return {a: b for a, b in zip(view_a.variables, targets) if b is not None}


def _hill_climb(view_a: _View, view_b: _View, mapping: dict[str, str]) -> tuple[dict[str, str], int]:
    vars_a = view_a.variables
    vars_b = view_b.variables
    score = _match_count(view_a, view_b, mapping)
    while True:
        best_gain = 0
        best_mapping: dict[str, str] | None = None
        used = set(mapping.values())
        for a in vars_a:
            current = mapping.get(a)
            for b in (None, *vars_b):
                if b == current or (b is not None and b in used):
                    continue
                candidate = dict(mapping)
                if b is None:
                    del candidate[a]
                else:
                    candidate[a] = b
                gain = _match_count(view_a, view_b, candidate) - score
                if gain > best_gain:
                    best_gain, best_mapping = gain, candidate
        for i, a1 in enumerate(vars_a):
            for a2 in vars_a[i + 1:]:
                b1, b2 = mapping.get(a1), mapping.get(a2)
                if b1 is None and b2 is None:
                    continue
                candidate = dict(mapping)
                for var, img in ((a1, b2), (a2, b1)):
                    if img is None:
                        candidate.pop(var, None)
                    else:
                        candidate[var] = img
                gain = _match_count(view_a, view_b, candidate) - score
                if gain > best_gain:
                    best_gain, best_mapping = gain, candidate
        if best_mapping is None:
            return mapping, score
        mapping, score = best_mapping, score + best_gain


def _align(view_a: _View, view_b: _View, restarts: int, seed: int) -> Alignment:
    rng = random.Random(seed)
    best: tuple[dict[str, str], int] | None = None
    for i in range(max(1, restarts)):
        start = _seeded_start(view_a, view_b) if i == 0 else _random_start(view_a, view_b, rng)
        mapping, score = _hill_climb(view_a, view_b, start)
        if best is None or score > best[1]:
            best = (mapping, score)
    mapping, score = best
    return Alignment(mapping=tuple(sorted(mapping.items())), matched=score)


def _align_exact(view_a: _View, view_b: _View, max_vars: int) -> Alignment:
    small, large = sorted((view_a.variables, view_b.variables), key=len)
    if len(small) > max_vars:
        raise ValueError(
            f"exhaustive alignment refused: smaller graph has {len(small)} variables "
            f"(bound {max_vars})"
        )
    a_smaller = len(view_a.variables) <= len(view_b.variables)
    best_mapping: dict[str, str] = {}
    best_score = -1
    for image in permutations(large, len(small)):
        if a_smaller:
            mapping = dict(zip(view_a.variables, image))
        else:
            mapping = {a: b for b, a in zip(view_b.variables, image)}
        score = _match_count(view_a, view_b, mapping)
        if score > best_score:
            best_score, best_mapping = score, mapping
    return Alignment(mapping=tuple(sorted(best_mapping.items())), matched=max(0, best_score))


def _score_views(
    metric: str,
    view_a: _View,
    view_b: _View,
    restarts: int,
    seed: int,
    exact: bool,
    max_vars: int,
) -> tuple[ScoreEntry, Alignment]:
    if exact:
        alignment = _align_exact(view_a, view_b, max_vars)
    else:
        alignment = _align(view_a, view_b, restarts, seed)
    entry = ScoreEntry(metric, alignment.matched, len(view_a.triples), len(view_b.triples))
    return entry, alignment


def smatch(
    a: SemGraph,
    b: SemGraph,
    restarts: int = 5,
    seed: int = 0,
) -> tuple[ScoreEntry, Alignment]:
    """Score predicted graph ``a`` against gold graph ``b``.

    ``restarts`` counts total hill-climbing starts: the first is seeded
    by greedy concept pairing, the rest are uniformly random draws from
    the seeded generator.
    """
    return _score_views("smatch", _graph_view(a), _graph_view(b), restarts, seed, False, 0)


def smatch_exact(a: SemGraph, b: SemGraph, max_vars: int = 8) -> tuple[ScoreEntry, Alignment]:
    """Provably optimal alignment by exhaustive search over injective maps.

    Refuses pairs whose smaller graph exceeds ``max_vars`` variables.
    """
    return _score_views("smatch", _graph_view(a), _graph_view(b), 0, 0, True, max_vars)


def _strip_triple_senses(triples: Iterable[Triple]) -> list[Triple]:
    out = []
    for t in triples:
        if t.kind == "instance":
            out.append(t._replace(label=strip_sense(t.label)))
        elif t.kind == "top":
            out.append(t._replace(target=strip_sense(t.target)))
        else:
            out.append(t)
    return out


def _unlabel(triples: Iterable[Triple]) -> list[Triple]:
    return [
        t._replace(label=":rel") if t.kind in ("relation", "attribute") else t
        for t in triples
    ]


def _restrict_roles(triples: Iterable[Triple], roles: frozenset[str]) -> list[Triple]:
    return [
        t for t in triples
        if t.kind == "relation" and (t.label in roles or invert_role(t.label) in roles)
    ]


def _restrict_reentrant(triples: Sequence[Triple]) -> list[Triple]:
    indegree: Counter[str] = Counter(t.target for t in triples if t.kind == "relation")
    kept = [t for t in triples if t.kind == "relation" and indegree[t.target] >= 2]
    involved = {v for t in kept for v in (t.source, t.target)}
    kept += [t for t in triples if t.kind == "instance" and t.source in involved]
    return kept


def _bag_entry(metric: str, bag_a: Counter, bag_b: Counter) -> ScoreEntry:
    matched = sum(min(n, bag_b[item]) for item, n in bag_a.items())
    return ScoreEntry(metric, matched, sum(bag_a.values()), sum(bag_b.values()))


def _concept_bag(triples: Iterable[Triple]) -> Counter:
    return Counter(t.label for t in triples if t.kind == "instance")


def _negation_bag(triples: Sequence[Triple]) -> Counter:
    concepts = {t.source: t.label for t in triples if t.kind == "instance"}
    return Counter(
        concepts.get(t.source, t.source)
        for t in triples
        if t.kind == "attribute" and t.label == ":polarity" and t.target == "-"
    )


def _name_bag(triples: Sequence[Triple]) -> Counter:
    """Bag of (entity concept, ordered op-string tuple) name subgraphs."""
    concepts = {t.source: t.label for t in triples if t.kind == "instance"}
    ops: dict[str, list[tuple[int, str]]] = defaultdict(list)
    for t in triples:
        if t.kind == "attribute" and t.label.startswith(":op") and t.label[3:].isdigit():
            ops[t.source].append((int(t.label[3:]), t.target))
    bag: Counter = Counter()
    for t in triples:
        if t.kind == "relation" and t.label == ":name":
            parts = tuple(v for _, v in sorted(ops.get(t.target, ())))
            bag[(concepts.get(t.source, t.source), parts)] += 1
    return bag


BAG_METRICS = ("concepts", "negations", "named_entity")


def transform_triples(triples: Sequence[Triple], metric: str, scheme: str = "wiser") -> list[Triple]:
    """The triple set an alignment metric actually scores.

    Restrictions are computed from the given triples alone, so applying a
    transform to its own output is the identity: deleting everything
    outside a metric's restriction cannot change that metric's score.
    """
    if metric == "smatch":
        return list(triples)
    if metric == "unlabeled":
        return _unlabel(triples)
    if metric == "no_wsd":
        return _strip_triple_senses(triples)
    if metric == "srl":
        return _restrict_roles(triples, SRL_ROLES)
    if metric == "xsrl":
        return _restrict_roles(triples, xsrl_role_set(scheme))
    if metric == "reentrancies":
        return _restrict_reentrant(tuple(triples))
    raise ValueError(f"{metric!r} is not an alignment metric")


def score_triples(
    metric: str,
    triples_a: Sequence[Triple],
    triples_b: Sequence[Triple],
    restarts: int = 5,
    seed: int = 0,
    exact: bool = False,
    max_vars: int = 8,
) -> ScoreEntry:
    """Align and score two prepared triple sets (variables are inferred)."""
    view_a = _View.from_triples(triples_a)
    view_b = _View.from_triples(triples_b)
    entry, _ = _score_views(metric, view_a, view_b, restarts, seed, exact, max_vars)
    return entry


def fine_grained(
    a: SemGraph,
    b: SemGraph,
    metric: str,
    scheme: str = "wiser",
    restarts: int = 5,
    seed: int = 0,
    exact: bool = False,
    max_vars: int = 8,
) -> ScoreEntry:
    """Score one named metric for a (predicted, gold) pair.

    Alignment metrics are Smatch over a documented transform of the
    normalized triple sets; ``concepts``, ``negations``, and
    ``named_entity`` compare bags directly. ``scheme`` selects the xSRL
    restriction set.
    """
    if metric not in METRIC_NAMES:
        raise ValueError(f"unknown metric {metric!r}")
    ta = extract_triples(normalize(a))
    tb = extract_triples(normalize(b))

    if metric == "concepts":
        return _bag_entry(metric, _concept_bag(ta), _concept_bag(tb))
    if metric == "negations":
        return _bag_entry(metric, _negation_bag(ta), _negation_bag(tb))
    if metric == "named_entity":
        return _bag_entry(metric, _name_bag(ta), _name_bag(tb))

    return score_triples(
        metric,
        transform_triples(ta, metric, scheme),
        transform_triples(tb, metric, scheme),
        restarts=restarts, seed=seed, exact=exact, max_vars=max_vars,
    )


def score_corpus(
    pred: Sequence[SemGraph],
    gold: Sequence[SemGraph],
    metrics: Sequence[str] = DEFAULT_METRICS,
    scheme: str = "wiser",
    restarts: int = 5,
    seed: int = 0,
    exact: bool = False,
    max_vars: int = 8,
    jobs: int = 1,
) -> tuple[dict[str, ScoreEntry], list[dict[str, ScoreEntry]]]:
    """Micro-averaged corpus scores plus per-document entries.

    Documents are paired positionally (callers align by id first). Each
    pair is scored with a seed derived from the corpus seed and the
    document index, so results do not depend on worker count.
    """
    if len(pred) != len(gold):
        raise ValueError(f"corpus size mismatch: {len(pred)} predicted vs {len(gold)} gold")

    def score_pair(i: int) -> dict[str, ScoreEntry]:
        pair_seed = seed + i
        return {
            m: fine_grained(pred[i], gold[i], m, scheme=scheme, restarts=restarts,
                            seed=pair_seed, exact=exact, max_vars=max_vars)
            for m in metrics
        }

    if jobs > 1 and len(pred) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_doc = list(pool.map(score_pair, range(len(pred))))
    else:
        per_doc = [score_pair(i) for i in range(len(pred))]
    totals = {m: combine_entries(m, (doc[m] for doc in per_doc)) for m in metrics}
    return totals, per_doc


@dataclass(frozen=True)
class NovelRecallReport:
    found: int
    total: int
    novel_concepts: tuple[str, ...]

    @property
    def recall(self) -> float | None:
        """Fraction of novel (document, concept) occurrences recovered; None if no novelty."""
        if self.total == 0:
            return None
        return self.found / self.total


def concept_vocabulary(corpus: Iterable[SemGraph]) -> frozenset[str]:
    return frozenset(c for g in corpus for _, c in g.instances)


def novel_predicate_recall(
    gold: Sequence[SemGraph],
    pred: Sequence[SemGraph],
    training_vocab: frozenset[str],
    filter_vocab: frozenset[str] | None = None,
) -> NovelRecallReport:
    """Recall on gold concepts unseen in training.

    A gold concept is novel when absent from ``training_vocab``; with a
    cross-scheme ``filter_vocab`` it must also be absent there once its
    sense id is stripped. The denominator counts (document, concept)
    occurrences, and a hit requires the concept among the paired
    predicted document's instance concepts.
    """
    if len(gold) != len(pred):
        raise ValueError(f"corpus size mismatch: {len(gold)} gold vs {len(pred)} predicted")
    found = 0
    total = 0
    novel: set[str] = set()
    for g, p in zip(gold, pred):
        pred_concepts = {c for _, c in p.instances}
        for concept in {c for _, c in g.instances}:
            if concept in training_vocab:
                continue
            if filter_vocab is not None and strip_sense(concept) in filter_vocab:
                continue
            novel.add(concept)
            total += 1
            if concept in pred_concepts:
                found += 1
    return NovelRecallReport(found=found, total=total, novel_concepts=tuple(sorted(novel)))


@dataclass(frozen=True)
class IaaBatch:
    group: str
    batch_id: str
    score: float


@dataclass(frozen=True)
class IaaReport:
    batches: tuple[IaaBatch, ...]

    @property
    def macro_averages(self) -> dict[str, float]:
        grouped: dict[str, list[float]] = defaultdict(list)
        for b in self.batches:
            grouped[b.group].append(b.score)
        return {group: sum(scores) / len(scores) for group, scores in sorted(grouped.items())}


def iaa_batch_score(
    corpus_a: Sequence[SemGraph],
    corpus_b: Sequence[SemGraph],
    restarts: int = 5,
    seed: int = 0,
) -> float:
    """Corpus-level agreement between two annotators' parallel corpora."""
    if len(corpus_a) != len(corpus_b):
        raise ValueError(
            f"batch size mismatch between annotators: {len(corpus_a)} vs {len(corpus_b)}"
        )
    entries = [
        smatch(a, b, restarts=restarts, seed=seed + i)[0]
        for i, (a, b) in enumerate(zip(corpus_a, corpus_b))
    ]
    return combine_entries("smatch", entries).f1


def iaa_report(batches: Iterable[IaaBatch]) -> IaaReport:
    """Per-batch scores plus unweighted per-group macro averages."""
    return IaaReport(batches=tuple(batches))


@dataclass(frozen=True)
class StatsRow:
    source: str
    sentences: int
    tokens: int
    concepts: int
    relations: int
    reentrancies: int
    negations: int
    named_entities: int
    missing_snt: int = 0

    def add(self, other: "StatsRow", source: str | None = None) -> "StatsRow":
        return StatsRow(
            source=source or self.source,
            sentences=self.sentences + other.sentences,
            tokens=self.tokens + other.tokens,
            concepts=self.concepts + other.concepts,
            relations=self.relations + other.relations,
            reentrancies=self.reentrancies + other.reentrancies,
            negations=self.negations + other.negations,
            named_entities=self.named_entities + other.named_entities,
            missing_snt=self.missing_snt + other.missing_snt,
        )


@dataclass(frozen=True)
class StatsReport:
    rows: tuple[StatsRow, ...]
    total: StatsRow
    warnings: tuple[str, ...] = ()


def _doc_stats(g: SemGraph, source: str) -> StatsRow:
    ng = normalize(g)
    indegree: Counter[str] = Counter(t for _, _, t in ng.edges)
    snt = g.metadata.get("snt")
    return StatsRow(
        source=source,
        sentences=1,
        tokens=len(snt.split()) if snt else 0,
        concepts=len(ng.instances),
        relations=len(ng.edges) + len(ng.attributes),
        reentrancies=sum(max(0, n - 1) for n in indegree.values()),
        negations=sum(1 for _, r, v in ng.attributes if r == ":polarity" and v == "-"),
        named_entities=sum(1 for _, r, _ in ng.edges if r == ":name"),
        missing_snt=0 if snt else 1,
    )


def corpus_stats(corpus: Sequence[SemGraph], source_key: str | None = None) -> StatsReport:
    """Per-source and total corpus counts.

    Tokens come from whitespace-splitting each document's ``snt``
    metadata; documents without it are counted with a warning. Relations
    count edges plus attributes (instances and the top excluded);
    reentrancies sum max(0, in-degree - 1) over variables after
    normalization.
    """
    empty = StatsRow("", 0, 0, 0, 0, 0, 0, 0)
    by_source: dict[str, StatsRow] = {}
    order: list[str] = []
    total = StatsRow("total", 0, 0, 0, 0, 0, 0, 0)
    for i, g in enumerate(corpus):
        source = g.metadata.get(source_key, "(unknown)") if source_key else "all"
        row = _doc_stats(g, source)
        if source not in by_source:
            by_source[source] = empty
            order.append(source)
        by_source[source] = by_source[source].add(row, source=source)
        total = total.add(row, source="total")
    warnings = []
    if total.missing_snt:
        warnings.append(
            f"{total.missing_snt} document(s) lack 'snt' metadata; their token counts are omitted"
        )
    return StatsReport(
        rows=tuple(by_source[s] for s in order),
        total=total,
        warnings=tuple(warnings),
    )
