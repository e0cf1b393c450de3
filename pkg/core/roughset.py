"""
Rough-set attribute reduction.

Partitions induced by the indiscernibility relation, lower/upper
approximations, positive/negative/boundary regions, the dependency degree
gamma, the greedy Quick Reduct search and a brute-force reduct enumerator
used as an oracle on small tables.

Dependency degrees are compared as integer positive-region counts over the
same universe, never as floats.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple

import numpy as np

from core.decision_table import DecisionTable
from core.errors import DataError

logger = logging.getLogger(__name__)

DEFAULT_MAX_EXHAUSTIVE_ATTRS = 20

IndexSet = FrozenSet[int]


@dataclass(frozen=True)
class Partition:
    """Disjoint blocks of sample indices covering 0..universe_size-1."""
    blocks: Tuple[Tuple[int, ...], ...]
    universe_size: int

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]], universe_size: int) -> "Partition":
        """Build a canonical partition, checking disjointness and coverage."""
        canonical = sorted((tuple(sorted(int(i) for i in block)) for block in blocks), key=lambda b: b[0] if b else -1)
        seen: Set[int] = set()
        for block in canonical:
            if not block:
                raise DataError("partition blocks must be non-empty")
            if seen.intersection(block):
                raise DataError("partition blocks overlap")
            seen.update(block)
        if seen != set(range(universe_size)):
            raise DataError("partition blocks do not cover the universe")
        return cls(blocks=tuple(canonical), universe_size=universe_size)

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "Partition":
        """One block per distinct label, ordered by smallest member."""
        labels = np.asarray(labels)
        n = labels.shape[0]
        if n == 0:
            return cls(blocks=(), universe_size=0)
        _, first_index, inverse = np.unique(labels, axis=0, return_index=True, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        order = np.argsort(first_index, kind="stable")
        blocks = tuple(tuple(int(i) for i in np.flatnonzero(inverse == group)) for group in order)
        return cls(blocks=blocks, universe_size=n)

    def __len__(self) -> int:
        return len(self.blocks)

    def block_of(self, sample: int) -> Tuple[int, ...]:
        """Equivalence class [x] containing ``sample``."""
        for block in self.blocks:
            if sample in block:
                return block
        raise DataError(f"sample {sample} outside universe of size {self.universe_size}")

    def to_list(self) -> List[List[int]]:
        return [list(block) for block in self.blocks]


@dataclass(frozen=True)
class RegionReport:
    """Positive, negative and boundary regions of Q with respect to P."""
    positive: Tuple[int, ...]
    negative: Tuple[int, ...]
    boundary: Tuple[int, ...]

    def to_dict(self) -> Dict[str, List[int]]:
        return {
            "positive": list(self.positive),
            "negative": list(self.negative),
            "boundary": list(self.boundary),
        }


@dataclass
class ReductResult:
    """Outcome of a reduct search."""
    selected: List[int]
    gamma_trace: List[Tuple[int, float]]
    gamma_full: float
    reached_full: bool
    attribute_names: List[str] = field(default_factory=list)
    method: str = "quick"

    @property
    def selected_names(self) -> List[str]:
        if not self.attribute_names:
            return [str(a) for a in self.selected]
        return [self.attribute_names[a] for a in self.selected]

    @property
    def gamma_selected(self) -> float:
        return self.gamma_trace[-1][1] if self.gamma_trace else 0.0

    def to_dict(self) -> Dict[str, Any]:
        names = self.attribute_names
        return {
            "method": self.method,
            "selected": self.selected,
            "selected_names": self.selected_names,
            "gamma_trace": [
                {"attribute": names[a] if names else a, "index": a, "gamma": g}
                for a, g in self.gamma_trace
            ],
            "gamma_full": self.gamma_full,
            "dependency": dependency_kind(self.gamma_full),
            "reached_full": self.reached_full,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], attribute_names: Sequence[str] = ()) -> "ReductResult":
        return cls(
            selected=[int(a) for a in data["selected"]],
            gamma_trace=[(int(t["index"]), float(t["gamma"])) for t in data.get("gamma_trace", [])],
            gamma_full=float(data["gamma_full"]),
            reached_full=bool(data["reached_full"]),
            attribute_names=list(attribute_names) or list(data.get("attribute_names", [])),
            method=data.get("method", "quick"),
        )


def _check_attrs(table: DecisionTable, attrs: Iterable[int]) -> List[int]:
    indices = sorted({int(a) for a in attrs})
    for index in indices:
        if index < 0 or index >= table.n_attributes:
            raise DataError(f"attribute index {index} out of range 0..{table.n_attributes - 1}")
    return indices


def partition_by(table: DecisionTable, attrs: Iterable[int]) -> Partition:
    """
    Partition U/IND(attrs): samples with equal code tuples share a block.

    The empty attribute set yields a single block holding the whole universe.
    """
    indices = _check_attrs(table, attrs)
    if not indices:
        return Partition(blocks=(tuple(range(table.universe_size)),), universe_size=table.universe_size)
    return Partition.from_labels(table.condition[:, indices])


def decision_partition(table: DecisionTable) -> Partition:
    """Partition U/D induced by the decision attribute."""
    return Partition.from_labels(table.decision)


def lower_approx(p: Partition, target: Iterable[int]) -> IndexSet:
    """Union of the blocks of ``p`` entirely inside ``target``."""
    target = frozenset(target)
    result: Set[int] = set()
    for block in p.blocks:
        if target.issuperset(block):
            result.update(block)
    return frozenset(result)


def upper_approx(p: Partition, target: Iterable[int]) -> IndexSet:
    """Union of the blocks of ``p`` that intersect ``target``."""
    target = frozenset(target)
    result: Set[int] = set()
    for block in p.blocks:
        if not target.isdisjoint(block):
            result.update(block)
    return frozenset(result)


def approximation_accuracy(p: Partition, target: Iterable[int]) -> float:
    """|lower| / |upper|; 1.0 for an empty target."""
    upper = upper_approx(p, target)
    if not upper:
        return 1.0
    return len(lower_approx(p, target)) / len(upper)


def roughness(p: Partition, target: Iterable[int]) -> float:
    """1 - approximation accuracy."""
    return 1.0 - approximation_accuracy(p, target)


def regions(p: Partition, q: Partition) -> RegionReport:
    """
    Positive, negative and boundary regions of ``q`` with respect to ``p``.

    Args:
        p: Conditioning partition
        q: Target partition (usually the decision partition)

    Returns:
        RegionReport with sorted index tuples
    """
    if p.universe_size != q.universe_size:
        raise DataError(f"universe mismatch: {p.universe_size} vs {q.universe_size}")

    lower_union: Set[int] = set()
    upper_union: Set[int] = set()
    for block in q.blocks:
        lower_union |= lower_approx(p, block)
        upper_union |= upper_approx(p, block)

    universe = set(range(p.universe_size))
    return RegionReport(
        positive=tuple(sorted(lower_union)),
        negative=tuple(sorted(universe - upper_union)),
        boundary=tuple(sorted(upper_union - lower_union)),
    )


def positive_region(table: DecisionTable, attrs: Iterable[int]) -> Tuple[int, ...]:
    """POS_attrs(D) as a sorted index tuple."""
    return regions(partition_by(table, attrs), decision_partition(table)).positive


def positive_count(table: DecisionTable, attrs: Iterable[int]) -> int:
    """|POS_attrs(D)|: samples whose attrs-block is consistent on the decision."""
    return len(positive_region(table, attrs))


def gamma(table: DecisionTable, attrs: Iterable[int]) -> float:
    """Dependency degree |POS_attrs(D)| / |U|."""
    return positive_count(table, attrs) / table.universe_size


def dependency_kind(degree: float) -> str:
    """'total' for gamma = 1, 'none' for gamma = 0, otherwise 'partial'."""
    if degree >= 1.0:
        return "total"
    if degree <= 0.0:
        return "none"
    return "partial"


def _best_candidate(table: DecisionTable, selected: List[int], candidates: List[int],
                    workers: int) -> Tuple[int, int]:
    """Candidate with the largest positive count; lowest index wins ties."""
    def score(candidate: int) -> int:
        return positive_count(table, selected + [candidate])

    if workers > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(score, candidates))
    else:
        counts = [score(c) for c in candidates]

    best_index = int(np.argmax(counts))
    return candidates[best_index], counts[best_index]


def quick_reduct(table: DecisionTable, workers: int = 1) -> ReductResult:
    """
    Greedy forward selection of a reduct.

    Starting from the empty set, each pass adds the attribute giving the
    largest dependency degree, provided it strictly beats the current one.
    Stops once gamma equals gamma over all condition attributes. If a pass
    finds no strict improvement while gamma is still short, the lowest
    unused attribute is added and the search continues; when every
    attribute is used the search ends with ``reached_full`` false.

    Args:
        table: Decision table with at least one condition attribute
        workers: Threads used to score the candidates of a pass

    Returns:
        ReductResult
    """
    if table.n_attributes < 1:
        raise DataError("quick reduct needs at least one condition attribute")

    n = table.universe_size
    all_attrs = list(range(table.n_attributes))
    full_count = positive_count(table, all_attrs)
    selected: List[int] = []
    current = positive_count(table, selected)
    trace: List[Tuple[int, float]] = []

    while current < full_count and len(selected) < len(all_attrs):
        candidates = [a for a in all_attrs if a not in selected]
        best, best_count = _best_candidate(table, selected, candidates, workers)
        if best_count > current:
            selected.append(best)
            current = best_count
            trace.append((best, current / n))
            logger.info("Quick reduct: added '%s' (gamma=%.4f)", table.attribute_names[best], current / n)
            continue

        # no single attribute helps; keep going with the lowest unused one
        stalled = candidates[0]
        selected.append(stalled)
        logger.info("Quick reduct: no strict gain, adding '%s' to continue", table.attribute_names[stalled])
        after = positive_count(table, selected)
        if after > current:
            current = after
            trace.append((stalled, current / n))

    return ReductResult(
        selected=selected,
        gamma_trace=trace,
        gamma_full=full_count / n,
        reached_full=current == full_count,
        attribute_names=list(table.attribute_names),
        method="quick",
    )


def exhaustive_reducts(table: DecisionTable,
                       max_attrs: int = DEFAULT_MAX_EXHAUSTIVE_ATTRS) -> List[FrozenSet[int]]:
    """
    Every reduct of the table, by subset enumeration.

    A subset X is a reduct when gamma_X(D) = gamma_C(D) and removing any
    single attribute from X lowers the degree. Subsets are visited in
    increasing size, each size in lexicographic order.

    Args:
        table: Decision table
        max_attrs: Refuse tables with more condition attributes than this

    Returns:
        List of reducts as frozensets of attribute indices
    """
    n_attrs = table.n_attributes
    if n_attrs > max_attrs:
        raise DataError(f"{n_attrs} attributes exceed the exhaustive search cap of {max_attrs}")

    full_count = positive_count(table, range(n_attrs))
    counts: Dict[FrozenSet[int], int] = {}
    reducts: List[FrozenSet[int]] = []

    for size in range(n_attrs + 1):
        for combo in combinations(range(n_attrs), size):
            subset = frozenset(combo)
            count = positive_count(table, combo)
            counts[subset] = count
            if count != full_count:
                continue
            # subsets of size-1 were all visited in the previous round
            if all(counts[subset - {a}] != count for a in subset):
                reducts.append(subset)

    logger.info("Exhaustive search found %d reducts", len(reducts))
    return reducts


def minimal_reducts(reducts: Sequence[FrozenSet[int]]) -> List[FrozenSet[int]]:
    """Reducts of minimum cardinality."""
    if not reducts:
        return []
    smallest = min(len(r) for r in reducts)
    return [r for r in reducts if len(r) == smallest]


def core_attributes(reducts: Sequence[Iterable[int]]) -> FrozenSet[int]:
    """Intersection of all reducts."""
    if not reducts:
        raise DataError("core of an empty reduct list is undefined")
    sets = [frozenset(r) for r in reducts]
    return frozenset.intersection(*sets)


def exhaustive_reduct_result(table: DecisionTable,
                             max_attrs: int = DEFAULT_MAX_EXHAUSTIVE_ATTRS) -> ReductResult:
    """
    Pick the lexicographically first minimal reduct as a ReductResult.

    The trace lists the dependency degree after each attribute of the
    chosen reduct is added in index order.
    """
    reducts = exhaustive_reducts(table, max_attrs)
    chosen = sorted(minimal_reducts(reducts)[0]) if reducts else []
    n = table.universe_size
    trace = []
    prefix: List[int] = []
    last = positive_count(table, prefix)
    for attr in chosen:
        prefix.append(attr)
        count = positive_count(table, prefix)
        if count > last:
            trace.append((attr, count / n))
            last = count
    full_count = positive_count(table, range(table.n_attributes))
    return ReductResult(
        selected=chosen,
        gamma_trace=trace,
        gamma_full=full_count / n,
        reached_full=last == full_count,
        attribute_names=list(table.attribute_names),
        method="exhaustive",
    )
