"""Label-budget policies and train/validation/test splits.

Policies:

* ``df``  - class-stratified uniform draw (the usual fixed-labels-per-class split)
* ``mc``  - highest centrality first
* ``lc``  - lowest centrality first
* ``ecm`` - half of the budget from the ``mc`` ranking, the rest from ``lc``

All rankings break ties by ascending node index.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .rng import generator


class Policy(str, enum.Enum):
    DF = "df"
    MC = "mc"
    LC = "lc"
    ECM = "ecm"

    @classmethod
    def parse(cls, name: str) -> "Policy":
        try:
            return cls(name.lower())
        except ValueError:
            valid = " | ".join(p.value for p in cls)
            raise ValueError(f"unknown policy {name!r}; expected one of {valid}") from None

    @property
    def needs_centrality(self) -> bool:
        return self is not Policy.DF


@dataclass(frozen=True, eq=False)
class Split:
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray
    budget: int
    labeling_rate: float

    @property
    def train_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.train_mask)


def budget_for_rate(rate: float, num_nodes: int) -> int:
    """``round(rate * num_nodes)`` with halves rounded up, at least 1."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"labeling rate must be in (0, 1], got {rate}")
    return max(1, min(num_nodes, int(np.floor(rate * num_nodes + 0.5))))


def default_val_size(num_nodes: int) -> int:
    return min(500, num_nodes // 10)


def _descending(scores: np.ndarray) -> np.ndarray:
    # lexsort's last key is primary; index as secondary key breaks ties low-first
    idx = np.arange(scores.size)
    return np.lexsort((idx, -scores))


def _ascending(scores: np.ndarray) -> np.ndarray:
    idx = np.arange(scores.size)
    return np.lexsort((idx, scores))


def _take_ecm(scores: np.ndarray, budget: int) -> np.ndarray:
    top = _descending(scores)[: budget // 2]
    taken = np.zeros(scores.size, dtype=bool)
    taken[top] = True
    bottom = [i for i in _ascending(scores) if not taken[i]][: budget - top.size]
    return np.concatenate([top, np.asarray(bottom, dtype=np.int64)])


def _take_ranked(policy: Policy, scores: np.ndarray, budget: int) -> np.ndarray:
    if policy is Policy.MC:
        return _descending(scores)[:budget]
    if policy is Policy.LC:
        return _ascending(scores)[:budget]
    return _take_ecm(scores, budget)


def class_quotas(labels: np.ndarray, budget: int) -> np.ndarray:
    """Split ``budget`` over classes: equal shares, remainder to the lowest class
    indices, with any shortfall of a small class spilled round-robin to classes
    that still have unselected members."""
    sizes = np.bincount(labels)
    k = sizes.size
    quota = np.full(k, budget // k)
    quota[: budget % k] += 1
    short = np.maximum(quota - sizes, 0)
    if short.any():
        warnings.warn(
            f"classes {np.flatnonzero(short).tolist()} have fewer members than their "
            "label quota; spilling the remainder to other classes",
            RuntimeWarning,
            stacklevel=3,
        )
        quota -= short
        spill = int(short.sum())
        while spill:
            for c in range(k):
                if spill and quota[c] < sizes[c]:
                    quota[c] += 1
                    spill -= 1
    return quota


def select_train_nodes(
    scores: np.ndarray | None,
    labels: np.ndarray,
    policy: Policy | str,
    budget: int,
    seed: int = 0,
    *,
    stratify: bool = False,
) -> np.ndarray:
    """Pick ``budget`` training nodes; returns sorted node indices.

    ``scores`` may be ``None`` for ``df``. With ``stratify`` the ranking
    policies are applied inside each class under the same per-class quotas
    that ``df`` uses.
    """
    policy = Policy.parse(policy) if isinstance(policy, str) else policy
    labels = np.asarray(labels)
    n = labels.size
    if not 1 <= budget <= n:
        raise ValueError(f"budget must be in [1, {n}], got {budget}")

    if policy is Policy.DF:
        rng = generator(seed, "select-df")
        quota = class_quotas(labels, budget)
        picked = []
        for c, q in enumerate(quota):
            members = np.flatnonzero(labels == c)
            picked.append(rng.permutation(members)[:q])
        return np.sort(np.concatenate(picked))

    if scores is None:
        raise ValueError(f"policy {policy.value!r} needs centrality scores")
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size != n:
        raise ValueError(f"{scores.size} scores for {n} labelled nodes")

    if not stratify:
        return np.sort(_take_ranked(policy, scores, budget))
    picked = []
    for c, q in enumerate(class_quotas(labels, budget)):
        members = np.flatnonzero(labels == c)
        if q:
            picked.append(members[_take_ranked(policy, scores[members], q)])
    return np.sort(np.concatenate(picked))


def make_split(
    g: Graph | int,
    train_nodes: np.ndarray,
    val_size: int,
    seed: int = 0,
) -> Split:
    """Validation = uniform draw of ``val_size`` non-train nodes; test = the rest.

    ``g`` may be the graph itself or just its node count.
    """
    num_nodes = g if isinstance(g, (int, np.integer)) else g.num_nodes
    train_nodes = np.asarray(train_nodes, dtype=np.int64)
    train_mask = np.zeros(num_nodes, dtype=bool)
    train_mask[train_nodes] = True
    if np.count_nonzero(train_mask) != train_nodes.size:
        raise ValueError("train_nodes contains duplicates")
    pool = np.flatnonzero(~train_mask)
    if not 0 <= val_size <= pool.size:
        raise ValueError(
            f"val_size {val_size} exceeds the {pool.size} nodes left after training selection"
        )
    rng = generator(seed, "split-val")
    val_mask = np.zeros(num_nodes, dtype=bool)
    val_mask[rng.choice(pool, size=val_size, replace=False)] = True
    test_mask = ~(train_mask | val_mask)
    return Split(
        train_mask,
        val_mask,
        test_mask,
        budget=int(train_nodes.size),
        labeling_rate=train_nodes.size / num_nodes if num_nodes else 0.0,
    )
