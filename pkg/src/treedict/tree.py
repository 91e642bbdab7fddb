"""Binary partition tree and its FIFO and priority-queue builders."""

from __future__ import annotations

import heapq
import json
import math
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .clustering import ClusteringMethod, split
from .data import DataSet
from .dictionary import RepresentativePolicy, representative


@dataclass
class TreeNode:
    id: int
    indices: np.ndarray
    level: int
    k: int
    representative: np.ndarray
    children: Optional[tuple] = None
    parent: Optional[int] = None
    maxoid_hint: Optional[np.ndarray] = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class BranchEvent:
    node: int
    objective: float
    variance: float


@dataclass
class BuildConfig:
    strategy: str = "fifo"
    mincard: int = 1
    epsilon: float = 0.0
    K: Optional[int] = None
    clustering: ClusteringMethod = field(default_factory=ClusteringMethod)
    representative: RepresentativePolicy = field(default_factory=RepresentativePolicy)

    def __post_init__(self):
        if self.strategy not in ("fifo", "priority"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.mincard < 1:
            raise ValueError("mincard must be >= 1")
        if self.strategy == "fifo" and not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")
        if self.strategy == "priority" and (self.K is None or self.K < 2):
            raise ValueError("the priority strategy needs K >= 2")
        if self.representative.kind == "maxoid" and self.clustering.kind != "two_maxoids":
            raise ValueError("maxoid representatives need two_maxoids clustering")

    def describe(self) -> dict:
        return {
            "strategy": self.strategy,
            "mincard": self.mincard,
            "epsilon": self.epsilon,
            "K": self.K,
            "clustering": self.clustering.kind,
            "representative": str(self.representative),
        }


@dataclass
class PartitionTree:
    nodes: dict
    root: int = 0
    build_log: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def leaves(self) -> list:
        """Leaf nodes in creation (node id) order."""
        return [self.nodes[i] for i in sorted(self.nodes) if self.nodes[i].is_leaf]

    def internal(self) -> list:
        return [self.nodes[i] for i in sorted(self.nodes) if not self.nodes[i].is_leaf]

    def subtree(self, node_id: int, max_depth: int) -> list:
        """Nodes of the subtree rooted at ``node_id`` down to ``max_depth`` levels below it."""
        if node_id not in self.nodes:
            raise KeyError(f"unknown node id {node_id}")
        out, queue = [], deque([(node_id, 0)])
        while queue:
            nid, depth = queue.popleft()
            node = self.nodes[nid]
            out.append(node)
            if node.children and depth < max_depth:
                queue.extend((c, depth + 1) for c in node.children)
        return out

    @property
    def depth(self) -> int:
        return max(n.level for n in self.nodes.values())

    def validate(self, N: Optional[int] = None) -> list:
        return validate(self, N)

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "config": self.config,
            "nodes": [
                {
                    "id": n.id,
                    "level": n.level,
                    "k": n.k,
                    "parent": n.parent,
                    "children": list(n.children) if n.children else None,
                    "indices": [int(i) for i in n.indices],
                    "representative": np.asarray(n.representative).reshape(-1).tolist(),
                    "shape": list(np.shape(n.representative)),
                    "maxoid_hint": None if n.maxoid_hint is None
                    else np.asarray(n.maxoid_hint).reshape(-1).tolist(),
                }
                for n in (self.nodes[i] for i in sorted(self.nodes))
            ],
            "build_log": [
                {"node": e.node, "objective": e.objective, "variance": e.variance}
                for e in self.build_log
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PartitionTree":
        nodes = {}
        for d in obj["nodes"]:
            shape = tuple(d["shape"])
            hint = d.get("maxoid_hint")
            nodes[d["id"]] = TreeNode(
                id=d["id"],
                indices=np.array(d["indices"], dtype=int),
                level=d["level"],
                k=d["k"],
                representative=np.array(d["representative"], dtype=float).reshape(shape),
                children=tuple(d["children"]) if d["children"] else None,
                parent=d["parent"],
                maxoid_hint=None if hint is None else np.array(hint, dtype=float).reshape(shape),
            )
        log = [BranchEvent(e["node"], e["objective"], e["variance"]) for e in obj["build_log"]]
        return cls(nodes, obj["root"], log, obj.get("config", {}))

    def save(self, path):
        tmp = f"{path}.tmp"
        with open(tmp, "w") as fh:
            json.dump(self.to_json(), fh)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "PartitionTree":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def node_variance(data: DataSet, node) -> float:
    """Mean squared Frobenius distance of the node's samples to their centroid."""
    X = data.subset(node.indices)
    if len(X) == 0:
        raise ValueError("empty node")
    return float(np.sum(np.square(X - X.mean(axis=0))) / len(X))


class _Builder:
    def __init__(self, data: DataSet, cfg: BuildConfig):
        self.data, self.cfg = data, cfg
        self.nodes = {}
        self.log = []
        self._variance = {}

    def variance(self, node) -> float:
        if node.id not in self._variance:
            self._variance[node.id] = node_variance(self.data, node)
        return self._variance[node.id]

    def make_node(self, indices, level, k, parent=None, hint=None) -> TreeNode:
        node = TreeNode(len(self.nodes), np.sort(np.asarray(indices, dtype=int)), level, k,
                        None, parent=parent, maxoid_hint=hint)
        node.representative = representative(self.data, node, self.cfg.representative)
        self.nodes[node.id] = node
        return node

    def make_root(self) -> TreeNode:
        hint = None
        if self.cfg.clustering.kind == "two_maxoids":
            # the root has no sibling maxoid; use its most central sample
            X = self.data.values
            j = int(np.argmin(np.sum(np.square(X - X.mean(axis=0)), axis=1)))
            hint = self.data.sample(j)
        return self.make_node(np.arange(self.data.N), 0, 0, hint=hint)

    def branch(self, node: TreeNode, res) -> tuple:
        hints = res.hints or (None, None)
        left = self.make_node(res.left, node.level + 1, 2 * node.k, node.id, hints[0])
        right = self.make_node(res.right, node.level + 1, 2 * node.k + 1, node.id, hints[1])
        node.children = (left.id, right.id)
        self.log.append(BranchEvent(node.id, float(res.objective), self.variance(node)))
        return left, right

    def tree(self) -> PartitionTree:
        return PartitionTree(self.nodes, 0, self.log, self.cfg.describe())


def build_fifo(data: DataSet, cfg: BuildConfig) -> PartitionTree:
    """Breadth-first construction.

    A dequeued node is branched only if it holds more than ``mincard``
    samples and the proposed split's objective exceeds ``epsilon``;
    otherwise the proposal is discarded and the node stays a leaf.
    """
    b = _Builder(data, cfg)
    queue = deque([b.make_root()])
    while queue:
        node = queue.popleft()
        if len(node) <= cfg.mincard:
            continue
        res = split(data, node.indices, cfg.clustering)
        if res.objective > cfg.epsilon:
            queue.extend(b.branch(node, res))
    return b.tree()


def build_priority(data: DataSet, cfg: BuildConfig) -> PartitionTree:
    """Branch the highest-variance node first, stopping after ``K - 1`` branchings.

    The root is always visited first.  Equal variances are served in node id
    order.
    """
    b = _Builder(data, cfg)
    root = b.make_root()
    heap = [(-math.inf, root.id)]
    branchings = 0
    while heap and branchings < cfg.K - 1:
        _, nid = heapq.heappop(heap)
        node = b.nodes[nid]
        if len(node) <= cfg.mincard:
            continue
        res = split(data, node.indices, cfg.clustering)
        for child in b.branch(node, res):
            heapq.heappush(heap, (-b.variance(child), child.id))
        branchings += 1
    return b.tree()


def build(data: DataSet, cfg: BuildConfig) -> PartitionTree:
    return (build_fifo if cfg.strategy == "fifo" else build_priority)(data, cfg)


def validate(tree: PartitionTree, N: Optional[int] = None) -> list:
    """Check the structural invariants; returns a list of violation strings."""
    problems = []
    nodes = tree.nodes
    if tree.root not in nodes:
        return [f"root: node {tree.root} missing"]
    root = nodes[tree.root]
    if root.level != 0 or root.parent is not None:
        problems.append("root: root must have level 0 and no parent")
    if N is None:
        N = len(root.indices)
    if not np.array_equal(np.sort(root.indices), np.arange(N)):
        problems.append("root: root indices must be 0..N-1")
    for node in nodes.values():
        if len(node.indices) == 0:
            problems.append(f"nonempty: node {node.id} is empty")
        if node.children is None:
            continue
        if len(node.children) != 2 or any(c not in nodes for c in node.children):
            problems.append(f"children: node {node.id} has invalid children {node.children}")
            continue
        a, b = (nodes[c] for c in node.children)
        for c in (a, b):
            if c.parent != node.id:
                problems.append(f"parent: node {c.id} does not point back to {node.id}")
            if c.level != node.level + 1:
                problems.append(f"level: node {c.id} level {c.level} under level {node.level}")
        if len(a.indices) == 0 or len(b.indices) == 0:
            problems.append(f"partition: node {node.id} has an empty child")
        if np.intersect1d(a.indices, b.indices).size:
            problems.append(f"partition: children of node {node.id} overlap")
        if not np.array_equal(np.sort(np.concatenate([a.indices, b.indices])), np.sort(node.indices)):
            problems.append(f"partition: children of node {node.id} do not cover it")
    leaf_idx = np.concatenate([n.indices for n in tree.leaves()]) if tree.leaves() else np.array([])
    if not np.array_equal(np.sort(leaf_idx), np.arange(N)):
        problems.append("coverage: leaves do not cover every sample exactly once")
    logged = [e.node for e in tree.build_log]
    if sorted(logged) != sorted(n.id for n in tree.internal()):
        problems.append("build_log: logged branchings differ from internal nodes")
    return problems
