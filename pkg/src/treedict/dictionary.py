"""Haar and leaves dictionaries extracted from a partition tree."""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import DataSet, dct_mterm_approx, frobenius_norm, rank_r_approx

POLICY_KINDS = ("centroid", "maxoid", "rank_r", "dct_mterm")


class DictionaryError(ValueError):
    pass


@dataclass(frozen=True)
class RepresentativePolicy:
    kind: str = "centroid"
    param: int = 0

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown representative policy {self.kind!r}")
        if self.kind in ("rank_r", "dct_mterm") and self.param < 1:
            raise ValueError(f"{self.kind} needs a parameter >= 1")

    @classmethod
    def parse(cls, text: str) -> "RepresentativePolicy":
        """Parse ``centroid``, ``maxoid``, ``rank_r:2`` or ``dct_mterm:5``."""
        kind, _, param = text.partition(":")
        return cls(kind, int(param) if param else 0)

    def __str__(self):
        return f"{self.kind}:{self.param}" if self.param else self.kind


def representative(data: DataSet, node, policy: RepresentativePolicy = RepresentativePolicy()) -> np.ndarray:
    """Representative of a tree node as an (unnormalized) sample array."""
    idx = np.asarray(node.indices, dtype=int)
    if idx.size == 0:
        raise ValueError("empty node")
    if policy.kind == "maxoid":
        if node.maxoid_hint is None:
            raise DictionaryError(f"node {node.id} has no stored maxoid")
        return np.asarray(node.maxoid_hint, dtype=float).reshape(data.shape)
    centroid = data.subset(idx).mean(axis=0).reshape(data.shape)
    if policy.kind == "centroid":
        return centroid
    if policy.kind == "rank_r":
        return rank_r_approx(centroid, policy.param)
    return dct_mterm_approx(centroid, policy.param)


@dataclass
class Atom:
    vector: np.ndarray
    kind: str  # "lowpass" or "difference" (Haar) / "leaf" (leaves dictionary)
    source_node: int
    level: int
    order: int


@dataclass
class Dictionary:
    atoms: list
    kind: str  # "haar" or "leaves"
    shape: tuple
    provenance: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.atoms)

    @property
    def matrix(self) -> np.ndarray:
        """``(n, K)`` column matrix, atoms vectorized row-major."""
        return np.stack([a.vector.reshape(-1) for a in self.atoms], axis=1)

    @property
    def levels(self) -> np.ndarray:
        return np.array([a.level for a in self.atoms])

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "shape": list(self.shape),
            "provenance": self.provenance,
            "atoms": [
                {
                    "vector": a.vector.reshape(-1).tolist(),
                    "kind": a.kind,
                    "source_node": a.source_node,
                    "level": a.level,
                    "order": a.order,
                }
                for a in self.atoms
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Dictionary":
        shape = tuple(obj["shape"])
        atoms = [
            Atom(np.array(a["vector"], dtype=float).reshape(shape), a["kind"],
                 a["source_node"], a["level"], a["order"])
            for a in obj["atoms"]
        ]
        return cls(atoms, obj["kind"], shape, obj.get("provenance", {}))

    def save(self, path):
        _atomic_write(path, json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "Dictionary":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def save_matrix_csv(self, path):
        """Raw ``n x K`` column matrix, one row per vector coordinate."""
        tmp = f"{path}.tmp"
        np.savetxt(tmp, self.matrix, delimiter=",", fmt="%.17g")
        os.replace(tmp, path)


def _atomic_write(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _normalized(v):
    nrm = frobenius_norm(v)
    return None if nrm == 0 else v / nrm


def _reps(tree, data, policy):
    if policy is None:
        return {nid: node.representative for nid, node in tree.nodes.items()}
    return {nid: representative(data, node, policy) for nid, node in tree.nodes.items()}


def _lowpass(tree, reps):
    root = tree.nodes[tree.root]
    vec = _normalized(reps[tree.root])
    if vec is None:
        raise DictionaryError("root representative is zero and cannot be normalized")
    return Atom(vec, "lowpass", root.id, root.level, 0)


def extract_haar(tree, data: DataSet, policy: RepresentativePolicy | None = None) -> Dictionary:
    """Low-pass root atom plus one normalized child difference per branching.

    Differences are formed from the unnormalized representatives (left child
    minus right child).  With ``policy=None`` the representatives stored in
    the tree are used.
    """
    reps = _reps(tree, data, policy)
    atoms = [_lowpass(tree, reps)]
    for event in tree.build_log:
        node = tree.nodes[event.node]
        left, right = node.children
        vec = _normalized(reps[left] - reps[right])
        if vec is None:
            warnings.warn(f"dropping zero difference atom of node {node.id}", stacklevel=2)
            continue
        atoms.append(Atom(vec, "difference", node.id, node.level, len(atoms)))
    return Dictionary(atoms, "haar", data.shape, _provenance(tree, policy))


def extract_leaves(tree, data: DataSet, policy: RepresentativePolicy | None = None) -> Dictionary:
    """Low-pass root atom followed by the normalized leaf representatives.

    Leaves come in creation order, which is what maintaining the list
    incrementally during the build (remove parent, append both children)
    produces.
    """
    reps = _reps(tree, data, policy)
    atoms = [_lowpass(tree, reps)]
    for node in tree.leaves():
        vec = _normalized(reps[node.id])
        if vec is None:
            warnings.warn(f"dropping zero leaf atom of node {node.id}", stacklevel=2)
            continue
        atoms.append(Atom(vec, "leaf", node.id, node.level, len(atoms)))
    return Dictionary(atoms, "leaves", data.shape, _provenance(tree, policy))


def subdictionary_by_depth(d: Dictionary, max_level: int, tree=None) -> Dictionary:
    """Keep the low-pass atom and the difference atoms of nodes above ``max_level``."""
    if d.kind != "haar":
        raise DictionaryError("depth pruning applies to Haar dictionaries")
    if max_level < 0:
        raise ValueError("max_level must be >= 0")
    atoms = [a for a in d.atoms if a.kind == "lowpass" or a.level < max_level]
    prov = dict(d.provenance, max_level=max_level)
    return Dictionary(atoms, d.kind, d.shape, prov)


def _provenance(tree, policy):
    return {
        "strategy": tree.config.get("strategy"),
        "clustering": tree.config.get("clustering"),
        "representative": str(policy) if policy is not None else tree.config.get("representative"),
        "nodes": len(tree.nodes),
        "branchings": len(tree.build_log),
    }
