"""Self-check suite tying the tree construction to the classical Haar transform.

On a scalar data set of ``2**L`` samples, a balanced tree built by index
halving with centroid representatives satisfies

    A[l, k]  = 2**(-(L - l) / 2) * a[l, k]
    Dt[l, k] = 2**(1 + (l - L) / 2) * d[l, k]

where ``a``, ``d`` are the Haar approximation/detail coefficients and ``Dt``
is the unnormalized child difference.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .clustering import ClusteringMethod
from .data import DataSet
from .dictionary import extract_haar
from .haar import haar_analysis, haar_explicit, haar_reconstruction
from .tree import BuildConfig, build_priority


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def halving_tree(signal):
    """Balanced index-halving tree over the scalar samples of ``signal``."""
    data = DataSet(np.asarray(signal, dtype=float).reshape(-1, 1), (1,))
    K = max(data.N, 2)
    cfg = BuildConfig("priority", mincard=1, K=K, clustering=ClusteringMethod("halving"))
    return data, build_priority(data, cfg)


def approx_by_level(coeffs):
    """All approximation coefficients a[j] for j = 0..L, from the details."""
    a = [np.array([coeffs.a00])]
    for d in coeffs.details:
        prev = a[-1]
        nxt = np.empty(2 * prev.size)
        nxt[0::2] = (prev + d) / np.sqrt(2)
        nxt[1::2] = (prev - d) / np.sqrt(2)
        a.append(nxt)
    return a


def equivalence_errors(data, tree, coeffs) -> tuple:
    """Max deviations of centroids, differences and normalized atoms from the Haar identities."""
    L = coeffs.L
    a = approx_by_level(coeffs)
    rep_err = diff_err = atom_err = 0.0
    for node in tree.nodes.values():
        expect = 2.0 ** (-(L - node.level) / 2) * a[node.level][node.k]
        rep_err = max(rep_err, abs(float(node.representative.reshape(-1)[0]) - expect))
        if node.children:
            left, right = (tree.nodes[c] for c in node.children)
            dt = float(left.representative.reshape(-1)[0] - right.representative.reshape(-1)[0])
            d = coeffs.details[node.level][node.k]
            diff_err = max(diff_err, abs(dt - 2.0 ** (1 + (node.level - L) / 2) * d))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        dictionary = extract_haar(tree, data)
    for atom in dictionary.atoms[1:]:
        node = tree.nodes[atom.source_node]
        d = coeffs.details[node.level][node.k]
        atom_err = max(atom_err, abs(abs(float(atom.vector.reshape(-1)[0])) - (1.0 if d != 0 else 0.0)))
    return rep_err, diff_err, atom_err


def haar_check(L: int, seed: int = 0, trials: int = 20, corrupt: bool = False) -> list:
    """Run the classical transform and tree-equivalence checks for signals of length 2**L.

    ``corrupt`` moves one sample between two leaves of the tree before
    checking, which must make the suite fail.
    """
    if not 0 <= L <= 16:
        raise ValueError("L must be in 0..16")
    rng = np.random.default_rng(seed)
    worst = {"perfect_reconstruction": 0.0, "energy": 0.0, "explicit_formula": 0.0,
             "centroid_scaling": 0.0, "difference_scaling": 0.0, "normalized_atoms": 0.0}
    tree_problems = []
    for _ in range(trials):
        x = rng.standard_normal(2**L)
        c = haar_analysis(x)
        scale = max(1.0, float(np.linalg.norm(x)))
        worst["perfect_reconstruction"] = max(worst["perfect_reconstruction"],
                                              float(np.max(np.abs(haar_reconstruction(c) - x))) / scale)
        worst["energy"] = max(worst["energy"],
                              abs(float(np.linalg.norm(c.vector())) - float(np.linalg.norm(x))) / scale)
        a = approx_by_level(c)
        for colevel in range(L + 1):
            lvl = L - colevel
            for k in range(2**lvl):
                ea, ed = haar_explicit(x, colevel, k)
                err = abs(ea - a[lvl][k])
                if ed is not None:
                    err = max(err, abs(ed - c.details[lvl][k]))
                worst["explicit_formula"] = max(worst["explicit_formula"], err / scale)
        if L <= 12:
            data, tree = halving_tree(x)
            if corrupt and len(tree.leaves()) > 1:
                first, second = tree.leaves()[:2]
                moved = first.indices[0]
                first.indices = first.indices[1:]
                second.indices = np.sort(np.append(second.indices, [moved, moved]))
            tree_problems.extend(tree.validate(data.N))
            errs = equivalence_errors(data, tree, c)
            for name, e in zip(("centroid_scaling", "difference_scaling", "normalized_atoms"), errs):
                worst[name] = max(worst[name], e / scale)
    tol = {"energy": 1e-10}
    results = [CheckResult(name, bool(err <= tol.get(name, 1e-12)), f"max error {err:.3e}")
               for name, err in worst.items()]
    results.append(CheckResult("tree_valid", not tree_problems,
                               "; ".join(sorted(set(tree_problems))) or "ok"))
    return results
