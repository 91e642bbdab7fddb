import numpy as np
import pytest

from treedict.checks import halving_tree
from treedict.clustering import ClusteringMethod
from treedict.data import DataSet, frobenius_norm
from treedict.dictionary import (
    Dictionary,
    DictionaryError,
    RepresentativePolicy,
    extract_haar,
    extract_leaves,
    representative,
    subdictionary_by_depth,
)
from treedict.haar import haar_analysis
from treedict.tree import BuildConfig, build_fifo, build_priority

# toy centroids as published, rounded to two decimals
PRINTED = {
    "A00": [[1.13, 0.25, 0], [1.5, 2.38, 0.13], [0.63, 1.88, 3.38]],
    "A10": [[0.83, 0, 0], [0.67, 1.5, 0], [0.17, 0.5, 2.5]],
    "A11": [[2, 1, 0], [4, 5, 0.5], [2, 6, 6]],
    "A20": [[1, 0, 0], [0.67, 2, 0], [0, 0.67, 4.3]],
    "A21": [[0.67, 0, 0], [0.67, 1, 0], [0.33, 0.33, 0.67]],
}


def printed_tolerance(name):
    # half-up rounding lands exactly on the 0.005 bound (1.125 -> 1.13)
    tol = np.full((3, 3), 0.005 + 1e-12)
    if name == "A20":
        tol[2, 2] = 0.05 + 1e-12  # printed with a single decimal
    return tol


@pytest.fixture
def toy_tree(toy):
    return build_fifo(toy, BuildConfig("fifo", mincard=3, epsilon=1.0))


def test_representatives_match_printed(toy, toy_tree):
    names = {0: "A00", 1: "A10", 2: "A11", 3: "A20", 4: "A21"}
    for nid, name in names.items():
        rep = representative(toy, toy_tree.nodes[nid])
        assert np.all(np.abs(rep - np.array(PRINTED[name])) <= printed_tolerance(name)), name
        np.testing.assert_array_equal(rep, toy_tree.nodes[nid].representative)


def test_representative_singleton(toy):
    node = type("N", (), {"indices": np.array([2]), "maxoid_hint": None, "id": 0})()
    np.testing.assert_array_equal(representative(toy, node), toy.sample(2))
    np.testing.assert_allclose(representative(toy, node, RepresentativePolicy("dct_mterm", 9)), toy.sample(2),
                               atol=1e-12)
    # the third toy patch has rank 2
    np.testing.assert_allclose(representative(toy, node, RepresentativePolicy("rank_r", 2)), toy.sample(2),
                               atol=1e-12)
    with pytest.raises(DictionaryError):
        representative(toy, node, RepresentativePolicy("maxoid"))


def test_haar_toy(toy, toy_tree):
    d = extract_haar(toy_tree, toy)
    assert d.K == 3
    A = {i: toy.subset(toy_tree.nodes[i].indices).mean(0) for i in toy_tree.nodes}
    expected = [A[0], A[1] - A[2], A[3] - A[4]]
    for atom, e in zip(d.atoms, expected):
        np.testing.assert_allclose(atom.vector.reshape(-1), e / np.linalg.norm(e), atol=1e-12)
    assert [a.kind for a in d.atoms] == ["lowpass", "difference", "difference"]
    assert [a.level for a in d.atoms] == [0, 0, 1]
    assert [a.order for a in d.atoms] == [0, 1, 2]
    assert all(abs(frobenius_norm(a.vector) - 1) <= 1e-12 for a in d.atoms)


def test_leaves_toy(toy, toy_tree):
    d = extract_leaves(toy_tree, toy)
    assert d.K == 4 == extract_haar(toy_tree, toy).K + 1
    assert [a.source_node for a in d.atoms] == [0, 2, 3, 4]
    for atom in d.atoms:
        rep = toy.subset(toy_tree.nodes[atom.source_node].indices).mean(0)
        np.testing.assert_allclose(atom.vector.reshape(-1), rep / np.linalg.norm(rep), atol=1e-12)


def test_root_only(toy):
    tree = build_fifo(toy, BuildConfig("fifo", mincard=8))
    dh, dl = extract_haar(tree, toy), extract_leaves(tree, toy)
    assert dh.K == 1 and dl.K == 2
    for d in (dh, dl):
        np.testing.assert_allclose(d.atoms[0].vector.reshape(-1),
                                   toy.values.mean(0) / np.linalg.norm(toy.values.mean(0)))


def test_haar_scalar_balanced_tree():
    data, tree = halving_tree([4.0, 2.0, 5.0, 5.0])
    c = haar_analysis([4.0, 2.0, 5.0, 5.0])
    assert c.a00 == pytest.approx(8) and c.details[0][0] == pytest.approx(-2)
    np.testing.assert_allclose(c.details[1], [np.sqrt(2), 0], atol=1e-15)
    with pytest.warns(UserWarning, match="zero difference"):
        d = extract_haar(tree, data)
    # D(1,1) vanishes; remaining atoms are signs of the details
    assert d.K == 3
    assert [float(a.vector[0]) for a in d.atoms] == [1.0, -1.0, 1.0]


def test_zero_root_rejected():
    data = DataSet(np.array([[1.0, 0.0], [-1.0, 0.0]]))
    tree = build_fifo(data, BuildConfig())
    with pytest.raises(DictionaryError):
        extract_haar(tree, data)


def test_subdictionary(toy, toy_tree):
    d = extract_haar(toy_tree, toy)
    assert [a.order for a in subdictionary_by_depth(d, 0).atoms] == [0]
    assert [a.source_node for a in subdictionary_by_depth(d, 1).atoms] == [0, 0]
    assert subdictionary_by_depth(d, 1).atoms[1].kind == "difference"
    assert subdictionary_by_depth(d, 5).K == d.K
    with pytest.raises(DictionaryError):
        subdictionary_by_depth(extract_leaves(toy_tree, toy), 1)


@pytest.mark.parametrize("policy", ["centroid", "rank_r:1", "rank_r:2", "dct_mterm:3"])
def test_policy_changes_atoms_not_tree(toy, toy_tree, policy):
    pol = RepresentativePolicy.parse(policy)
    dh, dl = extract_haar(toy_tree, toy, pol), extract_leaves(toy_tree, toy, pol)
    assert dh.K == 3 and dl.K == 4
    assert all(abs(frobenius_norm(a.vector) - 1) <= 1e-12 for a in dh.atoms + dl.atoms)
    if pol.kind == "rank_r":
        assert all(np.linalg.matrix_rank(a.vector, tol=1e-10) <= 2 * pol.param for a in dh.atoms)


def test_maxoid_policy(rng):
    data = DataSet(rng.standard_normal((30, 4)), (2, 2))
    cfg = BuildConfig("priority", K=6, clustering=ClusteringMethod("two_maxoids"),
                      representative=RepresentativePolicy("maxoid"))
    tree = build_priority(data, cfg)
    for node in tree.nodes.values():
        assert any(np.array_equal(node.representative.reshape(-1), data.values[i]) for i in node.indices)
    assert extract_haar(tree, data).K == 6
    with pytest.raises(ValueError):
        BuildConfig("fifo", representative=RepresentativePolicy("maxoid"))


def test_dictionary_serialization(tmp_path, toy, toy_tree):
    d = extract_haar(toy_tree, toy)
    d.save(tmp_path / "d.json")
    back = Dictionary.load(tmp_path / "d.json")
    assert back.kind == "haar" and back.shape == (3, 3) and back.K == 3
    np.testing.assert_array_equal(back.matrix, d.matrix)
    d.save_matrix_csv(tmp_path / "d.csv")
    np.testing.assert_array_equal(np.loadtxt(tmp_path / "d.csv", delimiter=","), d.matrix)


def test_leaves_one_more_than_haar(rng):
    for seed in range(20):
        data = DataSet(np.random.default_rng(seed).standard_normal((25, 4)))
        tree = build_fifo(data, BuildConfig("fifo", mincard=2, epsilon=0.5))
        assert extract_leaves(tree, data).K == extract_haar(tree, data).K + 1
        assert [a.source_node for a in extract_haar(tree, data).atoms[1:]] == [e.node for e in tree.build_log]
