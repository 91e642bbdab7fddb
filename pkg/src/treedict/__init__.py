"""Tree-based multiscale dictionary learning.

Training data are split recursively by a two-way clustering into a binary
partition tree.  The tree yields a Haar dictionary (root low-pass atom plus
normalized differences of sibling representatives) and a leaves dictionary
(root low-pass atom plus normalized leaf representatives); data are then
sparse-coded against either with Orthogonal Matching Pursuit.
"""

from .clustering import ClusteringMethod, SplitResult, exhaustive_2means_oracle, split
from .data import DataSet, Preprocessor, frobenius_norm, load_csv, save_csv, spectral_norm
from .dictionary import (
    Atom,
    Dictionary,
    RepresentativePolicy,
    extract_haar,
    extract_leaves,
    representative,
    subdictionary_by_depth,
)
from .haar import HaarCoefficients, haar_analysis, haar_explicit, haar_reconstruction
from .omp import SparseCode, encode_all, omp_encode, usage_stats
from .tree import BuildConfig, PartitionTree, TreeNode, build, build_fifo, build_priority, node_variance, validate

__version__ = "0.1.0"

__all__ = [
    "Atom", "BuildConfig", "ClusteringMethod", "DataSet", "Dictionary", "HaarCoefficients", "PartitionTree",
    "Preprocessor", "RepresentativePolicy", "SparseCode", "SplitResult", "TreeNode", "build", "build_fifo",
    "build_priority", "encode_all", "exhaustive_2means_oracle", "extract_haar", "extract_leaves",
    "frobenius_norm", "haar_analysis", "haar_explicit", "haar_reconstruction", "load_csv", "node_variance",
    "omp_encode", "representative", "save_csv", "spectral_norm", "split", "subdictionary_by_depth",
    "usage_stats", "validate",
]
