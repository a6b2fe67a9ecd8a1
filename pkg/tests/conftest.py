"""Shared fixtures: the four-leaf worked example and its data matrix."""

import numpy as np
import pytest

from bmtree.trees import parse_tree

# Four leaves, two cherries {1,2} and {3,4}; vertices 5 = lca(1,2),
# 6 = lca(3,4), 7 = root child.  This is the running example whose
# covariance entries, ideal generators, trek sums, and fitted estimates are
# all known in closed form.
FIG1_NEWICK = "((1:1,2:1):1,(3:1,4:1):1):1;"

STAR5_NEWICK = "(1:1,2:1,3:1,4:1):1;"

CLADE3_NEWICK = "((1:1,2:1):1,3:1):1;"

# Reference data matrix for the MLE reproduction tests.
DATA4 = np.array(
    [
        [5.0, 3.0, 1.0, 2.0],
        [3.0, 5.0, 1.0, 1.0],
        [1.0, 1.0, 5.0, 3.0],
        [2.0, 1.0, 3.0, 4.0],
    ]
)

# Reference estimate for DATA4 on the four-leaf tree (all seven weights
# strictly positive, so the cone constraint is inactive).
GALOIS_SIGMA = np.array(
    [
        [4.757115029565996, 3.040016668717226, 1.418803877886187, 1.418803877886187],
        [3.040016668717226, 5.322918307868457, 1.418803877886187, 1.418803877886187],
        [1.418803877886187, 1.418803877886187, 5.295621559259030, 3.094192269251272],
        [1.418803877886187, 1.418803877886187, 3.094192269251272, 3.892762979243514],
    ]
)

# Reference estimate for DATA4 on the star tree.  NOTE: this matrix is not
# a critical point of the likelihood over the star pattern subspace (see
# tests and the failing acceptance criterion); it is kept verbatim because
# the acceptance gate quotes it.
STAR_SIGMA_REFERENCE = np.full((4, 4), 3.350776006974025)
for _i, _d in enumerate(
    [2.945585253871356, 5.654229276230780, 11.10861203686456, 5.509927633167128]
):
    STAR_SIGMA_REFERENCE[_i, _i] = _d


@pytest.fixture(scope="session")
def fig1():
    tree, _ = parse_tree(FIG1_NEWICK)
    return tree


@pytest.fixture(scope="session")
def fig1_theta():
    _, theta = parse_tree(FIG1_NEWICK)
    return theta


@pytest.fixture(scope="session")
def star5():
    tree, _ = parse_tree(STAR5_NEWICK)
    return tree


@pytest.fixture(scope="session")
def clade3():
    tree, _ = parse_tree(CLADE3_NEWICK)
    return tree
