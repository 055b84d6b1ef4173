import pytest

from osr.protocol import bundled_metadata_texts
from osr.taxonomy import parse_hierarchy


@pytest.fixture(scope="session")
def bundled_taxonomy():
    return parse_hierarchy(*bundled_metadata_texts())


TINY_IS_A = """\
n10000000 n10000001
n10000000 n10000002
n10000001 n11000001
n10000001 n11000002
n10000001 n11000003
n10000002 n11000004
n10000002 n11000005
n10000000 n11000006
"""

TINY_WORDS = """\
n10000000\troot
n10000001\tleft branch
n10000002\tright branch
n11000001\tleaf one
n11000002\tleaf two
n11000003\tleaf three
n11000004\tleaf four
n11000005\tleaf five
n11000006\tleaf six
"""

TINY_ILSVRC = """\
n11000001
n11000002
n11000003
n11000004
n11000005
n11000006
"""


@pytest.fixture()
def tiny_taxonomy():
    return parse_hierarchy(TINY_IS_A, TINY_WORDS, TINY_ILSVRC)


def make_source_manifests(classes, n_train=10, n_test=10):
    """Synthetic 'path synset' listings with n_train/n_test images per class."""
    train_lines = []
    val_lines = []
    for synset in classes:
        for i in range(n_train):
            train_lines.append(f"train/{synset}/img_{i:03d}.JPEG {synset}")
        for i in range(n_test):
            val_lines.append(f"val/{synset}_{i:03d}.JPEG {synset}")
    return "\n".join(train_lines) + "\n", "\n".join(val_lines) + "\n"
