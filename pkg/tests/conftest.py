import pytest

from comprel.synth import separable_dataset


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    """Small separable corpus shared by read-only integration tests."""
    root = tmp_path_factory.mktemp("corpus")
    separable_dataset(seed=3).write(root)
    return root
