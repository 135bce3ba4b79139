import pytest

from selfcare.dataset import synthetic_wrist_store
from selfcare.dataset.types import Device
from selfcare.evaluation.runner import prepare_segments


@pytest.fixture(scope="session")
def tiny_store():
    """Two short synthetic subjects, enough for end-to-end plumbing tests."""
    return synthetic_wrist_store(n_subjects=2, seed=99, duration_s=240.0)


@pytest.fixture(scope="session")
def tiny_segments(tiny_store):
    return prepare_segments(tiny_store, Device.WRIST)
