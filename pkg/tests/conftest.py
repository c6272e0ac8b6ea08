import pytest

from polytax import ingest


@pytest.fixture(scope="session")
def model():
    """The bundled dataset, loaded once."""
    return ingest.load_bundled_dataset()
