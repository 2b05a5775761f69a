import pytest

# The planning suite is used test-side only: to emit fixture datasets through
# its public API and to verify PMAP interchange.
from mazeplan.grid_world import emit_dataset


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """One 31x31 sample per split, emitted by the planning suite."""
    root = tmp_path_factory.mktemp("trainer-dataset") / "ds"
    emit_dataset([31], 3, (1, 1, 1), root, seed=5)
    return root
