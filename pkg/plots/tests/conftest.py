import pytest

from synth import write_trace


@pytest.fixture
def trace_files(tmp_path):
    return [
        write_trace(tmp_path / f"cap{c}.csv", scale)
        for c, scale in ((10, 9.0), (20, 6.0), (30, 3.0))
    ]
