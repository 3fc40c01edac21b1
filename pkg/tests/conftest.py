import pytest

from delaystream.streams import StreamConfig, generate_stream

# Lines collected by the acceptance tests and echoed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_stream():
    return generate_stream(StreamConfig(n_drifts=5, seed=0))


@pytest.fixture(scope="session")
def short_stream():
    # 120 chunks, drifts at 20, 60, 100
    return generate_stream(StreamConfig(n_chunks=120, n_drifts=3, seed=3))
