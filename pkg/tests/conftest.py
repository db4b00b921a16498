from pathlib import Path

import pytest

from dkwsmc import StepCdf, load_model

ROOT = Path(__file__).resolve().parent.parent
FIG1_PATH = ROOT / "models" / "fig1.json"

ACCEPTANCE_LINES: list[str] = []


def fig1_masses(tail: float = 1e-12) -> dict[float, float]:
    """Outcome distribution of the example DTMC: 1 w.p. 1/2, 2i w.p. (1/2)^(i+1).

    The series is cut once the remaining mass drops to ``tail``.
    """
    masses = {1.0: 0.5}
    residual = 0.5
    i = 1
    while residual > tail:
        p = 0.5 ** (i + 1)
        masses[2.0 * i] = p
        residual -= p
        i += 1
    return masses


def fig1_cdf() -> StepCdf:
    return StepCdf.from_masses(fig1_masses(), normalize=True)


@pytest.fixture(scope="session")
def fig1_model():
    return load_model(FIG1_PATH)


@pytest.fixture(scope="session")
def fig1():
    return fig1_cdf()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
