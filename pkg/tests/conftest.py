from pathlib import Path

import pytest

from urlsift.config import LogRegConfig, RunConfig, TrainConfig
from urlsift.dataset import load_csv

DATA_DIR = Path(__file__).parent / "data"
FIXTURE_CSV = DATA_DIR / "fixture_urls.csv"

# The default SGD schedules are sized for ~500k training URLs; on the
# 4k-row fixture they only take ~130 steps, so desk tests train faster.
FAST_LOGREG = LogRegConfig(learning_rate=1.0, epochs=30, batch_size=32, seed=42)
FAST_MLP = TrainConfig(hidden=(32,), learning_rate=0.2, epochs=20, batch_size=32, patience=3, seed=42)


def fast_config(model: str) -> RunConfig:
    return RunConfig(model=model, logreg=FAST_LOGREG, mlp=FAST_MLP)


@pytest.fixture(scope="session")
def fixture_csv() -> Path:
    return FIXTURE_CSV


@pytest.fixture(scope="session")
def fixture_dataset():
    return load_csv(FIXTURE_CSV)


@pytest.fixture(scope="session")
def trained_runs(fixture_dataset):
    """One TrainRun per model kind on the fixture corpus (fast schedules)."""
    from urlsift.pipeline import train_bundle

    return {kind: train_bundle(fixture_dataset, fast_config(kind)) for kind in ("nb", "logreg", "mlp")}


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
