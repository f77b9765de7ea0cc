import json
import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

REPO = Path(__file__).resolve().parent.parent
FULLADDER = REPO / "benchmarks" / "fulladder.bench"


def bench_dir() -> Path:
    override = os.environ.get("SPLITSEC_BENCH_DIR")
    return Path(override) if override else REPO / "benchmarks"


def iscas_path(name: str) -> Path | None:
    p = bench_dir() / f"{name}.bench"
    return p if p.exists() else None


def require_iscas(*names: str) -> list[Path]:
    paths = []
    missing = []
    for name in names:
        p = iscas_path(name)
        (paths if p else missing).append(p if p else name)
    if missing:
        pytest.skip(
            f"ISCAS-85 files missing: {', '.join(str(m) for m in missing)} "
            f"(run scripts/fetch_benchmarks.py or set SPLITSEC_BENCH_DIR)"
        )
    return paths


def table1_expected() -> dict[str, tuple[int, int, int]]:
    doc = json.loads((REPO / "benchmarks" / "manifest.json").read_text())
    return {
        e["name"]: (e["inputs"], e["outputs"], e["gates"])
        for e in doc["benchmarks"]
    }


@pytest.fixture
def fulladder_text() -> str:
    return FULLADDER.read_text()


@pytest.fixture
def fulladder(fulladder_text):
    from splitsec import parse_bench

    return parse_bench(fulladder_text, "fulladder")
