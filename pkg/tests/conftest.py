import json
import pathlib

import numpy as np
import pytest

from g3theta import PeriodMatrix

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def load_tau(name: str) -> PeriodMatrix:
    data = json.loads((FIXTURES / name).read_text())
    return PeriodMatrix(np.asarray(data["re"]) + 1j * np.asarray(data["im"]))


@pytest.fixture(scope="session")
def tau_random() -> PeriodMatrix:
    """Random indecomposable point, Im tau ~ 1.5 I (fast lattice sums)."""
    return load_tau("tau_random.json")


@pytest.fixture(scope="session")
def tau_hyperelliptic() -> PeriodMatrix:
    """Newton-located point with vanishing even characteristic 011/011."""
    return load_tau("tau_hyperelliptic.json")


@pytest.fixture(scope="session")
def tau_near_split() -> PeriodMatrix:
    """i*I3 plus a 1e-6 off-diagonal real perturbation."""
    return load_tau("tau_near_split.json")
