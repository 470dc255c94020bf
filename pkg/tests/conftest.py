from __future__ import annotations

import json
from pathlib import Path

import pytest

from radialwave.density import DensityModel, hyperbolic_model, make_jacobi_model

ORACLES = json.loads((Path(__file__).parent / "oracles" / "values.json").read_text())


@pytest.fixture(scope="session")
def oracles() -> dict:
    return ORACLES


@pytest.fixture(scope="session")
def h3() -> DensityModel:
    return hyperbolic_model(3)


@pytest.fixture(scope="session")
def h4() -> DensityModel:
    return hyperbolic_model(4)


@pytest.fixture(scope="session")
def dr_model() -> DensityModel:
    return make_jacobi_model(2.5, 1.5, 1.0)


@pytest.fixture(scope="session")
def models(h3: DensityModel, h4: DensityModel, dr_model: DensityModel) -> dict[str, DensityModel]:
    return {"H3": h3, "H4": h4, "DR": dr_model}
