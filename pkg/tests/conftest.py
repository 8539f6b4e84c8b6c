import numpy as np
import pytest

from swapchain.config import settings


def random_density_matrix(rng: np.random.Generator, dim: int = 4, rank: int = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure_vector(rng: np.random.Generator, dim: int = 4) -> np.ndarray:
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_density(rng):
    return lambda dim=4, rank=None: random_density_matrix(rng, dim, rank)


@pytest.fixture
def random_pure(rng):
    return lambda dim=4: random_pure_vector(rng, dim)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "SWAPCHAIN_OUTPUT_DIR", str(tmp_path / "reports"))
    return tmp_path / "reports"
