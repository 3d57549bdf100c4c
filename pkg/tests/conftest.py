import numpy as np
import pytest

from fractal_spectra.fem import assemble_matrices, solve_lowest
from fractal_spectra.surface import assemble


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("FRACTAL_SPECTRA_CACHE", str(tmp_path / "cache"))


@pytest.fixture(scope="session")
def level4_mesh():
    return assemble(4)


@pytest.fixture(scope="session")
def level4_ops(level4_mesh):
    return assemble_matrices(level4_mesh)


@pytest.fixture(scope="session")
def level4_spectrum(level4_ops):
    # enough eigenvalues for 111+ clusters
    return solve_lowest(level4_ops, 430, dense_cutoff=3000)


@pytest.fixture(scope="session")
def level2_mesh():
    return assemble(2)


@pytest.fixture(scope="session")
def level2_ops(level2_mesh):
    return assemble_matrices(level2_mesh)


@pytest.fixture(scope="session")
def level2_spectrum(level2_ops):
    return solve_lowest(level2_ops, 60)
