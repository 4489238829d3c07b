import numpy as np
import pytest

from skorohod import ChaosExpansion, ChaosTerm, PolyCoefficient, StepFunction


def make_expansion(rng: np.random.Generator, max_total_degree: int = 4,
                   coeff_degree: int = 3, n_terms: int | None = None) -> ChaosExpansion:
    """Random two-slot expansion with polynomial coefficients."""
    taus = (float(np.round(rng.uniform(0.15, 0.9), 3)),)
    terms = []
    for _ in range(n_terms or int(rng.integers(1, 4))):
        l1 = int(rng.integers(0, max_total_degree + 1))
        l2 = int(rng.integers(0, max_total_degree - l1 + 1))
        coeffs = tuple(rng.uniform(-1.0, 1.0, int(rng.integers(1, coeff_degree + 2))))
        terms.append(ChaosTerm(PolyCoefficient(coeffs), (l1, l2)))
    return ChaosExpansion(taus, tuple(terms))


def make_step(rng: np.random.Generator, pieces: int = 4) -> StepFunction:
    breaks = tuple(np.sort(rng.uniform(0.05, 0.95, pieces - 1)))
    levels = tuple(rng.uniform(-2.0, 2.0, pieces))
    return StepFunction(breaks, levels)


@pytest.fixture
def rng():
    return np.random.default_rng(0xA1B2C3)
