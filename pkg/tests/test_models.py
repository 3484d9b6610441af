import numpy as np
import pytest

from kdvblab import ModelFunctions, kdvbf, linear_source, validate_derivatives


def test_kdvbf_values():
    m = kdvbf(2.0, 3.0)
    u = np.array([-1.0, 0.0, 0.5, 1.0])
    assert np.allclose(m.f(u), 1.5 * u**2)
    assert np.allclose(m.fp(u), 3.0 * u)
    assert np.allclose(m.fpp(u), 3.0)
    assert np.allclose(m.g(u), 2.0 * u * (1 - u))
    assert np.allclose(m.gp(u), 2.0 * (1 - 2 * u))


def test_logistic_equilibria():
    m = kdvbf(1.5, 1.0)
    assert m.g(np.array([0.0]))[0] == 0.0
    assert m.g(np.array([1.0]))[0] == 0.0


@pytest.mark.parametrize("model", [kdvbf(1.0, 1.0), kdvbf(2.0, 0.5),
                                   linear_source(1.0), linear_source(3.0)])
def test_derivative_consistency(model):
    validate_derivatives(model)


def test_validation_catches_a_wrong_derivative():
    bad = ModelFunctions(
        f=lambda u: u**2,
        fp=lambda u: u,  # should be 2u
        fpp=lambda u: np.full_like(u, 2.0),
        g=lambda u: np.zeros_like(u),
        gp=lambda u: np.zeros_like(u),
        name="broken",
    )
    with pytest.raises(ValueError, match="fp vs f"):
        validate_derivatives(bad)
