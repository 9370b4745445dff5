import numpy as np
import pytest

matmi = pytest.importorskip("matmi")


@pytest.fixture(scope="module")
def ellipse():
    mesh = matmi.ellipse_mesh(2.0, 1.0, 0.1)
    exc = matmi.standard_excitation()
    sigma = matmi.phantom(mesh)
    potential = matmi.solve_potential(sigma, exc)
    current = matmi.current_density(sigma, potential, exc)
    return mesh, exc, sigma, current


def test_mesh_arrays(ellipse):
    mesh = ellipse[0]
    assert mesh.nodes.shape == (mesh.node_count, 2)
    assert mesh.triangles.shape == (mesh.triangle_count, 3)
    assert mesh.areas.sum() == pytest.approx(mesh.total_area)
    assert mesh.total_area == pytest.approx(2.0 * np.pi, rel=0.02)


def test_field_roundtrip_and_validation(ellipse):
    mesh = ellipse[0]
    values = np.linspace(1.0, 2.0, mesh.node_count)
    field = matmi.ScalarField(mesh, values, "conductivity")
    assert np.array_equal(field.values, values)
    assert field.role == "conductivity"
    with pytest.raises(matmi.ParameterError):
        matmi.ScalarField(mesh, values[:-1])


def test_orthogonal_field_inversion(ellipse):
    _, exc, sigma, current = ellipse
    rec, report = matmi.invert("of", current, exc)
    assert matmi.relative_error(rec, sigma) < 0.1
    assert '"orthogonal-field"' in report


def test_unknown_parameter_rejected(ellipse):
    _, exc, _, current = ellipse
    with pytest.raises(matmi.ParameterError):
        matmi.invert("of", current, exc, {"bogus": 1.0})


def test_noise_is_reproducible(ellipse):
    current = ellipse[3]
    a = matmi.add_noise(current, 0.05, 7).values
    b = matmi.add_noise(current, 0.05, 7).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, current.values)


def test_helmholtz_round_trip():
    mesh = matmi.ellipse_mesh(1.0, 1.0, 0.1)
    exc = matmi.standard_excitation()
    medium = matmi.Medium()
    sigma = matmi.ScalarField(mesh, 1.0 + 0.5 * np.exp(-4.0 * (mesh.nodes ** 2).sum(axis=1)), "conductivity")
    current = matmi.current_density(sigma, matmi.solve_potential(sigma, exc), exc)
    source = matmi.lorentz_source(current, exc, medium)
    back = matmi.recover_current(matmi.recover_stream(source, exc, medium))
    err = np.sqrt((mesh.areas[:, None] * (back.values - current.values) ** 2).sum())
    ref = np.sqrt((mesh.areas[:, None] * current.values ** 2).sum())
    assert err / ref < 0.2


def test_sweep_csv():
    csv = matmi.sweep("[mesh]\nh = 0.15\n[noise]\nlevels = 0, 0.05\nrealizations = 2\nseed = 3\n")
    lines = csv.strip().splitlines()
    assert lines[0] == "noise_level,algorithm,mean_error,std_error,n"
    assert len(lines) == 3
    with pytest.raises(matmi.ConfigError):
        matmi.sweep("[mesh]\nh = -1\n")
