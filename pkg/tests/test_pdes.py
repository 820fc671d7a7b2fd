import numpy as np
import pytest

from hybridpde.errors import GridMismatchError, NoSpectralSplitError
from hybridpde.grids import FieldState, Grid, norm_l2
from hybridpde.pdes import (
    ALLENCAHN2D,
    BURGERS1D,
    BURGERS2D,
    DIRICHLET0,
    HEAT3D,
    PERIODIC,
    PdeSpec,
    rhs,
    split,
)


def burgers1d_spec(n=101):
    g = Grid(points=(n,), extents=(1.0,), periodic=(True,))
    return PdeSpec(kind=BURGERS1D, grid=g, nu=0.01, bc=PERIODIC)


def burgers2d_spec(n=64):
    g = Grid(points=(n, n), extents=(1.0, 1.0), periodic=(True, True))
    return PdeSpec(kind=BURGERS2D, grid=g, nu=0.01, bc=PERIODIC)


def allencahn_spec(n=32):
    g = Grid(points=(n, n), extents=(1.0, 1.0), periodic=(True, True))
    return PdeSpec(kind=ALLENCAHN2D, grid=g, epsilon=0.05, bc=PERIODIC)


def heat_spec(points=(32, 32, 16), extents=None):
    extents = extents or tuple(1.0 for _ in points)
    g = Grid(points=points, extents=extents, periodic=(False,) * 3)
    return PdeSpec(kind=HEAT3D, grid=g, alpha=1.0, bc=DIRICHLET0)


def random_field(spec, seed=0, scale=0.1):
    rng = np.random.default_rng(seed)
    return FieldState(spec.grid, scale * rng.standard_normal(spec.grid.shape))


def test_heat_constant_gives_zero_interior():
    spec = heat_spec()
    f = FieldState(spec.grid, np.ones(spec.grid.shape))
    out = rhs(spec, f)
    assert np.max(np.abs(out.values[1:-1, 1:-1, 1:-1])) == 0.0


def test_burgers1d_sine_matches_symbolic():
    spec = burgers1d_spec()
    x = spec.grid.axis_coords(0)
    f = FieldState(spec.grid, np.sin(2 * np.pi * x))
    got = rhs(spec, f).values
    # u u_x = pi sin(4 pi x); nu u_xx = -0.04 pi^2 sin(2 pi x)
    want = -np.pi * np.sin(4 * np.pi * x) - 0.04 * np.pi ** 2 * np.sin(2 * np.pi * x)
    assert np.max(np.abs(got - want)) < 1e-8


def test_heat_sine_mode_eigenvalue():
    spec = heat_spec(points=(32, 32, 32))
    xs = spec.grid.meshgrid()
    field = np.sin(np.pi * xs[0]) * np.sin(np.pi * xs[1]) * np.sin(np.pi * xs[2])
    f = FieldState(spec.grid, field)
    got = rhs(spec, f).values
    want = -3 * np.pi ** 2 * field
    core = (slice(1, -1),) * 3
    rel = np.max(np.abs(got[core] - want[core])) / np.max(np.abs(want[core]))
    assert rel < 1e-2


def test_split_linear_symbol_value():
    spec = burgers1d_spec()
    op = split(spec)
    k1 = np.argmin(np.abs(np.fft.fftfreq(101, d=1 / 101) - 1.0))
    assert op.lhat[k1] == pytest.approx(-0.01 * (2 * np.pi) ** 2, rel=1e-12)
    assert op.lhat[k1] == pytest.approx(-0.394784, rel=1e-5)


def test_split_zero_field_nonlinear():
    for spec in (burgers1d_spec(), allencahn_spec()):
        op = split(spec)
        zero = FieldState(spec.grid, np.zeros(spec.grid.shape))
        assert norm_l2(op.nonlinear_eval(zero)) == 0.0


@pytest.mark.parametrize("make_spec", [burgers1d_spec, burgers2d_spec, allencahn_spec])
def test_split_consistent_with_rhs(make_spec):
    spec = make_spec()
    op = split(spec)
    for seed in range(100):
        f = random_field(spec, seed=seed, scale=0.2)
        whole = rhs(spec, f).values
        lin = np.fft.ifftn(op.lhat * np.fft.fftn(f.values)).real
        nl = op.nonlinear_eval(f).values
        scale = max(np.max(np.abs(whole)), 1e-30)
        assert np.max(np.abs(whole - lin - nl)) / scale < 1e-10


@pytest.mark.parametrize("make_spec", [burgers1d_spec, burgers2d_spec])
def test_burgers_rhs_is_conservative(make_spec):
    spec = make_spec()
    for seed in range(20):
        f = random_field(spec, seed=seed, scale=0.3)
        out = rhs(spec, f)
        assert abs(out.values.sum()) <= 1e-10 * max(norm_l2(f), 1e-30)


@pytest.mark.parametrize("make_spec,k", [(burgers1d_spec, 3), (allencahn_spec, 5)])
def test_single_mode_diffusion_eigenvalue(make_spec, k):
    spec = make_spec()
    coeff = spec.nu if spec.kind == BURGERS1D else spec.epsilon ** 2
    x = spec.grid.axis_coords(0)
    if spec.grid.dims == 1:
        field = np.cos(2 * np.pi * k * x)
        k2 = (2 * np.pi * k) ** 2
    else:
        xs = spec.grid.meshgrid()
        field = np.cos(2 * np.pi * k * xs[0])
        k2 = (2 * np.pi * k) ** 2
    f = FieldState(spec.grid, field)
    op = split(spec)
    lin = np.fft.ifftn(op.lhat * np.fft.fftn(f.values)).real
    want = -coeff * k2 * field
    assert np.max(np.abs(lin - want)) <= 1e-10 * np.max(np.abs(want))


def test_heat_has_no_spectral_split():
    with pytest.raises(NoSpectralSplitError):
        split(heat_spec())


def test_rhs_rejects_wrong_grid():
    spec = burgers1d_spec(101)
    other = Grid(points=(64,), extents=(1.0,), periodic=(True,))
    with pytest.raises(GridMismatchError):
        rhs(spec, FieldState(other, np.zeros(64)))


def test_heat_masked_neighbors_read_as_zero():
    mask = np.ones((8, 8, 4), dtype=bool)
    mask[4:, 4:, :] = False
    g = Grid(points=(8, 8, 4), extents=(7.0, 7.0, 3.0),
             periodic=(False,) * 3, active=mask)
    spec = PdeSpec(kind=HEAT3D, grid=g, alpha=1.0, bc=DIRICHLET0)
    vals = np.zeros((8, 8, 4))
    vals[3, 3, 2] = 1.0      # interior active node adjacent to the masked block
    out = rhs(spec, FieldState(g, vals)).values
    h2 = 1.0
    assert out[3, 3, 2] == pytest.approx(-6.0 / h2)
    assert np.all(out[~mask] == 0.0)
    # neighbour inside the mask contributes zero, so the node next to the
    # re-entrant face sees the same stencil as any boundary-adjacent node
    vals2 = np.zeros((8, 8, 4))
    vals2[3, 4, 2] = 1.0
    out2 = rhs(spec, FieldState(g, vals2)).values
    assert out2[4, 4, 2] == 0.0


def test_parameter_and_bc_validation():
    g = Grid(points=(16,), extents=(1.0,), periodic=(True,))
    with pytest.raises(ValueError):
        PdeSpec(kind=BURGERS1D, grid=g, nu=0.0, bc=PERIODIC)
    with pytest.raises(ValueError):
        PdeSpec(kind=BURGERS1D, grid=g, nu=0.01, bc=DIRICHLET0)
