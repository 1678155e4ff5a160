"""Channel parameters, potential evaluation and certified norm estimates."""

import math

import numpy as np
import pytest

from channel_spectra import (
    ChannelParams,
    ConstantProfile,
    FourierXPotential,
    GaussianBumpPotential,
    GaussianProfile,
    GridSampledPotential,
    PolynomialProfile,
    SeparableFourierPotential,
    TransverseProfilePotential,
    ZeroPotential,
    derive_params,
    grid_potential_from_csv,
    potential_from_dict,
    potential_to_dict,
)


def test_derive_params_reference_values():
    p = derive_params(3.0, 4.0)
    assert p.alpha == 5.0
    assert abs(p.beta - 0.64) < 1e-15
    assert abs(p.mu - 0.12) < 1e-15


def test_derive_params_identities():
    rng = np.random.default_rng(7)
    for _ in range(50):
        B = float(rng.uniform(0.0, 10.0))
        omega = float(rng.uniform(1e-3, 10.0))
        p = derive_params(B, omega)
        assert abs(p.alpha**2 - (B * B + omega * omega)) < 1e-12 * p.alpha**2
        assert abs(p.beta - omega**2 / p.alpha**2) < 1e-15
        assert abs(p.mu - B / p.alpha**2) < 1e-15
        # beta + B*mu = 1 splits the kinetic weight between drift and field
        assert abs(p.beta + B * p.mu - 1.0) < 1e-14


@pytest.mark.parametrize("B,omega", [(-1.0, 1.0), (1.0, 0.0), (1.0, -2.0), (math.nan, 1.0)])
def test_derive_params_rejects_bad_input(B, omega):
    with pytest.raises(ValueError):
        derive_params(B, omega)


def test_fourier_x_evaluation_matches_cosine_sum():
    spec = FourierXPotential.from_cosines({0: 0.5, 1: 2.0, 3: -0.7})
    x = np.linspace(-7.0, 7.0, 201)
    expected = 0.5 + 2.0 * np.cos(x) - 0.7 * np.cos(3 * x)
    got = spec(x, np.zeros_like(x))
    assert np.max(np.abs(got - expected)) < 1e-13
    # independent of y
    assert np.max(np.abs(spec(x, 5.0 + 0.0 * x) - got)) == 0.0


def test_fourier_x_norm_estimates_single_harmonic_exact():
    spec = FourierXPotential.from_cosines({1: 2.0})
    b = spec.norm_estimates()
    assert b.w0 == 2.0
    assert math.isinf(b.w0_prime)  # periodic, so x dW/dx is unbounded
    assert abs(b.dxx - 2.0) < 1e-15
    assert b.dyy == 0.0 and b.dxy == 0.0


def test_fourier_x_norm_estimates_dominate_dense_grid():
    rng = np.random.default_rng(21)
    for _ in range(10):
        amps = {k: float(rng.uniform(-1.5, 1.5)) for k in range(4)}
        spec = FourierXPotential.from_cosines(amps)
        b = spec.norm_estimates()
        x = np.linspace(0.0, 2 * math.pi, 20001)
        brute = float(np.max(np.abs(spec(x, 0.0 * x))))
        assert brute <= b.w0 + 1e-12
        # certified sup = grid max + Lipschitz padding, so it sits slightly above
        assert b.w0 <= brute + 0.02


def test_fourier_conjugate_symmetry_enforced():
    with pytest.raises(ValueError):
        FourierXPotential({1: 1.0 + 0.5j, -1: 1.0 + 0.5j})  # needs conj pairing
    FourierXPotential({1: 1.0 + 0.5j, -1: 1.0 - 0.5j})  # fine


def test_gaussian_profile_derivatives_match_finite_differences():
    g = GaussianProfile(sigma=0.8)
    y = np.linspace(-3.0, 3.0, 41)
    h = 1e-6
    fd1 = (g(y + h) - g(y - h)) / (2 * h)
    assert np.max(np.abs(g.derivative(y) - fd1)) < 1e-8
    h = 1e-4  # second differences need a larger step to stay above rounding
    fd2 = (g(y + h) - 2 * g(y) + g(y - h)) / h**2
    assert np.max(np.abs(g.second_derivative(y) - fd2)) < 1e-6


def test_transverse_profile_potential_is_x_independent():
    spec = TransverseProfilePotential(GaussianProfile(1.0), amplitude=0.5)
    y = np.linspace(-2.0, 2.0, 11)
    a = spec(np.zeros_like(y), y)
    b = spec(np.full_like(y, 17.3), y)
    assert np.array_equal(a, b)
    bounds = spec.norm_estimates()
    assert bounds.w0_prime == 0.0  # no x dependence at all
    assert abs(bounds.w0 - 0.5) < 1e-12


def test_separable_fourier_matches_product():
    spec = SeparableFourierPotential({1: 0.5, -1: 0.5}, GaussianProfile(1.3))
    x = np.linspace(-3.0, 9.0, 31)
    y = np.linspace(-2.0, 2.0, 31)
    xx, yy = np.meshgrid(x, y)
    expected = np.cos(xx) * np.exp(-(yy**2) / (2 * 1.3**2))
    assert np.max(np.abs(spec(xx, yy) - expected)) < 1e-13


def test_gaussian_bump_analytic_bounds():
    a, s = 0.7, 1.4
    spec = GaussianBumpPotential([(a, 0.0, 0.0, s)])
    b = spec.norm_estimates()
    assert b.method == "analytic"
    assert b.w0 == a
    assert abs(b.w0_prime - a * 2.0 / math.e) < 1e-15
    assert abs(b.dxx - a / s**2) < 1e-15
    assert abs(b.dxy - a / (math.e * s**2)) < 1e-15
    # brute-force sups on a dense grid must never exceed the certified ones
    x = np.linspace(-12.0, 12.0, 4001)
    w0p_brute = np.max(np.abs(x * spec.gradient(x, 0.0 * x)[0]))
    assert w0p_brute <= b.w0_prime + 1e-10
    assert b.w0_prime <= w0p_brute + 1e-4
    h = 1e-4
    wxx = (spec(x + h, 0 * x) - 2 * spec(x, 0 * x) + spec(x - h, 0 * x)) / h**2
    assert np.max(np.abs(x * x * wxx)) <= b.x2_dxx + 1e-5


def test_gaussian_bump_offcenter_grid_bounds_cover_brute_force():
    spec = GaussianBumpPotential([(0.4, 1.0, -0.5, 0.9), (-0.3, -2.0, 0.3, 1.2)])
    b = spec.norm_estimates()
    assert b.method == "grid"
    x = np.linspace(-15.0, 15.0, 3001)
    y = np.linspace(-12.0, 12.0, 601)
    xx, yy = np.meshgrid(x, y)
    vals = spec(xx, yy)
    assert np.max(np.abs(vals)) <= b.w0 + 1e-9
    wx = spec.gradient(xx, yy)[0]
    assert np.max(np.abs(xx * wx)) <= b.w0_prime + 1e-9


def test_grid_sampled_bilinear_and_clipping():
    x = np.array([0.0, 1.0])
    y = np.array([0.0, 2.0])
    vals = np.array([[0.0, 4.0], [2.0, 10.0]])  # vals[i, j] = W(x_i, y_j)
    spec = GridSampledPotential(x, y, vals)
    assert abs(spec(0.5, 1.0) - 4.0) < 1e-12  # bilinear mean of the corners
    assert abs(spec(0.0, 2.0) - 4.0) < 1e-12
    assert spec(0.5, 5.0) == 0.0  # outside the covered strip
    assert spec.clipped_mask(np.array([0.5]), np.array([5.0]))[0]
    assert not spec.clipped_mask(np.array([0.5]), np.array([1.0]))[0]
    b = spec.norm_estimates()
    assert b.w0 == 10.0
    assert math.isinf(b.dxx)  # piecewise linear: second derivatives unbounded


def test_grid_sampled_w0_prime_covers_fine_sampling():
    rng = np.random.default_rng(3)
    x = np.linspace(-2.0, 3.0, 7)
    y = np.linspace(-1.0, 1.0, 5)
    vals = rng.uniform(-1.0, 1.0, size=(7, 5))
    spec = GridSampledPotential(x, y, vals)
    b = spec.norm_estimates()
    # stay clear of the covered-rectangle edge: the zero fill makes the
    # potential jump there, so the bound only speaks for the interior
    xf = np.linspace(-1.99, 2.99, 2001)
    yf = np.linspace(-1.0, 1.0, 401)
    xx, yy = np.meshgrid(xf, yf)
    h = 1e-7
    wx = (spec(xx + h, yy) - spec(xx - h, yy)) / (2 * h)
    brute = float(np.max(np.abs(xx * wx)))
    assert brute <= b.w0_prime + 1e-5


def test_grid_csv_roundtrip(tmp_path):
    path = tmp_path / "pot.csv"
    rows = ["x,y,w"]
    xs, ys = [0.0, 0.5, 1.0], [-1.0, 1.0]
    rng = np.random.default_rng(11)
    table = {(x, y): float(rng.normal()) for x in xs for y in ys}
    items = list(table.items())
    rng.shuffle(items)
    for (x, y), w in items:
        rows.append(f"{x},{y},{w}")
    path.write_text("\n".join(rows) + "\n")
    spec = grid_potential_from_csv(path)
    for (x, y), w in table.items():
        assert abs(spec(x, y) - w) < 1e-12


def test_grid_csv_incomplete_rectangle_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,0,1\n0,1,2\n1,0,3\n")  # (1,1) missing
    with pytest.raises(ValueError):
        grid_potential_from_csv(path)


@pytest.mark.parametrize(
    "spec",
    [
        ZeroPotential(),
        FourierXPotential.from_cosines({0: 0.2, 2: 1.0}),
        SeparableFourierPotential({1: 0.5, -1: 0.5}, GaussianProfile(0.9)),
        TransverseProfilePotential(PolynomialProfile([0.0, 1.0]), amplitude=2.0),
        TransverseProfilePotential(ConstantProfile(1.5)),
        GaussianBumpPotential([(0.3, 0.0, 0.0, 1.0), (0.1, 2.0, 1.0, 0.5)]),
    ],
)
def test_to_dict_roundtrip(spec):
    clone = potential_from_dict(potential_to_dict(spec))
    x = np.linspace(-3.0, 3.0, 17)
    y = np.linspace(-2.0, 2.0, 17)
    assert np.max(np.abs(clone(x, y) - spec(x, y))) < 1e-14
    assert clone.cache_key() == spec.cache_key()


def test_grid_roundtrip_through_dict():
    x = np.array([0.0, 1.0, 2.0])
    y = np.array([0.0, 1.0])
    vals = np.arange(6.0).reshape(3, 2)
    spec = GridSampledPotential(x, y, vals)
    clone = potential_from_dict(potential_to_dict(spec))
    pts = np.linspace(0.0, 2.0, 9)
    assert np.max(np.abs(clone(pts, 0.5 + 0 * pts) - spec(pts, 0.5 + 0 * pts))) < 1e-14


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        potential_from_dict({"kind": "mystery"})


def test_default_gradient_matches_analytic():
    spec = GaussianBumpPotential([(0.5, 1.0, -0.3, 1.1)])
    x = np.linspace(-2.0, 4.0, 23)
    y = np.linspace(-2.0, 2.0, 23)
    wx, wy = spec.gradient(x, y)
    h = 1e-6
    fx = (spec(x + h, y) - spec(x - h, y)) / (2 * h)
    fy = (spec(x, y + h) - spec(x, y - h)) / (2 * h)
    assert np.max(np.abs(wx - fx)) < 1e-8
    assert np.max(np.abs(wy - fy)) < 1e-8


def test_channel_params_is_frozen():
    p = derive_params(1.0, 1.0)
    with pytest.raises(AttributeError):
        p.alpha = 2.0
    assert isinstance(p, ChannelParams)
