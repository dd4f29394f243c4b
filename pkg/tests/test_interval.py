import cmath
import math

import numpy as np
import pytest
from scipy.integrate import quad

from selfadjoint_momentum.errors import InputError, RepresentationError, DomainError
from selfadjoint_momentum.halfline import (
    MINUS,
    PLUS,
    ExtensionLambda,
    HalfLineStateLabel,
    TwoComponentWave,
    w_transform,
)
from selfadjoint_momentum.interval import (
    BoundaryKind,
    GaugeField,
    GeneralBoundary,
    IntervalParams,
    MeasurementDistribution,
    closed_form_tail,
    commutator_check_pR_V,
    covariant_derivative,
    energy_eigenstate,
    evolve,
    first_moment,
    gauge_apply,
    gauge_shift_theta,
    gauge_shifted_spectrum,
    gauge_string_expectation,
    gauge_transform_wave,
    interval_superposition,
    measurement_distribution,
    momentum_eigenfunction_interval,
    momentum_spectrum,
    pR_expectation,
    sample_measurement,
    second_moment,
    theta_from_lambdas,
    va_action_interval,
)
from selfadjoint_momentum.numerics import Grid, integrate

PI2 = math.pi ** 2
NEUMANN = BoundaryKind.neumann()
DIRICHLET = BoundaryKind.dirichlet()


def params(beta0=0.0, betaL=0.0, length=1.0, mass=1.0):
    return IntervalParams(length, mass, ExtensionLambda(beta0), ExtensionLambda(betaL))


def quad_probability(p, profile, n):
    # |<phi_k|Psi+>|^2 = |integral exp(-ikx) psi dx|^2 / (2L) by adaptive quadrature
    k = momentum_spectrum(p, [n])[0][1]
    re = quad(lambda x: profile(x) * math.cos(k * x), 0, p.length, limit=400)[0]
    im = quad(lambda x: -profile(x) * math.sin(k * x), 0, p.length, limit=400)[0]
    return (re * re + im * im) / (2 * p.length)


# --- theta and the spectrum ----------------------------------------------------

def test_theta_examples(rng):
    for beta in rng.normal(size=5):
        assert theta_from_lambdas(params(beta, beta)) == 0
    assert abs(theta_from_lambdas(params(0.0, 1.0)) - math.pi / 2) < 1e-15


def test_theta_invariant_under_common_rotation(rng):
    for b0, bL, w in zip(rng.normal(size=10), rng.normal(size=10), rng.uniform(-1.2, 1.2, 10)):
        p = params(b0, bL)
        q = IntervalParams(1.0, 1.0, w_transform(p.lambda0, w), w_transform(p.lambdaL, w))
        d = math.remainder(q.theta - p.theta, 2 * math.pi)
        assert abs(d) < 1e-12


def test_spectrum_examples():
    assert momentum_spectrum(params(), [3]) == [(3, pytest.approx(3 * math.pi, abs=1e-15))]
    p = IntervalParams(1.0, 1.0, ExtensionLambda(0.0), ExtensionLambda(math.inf))
    assert abs(p.theta - math.pi) < 1e-15
    assert momentum_spectrum(p, [0])[0][1] == pytest.approx(math.pi / 2, abs=1e-15)
    assert [n for n, _ in momentum_spectrum(params(), (-2, 2))] == [-2, -1, 0, 1, 2]


def test_eigenfunctions_satisfy_walls_and_are_orthonormal():
    p = params(0.6, -1.1, length=2.0)
    g = p.grid(4001)
    waves = {n: TwoComponentWave(g, *momentum_eigenfunction_interval(p, n, g.points)) for n in (-1, 0, 3)}
    for n, w in waves.items():
        assert abs(w.norm() - 1) < 1e-10
        assert abs(w.odd[0] - p.lambda0.value * w.even[0]) < 1e-12
        assert abs(w.odd[-1] - p.lambdaL.value * w.even[-1]) < 1e-12
    assert abs(waves[0].inner(waves[3])) < 1e-10
    assert abs(waves[-1].inner(waves[0])) < 1e-10


def test_eigenfunction_domain():
    with pytest.raises(DomainError):
        momentum_eigenfunction_interval(params(), 1, 1.5)


# --- energy eigenstates -----------------------------------------------------------

def test_energy_examples():
    p = params()
    assert energy_eigenstate(p, NEUMANN, 7).energy == pytest.approx(49 * PI2 / 2, rel=1e-15)
    d = energy_eigenstate(p, DIRICHLET, 1)
    assert abs(d(0.0)) < 1e-15 and abs(d(1.0)) < 1e-15
    n0 = energy_eigenstate(p, NEUMANN, 0)
    assert np.allclose(n0.wave.even, 1 / math.sqrt(2)) and np.allclose(n0.wave.odd, 1 / math.sqrt(2))


def test_invalid_levels():
    with pytest.raises(IndexError):
        energy_eigenstate(params(), DIRICHLET, 0)
    with pytest.raises(IndexError):
        energy_eigenstate(params(), NEUMANN, -1)


@pytest.mark.parametrize("g0,gL", [(1.5, 1.5), (-2.0, -2.0), (0.7, -0.3), (-4.0, 0.5)])
def test_robin_levels(g0, gL):
    p = params(length=1.3)
    bc = BoundaryKind.robin(g0, gL)
    energies = []
    for l in range(6):
        st = energy_eigenstate(p, bc, l)
        h = 1e-6
        d0 = (st(h) - st(0.0)) / h
        dL = (st(1.3) - st(1.3 - h)) / h
        assert abs(g0 * st(0.0) - d0) < 1e-4 * max(1.0, abs(g0))
        assert abs(gL * st(1.3) + dL) < 1e-4 * max(1.0, abs(gL))
        norm = quad(lambda x: st(x) ** 2, 0, 1.3, limit=200)[0]
        assert abs(norm - 1) < 1e-10
        energies.append(st.energy)
    assert np.all(np.diff(energies) > 0)


def test_robin_bound_states_come_first():
    st = energy_eigenstate(params(), BoundaryKind.robin(-3.0), 0)
    assert st.energy < 0


def test_robin_zero_mode():
    # g0 + gL + g0 gL L = 0 gives a linear zero-energy state
    g0 = 1.0
    gL = -g0 / (1 + g0)
    levels = [energy_eigenstate(params(), BoundaryKind.robin(g0, gL), l).energy for l in range(2)]
    assert min(abs(e) for e in levels) < 1e-12


def test_general_boundary_embeds_robin():
    gb = GeneralBoundary(0.0, 1.0, 0.0, -3.0, -1.0)
    assert gb.embeds_robin() and gb.robin_gamma() == 1.5
    with pytest.raises(InputError):
        GeneralBoundary(0.3, 1.0, 0.0, -3.0, -1.0).robin_gamma()


def test_pR_expectation_of_energy_state_vanishes():
    st = energy_eigenstate(params(), DIRICHLET, 3)
    assert abs(pR_expectation(st.wave)) < 1e-6


# --- measurement distributions ------------------------------------------------------

def test_distribution_examples():
    p = params()
    n0 = measurement_distribution(p, NEUMANN, 0, (-3, 3))
    assert n0.probability(0) == 0.5
    assert n0.probability(1) == pytest.approx(2 / PI2, rel=1e-15)
    n7 = measurement_distribution(p, NEUMANN, 7, (-10, 10))
    assert n7.probability(7) == 0.25 and n7.probability(-7) == 0.25
    assert n7.probability(5) == 0
    assert n7.probability(6) == pytest.approx(144 / (169 * PI2), rel=1e-14)
    d7 = measurement_distribution(p, DIRICHLET, 7, (-10, 10))
    assert d7.probability(8) == pytest.approx(196 / (225 * PI2), rel=1e-14)


@pytest.mark.parametrize("bc,l,n", [(NEUMANN, 7, 6), (DIRICHLET, 7, 8), (NEUMANN, 3, -2), (DIRICHLET, 2, 5)])
def test_closed_form_against_adaptive_quadrature(bc, l, n):
    p = params()
    st = energy_eigenstate(p, bc, l)
    dist = measurement_distribution(p, bc, l, [n])
    assert abs(dist.probability(n) - quad_probability(p, st.profile, n)) < 1e-10


def test_closed_form_against_filon_route():
    p = params()
    for bc, l in [(NEUMANN, 7), (DIRICHLET, 4)]:
        a = measurement_distribution(p, bc, l, (-30, 30), method="closed")
        b = measurement_distribution(p, bc, l, (-30, 30), method="quadrature")
        assert np.max(np.abs(a.probabilities - b.probabilities)) < 1e-9
        assert abs(a.tail_bound - b.tail_bound) < 1e-8


def test_closed_method_requires_zero_theta():
    with pytest.raises(InputError):
        measurement_distribution(params(0.0, 1.0), NEUMANN, 1, (-3, 3), method="closed")


def test_dirichlet_rejects_l0():
    with pytest.raises(IndexError):
        measurement_distribution(params(), DIRICHLET, 0, (-3, 3))


def test_neumann_l0_tail_formula():
    # sum rule oracle: 1/2 + sum over odd n of 2/(pi^2 n^2) = 1, so the tail is 1 minus the table
    for N in (10, 11, 1000):
        n = np.arange(1, N + 1)
        table = 0.5 + 2 * math.fsum(2 / (PI2 * n[n % 2 == 1].astype(float) ** 2))
        assert abs(closed_form_tail("neumann", 0, -N, N) - (1 - table)) < 1e-14


@pytest.mark.parametrize("theta_beta", [1.0, -0.4, 5.0])
@pytest.mark.parametrize("bc,l", [(NEUMANN, 0), (NEUMANN, 3), (DIRICHLET, 2)])
def test_general_theta_normalization(theta_beta, bc, l):
    dist = measurement_distribution(params(0.0, theta_beta), bc, l, (-40, 40))
    assert not dist.closed_form
    assert abs(dist.total + dist.tail_bound - 1) < 1e-8


def test_robin_distribution_normalization():
    dist = measurement_distribution(params(0.0, 0.8), BoundaryKind.robin(1.5, -0.5), 1, (-60, 60))
    assert abs(dist.total + dist.tail_bound - 1) < 1e-8


def test_first_moment_symmetric():
    dist = measurement_distribution(params(), NEUMANN, 5, (-200, 200))
    assert abs(first_moment(dist)) < 1e-10


def test_distribution_rejects_negative_probability():
    with pytest.raises(InputError):
        MeasurementDistribution([0], [0.0], [-0.1], 0.0, 1.0)


def test_dirichlet_second_moment():
    dist = measurement_distribution(params(), DIRICHLET, 7, (-10_000, 10_000))
    sm = second_moment(dist)
    assert not sm.diverges
    assert abs(sm.partial_sum / (49 * PI2) - 1) < 1e-3
    assert abs(sm.value / (49 * PI2) - 1) < 1e-12


def test_second_moment_needs_symmetric_range():
    with pytest.raises(InputError):
        second_moment(measurement_distribution(params(), DIRICHLET, 1, (-3, 5)))


def test_neumann_second_moment_diverges():
    dist = measurement_distribution(params(), NEUMANN, 0, (-1000, 1000))
    sm = second_moment(dist)
    assert sm.diverges and math.isinf(sm.value)
    assert sm.growth_rate > 0


def _neumann_partial_sums(N, length=1.0):
    dist = measurement_distribution(params(length=length), NEUMANN, 0, (-2 * N, 2 * N))
    terms = dist.ks ** 2 * dist.probabilities
    return math.fsum(terms[np.abs(dist.ns) <= N]), math.fsum(terms)


@pytest.mark.parametrize("N", [100, 1000])
def test_neumann_increment_closed_value(N):
    # k^2 P = 2/L^2 for odd n, and there are N odd |n| in (N, 2N] counting both signs
    s1, s2 = _neumann_partial_sums(N)
    assert abs((s2 - s1) - 2 * N) < 1e-8 * N


@pytest.mark.parametrize("N", [100, 1000])
def test_neumann_increment_lower_bound(N):
    # documented lower bound 0.3 (pi/L)^2 N for the increment S(2N) - S(N)
    s1, s2 = _neumann_partial_sums(N)
    assert s2 - s1 >= 0.3 * PI2 * N


# --- bridge to the half-line --------------------------------------------------------

@pytest.mark.parametrize("length", [1.0, 3.0])
def test_bridge_identity(length):
    p = params(length=length)
    pairs = [(l, n) for l in range(1, 6) for n in range(-4, 8) if (n + l) % 2 == 1][:20]
    for l, n in pairs:
        pl = math.pi * l / length
        k = math.pi * n / length
        for bc, numer in ((NEUMANN, 4 * k * k), (DIRICHLET, 4 * pl * pl)):
            prob = measurement_distribution(p, bc, l, [n]).probability(n)
            assert abs(length ** 2 * prob - numer / (pl * pl - k * k) ** 2) < 1e-10 * max(1, length ** 2)


# --- V_a and commutators --------------------------------------------------------------

def test_va_interval_examples():
    p = params(0.4, -0.9)
    out = va_action_interval(p, 0.2, HalfLineStateLabel(0.7, PLUS))
    assert abs(out.x - 0.5) < 1e-15 and out.sign == PLUS and out.phase == 1
    out = va_action_interval(p, 0.5, HalfLineStateLabel(0.2, PLUS))
    assert abs(out.x - 0.3) < 1e-15 and out.sign == MINUS and abs(out.phase - p.sigma) < 1e-15
    out = va_action_interval(p, 0.5, HalfLineStateLabel(0.8, MINUS))
    assert abs(out.x - 0.7) < 1e-15 and out.sign == PLUS
    assert abs(out.phase - p.sigmaL.conjugate()) < 1e-15


def test_va_interval_range():
    with pytest.raises(InputError):
        va_action_interval(params(), 1.0, HalfLineStateLabel(0.5, PLUS))


def test_va_interval_group_law(rng):
    for _ in range(1000):
        p = params(*rng.normal(size=2), length=rng.uniform(0.5, 2.0))
        L = p.length
        a, b = rng.uniform(-L / 2, L / 2, 2)
        st = HalfLineStateLabel(rng.uniform(0, L), int(rng.choice([PLUS, MINUS])),
                                cmath.exp(1j * rng.uniform(0, 6.3)))
        two = va_action_interval(p, a, va_action_interval(p, b, st))
        one = va_action_interval(p, a + b, st)
        assert abs(two.x - one.x) < 1e-12 and two.sign == one.sign
        assert abs(two.phase - one.phase) < 1e-12


def test_commutator_single_eigenstate():
    p = params(0.3, 1.7)
    s = interval_superposition(p, [2], [1.0])
    assert commutator_check_pR_V(p, [s]) < 1e-12


def test_commutator_random_superpositions(rng):
    p = params(0.3, 1.7, length=1.5)
    samples = [interval_superposition(p, rng.integers(-8, 9, 4), rng.normal(size=4) + 1j * rng.normal(size=4))
               for _ in range(16)]
    assert commutator_check_pR_V(p, samples, a=0.0) <= 1e-10
    assert commutator_check_pR_V(p, samples, a=0.37) <= 1e-10


def test_commutator_rejects_off_ladder():
    p = params()
    from selfadjoint_momentum.halfline import MomentumSuperposition
    with pytest.raises(RepresentationError):
        commutator_check_pR_V(p, [MomentumSuperposition([1.234], [1.0], p.sigma)])


# --- gauge --------------------------------------------------------------------------

def test_gauge_shift_zero_theta():
    shifted, gauge = gauge_shift_theta(params(0.8, 0.8))
    assert gauge.charge_times_a == 0 and shifted.theta == 0


def test_gauge_shift_reproduces_spectrum(rng):
    for b0, bL, L in zip(rng.normal(size=5), rng.normal(size=5), rng.uniform(0.5, 3, 5)):
        p = params(b0, bL, length=L)
        shifted, gauge = gauge_shift_theta(p)
        assert shifted.theta == 0
        assert gauge.charge_times_a == pytest.approx(p.theta / (2 * L), rel=1e-15)
        direct = momentum_spectrum(p, (-20, 20))
        via = gauge_shifted_spectrum(shifted, gauge, (-20, 20))
        assert max(abs(a[1] - b[1]) for a, b in zip(direct, via)) < 1e-12


def test_gauge_shift_theta_pi():
    p = IntervalParams(1.0, 1.0, ExtensionLambda(0.0), ExtensionLambda(math.inf))
    shifted, gauge = gauge_shift_theta(p)
    assert gauge.charge_times_a == pytest.approx(math.pi / 2, rel=1e-15)
    ks = [k for _, k in gauge_shifted_spectrum(shifted, gauge, (0, 4))]
    assert np.allclose(ks, [math.pi * (n + 0.5) for n in range(5)], atol=1e-14)


def test_gauge_transform_maps_eigenfunctions():
    # the shifted eigenfunction with k - eA on the theta' = 0 domain
    p = params(0.5, -1.3)
    shifted, gauge = gauge_shift_theta(p)
    g = p.grid(401)
    for n in (0, 2):
        w = TwoComponentWave(g, *momentum_eigenfunction_interval(p, n, g.points))
        out = gauge_transform_wave(w, p.theta, p.length)
        target = TwoComponentWave(g, *momentum_eigenfunction_interval(shifted, n, g.points))
        assert (out - target).max_abs() < 1e-12


def test_gauge_string_examples():
    g = Grid.spanning(0.0, 1.0, 11)
    assert gauge_string_expectation(np.ones(11), g, GaugeField(0.0)) == 1
    theta = 1.1
    val = gauge_string_expectation(np.ones(11), g, GaugeField(theta / 2))
    assert abs(val - cmath.exp(0.5j * theta)) < 1e-15


def test_gauge_string_invariance(rng):
    g = Grid.spanning(0.0, 1.0, 201)
    psi = np.exp(1j * g.points) * (1 + g.points)
    base = GaugeField(0.7)
    ref = gauge_string_expectation(psi, g, base)
    for _ in range(50):
        c = rng.normal(size=3)
        phase = lambda x, c=c: c[0] + c[1] * np.sin(3 * np.asarray(x)) + c[2] * np.asarray(x) ** 2
        new_psi, field = gauge_apply(psi, g, base, phase)
        assert abs(gauge_string_expectation(new_psi, g, field) - ref) < 1e-12


def test_covariant_derivative_is_covariant():
    g = Grid.spanning(0.0, 1.0, 2001)
    psi = np.exp(2j * g.points) * np.cos(g.points)
    base = GaugeField(0.3)
    phase = lambda x: 0.4 * np.sin(np.asarray(x))
    new_psi, field = gauge_apply(psi, g, base, phase)
    i = 700
    d_old = covariant_derivative(psi, g, base, i)
    d_new = covariant_derivative(new_psi, g, field, i)
    assert abs(d_new - np.exp(1j * phase(g.points[i])) * d_old) < 1e-6


# --- sampling and evolution -------------------------------------------------------------

def test_sampling_deterministic_distribution():
    dist = MeasurementDistribution([0], [0.0], [1.0], 0.0, 1.0)
    res = sample_measurement(dist, 100, seed=3)
    assert res.counts.tolist() == [100]


def test_sampling_rejects_nonpositive_shots():
    dist = MeasurementDistribution([0], [0.0], [1.0], 0.0, 1.0)
    with pytest.raises(InputError):
        sample_measurement(dist, 0)


def test_sampling_reproducible():
    dist = measurement_distribution(params(), NEUMANN, 7, (-30, 30))
    a = sample_measurement(dist, 2000, seed=42)
    b = sample_measurement(dist, 2000, seed=42)
    c = sample_measurement(dist, 2000, seed=43)
    assert np.array_equal(a.outcomes, b.outcomes)
    assert not np.array_equal(a.outcomes, c.outcomes)
    assert a.post_measurement_state() == int(a.outcomes[-1])


def test_evolve_stationary_and_identity():
    p = params()
    st = energy_eigenstate(p, NEUMANN, 2)
    assert (evolve(p, NEUMANN, st.wave, 0.0, modes=8) - st.wave).max_abs() < 1e-12
    t = 0.37
    out = evolve(p, NEUMANN, st.wave, t, modes=8)
    assert (out - st.wave.scaled(cmath.exp(-1j * st.energy * t))).max_abs() < 1e-10


def test_evolve_revival():
    p = params()
    s0, s1 = energy_eigenstate(p, NEUMANN, 0), energy_eigenstate(p, NEUMANN, 1)
    psi0 = (s0.wave + s1.wave).scaled(1 / math.sqrt(2))
    t = 2 * math.pi / (s1.energy - s0.energy)
    out = evolve(p, NEUMANN, psi0, t, modes=4)
    assert (out - psi0).max_abs() < 1e-8
    half = evolve(p, NEUMANN, psi0, t / 2, modes=4)
    assert (half - psi0).max_abs() > 0.1


def test_covariant_robin_condition_after_gauge_shift():
    # W(theta)^dagger maps (psi, psi)/sqrt2 to exp(-i theta x/2L)(psi, psi)/sqrt2
    gamma = 1.5
    p = params(0.3, -0.9)
    shifted, gauge = gauge_shift_theta(p)
    st = energy_eigenstate(p, BoundaryKind.robin(gamma), 2)
    g = Grid.spanning(0.0, 1e-2, 101)
    wave = TwoComponentWave(g, st(g.points) / math.sqrt(2), st(g.points) / math.sqrt(2))
    moved = gauge_transform_wave(wave, p.theta, p.length)
    for comp in (moved.even, moved.odd):
        residual = gamma * comp[0] - covariant_derivative(comp, g, gauge, 0)
        assert abs(residual) < 1e-10
