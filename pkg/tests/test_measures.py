import math

import numpy as np
import pytest
from scipy import optimize

from conftest import random_state
from nmq import channels as ch
from nmq import decoherence as deco
from nmq import measures as ms
from nmq.numerics import TimeWindow
from nmq.qmath import binary_entropy, maximally_mixed, von_neumann_entropy
from nmq.sampling import StateSampler

W20 = TimeWindow(0.0, 20.0)
H2 = binary_entropy


def deph(s):
    return ch.Dephasing1Q(deco.OhmicSpectrum(s))


def rises(y):
    """Sum of positive increments on a dense grid."""
    d = np.diff(y)
    return float(d[d > 0].sum())


def ohmic_closed_forms(s):
    spec = deco.OhmicSpectrum(s)
    ivs = deco.rate_negative_intervals(spec)
    g = lambda t: float(deco.gamma_ohmic(spec, t))
    rhp = sum(g(a) - g(b) for a, b in ivs)
    blp = sum(math.exp(-g(b)) - math.exp(-g(a)) for a, b in ivs)
    lfs = sum(H2(0.5 + math.exp(-g(a)) / 2) - H2(0.5 + math.exp(-g(b)) / 2) for a, b in ivs)
    return rhp, blp, lfs


class TestInformationQuantities:
    def test_identity_channel(self):
        rho = maximally_mixed(2)
        assert ms.mutual_info_channel(deph(3), rho, 0.0) == pytest.approx(2.0, abs=1e-12)
        assert ms.coherent_info(deph(3), rho, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_fully_dephased(self):
        assert ms.mutual_info_channel(deph(0.5), maximally_mixed(2), 1e12) == pytest.approx(1.0, abs=1e-6)

    def test_first_endpoint_value(self):
        t = math.sqrt(3)
        val = ms.mutual_info_channel(deph(3), maximally_mixed(2), t)
        assert val == pytest.approx(2 - H2(0.5 + math.exp(-2.25) / 2), abs=1e-12)
        assert val == pytest.approx(1.00806, abs=5e-5)   # rounded figure

    def test_dephasing_coherent_info(self):
        for t in (0.3, 2.0, 7.0):
            c = math.exp(-float(deco.gamma_ohmic(deco.OhmicSpectrum(2.5), t)))
            assert ms.coherent_info(deph(2.5), maximally_mixed(2), t) == pytest.approx(1 - H2(0.5 + c / 2), abs=1e-12)

    def test_mutual_equals_entropy_plus_coherent(self, rng):
        models = [deph(3), ch.Dephasing2QCommon(deco.CommonEnvSpec(deco.OhmicSpectrum(2), 1.0)),
                  ch.AmplitudeDamping2QIndependent(deco.PBGSpec(-1.0))]
        for m in models:
            rho = random_state(rng, m.dim)
            for t in (0.5, 3.0):
                lhs = ms.mutual_info_channel(m, rho, t)
                rhs = von_neumann_entropy(rho) + ms.coherent_info(m, rho, t)
                assert lhs == pytest.approx(rhs, abs=1e-10)


def t_for_population(eta, r=0.25):
    spec = deco.LorentzianSpec(r)
    return optimize.brentq(lambda t: abs(deco.g_lorentzian(spec, t)) ** 2 - eta, 0, 60, xtol=1e-14)


class TestCapacities:
    def test_dephasing_relation(self):
        for s in (0.5, 2.0, 3.0, 5.0):
            for t in (0.1, 1.0, 4.0, 15.0):
                c, _ = ms.c_ea(deph(s), t)
                q, _ = ms.q_cap(deph(s), t)
                assert c - q == pytest.approx(1.0, abs=1e-9)

    def test_dephasing_value(self):
        q, rho = ms.q_cap(deph(3), math.sqrt(3))
        assert q == pytest.approx(1 - H2(0.5 + math.exp(-2.25) / 2), abs=1e-12)
        assert q == pytest.approx(0.00806, abs=5e-5)   # rounded figure
        np.testing.assert_allclose(rho, maximally_mixed(2))

    def test_ad_identity(self):
        m = ch.AmplitudeDamping1Q(deco.LorentzianSpec(0.25))
        c, rho = ms.c_ea(m, 0.0)
        assert c == pytest.approx(2.0, abs=1e-10)
        assert rho[1, 1].real == pytest.approx(0.5, abs=1e-5)
        assert ms.q_cap(m, 0.0)[0] == pytest.approx(1.0, abs=1e-10)

    def test_ad_half_population(self):
        m = ch.AmplitudeDamping1Q(deco.LorentzianSpec(0.25))
        t = t_for_population(0.5)
        c, rho = ms.c_ea(m, t)
        assert c == pytest.approx(1.0, abs=1e-9)
        assert rho[1, 1].real == pytest.approx(0.5, abs=1e-5)
        assert ms.q_cap(m, t)[0] == 0.0

    def test_ad_antidegradable(self):
        m = ch.AmplitudeDamping1Q(deco.LorentzianSpec(0.25))
        assert ms.q_cap(m, t_for_population(0.4))[0] == 0.0

    @pytest.mark.parametrize("eta", [0.55, 0.7, 0.9, 0.99])
    def test_ad_against_brute_force(self, eta):
        m = ch.AmplitudeDamping1Q(deco.LorentzianSpec(0.25))
        t = t_for_population(eta)
        ps = np.linspace(0, 1, 20001)
        cvals = [ms.mutual_info_channel(m, np.diag([1 - p, p]).astype(complex), t) for p in ps[::20]]
        qvals = H2(eta * ps) - H2((1 - eta) * ps)
        assert ms.c_ea(m, t)[0] == pytest.approx(max(cvals), abs=1e-6)
        assert ms.c_ea(m, t)[0] >= max(cvals) - 1e-12
        assert ms.q_cap(m, t)[0] == pytest.approx(qvals.max(), abs=1e-8)

    def test_ad_two_qubits_double(self):
        res = deco.PBGSpec(-3.0)
        for t in (0.5, 4.0):
            assert ms.c_ea(ch.AmplitudeDamping2QIndependent(res), t)[0] == pytest.approx(
                2 * ms.c_ea(ch.AmplitudeDamping1Q(res), t)[0], abs=1e-12)

    def test_common_bath_family_beats_random_states(self, rng):
        m = ch.Dephasing2QCommon(deco.CommonEnvSpec(deco.OhmicSpectrum(3), 0.25))
        for t in (0.7, 3.0, 10.0):
            c, _ = ms.c_ea(m, t)
            q, _ = ms.q_cap(m, t)
            for _ in range(150):
                rho = random_state(rng, 4, int(rng.integers(1, 5)))
                assert ms.mutual_info_channel(m, rho, t) <= c + 1e-9
                assert ms.coherent_info(m, rho, t) <= q + 1e-9

    def test_common_bath_budget_does_not_improve(self):
        m = ch.Dephasing2QCommon(deco.CommonEnvSpec(deco.OhmicSpectrum(2), 2.0))
        assert ms.c_ea(m, 2.0, optimizer_budget=100)[0] == ms.c_ea(m, 2.0)[0]


class TestSingleQubitDephasing:
    def test_divisible_all_zero(self):
        for s in (0.5, 1.0, 1.5, 2.0):
            for name, f in ms.MEASURES.items():
                r = f(deph(s), W20)
                assert abs(r.value) < 1e-8, (s, name)
                assert r.intervals == [] and not r.diverged

    def test_spot_values(self):
        assert ms.n_rhp(deph(3), W20).value == pytest.approx(0.25, abs=1e-10)
        blp = ms.n_blp(deph(3), W20)
        assert blp.value == pytest.approx(math.exp(-2) - math.exp(-2.25), abs=1e-10)
        assert blp.value == pytest.approx(0.029936, abs=1e-6)
        lfs = ms.n_lfs(deph(3), W20)
        assert lfs.value == pytest.approx(H2(0.5 + math.exp(-2.25) / 2) - H2(0.5 + math.exp(-2) / 2), abs=1e-10)
        assert lfs.value == pytest.approx(0.00524, abs=3e-5)   # rounded figure

    def test_closed_interval_values(self):
        # s = 5 has one finite interval inside the window: no tail needed
        rhp, blp, lfs = ohmic_closed_forms(5)
        m = deph(5)
        assert ms.n_rhp(m, W20).value == pytest.approx(rhp, abs=1e-9)
        assert ms.n_blp(m, W20).value == pytest.approx(blp, abs=1e-9)
        assert ms.n_lfs(m, W20).value == pytest.approx(lfs, abs=1e-9)

    def test_open_interval_tail(self):
        r = ms.n_rhp(deph(3), W20)
        assert r.intervals[-1][1] == math.inf and r.tail > 0
        bare = ms.n_rhp(deph(3), W20, analytic_tail=False)
        assert bare.tail == 0 and bare.value < r.value

    @pytest.mark.parametrize("s", [2.5, 3.0, 4.0, 5.0])
    def test_equality_chain(self, s):
        lfs = ms.n_lfs(deph(s), W20).value
        assert ms.n_c(deph(s), W20).value == pytest.approx(lfs, abs=1e-6)
        assert ms.n_q(deph(s), W20).value == pytest.approx(lfs, abs=1e-6)

    def test_argmax_equatorial_antipodal(self):
        r = ms.n_blp(deph(3), W20, StateSampler(budget=200, seed=3))
        r1, r2 = r.argmax
        w1, v1 = np.linalg.eigh(r1)
        w2, v2 = np.linalg.eigh(r2)
        p1, p2 = v1[:, -1], v2[:, -1]
        assert abs(np.vdot(p1, p2)) <= 1e-6
        z = lambda p: abs(p[0]) ** 2 - abs(p[1]) ** 2
        assert abs(z(p1) - z(p2)) <= 1e-6 and abs(z(p1)) <= 1e-6

    def test_lfs_argmax_maximally_mixed(self):
        r = ms.n_lfs(deph(3), W20, StateSampler(budget=100, seed=1))
        np.testing.assert_allclose(r.argmax, maximally_mixed(2), atol=1e-12)


class TestTwoQubitDephasing:
    def test_independent_additivity(self):
        one, two = deph(3), ch.Dephasing2QIndependent(deco.OhmicSpectrum(3))
        assert ms.n_rhp(two, W20).value == 2 * ms.n_rhp(one, W20).value
        assert ms.n_lfs(two, W20).value == pytest.approx(2 * ms.n_lfs(one, W20).value, abs=1e-4)
        assert ms.n_c(two, W20).value == pytest.approx(2 * ms.n_c(one, W20).value, abs=1e-4)
        blp2 = ms.n_blp(two, W20, StateSampler(budget=100, seed=0))
        assert blp2.value == pytest.approx(ms.n_blp(one, W20).value, abs=1e-3)

    def test_independent_lfs_argmax(self):
        r = ms.n_lfs(ch.Dephasing2QIndependent(deco.OhmicSpectrum(4)), W20, StateSampler(budget=50, seed=0))
        np.testing.assert_allclose(r.argmax, maximally_mixed(4), atol=1e-12)

    def test_common_blp_bell_formula(self):
        env = deco.CommonEnvSpec(deco.OhmicSpectrum(3), 0.25)
        m = ch.Dephasing2QCommon(env)
        t = np.linspace(0, 20, 400001)
        gp, gm = deco.gamma_plus_minus(env, t)
        ref = max(rises(np.exp(-gm)), rises(np.exp(-gp)))
        r = ms.n_blp(m, W20, StateSampler(budget=50, seed=0))
        assert r.value == pytest.approx(ref, abs=1e-8)
        assert r.label in ("bell_phi_pair", "bell_psi_pair")

    def test_common_rhp_rate_integral(self):
        env = deco.CommonEnvSpec(deco.OhmicSpectrum(3), 0.25)
        t = np.linspace(0, 20, 400001)
        gp, gm = deco.rate_plus_minus(env, t)
        ref = -2 * np.trapezoid(np.minimum(gp, 0), t) - 2 * np.trapezoid(np.minimum(gm, 0), t)
        assert ms.n_rhp(ch.Dephasing2QCommon(env), W20).value == pytest.approx(ref, rel=1e-7)

    def test_common_weak_ohmic_non_markovian(self):
        # a shared bath makes even sub-Ohmic dephasing non-divisible
        m = ch.Dephasing2QCommon(deco.CommonEnvSpec(deco.OhmicSpectrum(0.5), 0.25))
        assert ms.n_rhp(m, W20).value > 1e-6

    def test_common_far_apart_matches_independent(self):
        s = deco.OhmicSpectrum(3)
        common = ch.Dephasing2QCommon(deco.CommonEnvSpec(s, 1000.0))
        indep = ch.Dephasing2QIndependent(s)
        a = ms.n_rhp(common, W20).value
        b = ms.n_rhp(indep, W20, analytic_tail=False).value
        assert a == pytest.approx(b, rel=1e-2)


class TestAmplitudeDamping:
    def test_weak_coupling_zero(self):
        m = ch.AmplitudeDamping1Q(deco.LorentzianSpec(0.25))
        w = ms.default_window(m)
        for name, f in ms.MEASURES.items():
            assert abs(f(m, w).value) < 1e-8, name

    def test_strong_coupling_diverges(self):
        m = ch.AmplitudeDamping1Q(deco.LorentzianSpec(1.0))
        w = ms.default_window(m)
        r = ms.n_rhp(m, w)
        assert r.diverged and r.value > 0
        assert r.intervals[0][0] == pytest.approx(1.5 * math.pi, abs=1e-6)

    @pytest.mark.parametrize("r", [1.0, 6.0])
    def test_blp_is_rise_of_amplitude(self, r):
        # G = e^{-t/2} (cos wt + sin(wt) / 2w): |G| falls to zero and climbs back
        # to a local peak at every t_k = k pi / w
        res = deco.LorentzianSpec(r)
        w = math.sqrt(2 * r - 1) / 2
        g = lambda t: abs(deco.g_lorentzian(res, t))
        ref, k = 0.0, 1
        while True:
            zero = optimize.brentq(lambda t: deco.g_lorentzian(res, t).real, (k - 1) * math.pi / w, k * math.pi / w)
            if zero >= 40:
                break
            ref += g(min(k * math.pi / w, 40.0))
            k += 1
        m = ch.AmplitudeDamping1Q(res)
        out = ms.n_blp(m, TimeWindow(0, 40), StateSampler(budget=20, seed=0))
        assert out.value == pytest.approx(ref, abs=1e-7)   # refine_tol resolution at the kinks
        assert out.label in ("plus_minus_pair", "plus_i_minus_i_pair")
        if r == 1.0:
            assert ref == pytest.approx(sum(math.exp(-k * math.pi) for k in range(1, 7)), abs=1e-14)

    def test_blp_band_gap_best_of_coherence_and_population(self):
        res = deco.PBGSpec(-2.0)
        m = ch.AmplitudeDamping1Q(res)
        t = np.linspace(0, 20, 400001)
        mag = np.abs(deco.amplitude(res, t))
        ref = max(rises(mag), rises(mag ** 2))
        out = ms.n_blp(m, W20, StateSampler(budget=50, seed=0))
        assert out.value == pytest.approx(ref, abs=1e-7)
        assert out.label == "ground_excited_pair"

    def test_rhp_matches_rate_integral(self):
        res = deco.PBGSpec(0.0)
        m = ch.AmplitudeDamping1Q(res)
        t = np.linspace(0, 20, 200001)
        rate = m.decay_rate(t)
        ref = -np.trapezoid(np.minimum(rate, 0), t)
        assert ms.n_rhp(m, W20).value == pytest.approx(ref, rel=1e-6)
        assert ms.n_rhp(ch.AmplitudeDamping2QIndependent(res), W20).value == pytest.approx(2 * ref, rel=1e-6)

    def test_quantum_capacity_threshold(self):
        assert ms.n_q(ch.AmplitudeDamping1Q(deco.LorentzianSpec(20.0)), TimeWindow(0, 40)).value == 0.0
        assert ms.n_q(ch.AmplitudeDamping1Q(deco.LorentzianSpec(50.0)), TimeWindow(0, 40)).value > 0.0


class TestSamplerDominance:
    @pytest.mark.parametrize("model", [deph(3), deph(5), ch.AmplitudeDamping1Q(deco.LorentzianSpec(1.0)),
                                       ch.AmplitudeDamping1Q(deco.LorentzianSpec(5.0))],
                             ids=["s3", "s5", "lor1", "lor5"])
    def test_blp_candidates_dominate(self, model):
        w = ms.default_window(model)
        cand = ms.n_blp(model, w, StateSampler(budget=0)).value
        rand = ms.n_blp(model, w, StateSampler(budget=500, seed=7, include_candidates=False)).value
        assert cand >= rand - 1e-12

    @pytest.mark.parametrize("s", [3.0, 5.0])
    def test_lfs_candidates_dominate(self, s):
        cand = ms.n_lfs(deph(s), W20, StateSampler(budget=0)).value
        rand = ms.n_lfs(deph(s), W20, StateSampler(budget=500, seed=7, include_candidates=False)).value
        assert cand >= rand - 1e-12


def test_measure_result_interval_consistency():
    for s in (1.5, 3.0, 5.0):
        for f in ms.MEASURES.values():
            r = f(deph(s), W20)
            assert (r.value == 0) == (len(r.intervals) == 0) or r.value < 1e-8
