import math

import numpy as np
import pytest
import sympy

from eulerlab import contact as ct
from eulerlab import spectral as sp
from eulerlab.errors import NotPositiveDefinite
from eulerlab.trig import TrigPoly

TWO_PI = 2 * np.pi
X = sympy.symbols("x1 x2 x3")


@pytest.fixture(scope="module")
def model():
    return ct.std_contact_t3()


@pytest.fixture(scope="module")
def beta():
    return ct.default_perturbation_form()


@pytest.fixture(scope="module")
def family(model, beta):
    contact, g = model
    return ct.metric_family(g, contact, beta, [-0.2, -0.1, -0.05, 0.05, 0.1, 0.2])


def rand_pts(n=40, key=9):
    gen = np.random.Generator(np.random.Philox(key=np.array([key, 0], dtype=np.uint64)))
    return gen.uniform(0, TWO_PI, size=(n, 3))


class TestStandardModel:
    def test_alpha_at_zero_is_dx1(self, model):
        contact, _ = model
        assert np.allclose(contact.alpha.eval([0.0, 0.0, 0.0])[0], [1, 0, 0], atol=1e-15)

    def test_wedge_gives_standard_volume(self, model):
        # symbolic oracle: alpha ^ d(alpha) = (cos^2 + sin^2) dx1^dx2^dx3
        contact, _ = model
        a = [sympy.cos(X[2]), -sympy.sin(X[2]), sympy.Integer(0)]
        w_sym = [
            sympy.diff(a[2], X[1]) - sympy.diff(a[1], X[2]),
            sympy.diff(a[0], X[2]) - sympy.diff(a[2], X[0]),
            sympy.diff(a[1], X[0]) - sympy.diff(a[0], X[1]),
        ]
        wedge = sympy.simplify(sum(ai * wi for ai, wi in zip(a, w_sym)))
        assert wedge == 1
        pts = rand_pts()
        w = np.stack([c.eval(pts) for c in contact.alpha.exterior_vector()], axis=-1)
        vals = np.einsum("pi,pi->p", contact.alpha.eval(pts), w)
        assert np.max(np.abs(vals - 1.0)) < 1e-14

    def test_reeb_is_unit_eigenfield(self, model):
        contact, _ = model
        R = contact.reeb
        cR = sp.curl_spectral(R)
        for k in R.coeffs:
            assert np.array_equal(cR.mode(k), R.mode(k))

    def test_reeb_pairing_and_interior_product(self, model):
        contact, _ = model
        rc = contact.reeb_components()
        pairing = contact.alpha.pair_field(rc)
        assert pairing.terms == {(0, (0, 0, 0)): 1.0}
        # i_R d(alpha) = 0: the vector proxy w is parallel to R, so w x R = 0
        pts = rand_pts(key=10)
        w = np.stack([c.eval(pts) for c in contact.alpha.exterior_vector()], axis=-1)
        Rv = contact.reeb.evaluate(pts)
        assert np.max(np.abs(np.cross(w, Rv))) < 1e-14

    def test_flat_compatibility(self, model):
        contact, g = model
        rep = ct.check_compatibility(g, contact)
        assert rep.max_defect() <= 1e-12


class TestCheckCompatibility:
    def test_family_members(self, model, family):
        contact, _ = model
        for eps in (-0.2, -0.05, 0.1, 0.2):
            rep = ct.check_compatibility(family.member(eps), contact)
            assert rep.max_defect() <= 1e-10

    def test_scaled_metric_unit_norm_defect(self, model):
        # doubling the metric shrinks the 1-form norm to 1/sqrt(2)
        contact, g = model
        doubled = ct.MetricField(
            g_xi=g.g_xi.scaled(2.0),
            alpha_sq=g.alpha_sq.scaled(2.0),
            inv_entries=None,
            degree_hint=2,
        )
        rep = ct.check_compatibility(doubled, contact)
        assert rep.unit_norm_defect == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-12)


class TestXiProjection:
    def test_alpha_projects_to_zero(self, model):
        contact, g = model
        out = ct.xi_projection(contact.alpha, contact, g)
        assert all(c.max_abs_coeff() <= 1e-15 for c in out.comps)

    def test_form_annihilating_reeb_unchanged(self, model):
        contact, g = model
        form = ct.OneForm.from_polys(TrigPoly(), TrigPoly(), TrigPoly.cos((0, 1, 0)))
        out = ct.xi_projection(form, contact, g)
        for a, b in zip(out.comps, form.comps):
            assert a.allclose(b, tol=1e-15)

    def test_symbolic_oracle(self, model):
        # beta dual of (0, sin x1, cos x1): beta(R) = -sin x1 sin x3, so
        # beta_xi = beta + sin x1 sin x3 alpha
        contact, g = model
        form = ct.OneForm.from_polys(TrigPoly(), TrigPoly.sin((1, 0, 0)), TrigPoly.cos((1, 0, 0)))
        out = ct.xi_projection(form, contact, g)
        pts = rand_pts(key=11)
        s1, s3, c3 = np.sin(pts[:, 0]), np.sin(pts[:, 2]), np.cos(pts[:, 2])
        # beta + (sin x1 sin x3) * alpha with alpha = (cos x3, -sin x3, 0)
        expected = np.stack(
            [s1 * s3 * c3, s1 - s1 * s3 * s3, np.cos(pts[:, 0])], axis=-1)
        assert np.max(np.abs(out.eval(pts) - expected)) < 1e-13

    def test_annihilates_reeb(self, model, beta):
        contact, g = model
        out = ct.xi_projection(beta, contact, g)
        pairing = out.pair_field(contact.reeb_components())
        assert pairing.max_abs_coeff() <= 1e-16


class TestVariationTensor:
    def test_traceless(self, model, beta):
        contact, g = model
        var = ct.variation_tensor(beta, contact, g)
        tr = var.entries.trace_against(g.inv_entries)
        pts, _ = ct.uniform_grid(32)
        assert float(np.max(np.abs(tr.eval(pts)))) <= 1e-12

    def test_annihilates_reeb(self, model, beta):
        contact, g = model
        var = ct.variation_tensor(beta, contact, g)
        pts = rand_pts(key=12)
        H = var.entries.eval_matrix(pts)
        Rv = contact.reeb.evaluate(pts)
        assert np.max(np.abs(np.einsum("pij,pj->pi", H, Rv))) <= 1e-14

    def test_entry_value_symbolic_oracle(self, model):
        # unnormalized beta = (0, sin x1, cos x1) dual; sympy evaluates
        # h11 = (beta_xi)_1^2 - |beta_xi|^2 (g_xi)_11 / 2 at (pi/2, 0, 0)
        contact, g = model
        form = ct.OneForm.from_polys(TrigPoly(), TrigPoly.sin((1, 0, 0)), TrigPoly.cos((1, 0, 0)))
        var = ct.variation_tensor(form, contact, g)
        s1, s3, c3 = sympy.sin(X[0]), sympy.sin(X[2]), sympy.cos(X[2])
        bxi = [s1 * s3 * c3, sympy.sin(X[0]) * c3 ** 2, sympy.cos(X[0])]
        norm2 = sum(b ** 2 for b in bxi)
        gxi11 = 1 - c3 ** 2
        h11 = bxi[0] ** 2 - norm2 * gxi11 / 2
        point = {X[0]: sympy.pi / 2, X[1]: 0, X[2]: 0}
        expected = float(h11.subs(point))
        got = var.entries.entries[0][0].eval(np.array([[np.pi / 2, 0.0, 0.0]]))[0]
        assert got == pytest.approx(expected, abs=1e-14)

    def test_norm2_closed_form(self, model, beta):
        contact, g = model
        var = ct.variation_tensor(beta, contact, g)
        pts = rand_pts(key=13)
        expected = TWO_PI ** -3 * (1 - np.sin(pts[:, 0]) ** 2 * np.sin(pts[:, 2]) ** 2)
        assert np.max(np.abs(var.norm2.eval(pts) - expected)) < 1e-16


class TestMetricFamily:
    def test_member_zero_is_base(self, model, family):
        _, g = model
        pts = rand_pts(key=14)
        assert np.array_equal(family.member(0.0).matrix(pts), g.matrix(pts))

    def test_det_rigidity(self, family, model):
        _, g = model
        pts, _ = ct.uniform_grid(16)
        det0 = np.linalg.det(g.matrix(pts))
        for eps in (-0.2, 0.07, 0.2):
            det = np.linalg.det(family.member(eps).matrix(pts))
            assert np.max(np.abs(det - det0) / np.abs(det0)) <= 1e-12

    def test_first_order_is_variation_tensor(self, family):
        # finite-difference oracle with Richardson slope
        pts = rand_pts(key=15)
        H = family.variation.entries.eval_matrix(pts)
        base = family.member(0.0).matrix(pts)
        defects = []
        eps_levels = (1e-2, 1e-3)
        for eps in eps_levels:
            fd = (family.member(eps).matrix(pts) - base) / eps
            defects.append(float(np.max(np.abs(fd - H))))
        order = math.log(defects[0] / defects[1]) / math.log(eps_levels[0] / eps_levels[1])
        assert order >= 0.9

    def test_first_order_consistency_across_decade(self, family):
        pts = rand_pts(key=16)
        H = family.variation.entries.eval_matrix(pts)
        base = family.member(0.0).matrix(pts)
        epsilons = np.array([0.2, 0.1, 0.05, 0.02])
        defects = np.array([
            float(np.max(np.abs((family.member(e).matrix(pts) - base) / e - H)))
            for e in epsilons
        ])
        slope = np.polyfit(np.log(epsilons), np.log(defects), 1)[0]
        assert slope >= 0.9

    def test_not_positive_definite_rejected(self, model, beta):
        contact, g = model
        bad = ct.MetricField(
            g_xi=g.g_xi.scaled(-2.0),
            alpha_sq=g.alpha_sq,
            inv_entries=ct.TensorPoly.identity(),
            degree_hint=2,
        )
        with pytest.raises(NotPositiveDefinite):
            bad.check_positive()
        with pytest.raises(NotPositiveDefinite):
            ct.metric_family(bad, contact, beta, [0.1])


class TestNoncollinearity:
    def test_alpha_with_itself(self, model):
        contact, _ = model
        assert ct.noncollinearity_measure(contact.alpha, contact.alpha, 16, 1e-3) == 1.0

    def test_default_beta_vanishing_fraction(self, model, beta):
        contact, _ = model
        fractions = [
            ct.noncollinearity_measure(contact.alpha, beta, 32, tol)
            for tol in (1e-1, 1e-2, 1e-3)
        ]
        assert fractions[0] >= fractions[1] >= fractions[2]
        assert fractions[2] < 0.05

    def test_random_unit_eigenform_fraction(self, model):
        contact, g = model
        # random element of the unit-eigenvalue space, L2-orthogonal to alpha
        v = sp.random_beltrami(1, 17)
        comps = ct.trig_components(v)
        form = ct.OneForm(comps=comps)
        overlap = 0.0
        norm_a = 0.0
        for a, b in zip(contact.alpha.comps, form.comps):
            overlap += (a * b).integral()
            norm_a += (a * a).integral()
        form = form - contact.alpha.scaled(overlap / norm_a)
        frac = ct.noncollinearity_measure(contact.alpha, form, 64, 1e-3)
        assert frac < 0.05


class TestVariationPairing:
    def test_alpha_diagonal_vanishes(self, model, family):
        contact, g = model
        val = ct.variation_pairing(contact.alpha, contact.alpha, family.variation,
                                   g, contact.lambda0)
        assert abs(val) <= 1e-15

    def test_beta_diagonal_quarter_power(self, model, beta, family):
        # independent Gauss-Legendre quadrature oracle for the quartic integral
        contact, g = model
        from numpy.polynomial.legendre import leggauss

        x, w = leggauss(32)
        x = (x + 1.0) * np.pi
        w = w * np.pi
        X1, X2, X3 = np.meshgrid(x, x, x, indexing="ij")
        pts = np.stack([X1.ravel(), X2.ravel(), X3.ravel()], axis=-1)
        W = (w[:, None, None] * w[None, :, None] * w[None, None, :]).ravel()
        q = family.variation.norm2.eval(pts)
        ref = contact.lambda0 * 0.5 * float(np.sum(q ** 2 * W))
        val = ct.variation_pairing(beta, beta, family.variation, g, contact.lambda0)
        assert val == pytest.approx(ref, rel=1e-12)
        # closed form for the default direction
        assert val == pytest.approx(41.0 / (128.0 * TWO_PI ** 3), rel=1e-13)

    def test_symmetry(self, model, beta, family):
        contact, g = model
        ab = ct.variation_pairing(contact.alpha, beta, family.variation, g, 1.0)
        ba = ct.variation_pairing(beta, contact.alpha, family.variation, g, 1.0)
        assert abs(ab - ba) <= 1e-13

    def test_lambda_scaling(self, model, beta, family):
        contact, g = model
        v1 = ct.variation_pairing(beta, beta, family.variation, g, 1.0)
        v2 = ct.variation_pairing(beta, beta, family.variation, g, 2.0)
        assert v2 == pytest.approx(2.0 * v1, rel=1e-14)
