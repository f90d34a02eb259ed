#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "canosys/evans.hpp"
#include "canosys/spectral.hpp"
#include "test_util.hpp"

using namespace canosys;

namespace {

CanonicalProblem line_schrodinger(ScalarFunction q, double half_length = 15.0) {
  auto one = [](double) { return 1.0; };
  return sturm_liouville_to_canonical(one, std::move(q), one, Geometry::full_line(half_length), Asymptotic{},
                                      Asymptotic{});
}

CanonicalProblem poschl_teller_line() { return line_schrodinger(sech2_profile(-6.0, 1.0)); }

CanonicalProblem nls(NlsVariant v) { return nls_soliton_problem(1.0, 15.0, v); }

EvansOptions fast(int n_samples = 64) {
  EvansOptions o;
  o.n_samples = n_samples;
  return o;
}

CMat unimodular(CounterRng& rng, int d) {
  CMat m = testutil::random_matrix(rng, d, d) + 2.0 * CMat::Identity(d, d);
  const cplx det = m.determinant();
  m.row(0) /= det;
  return m;
}

}  // namespace

TEST_CASE("asymptotic generators and dispersion relations") {
  const AsymptoticSystem paper = asymptotic_matrices(nls(NlsVariant::Paper));
  const AsymptoticSystem corrected = asymptotic_matrices(nls(NlsVariant::Corrected));
  for (cplx lambda : {cplx(0.7), cplx(-0.4), cplx(0.3, 0.5)}) {
    for (Side side : {Side::Minus, Side::Plus}) {
      const CVec mu_p = paper.spatial_eigenvalues(lambda, side);
      const CVec mu_c = corrected.spatial_eigenvalues(lambda, side);
      REQUIRE(mu_p.size() == 4);
      for (Eigen::Index i = 0; i < 4; ++i) {
        // e^{ikx} with mu = i k: (k^2)^2 = lambda^2 and (k^2 + 1)^2 = lambda^2.
        const cplx k2p = -mu_p(i) * mu_p(i);
        const cplx k2c = -mu_c(i) * mu_c(i);
        CHECK(std::abs(k2p * k2p - lambda * lambda) <= 1e-12);
        CHECK(std::abs((k2c + 1.0) * (k2c + 1.0) - lambda * lambda) <= 1e-12);
      }
    }
  }
  CMat c0(2, 2), c1(2, 2);
  c0 << 1, 0.5, 0.5, -2;
  c1 << 0, 0, 0, 1;
  const CanonicalProblem constant = raw_pencil_problem(
      SymplecticDim(1), [=](double) { return c0; }, [=](double) { return c1; },
      HamiltonianField::constant("c1", c1), Geometry::full_line(5), Asymptotic{}, Asymptotic{});
  const AsymptoticSystem asys = asymptotic_matrices(constant);
  const cplx lambda(0.3, -1.1);
  CHECK((asys.generator(lambda, Side::Plus) - apply_j_inverse(c0 + lambda * c1)).norm() == 0.0);
  CHECK((asys.generator(lambda, Side::Minus) - apply_j_inverse(c0 + lambda * c1)).norm() == 0.0);
}

TEST_CASE("missing asymptotic limit") {
  try {
    asymptotic_matrices(line_schrodinger([](double x) { return std::sin(x); }));
    FAIL("expected NoAsymptoticLimit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoAsymptoticLimit);
  }
}

TEST_CASE("essential spectrum bands") {
  const EssentialSpectrumBands corrected = essential_spectrum(nls(NlsVariant::Corrected));
  REQUIRE(corrected.bands.size() == 2);
  CHECK(corrected.bands[0].lo_infinite);
  CHECK(corrected.bands[0].hi == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(corrected.bands[1].lo == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(corrected.bands[1].hi_infinite);
  CHECK_FALSE(corrected.contains(0.0));
  CHECK(corrected.distance(0.5) == doctest::Approx(0.5).epsilon(1e-6));

  const EssentialSpectrumBands free = essential_spectrum(line_schrodinger([](double) { return 0.0; }));
  REQUIRE(free.bands.size() == 1);
  CHECK(std::abs(free.bands[0].lo) <= 1e-6);
  CHECK(free.bands[0].hi_infinite);
  CHECK(free.to_string().find("inf") != std::string::npos);

  // Without the rotating-frame term, mu^4 = lambda^2 has a purely imaginary root for every real lambda.
  const EssentialSpectrumBands paper = essential_spectrum(nls(NlsVariant::Paper));
  for (double lambda : {-50.0, -0.5, 0.0, 0.5, 50.0}) CHECK(paper.contains(lambda));
}

TEST_CASE("decaying subspaces") {
  const AsymptoticSystem corrected = asymptotic_matrices(nls(NlsVariant::Corrected));
  const CVec mu = corrected.spatial_eigenvalues(0.0, Side::Plus);
  for (Eigen::Index i = 0; i < mu.size(); ++i) CHECK(std::abs(std::abs(mu(i)) - 1.0) <= 1e-12);
  for (Side side : {Side::Minus, Side::Plus}) {
    const SubspaceBasis s = decaying_subspace(corrected, 0.0, side);
    CHECK(s.size() == 2);
    const CMat g = corrected.generator(0.0, side);
    // Invariant subspace: G S = S M for some M.
    const CMat q = s.orthonormal();
    CHECK(((CMat::Identity(4, 4) - q * q.adjoint()) * g * q).norm() <= 1e-10);
    const CMat p = decaying_projector(corrected, 0.0, side);
    CHECK((p * p - p).norm() <= 1e-10);
  }
  const AsymptoticSystem sl = asymptotic_matrices(line_schrodinger(sech2_profile(-6.0, 1.0)));
  CHECK(decaying_subspace(sl, -1.0, Side::Plus).size() == 1);
  const CVec decay = sl.spatial_eigenvalues(-1.0, Side::Plus);
  CHECK(std::abs(std::abs(decay(0).real()) - 1.0) <= 1e-10);
  try {
    decaying_subspace(sl, 2.0, Side::Plus);
    FAIL("expected OnEssentialSpectrum");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OnEssentialSpectrum);
  }
  for (double lambda : {-0.9, -0.5, 0.0, 0.5, 0.9})
    for (Side side : {Side::Minus, Side::Plus}) CHECK(decaying_subspace(corrected, lambda, side).size() == 2);
}

TEST_CASE("NLS Evans function vanishes at the origin") {
  const CanonicalProblem p = nls(NlsVariant::Corrected);
  const EvansFunction e(p);
  const EvansValue at_zero = e(0.0);
  const EvansValue in_gap = e(-0.5);
  CHECK(std::exp(at_zero.log_abs() - in_gap.log_abs()) <= 1e-6);
  CHECK(in_gap.conditioning > 1e-2);
  CHECK(at_zero.conditioning < 1e-6);
  const RVec s = e.matched_singular_values(0.0);
  CHECK(s(s.size() - 1) <= 1e-6);
  CHECK(s(s.size() - 2) <= 1e-6);
  CHECK(s(s.size() - 3) > 1e-3);
}

TEST_CASE("Poschl-Teller on the line") {
  const CanonicalProblem p = poschl_teller_line();
  for (double lambda : {-4.0, -1.0}) {
    const WindingReport w = count_zeros_winding(p, {lambda - 0.3, lambda + 0.3, -0.3, 0.3}, fast());
    CHECK(w.count == 1);
    REQUIRE(w.zeros.size() == 1);
    CHECK(std::abs(w.zeros[0].real() - lambda) <= 1e-3);
    CHECK(std::abs(w.zeros[0].imag()) <= 1e-6);
  }
  CHECK(count_zeros_winding(p, {-3.5, -1.5, -0.4, 0.4}, fast()).count == 0);

  // Agreement with the bounded-interval spectrum on [-L, L].
  auto one = [](double) { return 1.0; };
  const CanonicalProblem bounded = sturm_liouville_to_canonical(
      one, sech2_profile(-6.0, 1.0), one, Geometry::bounded(-15, 15), frame_preset("dirichlet", 1),
      frame_preset("dirichlet", 1));
  SpectralOptions so;
  so.step = {1e-2, Scheme::Magnus4};
  const SpectrumReport r = eigenvalues_in(bounded, -5.0, -0.5, 100, so);
  REQUIRE(r.eigenpairs.size() == 2);
  const WindingReport w = count_zeros_winding(p, {-4.5, -0.5, -0.5, 0.5}, fast(100));
  REQUIRE(w.zeros.size() == 2);
  std::vector<double> z{w.zeros[0].real(), w.zeros[1].real()};
  std::sort(z.begin(), z.end());
  CHECK(std::abs(z[0] - r.eigenpairs[0].lambda.real()) <= 1e-3);
  CHECK(std::abs(z[1] - r.eigenpairs[1].lambda.real()) <= 1e-3);
}

TEST_CASE("half-line problem keeps only the odd bound state") {
  auto one = [](double) { return 1.0; };
  const CanonicalProblem p = sturm_liouville_to_canonical(one, sech2_profile(-6.0, 1.0), one,
                                                          Geometry::half_line(0.0, 15.0),
                                                          frame_preset("dirichlet", 1), Asymptotic{});
  const WindingReport w = count_zeros_winding(p, {-4.5, -0.5, -0.5, 0.5}, fast());
  CHECK(w.count == 1);
  REQUIRE(w.zeros.size() == 1);
  CHECK(std::abs(w.zeros[0].real() + 1.0) <= 1e-3);
}

TEST_CASE("free line has no point spectrum") {
  const CanonicalProblem p = line_schrodinger([](double) { return 0.0; });
  CHECK(count_zeros_winding(p, {-3.0, -0.2, -1.0, 1.0}, fast()).count == 0);
}

TEST_CASE("gauge invariance under unimodular recombinations") {
  const CanonicalProblem p = poschl_teller_line();
  CounterRng rng(77);
  EvansOptions base = fast();
  EvansOptions mixed = fast();
  mixed.recombination_minus = unimodular(rng, 1);
  mixed.recombination_plus = unimodular(rng, 1);
  const EvansFunction e0(p, base), e1(p, mixed);
  const cplx r1 = e1(cplx(-2.5, 0.3)).full() / e0(cplx(-2.5, 0.3)).full();
  const cplx r2 = e1(cplx(-0.7, -0.2)).full() / e0(cplx(-0.7, -0.2)).full();
  CHECK(std::abs(r1 - r2) <= 1e-8 * std::abs(r1));

  const CanonicalProblem q = nls(NlsVariant::Corrected);
  EvansOptions nls_mixed;
  nls_mixed.recombination_minus = unimodular(rng, 2);
  nls_mixed.recombination_plus = unimodular(rng, 2);
  const EvansFunction f0(q), f1(q, nls_mixed);
  const cplx s1 = f1(cplx(-0.5, 0.1)).full() / f0(cplx(-0.5, 0.1)).full();
  const cplx s2 = f1(cplx(0.3, -0.4)).full() / f0(cplx(0.3, -0.4)).full();
  CHECK(std::abs(s1 - s2) <= 1e-6 * std::abs(s1));
  CHECK(std::abs(std::abs(s1) - 1.0) <= 1e-8);

  const WindingReport w0 = count_zeros_winding(p, {-4.5, -3.5, -0.5, 0.5}, base);
  const WindingReport w1 = count_zeros_winding(p, {-4.5, -3.5, -0.5, 0.5}, mixed);
  CHECK(w0.count == w1.count);
}

TEST_CASE("reference normalization") {
  EvansOptions o;
  o.lambda_ref = cplx(-2.5);
  const CanonicalProblem p = poschl_teller_line();
  const EvansFunction e(p, o);
  CHECK(std::abs(e(-2.5).full() - 1.0) <= 1e-12);
}

TEST_CASE("contours must avoid the essential spectrum") {
  try {
    count_zeros_winding(nls(NlsVariant::Corrected), {-0.5, 1.5, -0.5, 0.5}, fast());
    FAIL("expected ContourTouchesEssentialSpectrum");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ContourTouchesEssentialSpectrum);
  }
  // Entirely off the real axis is allowed even above a band.
  CHECK(count_zeros_winding(line_schrodinger([](double) { return 0.0; }), {1.0, 2.0, 0.5, 1.0}, fast()).count == 0);
}

TEST_CASE("NLS zero modes") {
  const std::vector<double> grid = uniform_grid(-15, 15, 30001);
  const ZeroModeReport c = zero_mode_residuals(nls(NlsVariant::Corrected), grid);
  CHECK(c.residual_y1 <= 1e-8);
  CHECK(c.residual_y2 <= 1e-8);
  CHECK(std::isfinite(c.hnorm_y1));
  CHECK(std::isfinite(c.hnorm_y2));
  CHECK(c.hnorm_y1 > 0.0);
  const ZeroModeReport p = zero_mode_residuals(nls(NlsVariant::Paper), grid);
  CHECK(p.residual_y1 == doctest::Approx(p.max_v1).epsilon(1e-3));
  CHECK(std::isfinite(p.hnorm_y1));
  CHECK_THROWS_AS(zero_mode_residuals(poschl_teller_line(), grid), Error);
}
