// Acceptance suite: one PASS/FAIL line per criterion. Run with a criterion number (1-8) or with no
// argument for all of them; the exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "canosys/cli.hpp"
#include "oracles/fd_nls.hpp"
#include "oracles/fd_sturm.hpp"
#include "test_util.hpp"

using namespace canosys;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok: " : "FAILED: ") + what);
  }
  void info(const std::string& what) { notes.push_back("info: " + what); }
};

std::string sci(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

LagrangianFrame dirichlet(int d = 1) { return frame_preset("dirichlet", d); }

CanonicalProblem laplacian() {
  auto one = [](double) { return 1.0; };
  return sturm_liouville_to_canonical(one, [](double) { return 0.0; }, one, Geometry::bounded(0, pi), dirichlet(),
                                      dirichlet());
}

CanonicalProblem poschl_teller() {
  auto one = [](double) { return 1.0; };
  return sturm_liouville_to_canonical(one, sech2_profile(-6.0, 1.0), one, Geometry::bounded(-15, 15), dirichlet(),
                                      dirichlet());
}

CanonicalProblem rotation() {
  return canonical_form_problem(HamiltonianField::constant("identity", CMat::Identity(2, 2)),
                                Geometry::bounded(0, pi / 2), dirichlet(), dirichlet());
}

// H = (1 + sin(x)/2) I on [0, 2]: T(x) = exp(-J theta(x)), theta = x + (1 - cos x)/2.
CanonicalProblem variable_rotation() {
  return canonical_form_problem(
      HamiltonianField::closed_form("variable_rotation", SymplecticDim(1),
                                    [](double x) { return CMat((1.0 + 0.5 * std::sin(x)) * CMat::Identity(2, 2)); }),
      Geometry::bounded(0, 2), dirichlet(), dirichlet());
}

double max_defect(const std::vector<TransferMatrix>& path) {
  double worst = 0.0;
  for (const TransferMatrix& t : path) worst = std::max(worst, t.structure_defect);
  return worst;
}

// 1. Lagrangian algebra on random frames.
Outcome criterion_1() {
  Outcome out;
  CounterRng rng(1);
  double frame = 0.0, iso = 0.0, angle = 0.0, pairing = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + trial % 4;
    const LagrangianFrame f = orthonormalize_lagrangian(SubspaceBasis(testutil::random_isotropic_span(rng, d)));
    frame = std::max(frame, f.orthonormality_defect());
    iso = std::max(iso, f.isotropy_defect());
    const CMat ker = kernel_basis(f).columns();
    Eigen::JacobiSVD<CMat> svd(f.row_form(), Eigen::ComputeFullV);
    angle = std::max(angle, max_principal_angle(ker, svd.matrixV().rightCols(d)));
    for (int s = 0; s < 3; ++s) {
      const CVec p = (ker * testutil::random_vector(rng, d)).normalized();
      const CVec q = (ker * testutil::random_vector(rng, d)).normalized();
      pairing = std::max(pairing, std::abs(q.dot(apply_j(CMat(p)).col(0))));
    }
  }
  out.require(frame <= 1e-10, "max orthonormality defect " + sci(frame) + " <= 1e-10");
  out.require(iso <= 1e-10, "max isotropy defect " + sci(iso) + " <= 1e-10");
  out.require(angle <= 1e-8, "kernel vs SVD null space, max principal angle " + sci(angle) + " <= 1e-8");
  out.require(pairing <= 1e-10, "kernel pairing |q*Jp| " + sci(pairing) + " <= 1e-10");
  return out;
}

// 2. Structure preservation along the golden propagations, second-order convergence.
Outcome criterion_2() {
  Outcome out;
  const CanonicalProblem rot = rotation();
  const double d_rot = max_defect(transfer_path(rot, 1.0, 0.0, pi / 2));
  out.require(d_rot <= 1e-8, "rotation example, max ||T*JT - J|| = " + sci(d_rot));

  const CanonicalProblem lap = laplacian();
  double d_lap = 0.0;
  for (double lambda : {0.5, 1.0, 4.0, 25.0}) d_lap = std::max(d_lap, max_defect(transfer_path(lap, lambda, 0, pi)));
  out.require(d_lap <= 1e-8, "Laplacian at lambda in {0.5, 1, 4, 25}, max ||T*JT - J|| = " + sci(d_lap));

  const CanonicalProblem nls = nls_soliton_problem(1.0, 15.0, NlsVariant::Corrected);
  const std::vector<TransferMatrix> path = transfer_path(nls, -0.5, -15.0, 15.0, {}, 10);
  double d_nls = 0.0, rel_nls = 0.0, norm_t = 0.0, first_bad = std::nan("");
  for (const TransferMatrix& t : path) {
    d_nls = std::max(d_nls, t.structure_defect);
    const double n2 = t.value.squaredNorm();
    rel_nls = std::max(rel_nls, t.structure_defect / std::max(1.0, n2));
    norm_t = std::max(norm_t, std::sqrt(n2));
    if (std::isnan(first_bad) && t.structure_defect > 1e-8) first_bad = t.at_x;
  }
  out.require(d_nls <= 1e-8, "NLS corrected at lambda = -0.5 on [-15, 15], max ||T*JT - J|| = " + sci(d_nls));
  out.info("NLS: max ||T|| = " + sci(norm_t) + ", max ||T*JT - J|| / ||T||^2 = " + sci(rel_nls) +
           (std::isnan(first_bad) ? std::string() : ", absolute defect first exceeds 1e-8 at x = " + sci(first_bad, 4)));

  const CanonicalProblem var = variable_rotation();
  const double theta = 2.0 + 0.5 * (1.0 - std::cos(2.0));
  CMat exact(2, 2);
  exact << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const double e1 = (transfer_matrix(var, 1.0, 2.0, {0.02, Scheme::Midpoint}).value - exact).norm();
  const double e2 = (transfer_matrix(var, 1.0, 2.0, {0.01, Scheme::Midpoint}).value - exact).norm();
  const double ratio = e1 / e2;
  out.require(ratio >= 3.5 && ratio <= 4.5, "h-halving error ratio " + sci(ratio, 4) + " in [3.5, 4.5] (errors " +
                                                sci(e1) + ", " + sci(e2) + ")");
  return out;
}

// 3. Green's identity on seeded relation pairs.
Outcome criterion_3() {
  Outcome out;
  struct Golden {
    std::string name;
    CanonicalProblem problem;
  };
  const std::vector<Golden> goldens{{"Laplacian", laplacian()},
                                    {"NLS corrected", nls_soliton_problem(1.0, 15.0, NlsVariant::Corrected)}};
  for (const Golden& g : goldens) {
    const double a = g.problem.geometry.left, b = g.problem.geometry.right;
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 100; ++k) {
      const RelationPair first = random_relation_pair(g.problem, a, b, 16001, 1000 + 2 * k);
      const RelationPair second = random_relation_pair(g.problem, a, b, 16001, 1001 + 2 * k);
      worst = std::max(worst, greens_identity_residual(first, second, g.problem) /
                                  greens_identity_scale(first, second, g.problem));
    }
    out.require(worst <= 1e-8, g.name + ": 100 seeded pairs, max residual / scale = " + sci(worst));

    std::vector<double> r;
    for (int n : {2001, 4001, 8001}) {
      const RelationPair first = random_relation_pair(g.problem, a, b, n, 7);
      const RelationPair second = random_relation_pair(g.problem, a, b, n, 8);
      r.push_back(greens_identity_residual(first, second, g.problem));
    }
    const double s1 = std::log2(r[0] / r[1]), s2 = std::log2(r[1] / r[2]);
    out.require(std::abs(s1 - 2.0) <= 0.2 && std::abs(s2 - 2.0) <= 0.2,
                g.name + ": refinement orders " + sci(s1) + ", " + sci(s2) + " (residuals " + sci(r[0]) + ", " +
                    sci(r[1]) + ", " + sci(r[2]) + ")");
  }
  return out;
}

// 4. Bounded spectra.
Outcome criterion_4() {
  Outcome out;
  // Finite-difference oracle first.
  const oracle::Tridiagonal fd = oracle::fd_schrodinger(
      [](double x) { return -6.0 / (std::cosh(x) * std::cosh(x)); }, -15.0, 15.0, 1e-3);
  const std::vector<double> ref = oracle::eigenvalues_between(fd, -5.0, -0.5);
  out.require(ref.size() == 2, "oracle finds " + std::to_string(ref.size()) + " bound states in [-5, -0.5]");

  const SpectrumReport lap = eigenvalues_in(laplacian(), 0.5, 26.0, 2000);
  double rel = lap.eigenpairs.size() == 5 ? 0.0 : INFINITY;
  for (std::size_t n = 1; n <= lap.eigenpairs.size() && n <= 5; ++n)
    rel = std::max(rel, std::abs(lap.eigenpairs[n - 1].lambda.real() - double(n * n)) / double(n * n));
  out.require(lap.eigenpairs.size() == 5 && rel <= 1e-6,
              "Laplacian: " + std::to_string(lap.eigenpairs.size()) + " eigenvalues, max relative error " + sci(rel));

  const SpectrumReport pt = eigenvalues_in(poschl_teller(), -5.0, -0.5, 200);
  bool ok = pt.eigenpairs.size() == 2 && ref.size() == 2;
  std::string detail = "Poschl-Teller: " + std::to_string(pt.eigenpairs.size()) + " eigenvalues";
  if (ok) {
    const double e0 = std::abs(pt.eigenpairs[0].lambda.real() - ref[0]);
    const double e1 = std::abs(pt.eigenpairs[1].lambda.real() - ref[1]);
    ok = e0 <= 1e-4 && e1 <= 1e-4;
    detail += " " + sci(pt.eigenpairs[0].lambda.real(), 10) + ", " + sci(pt.eigenpairs[1].lambda.real(), 10) +
              " vs oracle " + sci(ref[0], 10) + ", " + sci(ref[1], 10);
  }
  out.require(ok, detail + " (tolerance 1e-4)");
  return out;
}

// 5. Self-adjointness witnesses on the first five Laplacian eigenpairs.
Outcome criterion_5() {
  Outcome out;
  const CanonicalProblem p = laplacian();
  const SpectrumReport r = eigenvalues_in(p, 0.5, 26.0, 2000);
  out.require(r.eigenpairs.size() >= 5, std::to_string(r.eigenpairs.size()) + " eigenpairs available");
  if (r.eigenpairs.size() < 5) return out;
  const Witnesses w = symmetry_defect(r, p);
  double im = 0.0;
  for (const EigenPair& e : r.eigenpairs) im = std::max(im, std::abs(e.lambda.imag()));
  out.require(w.max_symmetry_defect <= 1e-6, "max symmetry defect " + sci(w.max_symmetry_defect) + " <= 1e-6");
  out.require(w.max_offdiag_gram <= 1e-6, "max off-diagonal H-Gram " + sci(w.max_offdiag_gram) + " <= 1e-6");
  out.require(im <= 1e-8, "max |Im lambda| " + sci(im) + " <= 1e-8");
  return out;
}

// 6. NLS soliton, eta = 1, L = 15.
Outcome criterion_6() {
  Outcome out;
  // (a)
  CMat expected = CMat::Zero(4, 4);
  expected.diagonal() << 6, 1, 2, 1;
  const CMat h0 = nls_hamiltonian_block_order(1.0, 0.0);
  Eigen::SelfAdjointEigenSolver<CMat> eig(h0);
  RVec want(4);
  want << 1, 1, 2, 6;
  const double spec_err = (eig.eigenvalues() - want).cwiseAbs().maxCoeff();
  CMat h_inf = CMat::Zero(4, 4);
  h_inf.diagonal() << 0, 1, 0, 1;
  const double inf_err = std::max((nls_hamiltonian_block_order(1.0, 40.0) - h_inf).norm(),
                                  (nls_hamiltonian_block_order(1.0, -40.0) - h_inf).norm());
  out.require(spec_err <= 1e-12 && (h0 - expected).norm() <= 1e-12,
              "(a) H(0) spectrum {6, 1, 2, 1}, error " + sci(spec_err));
  out.require(inf_err <= 1e-12, "(a) H(+-40) vs diag(0, 1, 0, 1), error " + sci(inf_err));

  // (b)
  const CanonicalProblem paper = nls_soliton_problem(1.0, 15.0, NlsVariant::Paper);
  const EssentialSpectrumBands paper_bands = essential_spectrum(paper);
  const bool paper_ok = paper_bands.bands.size() == 1 && !paper_bands.bands[0].lo_infinite &&
                        std::abs(paper_bands.bands[0].lo) <= 1e-6 && paper_bands.bands[0].hi_infinite;
  out.require(paper_ok, "(b) paper variant essential spectrum " + paper_bands.to_string() + ", expected [0, inf)");

  const CanonicalProblem corrected = nls_soliton_problem(1.0, 15.0, NlsVariant::Corrected);
  const EssentialSpectrumBands bands = essential_spectrum(corrected);
  const bool corrected_ok = bands.bands.size() == 2 && bands.bands[0].lo_infinite &&
                            std::abs(bands.bands[0].hi + 1.0) <= 1e-6 && std::abs(bands.bands[1].lo - 1.0) <= 1e-6 &&
                            bands.bands[1].hi_infinite;
  out.require(corrected_ok, "(b) corrected variant essential spectrum " + bands.to_string() +
                                ", expected (-inf, -1] U [1, inf)");

  // (c)
  const ZeroModeReport zm = zero_mode_residuals(corrected, uniform_grid(-15, 15, 30001));
  out.require(zm.residual_y1 <= 1e-8 && zm.residual_y2 <= 1e-8,
              "(c) zero-mode residuals y1 " + sci(zm.residual_y1) + ", y2 " + sci(zm.residual_y2) + " <= 1e-8");

  // (d) and (e) through the evans command on the shipped problem file.
  RunConfig cfg;
  cfg.command = Command::Evans;
  cfg.problem_path = std::string(CANOSYS_PROBLEMS_DIR) + "/nls_corrected.ini";
  cfg.contours = {{-0.5, 0.5, -0.5, 0.5}, {-0.9, -0.1, -0.3, 0.3}};
  const RunResult run_result = run(cfg);
  out.require(run_result.exit_status == exit_code::ok,
              "evans command exit status " + std::to_string(run_result.exit_status));
  if (run_result.exit_status != exit_code::ok) return out;
  const Json& windings = run_result.report.at("windings");
  const int origin = windings[0].at("count").get<int>();
  const int gap = windings[1].at("count").get<int>();
  out.require(origin == 2, "(d) winding on [-0.5, 0.5] x [-0.5, 0.5]i = " + std::to_string(origin) +
                               " (winding " + sci(windings[0].at("winding").get<double>(), 6) + "), expected 2");
  for (const Json& k : windings[0].at("kernel_dimensions"))
    out.info("(d) zero near " + sci(k.at("lambda")[0].get<double>()) + " + " + sci(k.at("lambda")[1].get<double>()) +
             "i: " + std::to_string(k.at("bounded_solutions").get<int>()) +
             " independent solutions decaying at both ends");
  out.require(gap == 0, "(d) winding on [-0.9, -0.1] x [-0.3, 0.3]i = " + std::to_string(gap) + ", expected 0");

  const std::string verdict = run_result.report.at("verdict").get<std::string>();
  bool off_axis_unstable = false;
  for (const Json& w : windings)
    for (const Json& z : w.at("zeros"))
      if (z[0].get<double>() > 1e-6 && std::abs(z[1].get<double>()) > 1e-6) off_axis_unstable = true;
  out.require(verdict.rfind("no zeros with Re lambda > 0 found", 0) == 0 && !off_axis_unstable,
              "(e) verdict \"" + verdict + "\"");
  // Independent cross-check of (e): dense finite differences of the coupled system.
  int off_axis = 0;
  for (std::complex<double> z : oracle::fd_nls_eigenvalues(1.0, 15.0, 600))
    if (z.real() > 1e-6 && std::abs(z.imag()) > 1e-6) ++off_axis;
  out.info("(e) finite-difference oracle: " + std::to_string(off_axis) + " eigenvalues with Re lambda > 0 off the real axis");
  return out;
}

// 7. Variational quotient at the lowest Laplacian eigenfunction.
Outcome criterion_7() {
  Outcome out;
  const CanonicalProblem p = laplacian();
  const EigenPair e = eigenfunction(p, 1.0);
  const SampledPath& y = e.eigenfunction();
  const double q0 = rayleigh_quotient(y, p);
  out.require(std::abs(q0 - 1.0) <= 1e-4, "quotient " + sci(q0, 12) + " vs lambda_1 = 1 (tolerance 1e-4)");
  const double q5 = rayleigh_quotient({y.x, 5.0 * y.values}, p);
  out.require(std::abs(q5 - q0) <= 1e-12, "scaling by 5 changes it by " + sci(std::abs(q5 - q0)));

  // Perturbation by the H-orthogonal state (sin 3x, 3 cos 3x).
  SampledPath delta{y.x, CMat::Zero(2, y.points())};
  for (Eigen::Index k = 0; k < y.points(); ++k) {
    delta.values(0, k) = std::sin(3 * y.x[k]);
    delta.values(1, k) = 3 * std::cos(3 * y.x[k]);
  }
  out.info("<y, delta>_H = " + sci(std::abs(h_inner(y, delta, p))));
  std::vector<double> lx, ly;
  for (double eps = 1e-1; eps >= 1e-3 * 0.99; eps /= 2) {
    const double shift = std::abs(rayleigh_quotient({y.x, y.values + eps * delta.values}, p) - q0);
    lx.push_back(std::log(eps));
    ly.push_back(std::log(shift));
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  out.require(std::abs(slope - 2.0) <= 0.2, "stationarity: log-log slope " + sci(slope, 4) + " over eps in [1e-3, 1e-1]");
  return out;
}

// 8. The zero-mode inconsistency of the uncorrected system, asserted in both directions.
Outcome criterion_8() {
  Outcome out;
  for (double eta : {1.0, 1.5}) {
    const std::vector<double> grid = uniform_grid(-15, 15, 30001);
    const ZeroModeReport paper = zero_mode_residuals(nls_soliton_problem(eta, 15.0, NlsVariant::Paper), grid);
    const ZeroModeReport corrected =
        zero_mode_residuals(nls_soliton_problem(eta, 15.0, NlsVariant::Corrected), grid);
    const double expected = eta * eta * paper.max_v1;
    out.require(paper.residual_y1 > 1e-3 && std::abs(paper.residual_y1 - expected) <= 1e-2 * expected,
                "eta = " + sci(eta) + ": uncorrected y1 residual " + sci(paper.residual_y1, 6) +
                    " vs eta^2 max|v1| = " + sci(expected, 6));
    out.require(corrected.residual_y1 <= 1e-8 && corrected.residual_y2 <= 1e-8,
                "eta = " + sci(eta) + ": corrected residuals y1 " + sci(corrected.residual_y1) + ", y2 " +
                    sci(corrected.residual_y2) + " <= 1e-8");
    out.info("eta = " + sci(eta) + ": uncorrected y2 residual " + sci(paper.residual_y2, 6));
  }
  return out;
}

struct Criterion {
  const char* title;
  double budget_s;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"Lagrangian algebra on 1000 random frames", 5, criterion_1},
      {"structure preservation and second-order convergence", 30, criterion_2},
      {"Green's identity on seeded relation pairs", 10, criterion_3},
      {"bounded spectra (Laplacian, Poschl-Teller)", 60, criterion_4},
      {"self-adjointness witnesses", 0, criterion_5},
      {"NLS soliton spectrum", 120, criterion_6},
      {"variational quotient", 0, criterion_7},
      {"zero-mode residuals with and without the eta^2 term", 0, criterion_8},
  };
  std::vector<int> selected;
  if (argc > 1) {
    const int k = std::atoi(argv[1]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [criterion 1-%zu]\n", argv[0], criteria.size());
      return 2;
    }
    selected.push_back(k);
  } else {
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);
  }

  bool all = true;
  for (int k : selected) {
    const Criterion& c = criteria[static_cast<std::size_t>(k - 1)];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0) o.require(seconds < c.budget_s, "runtime " + sci(seconds) + " s < " + sci(c.budget_s) + " s");
    std::printf("%s %d: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", k, c.title, seconds);
    for (const std::string& note : o.notes) std::printf("    %s\n", note.c_str());
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
