// One line per acceptance criterion; exits nonzero if any fails.
#include <cstdio>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "oscsync/scenario.hpp"
#include "oscsync/verify.hpp"

using namespace oscsync;

namespace {

// Independent check of the reference spectrum: kernel of L^T by full-pivot LU
// and the second eigenvalue by a general eigen solve of L.
bool spectrum_oracle(const ScenarioConfig& ref, std::string& detail) {
  const Matrix a = ref.network().weights() * (ref.protocol.coupling / static_cast<double>(ref.bank.size()));
  const Matrix l = Matrix(a.rowwise().sum().asDiagonal()) - a;
  Vector g = Eigen::FullPivLU<Matrix>(l.transpose()).kernel().col(0);
  g /= g.norm();
  if (g.sum() < 0) g = -g;
  const Vector expect = (Vector(5) << 0.6527, 0.2670, 0.0890, 0.3264, 0.6231).finished();
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(l).eigenvalues();
  std::vector<double> re;
  for (Eigen::Index i = 0; i < ev.size(); ++i) re.push_back(ev(i).real());
  std::sort(re.begin(), re.end());
  const double gamma_err = (g - expect).cwiseAbs().maxCoeff();
  detail = "oracle gamma err " + std::to_string(gamma_err) + ", oracle lambda2 " + std::to_string(re[1]);
  return gamma_err <= 1e-4 && std::abs(re[1] - 2.382) <= 1e-3;
}

bool bound_oracle(const ScenarioConfig& ref, std::string& detail) {
  const Vector w = ref.bank.natural_freq;
  const double hand = (w.array() - 1.0720).matrix().norm() / 2.382;
  detail = "hand bound " + std::to_string(hand);
  return std::abs(hand - 0.1528) <= 1e-3;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : OSCSYNC_REFERENCE_SCENARIO;
  const VerifyOptions options{load_scenario(path)};
  int failed = 0;
  for (int id = 1; id <= kCriterionCount; ++id) {
    CriterionResult r = verify_criterion(id, options);
    std::string extra;
    if (id == 1) r.passed = spectrum_oracle(options.reference, extra) && r.passed;
    if (id == 2) r.passed = bound_oracle(options.reference, extra) && r.passed;
    if (!r.passed) ++failed;
    std::printf("criterion %2d %s: %s [%s%s%s] %.3fs\n", id, r.passed ? "PASS" : "FAIL", r.title.c_str(),
                r.detail.c_str(), extra.empty() ? "" : "; ", extra.c_str(), r.seconds);
  }
  std::printf("%d of %d criteria passed\n", kCriterionCount - failed, kCriterionCount);
  return failed == 0 ? 0 : 1;
}
