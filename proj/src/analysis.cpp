#include "oscsync/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "oscsync/error.hpp"

namespace oscsync {

double wrap_phase(double x) {
  double y = x - kTwoPi * std::floor((x + kPi) / kTwoPi);
  // floor() rounding can land exactly on +pi for inputs just below it.
  if (y >= kPi) y -= kTwoPi;
  if (y < -kPi) y += kTwoPi;
  return y;
}

OrderParameter order_parameter(std::span<const double> theta) {
  if (theta.empty()) throw InvalidArgument("order parameter of an empty phase vector");
  std::complex<double> sum{0.0, 0.0};
  for (double th : theta) sum += std::polar(1.0, th);
  sum /= static_cast<double>(theta.size());
  OrderParameter out;
  out.r = std::min(1.0, std::abs(sum));
  if (out.r > 1e-12) out.psi = wrap_phase(std::arg(sum));
  return out;
}

OrderParameter order_parameter(const Vector& theta) {
  return order_parameter(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())));
}

Matrix phase_error(const Trajectory& traj, const ConsensusLine& line) {
  Matrix e(traj.theta.rows(), traj.theta.cols());
  for (Eigen::Index k = 0; k < e.rows(); ++k) {
    const double ref = line.at(traj.times[static_cast<std::size_t>(k)]);
    for (Eigen::Index i = 0; i < e.cols(); ++i) e(k, i) = wrap_phase(traj.theta(k, i) - ref);
  }
  return e;
}

ConsensusLine fit_consensus(const Trajectory& traj, double t_start, double t_end) {
  if (!(t_end > t_start)) throw InvalidArgument("fit window must have positive length");
  const double slack = 1e-9 * std::max(1.0, traj.step);
  std::vector<double> ts;
  std::vector<double> psi;
  double previous = 0.0;
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    const double t = traj.times[k];
    if (t < t_start - slack || t > t_end + slack) continue;
    const OrderParameter op = order_parameter(Vector(traj.theta.row(static_cast<Eigen::Index>(k)).transpose()));
    if (!op.psi) {
      throw InvalidArgument("collective phase undefined (r = 0) at t = " + std::to_string(t));
    }
    const double value = psi.empty() ? *op.psi : previous + wrap_phase(*op.psi - previous);
    ts.push_back(t);
    psi.push_back(value);
    previous = value;
  }
  if (ts.size() < 10) {
    throw InvalidArgument("fit window [" + std::to_string(t_start) + ", " + std::to_string(t_end) +
                          "] holds " + std::to_string(ts.size()) + " samples, need at least 10");
  }
  // Centered least squares for numerical stability.
  const double n = static_cast<double>(ts.size());
  double t_mean = 0.0, p_mean = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    t_mean += ts[k];
    p_mean += psi[k];
  }
  t_mean /= n;
  p_mean /= n;
  double stt = 0.0, stp = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - t_mean) * (ts[k] - t_mean);
    stp += (ts[k] - t_mean) * (psi[k] - p_mean);
  }
  ConsensusLine line;
  line.slope = stp / stt;
  line.intercept = wrap_phase(p_mean - line.slope * t_mean);
  line.window_start = ts.front();
  line.window_end = ts.back();
  return line;
}

MutualDifference max_mutual_difference(const Vector& theta) {
  MutualDifference out;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    for (Eigen::Index j = i + 1; j < theta.size(); ++j) {
      const double d = std::abs(wrap_phase(theta(i) - theta(j)));
      if (d > out.value) {
        out.value = d;
        out.first = static_cast<std::size_t>(i);
        out.second = static_cast<std::size_t>(j);
      }
    }
  }
  return out;
}

std::optional<double> detect_transient(const Trajectory& traj, double tolerance, double window) {
  const std::size_t n = traj.samples();
  if (n < 2 || traj.step <= 0.0) return std::nullopt;
  const auto span = static_cast<std::size_t>(std::llround(window / traj.step));
  if (span == 0 || span >= n) return std::nullopt;

  std::vector<double> spread(n);
  for (std::size_t k = 0; k < n; ++k) {
    spread[k] = max_mutual_difference(Vector(traj.theta.row(static_cast<Eigen::Index>(k)).transpose())).value;
  }
  // Scan backwards for the last window start whose window still moves.
  const std::size_t last_start = n - 1 - span;
  for (std::size_t j = last_start + 1; j-- > 0;) {
    double change = 0.0;
    for (std::size_t s = j; s <= j + span; ++s) change = std::max(change, std::abs(spread[s] - spread[j]));
    if (change >= tolerance) {
      if (j == last_start) return std::nullopt;
      return traj.times[j + 1];
    }
  }
  return traj.times.front();
}

std::pair<double, double> default_fit_window(const Trajectory& traj) {
  if (traj.samples() == 0) throw InvalidArgument("empty trajectory");
  const double t_end = traj.times.back();
  if (const auto settled = detect_transient(traj)) {
    const std::size_t first = traj.index_at(*settled);
    if (traj.samples() - first >= 10) return {*settled, t_end};
  }
  const double t0 = traj.times.front();
  return {t_end - 0.1 * (t_end - t0), t_end};
}

double consensus_frequency(const Vector& gamma, const Vector& omega) {
  if (gamma.size() != omega.size()) throw InvalidArgument("gamma and omega differ in length");
  const double denom = gamma.sum();
  if (std::abs(denom) < 1e-15) throw InvalidArgument("consensus direction sums to zero");
  return gamma.dot(omega) / denom;
}

std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::dynamic: return "dynamic";
    case BoundKind::alltoall: return "alltoall";
    case BoundKind::arbitrary: return "arbitrary";
    case BoundKind::supplied_gamma: return "gamma";
  }
  return "unknown";
}

ErrorBoundReport bound_dynamic(const Vector& x0, const Vector& u0, double sup_projected_input_rate,
                               const SpectralData& spectral, double t) {
  const Eigen::Index n = spectral.laplacian.rows();
  if (x0.size() != n || u0.size() != n) throw InvalidArgument("x0/u0 size does not match network");
  if (!spectral.balanced) throw InvalidArgument("the dynamic consensus bound needs a balanced network");
  const double rate = spectral.lambda2_hat;
  if (!(rate > 0.0)) throw InvalidArgument("lambda2_hat must be positive");
  if (sup_projected_input_rate < 0.0) throw InvalidArgument("sup ||Pi u'|| must be nonnegative");

  const Matrix pi = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  const double disagreement = std::exp(-rate * t) * (pi * x0).norm() + sup_projected_input_rate / rate;
  const double agreement = (x0 - u0).sum() / std::sqrt(static_cast<double>(n));

  ErrorBoundReport r;
  r.kind = BoundKind::dynamic;
  r.value = std::sqrt(disagreement * disagreement + agreement * agreement);
  r.rate = rate;
  r.projected_norm = (pi * x0).norm();
  return r;
}

ErrorBoundReport bound_alltoall(const Vector& omega, const SpectralData& spectral) {
  if (omega.size() != spectral.laplacian.rows()) throw InvalidArgument("omega size does not match network");
  if (!(spectral.lambda2_hat > 0.0)) throw InvalidArgument("lambda2_hat must be positive");
  ErrorBoundReport r;
  r.kind = BoundKind::alltoall;
  r.consensus_frequency = omega.mean();
  r.projected_norm = (omega.array() - r.consensus_frequency).matrix().norm();
  r.rate = spectral.lambda2_hat;
  r.value = r.projected_norm / r.rate;
  return r;
}

ErrorBoundReport bound_gamma(const Vector& omega, const Vector& gamma, double lambda2) {
  if (omega.size() != gamma.size()) throw InvalidArgument("omega and gamma differ in length");
  if (!(lambda2 > 0.0)) throw InvalidArgument("lambda2 must be positive");
  const Vector unit = gamma.normalized();
  const Eigen::Index n = omega.size();
  const Matrix pi = Matrix::Identity(n, n) - unit * unit.transpose();
  ErrorBoundReport r;
  r.kind = BoundKind::supplied_gamma;
  r.consensus_frequency = consensus_frequency(unit, omega);
  r.projected_norm = (pi * (omega.array() - r.consensus_frequency).matrix()).norm();
  r.rate = lambda2;
  r.value = r.projected_norm / lambda2;
  return r;
}

ErrorBoundReport bound_arbitrary(const Vector& omega, const SpectralData& spectral, OmegaBar mode) {
  if (omega.size() != spectral.gamma.size()) throw InvalidArgument("omega size does not match network");
  if (!(spectral.lambda2 > 0.0)) throw InvalidArgument("lambda2 must be positive");
  const double omega_bar = mode == OmegaBar::gamma_weighted ? consensus_frequency(spectral.gamma, omega)
                                                            : omega.mean();
  ErrorBoundReport r;
  r.kind = BoundKind::arbitrary;
  r.consensus_frequency = omega_bar;
  r.projected_norm = (spectral.projection * (omega.array() - omega_bar).matrix()).norm();
  r.rate = spectral.lambda2;
  r.value = r.projected_norm / r.rate;
  return r;
}

double residual_gamma(const Vector& theta, const IncidenceData& inc, const Vector& gamma) {
  if (theta.size() != inc.incidence.rows() || gamma.size() != theta.size()) {
    throw InvalidArgument("theta/gamma size does not match the incidence data");
  }
  const Vector angles = inc.incidence.transpose() * theta;
  const Vector s = angles.array().sin().matrix();
  return std::abs(gamma.dot(inc.incoming * (inc.edge_weights * s)));
}

Matrix agreement_transform(const Vector& gamma) {
  const Eigen::Index n = gamma.size();
  if (n < 2) throw InvalidArgument("agreement transform needs at least two agents");
  Matrix t(n, n);
  t.col(0) = gamma.normalized();
  Eigen::Index skip = 0;
  gamma.cwiseAbs().maxCoeff(&skip);
  Eigen::Index col = 1;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == skip) continue;
    Vector v = Vector::Unit(n, k);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 0; c < col; ++c) v -= t.col(c).dot(v) * t.col(c);
    }
    t.col(col++) = v.normalized();
  }
  return t;
}

DecompositionReport decompose_error(const Matrix& errors, const SpectralData& spectral) {
  const Eigen::Index n = spectral.gamma.size();
  if (errors.cols() != n) throw InvalidArgument("error series width does not match network");
  DecompositionReport d;
  d.transform = agreement_transform(spectral.gamma);
  const Matrix projected = errors * d.transform;  // rows are (T^T e)^T
  d.agreement = projected.col(0);
  d.disagreement = projected.rightCols(n - 1);
  return d;
}

Vector disagreement_rhs(const Matrix& transform, const Matrix& laplacian, const Vector& e_dis,
                        const Vector& u_dot) {
  const Eigen::Index n = transform.rows();
  if (laplacian.rows() != n || e_dis.size() != n - 1 || u_dot.size() != n) {
    throw InvalidArgument("disagreement_rhs: inconsistent dimensions");
  }
  const Vector gamma = transform.col(0);
  const Matrix r = transform.rightCols(n - 1);
  const double ubar_dot = consensus_frequency(gamma, u_dot);
  return -(r.transpose() * laplacian * r) * e_dis + r.transpose() * (u_dot.array() - ubar_dot).matrix();
}

}  // namespace oscsync
