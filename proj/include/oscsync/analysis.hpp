#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>

#include "oscsync/dynamics.hpp"
#include "oscsync/graph.hpp"

namespace oscsync {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Maps x to [-pi, pi) via ((x + pi) mod 2pi) - pi.
double wrap_phase(double x);

struct OrderParameter {
  double r = 0.0;             // phase coherence in [0, 1]
  std::optional<double> psi;  // collective phase, undefined when r vanishes
};

/// Complex mean of the unit phasors exp(i theta_k).
OrderParameter order_parameter(std::span<const double> theta);
OrderParameter order_parameter(const Vector& theta);

/// Consensus phase function phibar(t) = slope * t + intercept.
struct ConsensusLine {
  double slope = 0.0;      // rad/s
  double intercept = 0.0;  // rad, wrapped to [-pi, pi)
  double window_start = 0.0;
  double window_end = 0.0;

  double at(double t) const { return slope * t + intercept; }
};

/// e_i(t) = wrap(theta_i(t) - phibar(t)); rows are samples.
Matrix phase_error(const Trajectory& traj, const ConsensusLine& line);

/// Least-squares line through the unwrapped collective phase psi(t) over the
/// samples in [t_start, t_end]. Needs at least 10 samples in the window.
ConsensusLine fit_consensus(const Trajectory& traj, double t_start, double t_end);

/// First time after which the largest mutual wrapped phase difference moves
/// by less than `tolerance` over every window of length `window` up to the end
/// of the trajectory. Empty when the trajectory never settles.
std::optional<double> detect_transient(const Trajectory& traj, double tolerance = 1e-5,
                                       double window = 0.5);

/// [T_tp, t_end] when a transient end is detected (and leaves at least 10
/// samples), otherwise the final 10% of the horizon.
std::pair<double, double> default_fit_window(const Trajectory& traj);

/// gamma^T omega / sum(gamma).
double consensus_frequency(const Vector& gamma, const Vector& omega);

enum class BoundKind { dynamic, alltoall, arbitrary, supplied_gamma };
std::string_view to_string(BoundKind kind);

struct ErrorBoundReport {
  BoundKind kind = BoundKind::arbitrary;
  double value = 0.0;      // rad
  double rate = 0.0;       // lambda2 or lambda2_hat used
  double consensus_frequency = 0.0;  // omega bar used (0 for the dynamic bound)
  double projected_norm = 0.0;       // ||Pi (.)|| term
};

/// Balanced-network dynamic consensus bound at time t (t0 = 0):
///   sqrt((exp(-l t) ||Pi x0|| + sup||Pi u'|| / l)^2 + ((1/sqrt N) sum (x0 - u0))^2)
/// with l = lambda2_hat. Throws InvalidArgument for non-balanced networks or
/// lambda2_hat <= 0.
ErrorBoundReport bound_dynamic(const Vector& x0, const Vector& u0, double sup_projected_input_rate,
                               const SpectralData& spectral, double t);

/// Steady bound for an all-to-all network: ||omega - 1 mean(omega)|| / lambda2_hat.
ErrorBoundReport bound_alltoall(const Vector& omega, const SpectralData& spectral);

/// Which omega bar enters the arbitrary-network bound.
enum class OmegaBar { gamma_weighted, arithmetic_mean };

/// Steady bound for an arbitrary connected network:
///   ||(I - gamma gamma^T)(omega - 1 omegabar)|| / lambda2.
ErrorBoundReport bound_arbitrary(const Vector& omega, const SpectralData& spectral,
                                 OmegaBar mode = OmegaBar::gamma_weighted);

/// Same formula with a caller-supplied unit direction gamma.
ErrorBoundReport bound_gamma(const Vector& omega, const Vector& gamma, double lambda2);

/// |gamma^T B~ W sin(B^T theta)|. W already carries K/N, see incidence().
double residual_gamma(const Vector& theta, const IncidenceData& inc, const Vector& gamma);

/// T = [gamma R] with R an orthonormal completion of gamma built by
/// Gram-Schmidt over the standard basis (skipping gamma's largest entry).
Matrix agreement_transform(const Vector& gamma);

struct DecompositionReport {
  Matrix transform;  // T
  Vector agreement;  // e_agr per sample
  Matrix disagreement;  // samples x (N - 1)
};

/// Splits each row e(t) into T^T e = [e_agr; e_dis].
DecompositionReport decompose_error(const Matrix& errors, const SpectralData& spectral);

/// Right-hand side of the disagreement dynamics with zero agreement error
///   e_dis' = -R^T L R e_dis + R^T (u' - 1 ubar'),  ubar' = gamma^T u' / sum(gamma).
Vector disagreement_rhs(const Matrix& transform, const Matrix& laplacian, const Vector& e_dis,
                        const Vector& u_dot);

/// Largest |wrap(theta_i - theta_j)| over all agent pairs of one sample, with
/// the (0-based) pair attaining it.
struct MutualDifference {
  double value = 0.0;
  std::size_t first = 0;
  std::size_t second = 0;
};
MutualDifference max_mutual_difference(const Vector& theta);

}  // namespace oscsync
