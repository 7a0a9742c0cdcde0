#include "backsolve/oracle.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace backsolve {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBlowUp = 1e300;

double ModeScale(int d) { return std::ldexp(1.0, -d); }  // int sin^2 = 1/2

void RequireNonzero(const SpectralField& field, const char* where) {
  for (const auto& m : field.modes()) {
    if (m.c != 0.0) return;
  }
  throw std::invalid_argument(std::string(where) + ": field is zero");
}

}  // namespace

SpectralField::SpectralField(int dimension) : dimension_(dimension) {
  if (dimension < 1 || dimension > 3) {
    throw std::invalid_argument("SpectralField: dimension must be 1, 2 or 3");
  }
}

void SpectralField::AddMode(std::array<int, 3> k, double c) {
  for (int i = 0; i < dimension_; ++i) {
    if (k[i] < 1) throw std::invalid_argument("SpectralField: mode index < 1");
  }
  for (int i = dimension_; i < 3; ++i) k[i] = 1;
  modes_.push_back({k, c});
}

double SpectralField::Eigenvalue(const Mode& mode) const {
  double sum = 0.0;
  for (int i = 0; i < dimension_; ++i) sum += mode.k[i] * mode.k[i];
  return kPi * kPi * sum;
}

double SpectralField::Evaluate(const Vertex& x) const {
  double total = 0.0;
  for (const auto& m : modes_) {
    double v = m.c;
    for (int i = 0; i < dimension_; ++i) v *= std::sin(m.k[i] * kPi * x[i]);
    total += v;
  }
  return total;
}

SpectralField RandomSpectralField(int dimension, int n_max, uint64_t seed) {
  if (n_max < 1) throw std::invalid_argument("RandomSpectralField: n_max < 1");
  SpectralField field(dimension);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::array<int, 3> k{1, 1, 1};
  const int count = static_cast<int>(std::pow(n_max, dimension));
  for (int index = 0; index < count; ++index) {
    int rest = index;
    for (int i = 0; i < dimension; ++i) {
      k[i] = rest % n_max + 1;
      rest /= n_max;
    }
    field.AddMode(k, coeff(rng));
  }
  return field;
}

SpectralField HeatEvolve(const SpectralField& field, double dt) {
  SpectralField out = field;
  for (auto& m : out.modes()) {
    m.c *= std::exp(-field.Eigenvalue(m) * dt);
    if (!std::isfinite(m.c) || std::abs(m.c) > kBlowUp) {
      throw std::overflow_error("HeatEvolve: backward evolution blew up");
    }
  }
  return out;
}

double HbetaNorm(const SpectralField& field, double beta) {
  if (beta < 0.0) throw std::invalid_argument("HbetaNorm: beta < 0");
  double sum = 0.0;
  for (const auto& m : field.modes()) {
    sum += std::pow(field.Eigenvalue(m), beta) * m.c * m.c;
  }
  return std::sqrt(sum * ModeScale(field.dimension()));
}

double LogL2NormAt(const SpectralField& field, double t) {
  // log sqrt(sum c^2 e^{-2 lambda t} / 2^d) via log-sum-exp.
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  for (const auto& m : field.modes()) {
    if (m.c == 0.0) continue;
    logs.push_back(2.0 * std::log(std::abs(m.c)) - 2.0 * field.Eigenvalue(m) * t);
    peak = std::max(peak, logs.back());
  }
  if (logs.empty()) return -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - peak);
  return 0.5 * (peak + std::log(sum) - field.dimension() * std::log(2.0));
}

double L2HbetaNorm(const SpectralField& field, double T, double beta) {
  if (beta < 0.0 || T <= 0.0) {
    throw std::invalid_argument("L2HbetaNorm: need beta >= 0 and T > 0");
  }
  // int_0^T e^{-2 lambda t} dt = (1 - e^{-2 lambda T}) / (2 lambda).
  double sum = 0.0;
  for (const auto& m : field.modes()) {
    const double lambda = field.Eigenvalue(m);
    sum += std::pow(lambda, beta) * m.c * m.c * -std::expm1(-2.0 * lambda * T) /
           (2.0 * lambda);
  }
  return std::sqrt(sum * ModeScale(field.dimension()));
}

StabilityCheckResult CheckLogConvexity(const SpectralField& field, double T,
                                       int n_samples) {
  return CheckHbetaStability(field, T, 0.0, n_samples);
}

StabilityCheckResult CheckHbetaStability(const SpectralField& field, double T,
                                         double beta, int n_samples,
                                         double regularity_gain) {
  RequireNonzero(field, "CheckHbetaStability");
  if (T <= 0.0 || n_samples < 2) {
    throw std::invalid_argument("CheckHbetaStability: need T > 0, >= 2 samples");
  }
  const double s = beta / (1.0 + regularity_gain);
  if (beta < 0.0 || s >= 1.0) {
    throw std::invalid_argument("CheckHbetaStability: beta out of range");
  }
  StabilityCheckResult result;
  result.beta = beta;
  result.regularity_gain = regularity_gain;
  const double norm0 = HbetaNorm(field, 0.0);
  const double log_norm0 = std::log(norm0);
  const double log_norm_t = LogL2NormAt(field, T);
  result.M = std::max(norm0, std::exp(log_norm_t) + 1.0);
  result.max_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    // With beta > 0 the bound is singular at t = 0, so sample (0, T] there.
    const double t = beta > 0.0 ? T * (i + 1) / n_samples
                                : T * i / (n_samples - 1);
    const double omega = t / T;
    const double bound =
        std::pow(t, -s) *
        std::exp(log_norm0 + (1.0 - s) * omega * (log_norm_t - log_norm0));
    const double actual = HbetaNorm(HeatEvolve(field, t), beta);
    result.sample_times.push_back(t);
    result.bound_values.push_back(bound);
    result.actual_values.push_back(actual);
    result.max_violation = std::max(result.max_violation, actual - bound);
    if (bound > 0.0) result.max_ratio = std::max(result.max_ratio, actual / bound);
  }
  return result;
}

SmoothingReport CheckSmoothing(const SpectralField& field, double T,
                               int n_samples) {
  RequireNonzero(field, "CheckSmoothing");
  if (T <= 0.0 || n_samples < 2) {
    throw std::invalid_argument("CheckSmoothing: need T > 0, >= 2 samples");
  }
  const double norm0 = HbetaNorm(field, 0.0);
  // ||du/dt(t)|| = ||A u(t)|| = H^2 norm of u(t).
  auto value = [&](double t) {
    return t * HbetaNorm(HeatEvolve(field, t), 2.0) / norm0;
  };
  const double t_min = T * 1e-10;
  const double ratio = std::pow(T / t_min, 1.0 / (n_samples - 1));
  int best = 0;
  std::vector<double> times(n_samples);
  double best_value = -1.0;
  for (int i = 0; i < n_samples; ++i) {
    times[i] = i + 1 == n_samples ? T : t_min * std::pow(ratio, i);
    const double v = value(times[i]);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  const double lo = times[std::max(best - 1, 0)];
  const double hi = times[std::min(best + 1, n_samples - 1)];
  const auto refined = boost::math::tools::brent_find_minima(
      [&](double t) { return -value(t); }, lo, hi,
      std::numeric_limits<double>::digits / 2 + 4);
  SmoothingReport report{best_value, times[best]};
  if (-refined.second > best_value) {
    report.constant = -refined.second;
    report.argmax = refined.first;
  }
  return report;
}

SpectralField ModePerturbation(int n, double T, double amplitude) {
  if (n < 1) throw std::invalid_argument("ModePerturbation: n must be >= 1");
  if (T <= 0.0) throw std::invalid_argument("ModePerturbation: T must be > 0");
  SpectralField field(2);
  field.AddMode({n, n, 1}, amplitude);
  return field;
}

Vector RandomPerturbation(const SparseMatrix& mass, double target_norm,
                          uint64_t seed) {
  if (!(target_norm > 0.0)) {
    throw std::invalid_argument("RandomPerturbation: target norm must be > 0");
  }
  if (mass.rows() == 0) {
    throw std::invalid_argument("RandomPerturbation: empty space");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  Vector c(mass.rows());
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = coeff(rng);
  const double norm = std::sqrt(c.dot(mass * c));
  return c * (target_norm / norm);
}

}  // namespace backsolve
