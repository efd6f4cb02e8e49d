#include "syncon/dgp.hpp"

#include "syncon/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace syncon {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer. All simulation randomness flows through this mix so
// draws are identical across platforms and standard-library versions.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// State of the substream for one random object within one replication.
// Feeding base, stream, and object id through separate mixing rounds keeps
// substreams independent even for adjacent seeds and ids.
std::uint64_t substream_state(SimSeed seed, std::uint64_t object_id) {
  std::uint64_t h = mix64(seed.base + kGolden);
  h = mix64(h ^ (seed.stream + 2 * kGolden));
  h = mix64(h ^ (object_id + 3 * kGolden));
  return h;
}

// Object ids of the independent random series inside one replication.
constexpr std::uint64_t kIdShared = 1;
constexpr std::uint64_t kIdFactor = 0x100;  // + stationary group index
constexpr std::uint64_t kIdWalk = 0x200;    // + random-walk group index
constexpr std::uint64_t kIdNoise = 0x300;   // + unit index, treated = 0

// Standard-normal stream: splitmix64 uniforms through a Box-Muller pair with
// an explicit spare cache. Hand-rolled because std::normal_distribution is
// free to differ between standard libraries.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t state) : state_(state) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // in (0, 1], safe under log
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  // 53-bit uniform in [0, 1).
  double uniform() {
    state_ += kGolden;
    return static_cast<double>(mix64(state_) >> 11) * 0x1.0p-53;
  }

  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

void check_horizon(int t0, int t1) {
  if (t0 < 2) throw_invalid("simulate: need at least 2 pre-treatment periods");
  if (t1 < 1) throw_invalid("simulate: need at least 1 post-treatment period");
}

}  // namespace

void FactorDGP::validate() const {
  if (J < 1) throw_invalid("dgp: J must be positive");
  if (K < 1 || K > J || J % K != 0)
    throw_invalid("dgp: K must divide J (got J=" + std::to_string(J) +
                  ", K=" + std::to_string(K) + ")");
  if (R < 0 || (R > 0 && (R > J || J % R != 0)))
    throw_invalid("dgp: R must be 0 or divide J (got J=" + std::to_string(J) +
                  ", R=" + std::to_string(R) + ")");
  if (!(sigma2 >= 0.0)) throw_invalid("dgp: sigma2 must be nonnegative");
  if (!(std::abs(rho) < 1.0)) throw_invalid("dgp: |rho| must be below 1");
  if (!(delta_variance >= 0.0))
    throw_invalid("dgp: delta_variance must be nonnegative");
  if (trend < 0) throw_invalid("dgp: trend degree must be nonnegative");
  if (!fixed_effects.empty() &&
      static_cast<int>(fixed_effects.size()) != J + 1)
    throw_invalid("dgp: fixed_effects must have J+1 entries, treated first");
  if (!hetero.empty()) {
    if (static_cast<int>(hetero.size()) != J + 1)
      throw_invalid("dgp: hetero must have J+1 entries, treated first");
    for (double v : hetero)
      if (!(v >= 0.0)) throw_invalid("dgp: hetero variances must be nonnegative");
  }
}

SimDraws simulate_draws(const FactorDGP& dgp, int t0, int t1, SimSeed seed) {
  dgp.validate();
  check_horizon(t0, t1);
  const int T = t0 + t1;

  SimDraws draws;

  draws.delta.resize(T);
  {
    NormalStream g(substream_state(seed, kIdShared));
    const double sd = std::sqrt(dgp.delta_variance);
    for (int t = 0; t < T; ++t) draws.delta[t] = sd * g.next();
  }

  // AR(1) initialized from its stationary law: marginal variance is exactly
  // 1 in every period, so pre-period averages need no burn-in.
  draws.lambda.resize(dgp.K, T);
  const double innovation_sd = std::sqrt(1.0 - dgp.rho * dgp.rho);
  for (int k = 0; k < dgp.K; ++k) {
    NormalStream g(substream_state(seed, kIdFactor + static_cast<std::uint64_t>(k)));
    double value = g.next();
    draws.lambda(k, 0) = value;
    for (int t = 1; t < T; ++t) {
      value = dgp.rho * value + innovation_sd * g.next();
      draws.lambda(k, t) = value;
    }
  }

  draws.gamma.resize(dgp.R, T);
  for (int r = 0; r < dgp.R; ++r) {
    NormalStream g(substream_state(seed, kIdWalk + static_cast<std::uint64_t>(r)));
    double value = 0.0;
    for (int t = 0; t < T; ++t) {
      value += g.next();
      draws.gamma(r, t) = value;
    }
  }

  draws.eps.resize(dgp.J + 1, T);
  for (int j = 0; j <= dgp.J; ++j) {
    NormalStream g(substream_state(seed, kIdNoise + static_cast<std::uint64_t>(j)));
    const double sd =
        std::sqrt(dgp.hetero.empty() ? dgp.sigma2 : dgp.hetero[j]);
    for (int t = 0; t < T; ++t) draws.eps(j, t) = sd * g.next();
  }

  return draws;
}

Panel assemble(const FactorDGP& dgp, const SimDraws& draws, int t0, int t1) {
  dgp.validate();
  check_horizon(t0, t1);
  const int T = t0 + t1;
  const bool walk_ok = dgp.R == 0
                           ? draws.gamma.size() == 0
                           : (draws.gamma.rows() == dgp.R && draws.gamma.cols() == T);
  if (draws.delta.size() != T || draws.lambda.rows() != dgp.K ||
      draws.lambda.cols() != T || !walk_ok || draws.eps.rows() != dgp.J + 1 ||
      draws.eps.cols() != T)
    throw_invalid("assemble: draw dimensions do not match the model");

  Panel panel;
  panel.t0 = t0;
  panel.outcomes.resize(dgp.J + 1, T);
  for (int j = 0; j <= dgp.J; ++j) {
    const double fe = dgp.fixed_effects.empty() ? 0.0 : dgp.fixed_effects[j];
    const int sg = j == 0 ? 0 : dgp.stationary_group(j - 1);
    const int wg = dgp.R == 0 ? -1 : (j == 0 ? 0 : dgp.walk_group(j - 1));
    for (int t = 0; t < T; ++t) {
      // The post-period mean shift belongs to the factor, not the unit:
      // every unit in the first stationary group sees it.
      double factor = draws.lambda(sg, t);
      if (sg == 0 && t >= t0) factor += dgp.post_shift;
      double y = fe + draws.delta[t] + factor + draws.eps(j, t);
      if (wg >= 0) y += draws.gamma(wg, t);
      if (dgp.trend > 0)
        y += std::pow(static_cast<double>(t + 1) / t0, dgp.trend);
      if (j == 0 && t >= t0) y += dgp.treatment_effect;
      panel.outcomes(j, t) = y;
    }
  }

  panel.unit_labels.resize(dgp.J + 1);
  panel.unit_labels[0] = "treated";
  std::size_t width = 1;
  for (int v = dgp.J; v >= 10; v /= 10) ++width;
  for (int j = 1; j <= dgp.J; ++j) {
    std::string digits = std::to_string(j);
    panel.unit_labels[j] =
        "control_" + std::string(width - digits.size(), '0') + digits;
  }
  panel.period_labels.resize(T);
  for (int t = 0; t < T; ++t) panel.period_labels[t] = t + 1;

  panel.validate();
  return panel;
}

Panel simulate(const FactorDGP& dgp, int t0, int t1, SimSeed seed) {
  return assemble(dgp, simulate_draws(dgp, t0, t1, seed), t0, t1);
}

LoadingMatrix loading_matrix(const FactorDGP& dgp) {
  dgp.validate();
  const bool any_fe =
      std::any_of(dgp.fixed_effects.begin(), dgp.fixed_effects.end(),
                  [](double v) { return v != 0.0; });
  const int F = dgp.K + (any_fe ? 1 : 0);

  LoadingMatrix lm;
  lm.mu0 = Eigen::VectorXd::Zero(F);
  lm.mu0[0] = 1.0;
  lm.mu = Eigen::MatrixXd::Zero(dgp.J, F);
  for (int c = 0; c < dgp.J; ++c) lm.mu(c, dgp.stationary_group(c)) = 1.0;
  if (any_fe) {
    // Fixed effects are loadings on a constant factor.
    lm.mu0[dgp.K] = dgp.fixed_effects[0];
    for (int c = 0; c < dgp.J; ++c) lm.mu(c, dgp.K) = dgp.fixed_effects[c + 1];
  }

  lm.theta0 = Eigen::VectorXd::Zero(dgp.R);
  lm.theta = Eigen::MatrixXd::Zero(dgp.J, dgp.R);
  if (dgp.R > 0) {
    lm.theta0[0] = 1.0;
    for (int c = 0; c < dgp.J; ++c) lm.theta(c, dgp.walk_group(c)) = 1.0;
  }
  return lm;
}

LimitSpec limit_spec(const FactorDGP& dgp) {
  dgp.validate();
  if (!dgp.hetero.empty())
    throw_invalid(
        "limit_spec: per-unit noise variances have no scalar limit "
        "counterpart");

  const LoadingMatrix lm = loading_matrix(dgp);
  const int F = static_cast<int>(lm.mu0.size());
  const bool any_fe = F > dgp.K;

  LimitSpec spec;
  spec.mu0 = lm.mu0;
  spec.mu = lm.mu;
  spec.sigma2 = dgp.sigma2;
  // Factors are independent with unit marginal variance and mean zero; the
  // constant factor carrying fixed effects has mean 1 and second moment 1.
  spec.Omega0 = Eigen::MatrixXd::Identity(F, F);
  spec.omega0 = Eigen::VectorXd::Zero(F);
  spec.post_mean = Eigen::VectorXd::Zero(F);
  spec.post_mean[0] = dgp.post_shift;
  if (any_fe) {
    spec.omega0[F - 1] = 1.0;
    spec.post_mean[F - 1] = 1.0;
  }

  // Random-walk directions, plus the common trend as a direction with unit
  // loadings everywhere: any sum-to-one weighting reconstructs it exactly,
  // anything else lets it dominate the variance.
  const int directions = dgp.R + (dgp.trend > 0 ? 1 : 0);
  spec.theta0 = Eigen::VectorXd::Zero(directions);
  spec.theta = Eigen::MatrixXd::Zero(dgp.J, directions);
  if (dgp.R > 0) {
    spec.theta0.head(dgp.R) = lm.theta0;
    spec.theta.leftCols(dgp.R) = lm.theta;
  }
  if (dgp.trend > 0) {
    spec.theta0[directions - 1] = 1.0;
    spec.theta.col(directions - 1).setOnes();
  }

  spec.validate();
  return spec;
}

}  // namespace syncon
