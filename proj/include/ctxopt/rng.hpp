#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace ctxopt {

/// Seeded random stream. Independent components derive their streams from
/// one master seed via labeled splitting, e.g.
/// Rng::from_label(seed, "trial/7/cws").
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng from_label(std::uint64_t master_seed, std::string_view label);

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform01();
  double uniform(double lo, double hi);

  /// Standard normal variate (Box-Muller).
  double normal();

  Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi);
  Eigen::VectorXd normal_vector(Eigen::Index n);

 private:
  std::mt19937_64 gen_;
};

}  // namespace ctxopt
