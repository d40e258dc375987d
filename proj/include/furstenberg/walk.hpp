#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "furstenberg/decay_fit.hpp"
#include "furstenberg/linalg.hpp"
#include "furstenberg/measures.hpp"
#include "furstenberg/rng.hpp"

namespace furstenberg {

// Right walk x_n = g_1...g_n, left walk y_n = g_n...g_1.
enum class Side { Right, Left };
enum class WalkMode { Direct, Renormalized };

struct WalkState {
  WalkMode mode = WalkMode::Direct;
  Side side = Side::Right;
  std::size_t step = 0;
  std::uint64_t stream = 0;
  // direct mode
  SquareMatrix product;
  double max_entry = 0.0;
  // renormalized mode: QR frame and accumulated log|R_ii|. The left walk is
  // tracked as y_n Q_0 = Q_n R; the right walk through its transpose.
  SquareMatrix frame;
  Vector log_diag;
};

inline constexpr double kOverflowThreshold = 1e250;

// Streaming walk owning its random stream.
class Walk {
 public:
  Walk(const Sampler& sampler, Side side, WalkMode mode, std::uint64_t seed, std::uint64_t stream);

  // draws the next increment and applies it; returns the increment
  const SquareMatrix& step();
  void multiply(const SquareMatrix& g);
  const WalkState& state() const noexcept { return state_; }

 private:
  const Sampler* sampler_;
  RandomStream rng_;
  WalkState state_;
};

// Snapshots at the requested steps (the final step n when checkpoints is empty).
// Both sides consume the same draws for the same seed.
std::vector<WalkState> run_walk(const MeasureSpec& spec, std::size_t n, std::uint64_t seed, Side side,
                                std::span<const std::size_t> checkpoints = {},
                                WalkMode mode = WalkMode::Direct);

// Keeps a walk in factored form k * diag(exp(log_a)) * u, updated one increment
// at a time with the graded Jacobi SVD, so that singular vectors stay accurate
// long after the product itself would overflow or lose its small singular values.
class KakTracker {
 public:
  explicit KakTracker(std::size_t dim);

  // x <- x * g. Returns V with k_new = k_old * V (the relative move of the k-frame).
  SquareMatrix multiply_right(const SquareMatrix& g);
  // x <- g * x. Returns W with u_new = W^T * u_old (the relative move of the u-frame).
  SquareMatrix multiply_left(const SquareMatrix& g);

  const SquareMatrix& k() const noexcept { return k_; }
  const SquareMatrix& u() const noexcept { return u_; }
  const Vector& log_a() const noexcept { return log_a_; }
  std::size_t dim() const noexcept { return k_.dim(); }
  // every gap log a_i - log a_{i+1}, i < levels, exceeds log(1 + 1e-10)
  bool separated(std::size_t levels) const;

 private:
  SquareMatrix k_, u_;
  Vector log_a_;
  std::size_t steps_ = 0;
};

struct LyapunovEstimate {
  Vector mean;  // per-exponent, nats per step, in QR column order
  Vector se;
  std::size_t n = 0;
  std::size_t replicas = 0;
  std::vector<Vector> per_replica;

  // cross-check on the direct product of the first check_n draws: estimates of
  // lambda_1 and lambda_1 + lambda_2 from (1/m) log ||wedge^i x_m||
  std::size_t check_n = 0;
  Vector wedge_mean;
  Vector wedge_se;
  bool estimators_agree = false;
  bool ordering_ok = false;  // lambda_i >= lambda_{i+1} within 2 combined SE
  bool sum_ok = false;       // sum within 3 SE of 0
  std::vector<std::string> warnings;
};

LyapunovEstimate lyapunov_spectrum(const MeasureSpec& spec, std::size_t n, std::size_t replicas,
                                   std::uint64_t seed);

struct GapEstimate {
  double gap = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double confidence = 0.99;
  // CI lower bound above 1e-9 (rounding floor for isometric walks)
  bool gap_positive = false;
  LyapunovEstimate lyapunov;
};

GapEstimate top_gap(const MeasureSpec& spec, std::size_t n, std::size_t replicas, std::uint64_t seed);

// log ||g p||
double cocycle_norm(const SquareMatrix& g, const ProjectivePoint& p);
// log(delta(g p, g q) / delta(p, q))
double cocycle_two_point(const SquareMatrix& g, const ProjectivePoint& p, const ProjectivePoint& q);

enum class CocycleFamily { Norm, TwoPoint };

struct CocycleDrift {
  CocycleFamily family = CocycleFamily::Norm;
  double estimate = 0.0;  // max over the net of (1/n) mean s(x_n, x)
  double se = 0.0;
  std::size_t n = 0;
  std::size_t replicas = 0;
  std::size_t net_size = 0;
  std::size_t argmax = 0;
};

// deterministic directions plus 50 seeded random points (2d^2 + 50 in total)
std::vector<ProjectivePoint> drift_net(std::size_t dim, std::uint64_t seed);

CocycleDrift cocycle_drift(const MeasureSpec& spec, std::size_t n, std::size_t replicas,
                           std::uint64_t seed, CocycleFamily family);

struct SingularRatioSeries {
  std::vector<std::size_t> grid;
  // fits[j - 1] is the fit of E[a_{j+1}/a_1], j = 1..d-1
  std::vector<DecayFit> fits;
  // values[j - 1][k][r]
  std::vector<std::vector<Vector>> values;
};

SingularRatioSeries singular_ratio_series(const MeasureSpec& spec, std::span<const std::size_t> grid,
                                          std::size_t replicas, std::uint64_t seed);

// ceil(c * ratio^k) for k = 0.., deduplicated, stopping after `count` distinct values
std::vector<std::size_t> geometric_grid(double c, double ratio, std::size_t count);

}  // namespace furstenberg
