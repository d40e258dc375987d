#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "furstenberg/decay_fit.hpp"
#include "furstenberg/linalg.hpp"
#include "furstenberg/measures.hpp"

namespace furstenberg {

// Flag level: compare full flags through all wedge lines. Projective level:
// only the top line (or the top dual line). Auto picks Flag when d <= 4.
enum class Level { Auto, Flag, Projective };

// number of wedge levels compared for a given choice
std::size_t wedge_levels(Level level, std::size_t dim);
const char* to_string(Level level);

enum class BoundarySide { RightLimit, LeftDual };

struct BoundarySample {
  std::vector<ProjectivePoint> points;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  BoundarySide side = BoundarySide::RightLimit;
  // exp(mean log delta(x_n p, x_n q)) for a second start q: how far the sample
  // points can still be from the limit
  double resolution = 0.0;
  std::vector<std::string> warnings;
};

// count independent draws of x_n . start
BoundarySample sample_stationary(const MeasureSpec& spec, std::size_t n, std::size_t count,
                                 std::uint64_t seed, const ProjectivePoint& start);

// count independent draws of the top u-row of the left walk y_n (normals of the
// repelling hyperplanes; a sample of the dual stationary measure)
BoundarySample sample_dual(const MeasureSpec& spec, std::size_t n, std::size_t count,
                           std::uint64_t seed);

// Series of a replicated statistic together with its fit.
struct SeriesResult {
  DecayFit fit;
  std::vector<Vector> values;  // values[k][r]: replica r at grid[k]
  std::size_t levels = 1;
  std::size_t skipped = 0;     // degenerate snapshots
  std::size_t snapshots = 0;
  std::vector<std::string> warnings;
};

// Fits log E[delta(x_n p, x_n q)] against n.
SeriesResult convergence_rate(const MeasureSpec& spec, std::span<const std::size_t> grid,
                              std::size_t replicas, std::uint64_t seed,
                              const std::pair<ProjectivePoint, ProjectivePoint>& starts,
                              Level level = Level::Auto);

enum class KakSide { RightK, LeftU };

// Fits log E[Delta_n], Delta_n the flag distance between consecutive k-frames
// of the right walk (RightK) or consecutive u-frames of the left walk (LeftU).
SeriesResult kak_convergence(const MeasureSpec& spec, std::span<const std::size_t> grid,
                             std::size_t replicas, std::uint64_t seed, KakSide side,
                             Level level = Level::Auto);

struct UNonconvergence {
  SeriesResult series;
  double window_mean = 0.0;  // mean of E[Delta'_n] over the last third of the grid
  double window_se = 0.0;
  double floor = 0.05;
  bool floor_exceeded = false;
  // the slope CI contains 0 or lies above it
  bool no_decay = false;
};

// Dual flag distance between consecutive u-frames of the right walk.
UNonconvergence u_nonconvergence(const MeasureSpec& spec, std::span<const std::size_t> grid,
                                 std::size_t replicas, std::uint64_t seed,
                                 Level level = Level::Auto, double floor = 0.05);

// Lipschitz test functions phi(x, y) of a flag x and a dual flag y.
enum class TestFunction {
  Constant,             // 1
  DistanceToKernel,     // delta(x, ker y)
  DistanceToReference,  // delta(x, p0)
  ReferenceToKernel,    // delta(q0, ker y)
  KernelTimesReference,
  KernelTimesReferenceKernel,
  ReferenceTimesReferenceKernel,
};

std::vector<TestFunction> builtin_test_functions();
const char* test_function_id(TestFunction f);
double lipschitz_constant(TestFunction f);

struct IndependenceResult {
  std::vector<std::size_t> grid;
  std::vector<TestFunction> functions;
  // discrepancy[k][f]
  std::vector<Vector> discrepancy;
  std::vector<Vector> discrepancy_se;
  std::vector<Vector> joint_mean;
  std::vector<Vector> product_mean;
  Vector max_discrepancy;  // over the non-constant functions
  DecayFit fit;            // of log max_discrepancy
  std::size_t samples = 0;
  std::size_t n_star = 0;
  std::size_t levels = 1;
  std::size_t skipped = 0;
};

// |E phi(v-flag(x_n), u-flag(x_n)) - E phi(Z1, Z2)| with Z1 ~ nu, Z2 ~ nu* independent.
// Each joint sample is paired with a Z1 that extends the first half of its
// increments and a Z2 built from the reversed second half, which keeps the
// Monte Carlo noise of the difference far below the independent-batch noise.
IndependenceResult independence_gap(const MeasureSpec& spec, std::span<const std::size_t> grid,
                                    std::size_t samples, std::uint64_t seed,
                                    std::span<const TestFunction> functions,
                                    Level level = Level::Auto);

// Reference flags used by the test functions (fixed, generic).
FlagPoint reference_flag_p0(std::size_t dim);
FlagPoint reference_flag_q0(std::size_t dim);

}  // namespace furstenberg
