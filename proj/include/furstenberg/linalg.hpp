#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace furstenberg {

using Vector = std::vector<double>;

// Dense d x d matrix, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t dim);
  SquareMatrix(std::size_t dim, std::vector<double> row_major);
  SquareMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SquareMatrix identity(std::size_t dim);
  static SquareMatrix diagonal(std::span<const double> diag);
  // planar rotation by theta (d = 2)
  static SquareMatrix rotation(double theta);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * dim_ + j]; }
  std::span<const double> data() const noexcept { return a_; }
  std::span<double> data() noexcept { return a_; }
  std::span<const double> row(std::size_t i) const { return {a_.data() + i * dim_, dim_}; }
  Vector column(std::size_t j) const;

  SquareMatrix transposed() const;
  double max_abs() const;
  bool all_finite() const;

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> a_;
};

SquareMatrix operator*(const SquareMatrix& x, const SquareMatrix& y);
SquareMatrix operator*(double s, const SquareMatrix& x);
SquareMatrix operator-(const SquareMatrix& x, const SquareMatrix& y);
Vector operator*(const SquareMatrix& g, std::span<const double> v);
// g^T v
Vector transpose_apply(const SquareMatrix& g, std::span<const double> v);

double dot(std::span<const double> x, std::span<const double> y);
double norm(std::span<const double> x);
double frobenius_norm(const SquareMatrix& g);
// largest singular value; no invertibility requirement
double operator_norm(const SquareMatrix& g);
double determinant(const SquareMatrix& g);
SquareMatrix inverse(const SquareMatrix& g);
// |det - 1| <= tol * max(1, max|entry|)^d
bool is_unimodular(const SquareMatrix& g, double tol = 1e-9);
// modified Gram-Schmidt on columns; used to keep accumulated frames orthogonal
SquareMatrix orthonormalize_columns(const SquareMatrix& q);
// max |Q^T Q - I|
double orthogonality_defect(const SquareMatrix& q);

// g = k * diag(a) * u with k, u orthogonal and a non-increasing.
struct KAKDecomposition {
  SquareMatrix k;
  Vector a;
  SquareMatrix u;
};

KAKDecomposition svd_kak(const SquareMatrix& g);

// SVD of A = columns * diag(exp(log_scales)) without ever forming A, so that
// columns whose scales differ by far more than the double range stay exact
// to relative precision. Result: A = left * diag(exp(log_sigma)) * right^T,
// log_sigma non-increasing.
struct GradedSvd {
  SquareMatrix left;
  Vector log_sigma;
  SquareMatrix right;
};

GradedSvd graded_svd(const SquareMatrix& columns, std::span<const double> log_scales);

std::size_t binomial(std::size_t n, std::size_t k);
// i-subsets of {0..d-1} in lexicographic order: the basis of the i-th wedge power
std::vector<std::vector<std::size_t>> wedge_basis(std::size_t d, std::size_t i);
SquareMatrix wedge_power(const SquareMatrix& g, std::size_t i);
// Pluecker coordinates of column_0 ^ ... ^ column_{i-1}
Vector wedge_of_columns(const SquareMatrix& frame, std::size_t i);
// x ^ y in the lexicographic basis of the second wedge power
Vector wedge2(std::span<const double> x, std::span<const double> y);

class ProjectivePoint {
 public:
  // normalizes and fixes the sign; throws InvalidArgument on a zero or non-finite vector
  explicit ProjectivePoint(std::span<const double> v);
  ProjectivePoint(std::initializer_list<double> v);
  static ProjectivePoint basis(std::size_t dim, std::size_t i);
  static ProjectivePoint at_angle(double theta);  // (cos, sin) in P(R^2)

  std::span<const double> rep() const noexcept { return rep_; }
  std::size_t dim() const noexcept { return rep_.size(); }

 private:
  Vector rep_;
};

class ProjectiveHyperplane {
 public:
  explicit ProjectiveHyperplane(std::span<const double> normal);
  ProjectiveHyperplane(std::initializer_list<double> normal);
  // ker of the i-th coordinate form
  static ProjectiveHyperplane coordinate_kernel(std::size_t dim, std::size_t i);

  std::span<const double> normal() const noexcept { return normal_.rep(); }
  std::size_t dim() const noexcept { return normal_.dim(); }

 private:
  ProjectivePoint normal_;
};

// A full flag, stored as an orthogonal frame; the i-th subspace is spanned by
// the first i columns. Signs of the columns are irrelevant.
class FlagPoint {
 public:
  explicit FlagPoint(SquareMatrix frame);
  static FlagPoint standard(std::size_t dim);

  const SquareMatrix& frame() const noexcept { return frame_; }
  std::size_t dim() const noexcept { return frame_.dim(); }
  // wedge line of level i, 1 <= i <= d-1
  const ProjectivePoint& line(std::size_t i) const;

 private:
  SquareMatrix frame_;
  std::vector<ProjectivePoint> lines_;
};

double fubini_study(const ProjectivePoint& p, const ProjectivePoint& q);
// same quantity for raw unit vectors, no validation
double fubini_study_unit(std::span<const double> x, std::span<const double> y);
double point_hyperplane_distance(const ProjectivePoint& p, const ProjectiveHyperplane& h);
ProjectivePoint act_projective(const SquareMatrix& g, const ProjectivePoint& p);
FlagPoint flag_of(const SquareMatrix& g);
double flag_distance(const FlagPoint& f1, const FlagPoint& f2);
// Distance between the standard flag and the flag of an orthogonal frame,
// restricted to levels 1..levels. Computed from the off-diagonal minors, so it
// keeps full relative precision when the frame is close to the identity.
double flag_distance_from_standard(const SquareMatrix& frame, std::size_t levels);

}  // namespace furstenberg
