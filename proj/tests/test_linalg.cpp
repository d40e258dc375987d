#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "furstenberg/linalg.hpp"
#include "helpers.hpp"

using namespace furstenberg;
using testing::error_code_of;
using testing::max_abs_diff;

namespace {

using High = boost::multiprecision::cpp_bin_float_100;

// eigenvalues of a symmetric matrix by cyclic Jacobi rotations, in 100 digits
std::vector<High> symmetric_eigenvalues(std::vector<std::vector<High>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    High off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < High("1e-190")) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0) continue;
        const High theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const High t = (theta >= 0 ? High(1) : High(-1)) /
                       (abs(theta) + sqrt(theta * theta + 1));
        const High c = 1 / sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const High akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const High apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<High> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end(), [](const High& x, const High& y) { return x > y; });
  return ev;
}

// log singular values of columns * diag(exp(log_scales)), in high precision
std::vector<double> oracle_log_singular(const SquareMatrix& columns, const Vector& log_scales) {
  const std::size_t d = columns.dim();
  std::vector<std::vector<High>> a(d, std::vector<High>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a[i][j] = High(columns(i, j)) * exp(High(log_scales[j]));
  std::vector<std::vector<High>> gram(d, std::vector<High>(d, High(0)));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k) gram[i][j] += a[k][i] * a[k][j];
  const auto ev = symmetric_eigenvalues(gram);
  std::vector<double> out;
  for (const auto& e : ev) out.push_back(static_cast<double>(log(e) / 2));
  return out;
}

// singular values of a 2x2 from the trace and determinant of g g^T
std::pair<double, double> closed_form_2x2(const SquareMatrix& g) {
  const double t = frobenius_norm(g) * frobenius_norm(g);
  const double det = determinant(g);
  const double disc = std::sqrt(std::max(0.0, t * t - 4.0 * det * det));
  const double big = std::sqrt((t + disc) / 2.0);
  return {big, std::abs(det) / big};
}

SquareMatrix reconstruct(const KAKDecomposition& kak) {
  return kak.k * SquareMatrix::diagonal(kak.a) * kak.u;
}

}  // namespace

TEST_CASE("svd_kak of the identity and of a positive diagonal") {
  const auto id = svd_kak(SquareMatrix::identity(2));
  CHECK(id.a[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(id.a[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(max_abs_diff(id.k, SquareMatrix::identity(2)) < 1e-15);
  CHECK(max_abs_diff(id.u, SquareMatrix::identity(2)) < 1e-15);

  const auto diag = svd_kak(SquareMatrix{{2, 0}, {0, 0.5}});
  CHECK(diag.a[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(diag.a[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(max_abs_diff(diag.k, SquareMatrix::identity(2)) < 1e-15);
  CHECK(max_abs_diff(diag.u, SquareMatrix::identity(2)) < 1e-15);
}

TEST_CASE("svd_kak of the unipotent [[1,1],[0,1]] matches the golden ratio") {
  const SquareMatrix g{{1, 1}, {0, 1}};
  const auto kak = svd_kak(g);
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(std::abs(kak.a[0] - phi) < 1e-12);
  CHECK(std::abs(kak.a[1] - (std::sqrt(5.0) - 1.0) / 2.0) < 1e-12);
  CHECK(max_abs_diff(reconstruct(kak), g) < 1e-14);
  CHECK(orthogonality_defect(kak.k) < 1e-14);
  CHECK(orthogonality_defect(kak.u) < 1e-14);
}

TEST_CASE("svd_kak agrees with the closed form on random 2x2 matrices") {
  RandomStream rng(11, 1);
  for (int t = 0; t < 500; ++t) {
    const auto g = testing::gaussian_matrix(rng, 2);
    const auto [big, small] = closed_form_2x2(g);
    const auto kak = svd_kak(g);
    CHECK(kak.a[0] == doctest::Approx(big).epsilon(1e-12));
    CHECK(kak.a[1] == doctest::Approx(small).epsilon(1e-10));
  }
}

TEST_CASE("svd_kak invariants on seeded random matrices, d = 2, 3, 4") {
  RandomStream rng(12, 2);
  for (std::size_t d : {2u, 3u, 4u})
    for (int t = 0; t < 100; ++t) {
      const auto g = testing::random_sl(rng, d);
      const auto kak = svd_kak(g);
      const double scale = operator_norm(g);
      CHECK(max_abs_diff(reconstruct(kak), g) <= 1e-9 * scale);
      CHECK(orthogonality_defect(kak.k) <= 1e-10);
      CHECK(orthogonality_defect(kak.u) <= 1e-10);
      double prod = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        prod *= kak.a[i];
        if (i + 1 < d) CHECK(kak.a[i] >= kak.a[i + 1]);
      }
      CHECK(std::abs(prod - 1.0) < 1e-8);
      CHECK(operator_norm(g) == doctest::Approx(kak.a[0]).epsilon(1e-9));
      const double w2 = operator_norm(wedge_power(g, 2));
      CHECK(w2 / (kak.a[0] * kak.a[0]) == doctest::Approx(kak.a[1] / kak.a[0]).epsilon(1e-8));
    }
}

TEST_CASE("svd_kak columns of k have a positive entry of largest magnitude") {
  RandomStream rng(13, 3);
  for (int t = 0; t < 50; ++t) {
    const auto kak = svd_kak(testing::random_sl(rng, 3));
    for (std::size_t j = 0; j < 3; ++j) {
      const auto col = kak.k.column(j);
      const auto it = std::max_element(col.begin(), col.end(),
                                       [](double x, double y) { return std::abs(x) < std::abs(y); });
      CHECK(*it > 0.0);
    }
  }
}

TEST_CASE("svd_kak errors") {
  CHECK(error_code_of([] { svd_kak(SquareMatrix{{1, 0}, {0, 0}}); }) == ErrorCode::NonInvertible);
  CHECK(error_code_of([] { svd_kak(SquareMatrix{{1, 2}, {2, 4}}); }) == ErrorCode::NonInvertible);
  CHECK(error_code_of([] { svd_kak(SquareMatrix{{NAN, 0}, {0, 1}}); }) == ErrorCode::NonFinite);
}

TEST_CASE("graded_svd matches a 100-digit oracle across widely separated scales") {
  RandomStream rng(14, 4);
  for (int t = 0; t < 20; ++t) {
    const auto cols = testing::gaussian_matrix(rng, 3);
    const Vector scales{0.0, -35.0 - rng.uniform(), -70.0 - rng.uniform()};
    const auto svd = graded_svd(cols, scales);
    const auto oracle = oracle_log_singular(cols, scales);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(svd.log_sigma[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
    CHECK(orthogonality_defect(svd.left) < 1e-12);
    CHECK(orthogonality_defect(svd.right) < 1e-12);
  }
}

TEST_CASE("wedge_power examples and errors") {
  const auto top = wedge_power(SquareMatrix{{3, 5}, {1, 2}}, 2);
  REQUIRE(top.dim() == 1);
  CHECK(top(0, 0) == doctest::Approx(1.0));
  CHECK(max_abs_diff(wedge_power(SquareMatrix::identity(3), 2), SquareMatrix::identity(3)) == 0.0);
  const auto w = wedge_power(SquareMatrix::diagonal(Vector{2, 3, 1.0 / 6.0}), 2);
  CHECK(max_abs_diff(w, SquareMatrix::diagonal(Vector{6, 1.0 / 3.0, 0.5})) < 1e-15);
  CHECK(error_code_of([] { wedge_power(SquareMatrix::identity(3), 0); }) == ErrorCode::OutOfRange);
  CHECK(error_code_of([] { wedge_power(SquareMatrix::identity(3), 4); }) == ErrorCode::OutOfRange);
}

TEST_CASE("wedge_power is multiplicative") {
  RandomStream rng(15, 5);
  for (std::size_t d : {3u, 4u})
    for (std::size_t i = 1; i <= d; ++i)
      for (int t = 0; t < 20; ++t) {
        const auto g = testing::random_sl(rng, d), h = testing::random_sl(rng, d);
        const auto lhs = wedge_power(g * h, i);
        const auto rhs = wedge_power(g, i) * wedge_power(h, i);
        CHECK(max_abs_diff(lhs, rhs) <= 1e-8 * std::max(1.0, rhs.max_abs()));
      }
}

TEST_CASE("fubini_study examples") {
  const auto e1 = ProjectivePoint::basis(2, 0), e2 = ProjectivePoint::basis(2, 1);
  CHECK(fubini_study(e1, e1) == 0.0);
  CHECK(fubini_study(e1, e2) == doctest::Approx(1.0));
  CHECK(fubini_study(e1, ProjectivePoint{1.0, 1.0}) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(error_code_of([&] { fubini_study(e1, ProjectivePoint::basis(3, 0)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("fubini_study is a metric on seeded triples and is orthogonally invariant") {
  RandomStream rng(16, 6);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = 2 + t % 3;
    const ProjectivePoint p(random_unit_vector(rng, d)), q(random_unit_vector(rng, d)),
        r(random_unit_vector(rng, d));
    const double pq = fubini_study(p, q), qp = fubini_study(q, p);
    CHECK(pq == doctest::Approx(qp).epsilon(1e-15));
    CHECK(fubini_study(p, p) < 1e-10);
    CHECK(pq <= 1.0);
    CHECK(fubini_study(p, r) <= pq + fubini_study(q, r) + 1e-12);
    const auto o = random_orthogonal(rng, d);
    const double moved = fubini_study(act_projective(o, p), act_projective(o, q));
    CHECK(std::abs(moved - pq) < 1e-12);
  }
}

TEST_CASE("point_hyperplane_distance examples") {
  const auto e1 = ProjectivePoint::basis(2, 0);
  CHECK(point_hyperplane_distance(e1, ProjectiveHyperplane::coordinate_kernel(2, 0)) == 1.0);
  CHECK(point_hyperplane_distance(e1, ProjectiveHyperplane::coordinate_kernel(2, 1)) == 0.0);
  CHECK(point_hyperplane_distance(ProjectivePoint{1.0, 1.0},
                                  ProjectiveHyperplane::coordinate_kernel(2, 0)) ==
        doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("act_projective examples") {
  const auto e1 = ProjectivePoint::basis(2, 0);
  CHECK(fubini_study(act_projective(SquareMatrix::identity(2), e1), e1) == 0.0);
  const auto image = act_projective(SquareMatrix{{4, 0}, {0, 0.25}}, ProjectivePoint{1.0, 1.0});
  const double n = std::hypot(4.0, 0.25);
  CHECK(image.rep()[0] == doctest::Approx(4.0 / n));
  CHECK(image.rep()[1] == doctest::Approx(0.25 / n));
  const auto turned = act_projective(SquareMatrix::rotation(std::numbers::pi / 2), e1);
  CHECK(fubini_study(turned, ProjectivePoint::basis(2, 1)) < 1e-15);
  CHECK(error_code_of([] {
          act_projective(SquareMatrix{{1, 0}, {0, 0}}, ProjectivePoint::basis(2, 1));
        }) == ErrorCode::DegenerateImage);
}

TEST_CASE("projective points are normalized with a canonical sign") {
  const ProjectivePoint p{-3.0, 4.0};
  CHECK(p.rep()[0] == doctest::Approx(-0.6));
  CHECK(p.rep()[1] == doctest::Approx(0.8));
  const ProjectivePoint q{3.0, -4.0};
  CHECK(q.rep()[0] == p.rep()[0]);
  CHECK(q.rep()[1] == p.rep()[1]);
  CHECK(error_code_of([] { ProjectivePoint{0.0, 0.0}; }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { ProjectivePoint{INFINITY, 0.0}; }) == ErrorCode::NonFinite);
}

TEST_CASE("flag_of and flag_distance examples") {
  const auto f = flag_of(SquareMatrix::diagonal(Vector{4, 2, 1.0 / 8.0}));
  CHECK(flag_distance(f, FlagPoint::standard(3)) < 1e-15);
  CHECK(flag_distance(FlagPoint::standard(3), FlagPoint::standard(3)) == 0.0);
  for (double theta : {0.1, 0.7, 1.3, 2.0, 3.0}) {
    const FlagPoint rotated(SquareMatrix::rotation(theta));
    CHECK(flag_distance(FlagPoint::standard(2), rotated) ==
          doctest::Approx(std::abs(std::sin(theta))).epsilon(1e-12));
  }
  CHECK(error_code_of([] { flag_of(SquareMatrix::diagonal(Vector{2, 2, 0.25})); }) ==
        ErrorCode::DegenerateFlag);
}

TEST_CASE("flag_distance is a metric on random flags") {
  RandomStream rng(17, 7);
  for (int t = 0; t < 200; ++t) {
    const FlagPoint a(random_orthogonal(rng, 3)), b(random_orthogonal(rng, 3)),
        c(random_orthogonal(rng, 3));
    CHECK(flag_distance(a, b) == doctest::Approx(flag_distance(b, a)));
    CHECK(flag_distance(a, c) <= flag_distance(a, b) + flag_distance(b, c) + 1e-12);
    CHECK(flag_distance(a, a) < 1e-7);
  }
}

TEST_CASE("flag_distance_from_standard agrees with flag_distance") {
  RandomStream rng(18, 8);
  for (std::size_t d : {2u, 3u, 4u})
    for (int t = 0; t < 50; ++t) {
      const auto q = random_orthogonal(rng, d);
      CHECK(flag_distance_from_standard(q, d - 1) ==
            doctest::Approx(flag_distance(FlagPoint::standard(d), FlagPoint(q))).epsilon(1e-10));
    }
  // near the identity the minors keep relative precision
  const auto tiny = SquareMatrix::rotation(1e-12);
  CHECK(flag_distance_from_standard(tiny, 1) == doctest::Approx(1e-12).epsilon(1e-6));
}

TEST_CASE("determinant, inverse and unimodularity") {
  RandomStream rng(19, 9);
  for (int t = 0; t < 50; ++t) {
    const auto g = testing::random_sl(rng, 3);
    CHECK(determinant(g) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(is_unimodular(g));
    CHECK(max_abs_diff(g * inverse(g), SquareMatrix::identity(3)) < 1e-10);
  }
  CHECK_FALSE(is_unimodular(SquareMatrix{{2, 0}, {0, 1}}));
  CHECK(error_code_of([] { inverse(SquareMatrix{{1, 2}, {2, 4}}); }) == ErrorCode::NonInvertible);
}

TEST_CASE("wedge of columns gives unit lines for orthonormal frames") {
  RandomStream rng(20, 10);
  const auto q = random_orthogonal(rng, 4);
  for (std::size_t i = 1; i <= 3; ++i) CHECK(norm(wedge_of_columns(q, i)) == doctest::Approx(1.0));
  const Vector x{1, 0, 0}, y{0, 1, 0};
  const auto w = wedge2(x, y);
  CHECK(w == Vector{1, 0, 0});
}
