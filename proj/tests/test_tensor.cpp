#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "treetn/tensor.hpp"

using namespace treetn;

namespace {

FullTensor random_tensor(Shape shape, unsigned seed) {
  FullTensor a(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (auto& v : a.data()) v = normal(rng);
  return a;
}

FullTensor range_tensor(Shape shape) {
  FullTensor a(std::move(shape));
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<double>(i);
  return a;
}

}  // namespace

TEST_CASE("matricize: identity reshape and index arithmetic") {
  FullTensor a({2, 2}, {1, 2, 3, 4});
  const auto m = matricize(a, {0});
  CHECK(m.matrix.rows() == 2);
  CHECK(m.matrix(0, 1) == 2);
  CHECK(m.matrix(1, 0) == 3);

  // 2x2x2 range tensor, entry value = 4 i1 + 2 i2 + i3; rows grouped by mode 2
  const auto r = matricize(range_tensor({2, 2, 2}), {1});
  REQUIRE(r.matrix.rows() == 2);
  REQUIRE(r.matrix.cols() == 4);
  for (int i2 = 0; i2 < 2; ++i2)
    for (int i1 = 0; i1 < 2; ++i1)
      for (int i3 = 0; i3 < 2; ++i3) CHECK(r.matrix(i2, i1 * 2 + i3) == 4 * i1 + 2 * i2 + i3);

  CHECK_THROWS_AS(matricize(a, {}), std::invalid_argument);
  CHECK_THROWS_AS(matricize(a, {0, 1}), std::invalid_argument);
}

TEST_CASE("matricize round trip is bit-exact") {
  const auto a = random_tensor({3, 4, 2, 5}, 7);
  for (const Modes& alpha : {Modes{0}, Modes{1, 3}, Modes{0, 2, 3}, Modes{2}}) {
    const auto back = unmatricize(matricize(a, alpha));
    CHECK(back.shape() == a.shape());
    CHECK(std::equal(back.data().begin(), back.data().end(), a.data().begin()));
  }
}

TEST_CASE("singular values") {
  FullTensor diag({2, 2}, {3, 0, 0, 4});
  const auto s = singular_values(matricize(diag, {0}));
  CHECK(s[0] == doctest::Approx(4));
  CHECK(s[1] == doctest::Approx(3));

  FullTensor outer({3, 2});
  const double u[3] = {1, 2, 2}, v[2] = {3, 4};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) outer[static_cast<std::size_t>(i * 2 + j)] = u[i] * v[j];
  const auto so = singular_values(matricize(outer, {0}));
  CHECK(so[0] == doctest::Approx(15));
  CHECK(std::abs(so[1]) < 1e-12);

  const auto a = random_tensor({8, 8}, 3);
  const auto m = matricize(a, {0});
  double s2 = 0;
  for (double x : singular_values(m)) s2 += x * x;
  const double fro2 = m.matrix.squaredNorm();
  CHECK(std::abs(s2 - fro2) <= 1e-12 * fro2);

  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 2);
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(singular_values(bad), std::domain_error);
}

TEST_CASE("principal subspace") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 3;
  const auto u = principal_subspace(d, 1);
  CHECK(std::abs(u(0, 0)) == doctest::Approx(1));
  CHECK(u(0, 0) >= 0);  // sign convention

  const auto a = random_tensor({6, 6}, 11).data();
  const Eigen::MatrixXd m = Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>>(a.data());
  const auto s = singular_values(m);
  const auto v2 = principal_subspace(m, 2);
  CHECK((v2.transpose() * v2 - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-12);
  const double residual = (m - v2 * (v2.transpose() * m)).norm();
  double tail = 0;
  for (std::size_t k = 2; k < s.size(); ++k) tail += s[k] * s[k];
  CHECK(std::abs(residual - std::sqrt(tail)) <= 1e-10 * std::sqrt(tail));

  // full rank: projection is the identity on the range
  const auto full = principal_subspace(m, 6);
  CHECK((full * (full.transpose() * m) - m).norm() < 1e-10 * m.norm());
  CHECK_THROWS_AS(principal_subspace(m, 0), std::invalid_argument);
  CHECK_THROWS_AS(principal_subspace(m, 7), std::invalid_argument);

  // deterministic: repeated calls agree exactly
  CHECK((principal_subspace(m, 3) - principal_subspace(m, 3)).norm() == 0.0);
}

TEST_CASE("singular values of an unfolding and its transpose agree") {
  const auto a = random_tensor({3, 4, 3, 2}, 5);
  for (const Modes& alpha : {Modes{0}, Modes{0, 1}, Modes{1, 3}}) {
    Modes comp;
    for (int nu = 0; nu < 4; ++nu)
      if (std::find(alpha.begin(), alpha.end(), nu) == alpha.end()) comp.push_back(nu);
    const auto s1 = singular_values(matricize(a, alpha));
    const auto s2 = singular_values(matricize(a, comp));
    const std::size_t k = std::min(s1.size(), s2.size());
    for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(s1[i] - s2[i]) <= 1e-10 * s1[0]);
  }
}

TEST_CASE("numerical rank threshold") {
  CHECK(numerical_rank(std::vector<double>{1.0, 0.5, 1e-13}) == 2);
  CHECK(numerical_rank(std::vector<double>{0.0, 0.0}) == 0);
  CHECK(numerical_rank(std::vector<double>{}) == 0);
}

TEST_CASE("permute and mode product") {
  const auto a = range_tensor({2, 3, 4});
  const std::vector<int> perm{2, 0, 1};
  const auto p = permute(a, perm);
  CHECK(p.shape() == Shape{4, 2, 3});
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 4; ++k) {
        const std::size_t src[3] = {i, j, k}, dst[3] = {k, i, j};
        CHECK(p.at(dst) == a.at(src));
      }
  Eigen::MatrixXd m(2, 3);
  m << 1, 0, 0, 0, 1, 1;
  const auto q = mode_product(a, 1, m);
  CHECK(q.shape() == Shape{2, 2, 4});
  const std::size_t i0[3] = {1, 1, 2}, s1[3] = {1, 1, 2}, s2[3] = {1, 2, 2};
  CHECK(q.at(i0) == a.at(s1) + a.at(s2));
}

TEST_CASE("dense guard") { CHECK_THROWS_AS(FullTensor(Shape{1000, 1000, 1000}), std::length_error); }

TEST_CASE("binary io round trip") {
  const auto a = random_tensor({3, 2, 4}, 9);
  const auto dir = std::filesystem::temp_directory_path() / "treetn_tensor_io";
  std::filesystem::create_directories(dir);
  const auto stem = (dir / "t").string();
  save_tensor(a, stem);
  const auto b = load_tensor(stem);
  CHECK(b.shape() == a.shape());
  CHECK(b.orthonormal() == a.orthonormal());
  CHECK(std::equal(b.data().begin(), b.data().end(), a.data().begin()));
  std::filesystem::remove_all(dir);
}
