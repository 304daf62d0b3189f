#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "treetn/truncate.hpp"

using namespace treetn;

namespace {

FullTensor random_tensor(Shape shape, std::mt19937_64& rng) {
  FullTensor a(std::move(shape));
  std::normal_distribution<double> normal;
  for (auto& v : a.data()) v = normal(rng);
  return a;
}

// Oracle: Frobenius distance from the unfolding to its rank-n SVD truncation,
// computed with an independent JacobiSVD.
double svd_truncation_distance(const FullTensor& a, const Modes& modes, std::size_t n) {
  const auto m = matricize(a, modes).matrix;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(n), svd.singularValues().size());
  const Eigen::MatrixXd approx =
      svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal() * svd.matrixV().leftCols(k).transpose();
  return (m - approx).norm();
}

std::vector<DimensionTree> shapes4() {
  return {DimensionTree::balanced_binary(4), DimensionTree::linear_binary(4), DimensionTree::trivial(4)};
}

}  // namespace

TEST_CASE("widths of a two-term orthogonal sum") {
  // 3 u1 (x) v1 + 4 u2 (x) v2 with coordinate vectors as orthonormal factors
  FullTensor a({3, 3}, std::vector<double>{3, 0, 0, 0, 4, 0, 0, 0, 0});
  const auto w = width_of(a, {0});
  CHECK(w.sigma[0] == doctest::Approx(4));
  CHECK(w.sigma[1] == doctest::Approx(3));
  CHECK(w.width(0) == doctest::Approx(5));
  CHECK(w.width(1) == doctest::Approx(3));
  CHECK(w.width(2) == doctest::Approx(0).epsilon(1e-12));
  CHECK(w.width(50) == 0.0);
}

TEST_CASE("rank-one tensors have zero widths beyond one") {
  FullTensor a({2, 3, 2});
  const double u[2] = {1, -2}, v[3] = {0.5, 1, 3}, z[2] = {2, 1};
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 2; ++k) a[(i * 3 + j) * 2 + k] = u[i] * v[j] * z[k];
  for (const auto& t : {DimensionTree::balanced_binary(3), DimensionTree::trivial(3)}) {
    const auto p = width_profile(a, t);
    for (std::size_t id = 1; id < t.size(); ++id) {
      CHECK(p.delta(static_cast<int>(id), 1) <= 1e-12 * a.norm());
      CHECK(p.delta(static_cast<int>(id), 0) == doctest::Approx(a.norm()));
    }
    const auto proj = project_to_tree(a, t, uniform_ranks(t, 1));
    CHECK(distance(proj.approximation, a) <= 1e-12 * a.norm());
  }
}

TEST_CASE("widths match SVD truncation distances on random tensors") {
  std::mt19937_64 rng(64);
  const auto a = random_tensor({6, 6, 6, 6}, rng);
  for (const auto& t : shapes4()) {
    const auto p = width_profile(a, t);
    for (std::size_t id = 1; id < t.size(); ++id) {
      const auto& w = p.nodes[id];
      for (std::size_t n = 0; n <= w.sigma.size(); ++n) {
        const double oracle = svd_truncation_distance(a, w.modes, n);
        CHECK(std::abs(w.width(n) - oracle) <= 1e-10 * a.norm());
      }
    }
  }
  FullTensor nonortho = a;
  nonortho.set_orthonormal(false);
  CHECK_THROWS_AS(width_profile(nonortho, DimensionTree::trivial(4)), std::invalid_argument);
}

TEST_CASE("widths are symmetric under complement") {
  std::mt19937_64 rng(3);
  const auto a = random_tensor({3, 4, 2, 5, 3}, rng);
  const auto t = DimensionTree::balanced_binary(5);
  for (std::size_t id = 1; id < t.size(); ++id) {
    const auto& modes = t.node(static_cast<int>(id)).modes;
    const auto w = width_of(a, modes);
    const auto wc = width_of(a, t.complement(modes));
    for (std::size_t n = 0; n <= std::max(w.sigma.size(), wc.sigma.size()); ++n)
      CHECK(std::abs(w.width(n) - wc.width(n)) <= 1e-10 * w.width(0));
  }
}

TEST_CASE("projection error on a random 5^4 tensor lies between the single-node and summed widths") {
  std::mt19937_64 rng(54);
  const auto a = random_tensor({5, 5, 5, 5}, rng);
  const auto t = DimensionTree::balanced_binary(4);
  const auto r = uniform_ranks(t, 2);
  const auto p = width_profile(a, t);
  const auto proj = project_to_tree(a, t, r);
  const double err = distance(proj.approximation, a);
  double lower = 0;
  for (std::size_t id = 1; id < t.size(); ++id) lower = std::max(lower, p.delta(static_cast<int>(id), 2));
  CHECK(err <= error_bound_rhs(p, r) + 1e-10);
  CHECK(err >= lower - 1e-10);
  const auto m = measured_ranks(proj.approximation, t);
  for (std::size_t id = 1; id < t.size(); ++id) CHECK(m[id] <= 2);
  CHECK(distance(to_full_tensor(proj.network), proj.approximation) <= 1e-10 * a.norm());
}

TEST_CASE("full ranks reproduce the tensor") {
  std::mt19937_64 rng(9);
  const auto a = random_tensor({3, 4, 3, 2}, rng);
  for (const auto& t : shapes4()) {
    const auto proj = project_to_tree(a, t, uniform_ranks(t, 100));
    CHECK(distance(proj.approximation, a) <= 1e-10 * a.norm());
    CHECK(!proj.notices.empty());  // ranks were clamped
    CHECK(error_bound_rhs(width_profile(a, t), proj.ranks) <= 1e-10 * a.norm());
  }
}

TEST_CASE("bound formula") {
  const auto t = DimensionTree::trivial(2);
  WidthProfile p{t, std::vector<NodeWidths>(3)};
  p.nodes[1] = NodeWidths{{0}, {1.0, 0.3}, {std::sqrt(1.09), 0.3, 0.0}};
  p.nodes[2] = NodeWidths{{1}, {1.0, 0.4}, {std::sqrt(1.16), 0.4, 0.0}};
  CHECK(error_bound_rhs(p, {1, 1, 1}) == doctest::Approx(0.5));
  CHECK(error_bound_rhs(p, {1, 2, 2}) == 0.0);

  // direct summation oracle
  std::mt19937_64 rng(17);
  const auto a = random_tensor({4, 3, 5, 4}, rng);
  const auto tb = DimensionTree::balanced_binary(4);
  const auto prof = width_profile(a, tb);
  std::uniform_int_distribution<int> pick(0, 6);
  for (int trial = 0; trial < 10; ++trial) {
    RankMap r(tb.size(), 1);
    for (std::size_t id = 1; id < tb.size(); ++id) r[id] = pick(rng);
    double sum = 0;
    for (std::size_t id = 1; id < tb.size(); ++id) {
      const auto& s = prof.nodes[id].sigma;
      for (std::size_t k = static_cast<std::size_t>(r[id]); k < s.size(); ++k) sum += s[k] * s[k];
    }
    CHECK(std::abs(error_bound_rhs(prof, r) - std::sqrt(sum)) <= 1e-12 * a.norm());
  }
}

TEST_CASE("projection error bound over random tensors, trees and ranks") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_tensor({6, 6, 6, 6}, rng);
    for (const auto& t : shapes4()) {
      const auto prof = width_profile(a, t);
      for (int r0 : {1, 2, 4, 6}) {
        const auto r = uniform_ranks(t, r0);
        const auto f = project_tensor(a, t, r);
        CHECK(distance(f, a) <= error_bound_rhs(prof, r) + 1e-9);
        CHECK(f.norm() <= a.norm() + 1e-10);
        ++checked;
      }
    }
  }
  CHECK(checked == 600);
}

TEST_CASE("projection is idempotent and independent of the within-level order") {
  std::mt19937_64 rng(77);
  const auto a = random_tensor({4, 5, 3, 4, 3}, rng);
  for (const auto& t : {DimensionTree::balanced_binary(5), DimensionTree::trivial(5)}) {
    const auto r = uniform_ranks(t, 2);
    const auto f = project_tensor(a, t, r);
    const auto g = project_tensor(f, t, r);
    CHECK(std::abs(g.norm() - f.norm()) <= 1e-10);
    CHECK(distance(f, g) <= 1e-10 * a.norm());
    const auto h = project_tensor(a, t, r, ProjectionOptions{true, {}});
    CHECK(distance(f, h) <= 1e-10 * a.norm());
  }
}

TEST_CASE("leaf-space discretization") {
  std::mt19937_64 rng(6);
  const auto a = random_tensor({6, 6, 6, 6}, rng);
  const auto t = DimensionTree::balanced_binary(4);
  const std::vector<std::size_t> dims(4, 4);
  const auto leaves = leaf_discretization(a, dims);
  // oracle: energy outside the first four coordinates of mode nu
  for (std::size_t nu = 0; nu < 4; ++nu) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::size_t rem = i;
      std::size_t idx[4];
      for (std::size_t k = 4; k-- > 0;) {
        idx[k] = rem % 6;
        rem /= 6;
      }
      if (idx[nu] >= 4) s += a[i] * a[i];
    }
    CHECK(leaves.errors[nu] == doctest::Approx(std::sqrt(s)));
  }
  const auto prof = width_profile(a, t);
  // leaf ranks below the leaf dimension: every node counts
  const auto r = uniform_ranks(t, 3);
  const ProjectionOptions opts{false, dims};
  const auto f = project_tensor(a, t, r, opts);
  CHECK(distance(f, a) <= error_bound_rhs(prof, r, BoundMode::WithLeaves, leaves) + 1e-9);
  // leaf ranks equal to the leaf dimension: the leaf spaces replace V_nu
  auto r4 = uniform_ranks(t, 3);
  for (int nu = 0; nu < 4; ++nu) r4[static_cast<std::size_t>(t.leaf_of_mode(nu))] = 4;
  const auto f4 = project_tensor(a, t, r4, opts);
  const double rhs4 = error_bound_rhs(prof, r4, BoundMode::WithLeaves, leaves);
  CHECK(distance(f4, a) <= rhs4 + 1e-9);
  double manual = 0;
  for (double e : leaves.errors) manual += e * e;
  for (int id : t.interior_nodes())
    if (id != 0) manual += std::pow(prof.delta(id, 3), 2);
  CHECK(rhs4 == doctest::Approx(std::sqrt(manual)));
  const auto proj = project_to_tree(a, t, r4, opts);
  CHECK(proj.network.leaf_dims() == dims);
  // the network lives on the leading coordinates only
  const auto g = to_full_tensor(proj.network);
  double dist2 = 0;
  for (std::size_t i = 0; i < f4.size(); ++i) {
    std::size_t rem = i, idx[4];
    for (std::size_t k = 4; k-- > 0;) {
      idx[k] = rem % 6;
      rem /= 6;
    }
    bool inside = true;
    for (auto x : idx) inside = inside && x < 4;
    const double gv = inside ? g.at(idx) : 0.0;
    dist2 += (gv - f4[i]) * (gv - f4[i]);
  }
  CHECK(std::sqrt(dist2) <= 1e-10 * a.norm());
}

TEST_CASE("width CSV") {
  FullTensor a({2, 2}, std::vector<double>{3, 0, 0, 4});
  std::ostringstream os;
  write_width_csv(width_profile(a, DimensionTree::trivial(2)), os);
  const auto text = os.str();
  CHECK(text.rfind("node,n,sigma,delta\n\"{1}\",1,4,3\n", 0) == 0);
}
