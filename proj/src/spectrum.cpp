#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "efg/errors.hpp"
#include "efg/solver.hpp"

namespace efg {

Spectrum estimate_spectrum(ForceAssembler& forces, std::span<const double> mass,
                           std::span<const std::array<bool, 3>> constrained, double length_scale,
                           int iterations)
{
  const std::size_t nn = mass.size();
  if (constrained.size() != nn)
    throw ConfigError("constraint mask does not match node count");

  std::vector<std::pair<std::uint32_t, int>> dofs;
  for (std::size_t i = 0; i < nn; ++i)
    for (int k = 0; k < 3; ++k)
      if (!constrained[i][k])
        dofs.emplace_back(static_cast<std::uint32_t>(i), k);
  const Eigen::Index n = static_cast<Eigen::Index>(dofs.size());
  Spectrum out;
  if (n == 0)
    return out;

  Eigen::VectorXd inv_sqrt_m(n);
  for (Eigen::Index d = 0; d < n; ++d)
    inv_sqrt_m[d] = 1.0 / std::sqrt(mass[dofs[static_cast<std::size_t>(d)].first]);

  std::vector<Vec3> u(nn, Vec3::Zero()), fp, fm;
  // y = M^-1/2 K M^-1/2 x by central differences of the internal force at u = 0
  auto apply = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd dx = inv_sqrt_m.cwiseProduct(x);
    const double h = 1e-6 * length_scale / dx.cwiseAbs().maxCoeff();
    for (Eigen::Index d = 0; d < n; ++d)
      u[dofs[static_cast<std::size_t>(d)].first][dofs[static_cast<std::size_t>(d)].second] = h * dx[d];
    forces.assemble(u, fp);
    for (auto& v : u)
      v = -v;
    forces.assemble(u, fm);
    for (auto& v : u)
      v.setZero();
    Eigen::VectorXd y(n);
    for (Eigen::Index d = 0; d < n; ++d) {
      const auto [i, k] = dofs[static_cast<std::size_t>(d)];
      y[d] = (fp[i][k] - fm[i][k]) / (2.0 * h) * inv_sqrt_m[d];
    }
    return y;
  };

  const Eigen::Index m = std::min<Eigen::Index>(iterations, n);
  Eigen::MatrixXd q(n, m);
  std::vector<double> alpha, beta;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index d = 0; d < n; ++d)
    v[d] = dist(rng);
  v.normalize();

  for (Eigen::Index j = 0; j < m; ++j) {
    q.col(j) = v;
    Eigen::VectorXd w = apply(v);
    alpha.push_back(v.dot(w));
    // full reorthogonalisation, applied twice
    for (int pass = 0; pass < 2; ++pass)
      w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
    const double b = w.norm();
    out.iterations = static_cast<int>(j + 1);
    if (j + 1 == m || b < 1e-12 * std::abs(alpha.front()))
      break;
    beta.push_back(b);
    v = w / b;
  }

  const Eigen::Index k = static_cast<Eigen::Index>(alpha.size());
  Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), k);
  Eigen::VectorXd sub = Eigen::VectorXd::Zero(std::max<Eigen::Index>(k - 1, 0));
  for (Eigen::Index j = 0; j + 1 < k; ++j)
    sub[j] = beta[static_cast<std::size_t>(j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  out.omega_min = std::sqrt(std::max(ev.minCoeff(), 0.0));
  out.omega_max = std::sqrt(std::max(ev.maxCoeff(), 0.0));
  return out;
}

}  // namespace efg
