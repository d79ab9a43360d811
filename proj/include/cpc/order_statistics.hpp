#pragma once

#include <iosfwd>
#include <memory>
#include <stdexcept>

#include <Eigen/Core>

#include "cpc/combinatorics.hpp"

namespace cpc {

/// First and second moments of the order statistics of n i.i.d. N(0, sigma^2)
/// samples (xi) and of their magnitudes (eta). Index 0 is the largest.
struct OrderStatTable {
  int n = 0;
  double sigma = 1.0;
  double tol = 1e-10;
  Eigen::VectorXd mean_xi;
  Eigen::VectorXd second_xi;
  Eigen::VectorXd mean_eta;
  Eigen::VectorXd second_eta;
  double max_error = 0.0;  // worst quadrature error estimate over all entries
};

struct OrderMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd second;
  double max_error = 0.0;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// E[xi_l], E[xi_l^2] by adaptive quadrature of the order-statistic density.
/// The table is exactly antisymmetric in the means (upper half is mirrored).
OrderMoments gaussian_order_moments(int n, double sigma = 1.0, double tol = 1e-10);

/// E[eta_l], E[eta_l^2] for the half-normal parent |X|.
OrderMoments folded_order_moments(int n, double sigma = 1.0, double tol = 1e-10);

OrderStatTable gaussian_order_stats(int n, double sigma = 1.0, double tol = 1e-10);

/// Shared immutable table keyed by (n, sigma, tol); computed on first use.
std::shared_ptr<const OrderStatTable> cached_order_stats(int n, double sigma = 1.0, double tol = 1e-10);

/// Columns: l,E_xi,E_xi2,E_eta,E_eta2 (l is 1-based in the file).
void write_order_stats_csv(std::ostream& out, const OrderStatTable& table);
OrderStatTable read_order_stats_csv(std::istream& in, double sigma = 1.0);

/// Second difference E[v_{l+2}] - 2E[v_{l+1}] + E[v_l] >= -slack for all l.
bool is_convex_sequence(const Eigen::Ref<const Eigen::VectorXd>& v, double slack = 0.0);

/// Projection onto the scaled group-sum coordinates:
///   out_i = n_i^{-1/2} * sum_{l in I_i} x_l.
/// `x` must be sorted in nonincreasing order.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> grouped_projection(const Eigen::MatrixBase<Derived>& x,
                                                                            const Composition& c) {
  using Scalar = typename Derived::Scalar;
  using std::sqrt;
  if (x.size() != c.dimension()) throw std::invalid_argument("grouped_projection: dimension mismatch");
  for (Eigen::Index l = 1; l < x.size(); ++l)
    if (x(l) > x(l - 1)) throw std::invalid_argument("grouped_projection: input is not sorted descending");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(static_cast<Eigen::Index>(c.size()));
  Eigen::Index i = 0;
  for (const auto& g : index_groups(c)) {
    out(i++) = x.segment(g.first, g.size()).sum() / Scalar(sqrt(static_cast<double>(g.size())));
  }
  return out;
}

/// K x n matrix P with xi_bar = P * xi for sorted xi.
Eigen::MatrixXd grouped_projection_matrix(const Composition& c);

}  // namespace cpc
