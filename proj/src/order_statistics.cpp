#include "cpc/order_statistics.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cpc/io.hpp"

namespace cpc {
namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kSpan = 12.0;  // integration half-width in units of sigma

struct Parent {
  bool folded;
  double sigma;

  // log F(x), log(1 - F(x)), log f(x), computed from erfc for accurate tails.
  double log_cdf(double x) const {
    const double z = x / (kSqrt2 * sigma);
    return folded ? std::log(std::erf(z)) : std::log(0.5 * std::erfc(-z));
  }
  double log_sf(double x) const {
    const double z = x / (kSqrt2 * sigma);
    return folded ? std::log(std::erfc(z)) : std::log(0.5 * std::erfc(z));
  }
  double log_pdf(double x) const {
    const double u = x / sigma;
    return -0.5 * u * u - kLogSqrt2Pi - std::log(sigma) + (folded ? std::log(2.0) : 0.0);
  }
};

// Moment `power` of the l-th largest (0-based) of n draws from `parent`.
double order_moment(const Parent& parent, int n, int l, int power, double tol, double& error_out) {
  const int below = n - 1 - l;  // draws smaller than the order statistic
  const int above = l;          // draws larger
  const double log_coef = std::log(static_cast<double>(n)) + std::lgamma(n) - std::lgamma(l + 1) - std::lgamma(n - l);
  auto density = [&](double x) {
    double log_d = log_coef + parent.log_pdf(x);
    if (below > 0) log_d += below * parent.log_cdf(x);
    if (above > 0) log_d += above * parent.log_sf(x);
    return std::exp(log_d);
  };
  auto integrand = [&](double x) { return power == 1 ? x * density(x) : x * x * density(x); };

  const double hi = kSpan * parent.sigma;
  const double lo = parent.folded ? 0.0 : -hi;
  double value = 0.0;
  double error = 0.0;
  // Split at the origin so the folded parent and the symmetric parent share the same rule.
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  if (parent.folded) {
    value = Rule::integrate(integrand, lo, hi, 20, 1e-14, &error);
  } else {
    double e1 = 0.0, e2 = 0.0;
    value = Rule::integrate(integrand, lo, 0.0, 20, 1e-14, &e1) + Rule::integrate(integrand, 0.0, hi, 20, 1e-14, &e2);
    error = e1 + e2;
  }
  if (!std::isfinite(value) || error > tol) {
    std::ostringstream msg;
    msg << "order-statistic quadrature did not converge (n=" << n << ", l=" << l << ", power=" << power
        << ", residual=" << error << ")";
    throw IntegrationError(msg.str(), error);
  }
  error_out = std::max(error_out, error);
  return value;
}

void check_args(int n, double sigma, double tol) {
  if (n < 1) throw std::invalid_argument("order statistics need n >= 1");
  if (!(sigma > 0)) throw std::invalid_argument("order statistics need sigma > 0");
  if (!(tol > 0)) throw std::invalid_argument("order statistics need tol > 0");
}

}  // namespace

OrderMoments gaussian_order_moments(int n, double sigma, double tol) {
  check_args(n, sigma, tol);
  OrderMoments m;
  m.mean = Eigen::VectorXd::Zero(n);
  m.second = Eigen::VectorXd::Zero(n);
  const Parent parent{false, sigma};
  const int upper = (n + 1) / 2;
  for (int l = 0; l < upper; ++l) {
    const int mirror = n - 1 - l;
    m.second(l) = order_moment(parent, n, l, 2, tol, m.max_error);
    m.second(mirror) = m.second(l);
    if (mirror == l) {
      m.mean(l) = 0.0;
    } else {
      m.mean(l) = order_moment(parent, n, l, 1, tol, m.max_error);
      m.mean(mirror) = -m.mean(l);
    }
  }
  return m;
}

OrderMoments folded_order_moments(int n, double sigma, double tol) {
  check_args(n, sigma, tol);
  OrderMoments m;
  m.mean.resize(n);
  m.second.resize(n);
  const Parent parent{true, sigma};
  for (int l = 0; l < n; ++l) {
    m.mean(l) = order_moment(parent, n, l, 1, tol, m.max_error);
    m.second(l) = order_moment(parent, n, l, 2, tol, m.max_error);
  }
  return m;
}

OrderStatTable gaussian_order_stats(int n, double sigma, double tol) {
  auto xi = gaussian_order_moments(n, sigma, tol);
  auto eta = folded_order_moments(n, sigma, tol);
  OrderStatTable t;
  t.n = n;
  t.sigma = sigma;
  t.tol = tol;
  t.mean_xi = std::move(xi.mean);
  t.second_xi = std::move(xi.second);
  t.mean_eta = std::move(eta.mean);
  t.second_eta = std::move(eta.second);
  t.max_error = std::max(xi.max_error, eta.max_error);
  return t;
}

std::shared_ptr<const OrderStatTable> cached_order_stats(int n, double sigma, double tol) {
  static std::mutex mutex;
  static std::map<std::tuple<int, double, double>, std::shared_ptr<const OrderStatTable>> cache;
  const auto key = std::make_tuple(n, sigma, tol);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const OrderStatTable>(gaussian_order_stats(n, sigma, tol));
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(table)).first->second;
}

void write_order_stats_csv(std::ostream& out, const OrderStatTable& t) {
  out << "l,E_xi,E_xi2,E_eta,E_eta2\n";
  for (int l = 0; l < t.n; ++l) {
    out << (l + 1) << ',' << format_real(t.mean_xi(l)) << ',' << format_real(t.second_xi(l)) << ','
        << format_real(t.mean_eta(l)) << ',' << format_real(t.second_eta(l)) << '\n';
  }
}

OrderStatTable read_order_stats_csv(std::istream& in, double sigma) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("l,E_xi", 0) != 0)
    throw std::runtime_error("order-statistic CSV: missing header");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 5) throw std::runtime_error("order-statistic CSV: expected 5 columns");
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_real(f));
    if (static_cast<std::size_t>(row[0]) != rows.size() + 1)
      throw std::runtime_error("order-statistic CSV: rows out of order");
    rows.push_back(std::move(row));
  }
  OrderStatTable t;
  t.n = static_cast<int>(rows.size());
  t.sigma = sigma;
  t.mean_xi.resize(t.n);
  t.second_xi.resize(t.n);
  t.mean_eta.resize(t.n);
  t.second_eta.resize(t.n);
  for (int l = 0; l < t.n; ++l) {
    t.mean_xi(l) = rows[l][1];
    t.second_xi(l) = rows[l][2];
    t.mean_eta(l) = rows[l][3];
    t.second_eta(l) = rows[l][4];
  }
  return t;
}

bool is_convex_sequence(const Eigen::Ref<const Eigen::VectorXd>& v, double slack) {
  for (Eigen::Index l = 0; l + 2 < v.size(); ++l)
    if (v(l + 2) - 2.0 * v(l + 1) + v(l) < -slack) return false;
  return true;
}

Eigen::MatrixXd grouped_projection_matrix(const Composition& c) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c.size()), c.dimension());
  Eigen::Index i = 0;
  for (const auto& g : index_groups(c)) {
    P.row(i++).segment(g.first, g.size()).setConstant(1.0 / std::sqrt(static_cast<double>(g.size())));
  }
  return P;
}

}  // namespace cpc
