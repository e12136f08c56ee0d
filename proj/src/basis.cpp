#include "chaoskit/basis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "chaoskit/error.hpp"

namespace chaoskit {

BasisKind BasisKind::laguerre(double alpha) {
  BasisKind k;
  k.family = Family::Laguerre;
  k.alpha = alpha;
  return k;
}

BasisKind BasisKind::jacobi(double a, double b) {
  BasisKind k;
  k.family = Family::Jacobi;
  k.a = a;
  k.b = b;
  return k;
}

void BasisKind::validate() const {
  switch (family) {
    case Family::Hermite:
      return;
    case Family::Laguerre:
      if (!(alpha > -1.0) || !std::isfinite(alpha))
        throw DomainError("laguerre alpha must be a finite real > -1");
      return;
    case Family::Jacobi:
      if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw DomainError("jacobi parameters a, b must be finite reals > 0");
      return;
  }
}

std::vector<double> BasisKind::params() const {
  switch (family) {
    case Family::Hermite:
      return {};
    case Family::Laguerre:
      return {alpha};
    case Family::Jacobi:
      return {a, b};
  }
  return {};
}

std::string BasisKind::family_name() const {
  switch (family) {
    case Family::Hermite:
      return "hermite";
    case Family::Laguerre:
      return "laguerre";
    case Family::Jacobi:
      return "jacobi";
  }
  return "?";
}

std::string BasisKind::label() const {
  std::ostringstream os;
  os << family_name();
  const auto ps = params();
  if (!ps.empty()) {
    os << '(';
    for (std::size_t i = 0; i < ps.size(); ++i) os << (i ? "," : "") << ps[i];
    os << ')';
  }
  return os.str();
}

double BasisKind::eigenvalue(int p) const {
  switch (family) {
    case Family::Hermite:
    case Family::Laguerre:
      return p;
    case Family::Jacobi:
      return p * (p + a + b - 1.0);
  }
  return 0.0;
}

double BasisKind::diffusion(double x) const {
  switch (family) {
    case Family::Hermite:
      return 1.0;
    case Family::Laguerre:
      return x;
    case Family::Jacobi:
      return 1.0 - x * x;
  }
  return 0.0;
}

double BasisKind::drift(double x) const {
  switch (family) {
    case Family::Hermite:
      return -x;
    case Family::Laguerre:
      return alpha + 1.0 - x;
    case Family::Jacobi:
      return -((a + b) * x + (a - b));
  }
  return 0.0;
}

BasisKind BasisKind::from_name(const std::string& name, std::span<const double> ps) {
  BasisKind k;
  if (name == "hermite") {
    if (!ps.empty()) throw DomainError("hermite takes no parameters");
  } else if (name == "laguerre") {
    if (ps.size() != 1) throw DomainError("laguerre takes one parameter (alpha)");
    k = laguerre(ps[0]);
  } else if (name == "jacobi") {
    if (ps.size() != 2) throw DomainError("jacobi takes two parameters (a, b)");
    k = jacobi(ps[0], ps[1]);
  } else {
    throw DomainError("unknown basis family '" + name + "'");
  }
  k.validate();
  return k;
}

struct Basis::LinearizationCache {
  explicit LinearizationCache(std::size_t slots)
      : flags(std::make_unique<std::once_flag[]>(slots)), tables(slots) {}
  std::unique_ptr<std::once_flag[]> flags;
  std::vector<std::vector<double>> tables;
};

Basis::Basis(BasisKind kind, int max_degree) : kind_(kind), max_degree_(max_degree) {
  kind_.validate();
  if (max_degree < 0) throw DomainError("max_degree must be >= 0");
  if (max_degree > kMaxDegreeCap)
    throw DomainError("max_degree " + std::to_string(max_degree) + " exceeds the cap of " +
                      std::to_string(kMaxDegreeCap));

  build_recurrence();

  const int n_nodes = max_degree_ + 1;
  rule_ = gauss_quadrature(n_nodes);
  node_values_.assign(static_cast<std::size_t>(n_nodes) * n_nodes, 0.0);
  std::vector<double> q(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) {
    evaluate_all(rule_.nodes[i], q);
    for (int p = 0; p < n_nodes; ++p) node_values_[static_cast<std::size_t>(p) * n_nodes + i] = q[p];
  }

  verify_eigenrelation();

  const auto d = static_cast<std::size_t>(n_nodes);
  cache_ = std::make_unique<LinearizationCache>(d * d);
}

Basis::~Basis() = default;

void Basis::build_recurrence() {
  const int n = max_degree_;
  diag_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  offdiag_.assign(static_cast<std::size_t>(n) + 2, 0.0);
  eigenvalues_.resize(static_cast<std::size_t>(n) + 1);
  for (int p = 0; p <= n; ++p) eigenvalues_[p] = kind_.eigenvalue(p);

  switch (kind_.family) {
    case Family::Hermite:
      for (int p = 1; p <= n + 1; ++p) offdiag_[p] = std::sqrt(static_cast<double>(p));
      break;
    case Family::Laguerre: {
      const double al = kind_.alpha;
      for (int p = 0; p <= n; ++p) diag_[p] = 2.0 * p + al + 1.0;
      for (int p = 1; p <= n + 1; ++p) offdiag_[p] = -std::sqrt(p * (p + al));
      break;
    }
    case Family::Jacobi: {
      // Classical Jacobi exponents of the weight (1−x)^al (1+x)^be.
      const double al = kind_.a - 1.0;
      const double be = kind_.b - 1.0;
      const double s = al + be;
      diag_[0] = (be - al) / (s + 2.0);
      for (int p = 1; p <= n; ++p) diag_[p] = (be * be - al * al) / ((2.0 * p + s) * (2.0 * p + s + 2.0));
      offdiag_[1] = std::sqrt(4.0 * (1.0 + al) * (1.0 + be) / ((2.0 + s) * (2.0 + s) * (3.0 + s)));
      for (int p = 2; p <= n + 1; ++p) {
        const double t = 2.0 * p + s;
        offdiag_[p] = std::sqrt(4.0 * p * (p + al) * (p + be) * (p + s) / (t * t * (t + 1.0) * (t - 1.0)));
      }
      break;
    }
  }
}

void Basis::evaluate_all(double x, std::span<double> out) const {
  const std::size_t n = out.size();
  if (n == 0) return;
  if (n > static_cast<std::size_t>(max_degree_) + 1)
    throw DegreeOverflow("evaluate_all: degree beyond max_degree");
  out[0] = 1.0;
  if (n == 1) return;
  out[1] = (x - diag_[0]) / offdiag_[1];
  for (std::size_t p = 1; p + 1 < n; ++p)
    out[p + 1] = ((x - diag_[p]) * out[p] - offdiag_[p] * out[p - 1]) / offdiag_[p + 1];
}

double Basis::value(int p, double x) const {
  if (p < 0 || p > max_degree_) throw DegreeOverflow("value: degree out of range");
  std::vector<double> q(static_cast<std::size_t>(p) + 1);
  evaluate_all(x, q);
  return q.back();
}

void Basis::evaluate_with_derivatives(double x, std::span<double> q, std::span<double> dq,
                                      std::span<double> d2q) const {
  const std::size_t n = q.size();
  if (dq.size() != n || d2q.size() != n) throw DomainError("derivative buffers must match");
  if (n == 0) return;
  if (n > static_cast<std::size_t>(max_degree_) + 1)
    throw DegreeOverflow("evaluate_with_derivatives: degree beyond max_degree");
  q[0] = 1.0;
  dq[0] = 0.0;
  d2q[0] = 0.0;
  for (std::size_t p = 0; p + 1 < n; ++p) {
    const double prev = p ? q[p - 1] : 0.0;
    const double dprev = p ? dq[p - 1] : 0.0;
    const double d2prev = p ? d2q[p - 1] : 0.0;
    const double bp = offdiag_[p];
    const double bn = offdiag_[p + 1];
    const double c = x - diag_[p];
    q[p + 1] = (c * q[p] - bp * prev) / bn;
    dq[p + 1] = (q[p] + c * dq[p] - bp * dprev) / bn;
    d2q[p + 1] = (2.0 * dq[p] + c * d2q[p] - bp * d2prev) / bn;
  }
}

QuadratureRule Basis::gauss_quadrature(int nodes) const {
  if (nodes < 1) throw DomainError("gauss_quadrature: need at least one node");
  if (nodes > max_degree_ + 1)
    throw DegreeOverflow("gauss_quadrature: " + std::to_string(nodes) +
                         " nodes exceed the recurrence depth max_degree+1");
  const auto k = static_cast<Eigen::Index>(nodes);
  Eigen::VectorXd diag(k);
  Eigen::VectorXd sub(std::max<Eigen::Index>(k - 1, 0));
  for (Eigen::Index i = 0; i < k; ++i) diag(i) = diag_[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < k; ++i) sub(i) = std::abs(offdiag_[static_cast<std::size_t>(i) + 1]);

  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(nodes));
  rule.weights.resize(static_cast<std::size_t>(nodes));
  if (k == 1) {
    rule.nodes[0] = diag(0);
    rule.weights[0] = 1.0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  double total = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    const double v = solver.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = v * v;
    total += v * v;
  }
  // μ is a probability measure, so weights sum to one.
  for (auto& w : rule.weights) w /= total;
  return rule;
}

void Basis::verify_eigenrelation() {
  const std::size_t n = static_cast<std::size_t>(max_degree_) + 1;
  std::vector<double> q(n), dq(n), d2q(n);
  double worst = 0.0;
  for (const double x : rule_.nodes) {
    evaluate_with_derivatives(x, q, dq, d2q);
    const double sig = kind_.diffusion(x);
    const double dr = kind_.drift(x);
    for (std::size_t p = 0; p < n; ++p) {
      const double lam = eigenvalues_[p];
      const double a = sig * d2q[p];
      const double b = dr * dq[p];
      const double c = lam * q[p];
      const double scale = std::max(1.0, std::abs(a) + std::abs(b) + std::abs(c));
      const double rel = std::abs(a + b + c) / ((1.0 + lam) * scale);
      worst = std::max(worst, rel);
      if (!(rel <= kEigTolerance)) {
        std::ostringstream os;
        os << "eigenrelation L Q_" << p << " = -" << lam << " Q_" << p << " fails for "
           << kind_.label() << " at x=" << x << " (relative residual " << rel << ")";
        throw EigenrelationError(os.str());
      }
    }
  }
  eigen_residual_ = worst;
}

std::vector<double> Basis::compute_linearization(int m, int n) const {
  const std::size_t nodes = rule_.nodes.size();
  const auto row = [&](int p) { return node_values_.data() + static_cast<std::size_t>(p) * nodes; };
  const double* qm = row(m);
  const double* qn = row(n);
  std::vector<double> c(static_cast<std::size_t>(m + n) + 1, 0.0);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int k = std::abs(m - n); k <= m + n; ++k) {
    const double* qk = row(k);
    double sum = 0.0;
    double envelope = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      const double t = rule_.weights[i] * qm[i] * qn[i] * qk[i];
      sum += t;
      envelope += std::abs(t);
    }
    // Entries below the rounding envelope are structural zeros (e.g. parity).
    c[static_cast<std::size_t>(k)] = std::abs(sum) <= 64.0 * eps * envelope ? 0.0 : sum;
  }
  return c;
}

std::span<const double> Basis::linearize(int m, int n) const {
  if (m < 0 || n < 0) throw DomainError("linearize: negative degree");
  if (m + n > max_degree_)
    throw DegreeOverflow("linearize: degree " + std::to_string(m + n) + " exceeds max_degree " +
                         std::to_string(max_degree_) + " of " + kind_.label());
  if (m > n) std::swap(m, n);
  const std::size_t slot = static_cast<std::size_t>(m) * (static_cast<std::size_t>(max_degree_) + 1) + n;
  std::call_once(cache_->flags[slot], [&] { cache_->tables[slot] = compute_linearization(m, n); });
  return cache_->tables[slot];
}

BasisPtr make_basis(BasisKind kind, int max_degree) {
  return std::make_shared<const Basis>(kind, max_degree);
}

}  // namespace chaoskit
