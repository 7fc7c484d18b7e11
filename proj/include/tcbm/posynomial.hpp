#ifndef TCBM_POSYNOMIAL_HPP
#define TCBM_POSYNOMIAL_HPP

#include <Eigen/Dense>

#include <vector>

namespace tcbm {

/// Posynomial sum_k c_k prod_j R_j^{a_kj} evaluated at log-variables
/// x_j = ln R_j. Each term is stored as (ln c_k, a_k), so
/// p(x) = sum_k exp(ln c_k + a_k . x), which is convex in x, and ln p(x) is
/// convex as well (log-sum-exp of affine functions).
class Posynomial {
public:
  explicit Posynomial(int num_vars) : num_vars_(num_vars) {}

  int num_vars() const { return num_vars_; }
  std::size_t num_terms() const { return log_coeffs_.size(); }
  bool empty() const { return log_coeffs_.empty(); }

  /// Adds c * prod R^a. Terms with c == 0 are dropped.
  void add_term(double coeff, const Eigen::VectorXd& exponents);
  void add_constant(double coeff);

  double value(const Eigen::VectorXd& x) const;
  double log_value(const Eigen::VectorXd& x) const;

  /// Gradient and Hessian of ln p at x.
  void log_derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const;
  Eigen::VectorXd log_gradient(const Eigen::VectorXd& x) const;

private:
  // Term weights exp(ln c_k + a_k . x - shift), shift = max exponent.
  Eigen::VectorXd shifted_weights(const Eigen::VectorXd& x, double& shift) const;

  int num_vars_;
  std::vector<double> log_coeffs_;
  std::vector<Eigen::VectorXd> exponents_;
};

}  // namespace tcbm

#endif
