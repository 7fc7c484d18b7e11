#include "tcbm/posynomial.hpp"

#include "tcbm/model.hpp"

#include <cmath>
#include <limits>

namespace tcbm {

void Posynomial::add_term(double coeff, const Eigen::VectorXd& exponents) {
  if (coeff < 0.0) throw Error(ErrorKind::InvalidArgument, "posynomial coefficients must be >= 0");
  if (exponents.size() != num_vars_) throw Error(ErrorKind::InvalidArgument, "posynomial exponent size mismatch");
  if (coeff == 0.0) return;
  log_coeffs_.push_back(std::log(coeff));
  exponents_.push_back(exponents);
}

void Posynomial::add_constant(double coeff) { add_term(coeff, Eigen::VectorXd::Zero(num_vars_)); }

Eigen::VectorXd Posynomial::shifted_weights(const Eigen::VectorXd& x, double& shift) const {
  const auto n = static_cast<Eigen::Index>(log_coeffs_.size());
  Eigen::VectorXd z(n);
  for (Eigen::Index k = 0; k < n; ++k) z[k] = log_coeffs_[static_cast<std::size_t>(k)] + exponents_[static_cast<std::size_t>(k)].dot(x);
  shift = n > 0 ? z.maxCoeff() : 0.0;
  return (z.array() - shift).exp().matrix();
}

double Posynomial::value(const Eigen::VectorXd& x) const {
  if (empty()) return 0.0;
  double shift = 0.0;
  const Eigen::VectorXd w = shifted_weights(x, shift);
  return std::exp(shift) * w.sum();
}

double Posynomial::log_value(const Eigen::VectorXd& x) const {
  if (empty()) return -std::numeric_limits<double>::infinity();
  double shift = 0.0;
  const Eigen::VectorXd w = shifted_weights(x, shift);
  return shift + std::log(w.sum());
}

void Posynomial::log_derivatives(const Eigen::VectorXd& x, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
  grad = Eigen::VectorXd::Zero(num_vars_);
  hess = Eigen::MatrixXd::Zero(num_vars_, num_vars_);
  if (empty()) return;
  double shift = 0.0;
  Eigen::VectorXd w = shifted_weights(x, shift);
  w /= w.sum();
  // softmax weights pi_k: grad = sum pi_k a_k, hess = sum pi_k a_k a_k^T - grad grad^T
  for (std::size_t k = 0; k < exponents_.size(); ++k) {
    const double pk = w[static_cast<Eigen::Index>(k)];
    grad.noalias() += pk * exponents_[k];
    hess.noalias() += pk * exponents_[k] * exponents_[k].transpose();
  }
  hess.noalias() -= grad * grad.transpose();
}

Eigen::VectorXd Posynomial::log_gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(num_vars_);
  if (empty()) return grad;
  double shift = 0.0;
  Eigen::VectorXd w = shifted_weights(x, shift);
  w /= w.sum();
  for (std::size_t k = 0; k < exponents_.size(); ++k) grad.noalias() += w[static_cast<Eigen::Index>(k)] * exponents_[k];
  return grad;
}

}  // namespace tcbm
