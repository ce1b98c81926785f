#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "novograd/problems/problem.hpp"

namespace novograd {

/// f(w) = 1/2 w^T A w - b^T w with A symmetric positive definite (dense,
/// row-major). One layer, "w".
class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(std::vector<double> a, std::vector<double> b, std::vector<double> init)
      : dim_(b.size()), a_(std::move(a)), b_(std::move(b)), init_(std::move(init)) {
    if (dim_ == 0) throw Error("quadratic: empty b");
    if (a_.size() != dim_ * dim_) throw Error("quadratic: A must be dim x dim");
    if (init_.empty()) init_.assign(dim_, 0.0);
    if (init_.size() != dim_) throw Error("quadratic: init has wrong dimension");
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (a_[i * dim_ + j] != a_[j * dim_ + i]) throw Error("quadratic: A is not symmetric");
    diagonal_ = true;
    for (std::size_t i = 0; i < dim_ && diagonal_; ++i)
      for (std::size_t j = 0; j < dim_; ++j)
        if (i != j && a_[i * dim_ + j] != 0.0) {
          diagonal_ = false;
          break;
        }
    chol_ = cholesky(a_, dim_);
    minimizer_ = solve(b_);
  }

  static QuadraticProblem diagonal(const std::vector<double>& diag, std::vector<double> b,
                                   std::vector<double> init) {
    const std::size_t n = diag.size();
    if (b.empty()) b.assign(n, 0.0);
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] = diag[i];
    return QuadraticProblem(std::move(a), std::move(b), std::move(init));
  }

  /// A = Q diag(lambda) Q^T with Q a random orthogonal matrix and lambda
  /// log-spaced in [1, condition]; b and the start point are standard normal.
  static QuadraticProblem random_spd(std::size_t dim, double condition, std::uint64_t seed) {
    if (dim == 0 || !(condition >= 1.0)) throw Error("quadratic: need dim > 0 and condition >= 1");
    Rng rng(derive_seed(seed, 0x51));
    // Gram-Schmidt on a Gaussian matrix; rows of q are orthonormal.
    std::vector<double> q(dim * dim);
    for (auto& x : q) x = rng.normal();
    for (std::size_t i = 0; i < dim; ++i) {
      double* qi = &q[i * dim];
      for (std::size_t j = 0; j < i; ++j) {
        const double* qj = &q[j * dim];
        double dot = 0.0;
        for (std::size_t k = 0; k < dim; ++k) dot += qi[k] * qj[k];
        for (std::size_t k = 0; k < dim; ++k) qi[k] -= dot * qj[k];
      }
      double norm = 0.0;
      for (std::size_t k = 0; k < dim; ++k) norm += qi[k] * qi[k];
      norm = std::sqrt(norm);
      for (std::size_t k = 0; k < dim; ++k) qi[k] /= norm;
    }
    std::vector<double> lambda(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const double frac = dim == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(dim - 1);
      lambda[i] = std::pow(condition, frac);
    }
    std::vector<double> a(dim * dim, 0.0);
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = r; c < dim; ++c) {
        double s = 0.0;
        for (std::size_t k = 0; k < dim; ++k) s += q[k * dim + r] * lambda[k] * q[k * dim + c];
        a[r * dim + c] = s;
        a[c * dim + r] = s;
      }
    }
    std::vector<double> b(dim), init(dim);
    for (auto& x : b) x = rng.normal();
    for (auto& x : init) x = rng.normal();
    return QuadraticProblem(std::move(a), std::move(b), std::move(init));
  }

  std::string name() const override { return "quadratic"; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> matrix() const noexcept { return a_; }
  std::span<const double> linear() const noexcept { return b_; }

  /// w* = A^{-1} b.
  const std::vector<double>& minimizer() const noexcept { return minimizer_; }

  ModelParams<double> initial_params() const override {
    ModelParams<double> p;
    p.add("w", init_);
    return p;
  }

  ModelParams<double> random_params(Rng& rng) const override {
    std::vector<double> w(dim_);
    for (auto& x : w) x = rng.uniform(-2.0, 2.0);
    ModelParams<double> p;
    p.add("w", std::move(w));
    return p;
  }

  double eval(const ModelParams<double>& params, std::span<const std::size_t> /*batch*/) const override {
    check(params);
    std::vector<double> aw(dim_);
    return loss_and_aw(params[0].weights(), aw);
  }

  double eval_grad(ModelParams<double>& params, std::span<const std::size_t> /*batch*/) const override {
    check(params);
    std::vector<double> aw(dim_);
    const double loss = loss_and_aw(params[0].weights(), aw);
    auto g = params[0].grad();
    for (std::size_t i = 0; i < dim_; ++i) g[i] = aw[i] - b_[i];
    return loss;
  }

  double gradcheck_tolerance() const override { return 1e-8; }

  std::optional<double> optimal_loss() const override {
    std::vector<double> aw(dim_);
    return loss_and_aw(minimizer_, aw);
  }

 private:
  void check(const ModelParams<double>& params) const {
    if (params.num_layers() != 1 || params[0].size() != dim_) throw Error("quadratic: dimension mismatch");
  }

  double loss_and_aw(std::span<const double> w, std::vector<double>& aw) const {
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      double s = 0.0;
      if (diagonal_) {
        s = a_[i * dim_ + i] * w[i];
      } else {
        for (std::size_t j = 0; j < dim_; ++j) s += a_[i * dim_ + j] * w[j];
      }
      aw[i] = s;
      quad += w[i] * s;
      lin += b_[i] * w[i];
    }
    return 0.5 * quad - lin;
  }

  static std::vector<double> cholesky(const std::vector<double>& a, std::size_t n) {
    std::vector<double> l(n * n, 0.0);
    bool diagonal = true;
    for (std::size_t i = 0; i < n && diagonal; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (a[i * n + j] != 0.0) {
          diagonal = false;
          break;
        }
    if (diagonal) {
      for (std::size_t j = 0; j < n; ++j) {
        if (!(a[j * n + j] > 0.0)) throw Error("quadratic: A is not positive definite");
        l[j * n + j] = std::sqrt(a[j * n + j]);
      }
      return l;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double d = a[j * n + j];
      for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
      if (!(d > 0.0)) throw Error("quadratic: A is not positive definite");
      l[j * n + j] = std::sqrt(d);
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = a[i * n + j];
        for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
        l[i * n + j] = s / l[j * n + j];
      }
    }
    return l;
  }

  std::vector<double> solve(const std::vector<double>& rhs) const {
    const std::size_t n = dim_;
    std::vector<double> y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = rhs[i];
      for (std::size_t k = 0; k < i; ++k) s -= chol_[i * n + k] * y[k];
      y[i] = s / chol_[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = y[i];
      for (std::size_t k = i + 1; k < n; ++k) s -= chol_[k * n + i] * x[k];
      x[i] = s / chol_[i * n + i];
    }
    return x;
  }

  std::size_t dim_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> init_;
  bool diagonal_ = false;
  std::vector<double> chol_;
  std::vector<double> minimizer_;
};

}  // namespace novograd
