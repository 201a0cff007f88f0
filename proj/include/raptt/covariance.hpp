#pragma once

// Structured covariance matrices for simulation: identity, spiked
// diagonal, tridiagonal Toeplitz and 25 x 25 equicorrelated blocks.
// Products, solves and Cholesky factors never touch a dense p x p matrix.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "raptt/error.hpp"

namespace raptt {

class CovarianceSpec {
 public:
  enum class Structure { diagonal, tridiagonal, block };

  static constexpr Eigen::Index kBlockSize = 25;

  static CovarianceSpec diagonal(int id, Eigen::VectorXd lambda) {
    CovarianceSpec out(id, lambda.size(), Structure::diagonal);
    out.diag_ = std::move(lambda);
    return out;
  }

  // Symmetric Toeplitz with unit diagonal and `off` on the first off-diagonals.
  static CovarianceSpec tridiagonal(int id, Eigen::Index p, double off) {
    CovarianceSpec out(id, p, Structure::tridiagonal);
    out.off_ = off;
    // Bidiagonal Cholesky factor: L(i,i) = l_i, L(i,i-1) = m_i.
    out.chol_diag_.resize(p);
    out.chol_sub_ = Eigen::VectorXd::Zero(p);
    out.chol_diag_(0) = 1.0;
    for (Eigen::Index i = 1; i < p; ++i) {
      out.chol_sub_(i) = off / out.chol_diag_(i - 1);
      const double rem = 1.0 - out.chol_sub_(i) * out.chol_sub_(i);
      if (!(rem > 0.0)) throw DomainError("tridiagonal covariance is not positive definite");
      out.chol_diag_(i) = std::sqrt(rem);
    }
    return out;
  }

  static CovarianceSpec block_diagonal(int id, Eigen::Index p, const Eigen::MatrixXd& block) {
    const Eigen::Index b = block.rows();
    if (p % b != 0)
      throw DomainError("block covariance needs p divisible by " + std::to_string(b) + ", got p=" +
                        std::to_string(p));
    CovarianceSpec out(id, p, Structure::block);
    out.block_ = block;
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) throw DomainError("covariance block is not positive definite");
    out.block_chol_ = llt.matrixL();
    return out;
  }

  [[nodiscard]] int id() const { return id_; }
  [[nodiscard]] Eigen::Index p() const { return p_; }
  [[nodiscard]] Structure structure() const { return structure_; }

  [[nodiscard]] Eigen::MatrixXd dense() const { return multiply(Eigen::MatrixXd::Identity(p_, p_)); }

  // Sigma * M for M with p rows.
  [[nodiscard]] Eigen::MatrixXd multiply(const Eigen::MatrixXd& m) const {
    check_rows(m.rows());
    switch (structure_) {
      case Structure::diagonal:
        return diag_.asDiagonal() * m;
      case Structure::tridiagonal: {
        Eigen::MatrixXd out = m;
        out.topRows(p_ - 1) += off_ * m.bottomRows(p_ - 1);
        out.bottomRows(p_ - 1) += off_ * m.topRows(p_ - 1);
        return out;
      }
      case Structure::block: {
        Eigen::MatrixXd out(m.rows(), m.cols());
        const Eigen::Index b = block_.rows();
        for (Eigen::Index s = 0; s < p_; s += b) out.middleRows(s, b).noalias() = block_ * m.middleRows(s, b);
        return out;
      }
    }
    return m;
  }

  // Sigma^{-1} v through the Cholesky factor.
  [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& v) const {
    check_rows(v.size());
    switch (structure_) {
      case Structure::diagonal:
        return v.cwiseQuotient(diag_);
      case Structure::tridiagonal: {
        Eigen::VectorXd w(p_);  // L w = v
        w(0) = v(0) / chol_diag_(0);
        for (Eigen::Index i = 1; i < p_; ++i) w(i) = (v(i) - chol_sub_(i) * w(i - 1)) / chol_diag_(i);
        Eigen::VectorXd x(p_);  // L' x = w
        x(p_ - 1) = w(p_ - 1) / chol_diag_(p_ - 1);
        for (Eigen::Index i = p_ - 2; i >= 0; --i)
          x(i) = (w(i) - chol_sub_(i + 1) * x(i + 1)) / chol_diag_(i);
        return x;
      }
      case Structure::block: {
        Eigen::VectorXd x(p_);
        const Eigen::Index b = block_.rows();
        for (Eigen::Index s = 0; s < p_; s += b) {
          const Eigen::VectorXd w = block_chol_.triangularView<Eigen::Lower>().solve(v.segment(s, b));
          x.segment(s, b) = block_chol_.transpose().triangularView<Eigen::Upper>().solve(w);
        }
        return x;
      }
    }
    return v;
  }

  // Rows g_i of an n x p iid N(0,1) matrix mapped to L g_i (rows ~ N(0, Sigma)).
  [[nodiscard]] Eigen::MatrixXd correlate(const Eigen::MatrixXd& g) const {
    if (g.cols() != p_) throw DimensionMismatch("covariance: operand has wrong column count");
    switch (structure_) {
      case Structure::diagonal:
        return g * diag_.cwiseSqrt().asDiagonal();
      case Structure::tridiagonal: {
        Eigen::MatrixXd out = g * chol_diag_.asDiagonal();
        for (Eigen::Index i = 1; i < p_; ++i) out.col(i) += chol_sub_(i) * g.col(i - 1);
        return out;
      }
      case Structure::block: {
        Eigen::MatrixXd out(g.rows(), g.cols());
        const Eigen::Index b = block_.rows();
        for (Eigen::Index s = 0; s < p_; s += b)
          out.middleCols(s, b).noalias() = g.middleCols(s, b) * block_chol_.transpose();
        return out;
      }
    }
    return g;
  }

  [[nodiscard]] double trace() const {
    switch (structure_) {
      case Structure::diagonal:
        return diag_.sum();
      case Structure::tridiagonal:
        return static_cast<double>(p_);
      case Structure::block:
        return static_cast<double>(p_ / block_.rows()) * block_.trace();
    }
    return 0.0;
  }

  // tr(Sigma^2) in closed form.
  [[nodiscard]] double trace_sq() const {
    switch (structure_) {
      case Structure::diagonal:
        return diag_.squaredNorm();
      case Structure::tridiagonal:
        return static_cast<double>(p_) + 2.0 * static_cast<double>(p_ - 1) * off_ * off_;
      case Structure::block:
        return static_cast<double>(p_ / block_.rows()) * block_.squaredNorm();
    }
    return 0.0;
  }

 private:
  CovarianceSpec(int id, Eigen::Index p, Structure s) : id_(id), p_(p), structure_(s) {
    if (p < 1) throw DomainError("covariance dimension must be positive");
  }

  void check_rows(Eigen::Index rows) const {
    if (rows != p_) throw DimensionMismatch("covariance: operand has wrong row count");
  }

  int id_;
  Eigen::Index p_;
  Structure structure_;
  Eigen::VectorXd diag_;
  double off_ = 0.0;
  Eigen::VectorXd chol_diag_;
  Eigen::VectorXd chol_sub_;
  Eigen::MatrixXd block_;
  Eigen::MatrixXd block_chol_;
};

// The four simulation covariances:
//   1  identity
//   2  diag(20/1, 20/2, ..., 20/20, 1, ..., 1)
//   3  Toeplitz with first row (1, 0.4, 0, ..., 0)
//   4  block diagonal, 25 x 25 blocks 0.85 I + 0.15 11'
inline CovarianceSpec make_sigma(int id, Eigen::Index p) {
  detail::require(p >= 1, "make_sigma: p must be positive");
  switch (id) {
    case 1:
      return CovarianceSpec::diagonal(1, Eigen::VectorXd::Ones(p));
    case 2: {
      Eigen::VectorXd lambda = Eigen::VectorXd::Ones(p);
      for (Eigen::Index i = 0; i < std::min<Eigen::Index>(20, p); ++i)
        lambda(i) = 20.0 / static_cast<double>(i + 1);
      return CovarianceSpec::diagonal(2, lambda);
    }
    case 3:
      return CovarianceSpec::tridiagonal(3, p, 0.4);
    case 4: {
      const Eigen::Index b = CovarianceSpec::kBlockSize;
      const Eigen::MatrixXd block =
          0.85 * Eigen::MatrixXd::Identity(b, b) + 0.15 * Eigen::MatrixXd::Ones(b, b);
      return CovarianceSpec::block_diagonal(4, p, block);
    }
    default:
      throw DomainError("sigma id must be 1, 2, 3 or 4, got " + std::to_string(id));
  }
}

}  // namespace raptt
