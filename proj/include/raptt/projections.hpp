#pragma once

// Random p x k projections with orthonormal columns: Haar-distributed
// (thin QR of a Gaussian matrix) and "one permutation + one random
// projection" block matrices.

#include <cmath>
#include <cstddef>
#include <iostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "raptt/error.hpp"
#include "raptt/randsrc.hpp"

namespace raptt {

enum class ProjectionKind { haar, block };

inline std::string_view to_string(ProjectionKind kind) {
  return kind == ProjectionKind::haar ? "haar" : "block";
}

inline ProjectionKind parse_projection_kind(std::string_view s) {
  if (s == "haar") return ProjectionKind::haar;
  if (s == "block") return ProjectionKind::block;
  throw DomainError("unknown projection kind '" + std::string(s) + "' (expected haar|block)");
}

// Block projection stored sparsely: coordinate j contributes `weight[j]`
// to column `column[j]`.
struct BlockLayout {
  std::vector<Eigen::Index> column;
  Eigen::VectorXd weight;
};

class ProjectionMatrix {
 public:
  static ProjectionMatrix dense(Eigen::MatrixXd values, ProjectionKind kind, StreamKey key) {
    ProjectionMatrix out;
    out.p_ = values.rows();
    out.k_ = values.cols();
    out.dense_ = std::move(values);
    out.kind_ = kind;
    out.key_ = std::move(key);
    return out;
  }

  static ProjectionMatrix block(Eigen::Index k, BlockLayout layout, StreamKey key) {
    ProjectionMatrix out;
    out.p_ = static_cast<Eigen::Index>(layout.column.size());
    out.k_ = k;
    out.layout_ = std::move(layout);
    out.kind_ = ProjectionKind::block;
    out.key_ = std::move(key);
    return out;
  }

  // Identity-like projection onto the first k coordinates (k = p gives I_p).
  static ProjectionMatrix coordinate(Eigen::Index p, Eigen::Index k) {
    return dense(Eigen::MatrixXd::Identity(p, k), ProjectionKind::haar, StreamKey{});
  }

  [[nodiscard]] Eigen::Index p() const { return p_; }
  [[nodiscard]] Eigen::Index k() const { return k_; }
  [[nodiscard]] ProjectionKind kind() const { return kind_; }
  [[nodiscard]] const StreamKey& key() const { return key_; }
  [[nodiscard]] bool is_sparse() const { return !layout_.column.empty(); }
  [[nodiscard]] const BlockLayout& layout() const { return layout_; }

  [[nodiscard]] Eigen::MatrixXd to_dense() const {
    if (!is_sparse()) return dense_;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p_, k_);
    for (Eigen::Index j = 0; j < p_; ++j) out(j, layout_.column[j]) = layout_.weight(j);
    return out;
  }

  // M * R for an (rows x p) matrix M.
  [[nodiscard]] Eigen::MatrixXd right_multiply(const Eigen::Ref<const Eigen::MatrixXd>& m) const {
    if (m.cols() != p_) throw DimensionMismatch("projection: operand has wrong column count");
    if (!is_sparse()) return m * dense_;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), k_);
    for (Eigen::Index j = 0; j < p_; ++j)
      out.col(layout_.column[j]).noalias() += layout_.weight(j) * m.col(j);
    return out;
  }

  // R' v for a p-vector v.
  [[nodiscard]] Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& v) const {
    if (v.size() != p_) throw DimensionMismatch("projection: vector has wrong length");
    if (!is_sparse()) return dense_.transpose() * v;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(k_);
    for (Eigen::Index j = 0; j < p_; ++j) out(layout_.column[j]) += layout_.weight(j) * v(j);
    return out;
  }

 private:
  ProjectionMatrix() = default;

  Eigen::Index p_ = 0;
  Eigen::Index k_ = 0;
  Eigen::MatrixXd dense_;
  BlockLayout layout_;
  ProjectionKind kind_ = ProjectionKind::haar;
  StreamKey key_;
};

// Haar draw on {R : R'R = I_k}: thin QR of an iid Gaussian p x k matrix,
// with column signs fixed so the triangular factor has a positive diagonal.
inline ProjectionMatrix haar_projection(Eigen::Index p, Eigen::Index k, const StreamKey& key) {
  detail::require(k >= 1, "haar_projection: k must be >= 1");
  detail::require(k <= p, "haar_projection: k must not exceed p");
  Eigen::MatrixXd g = gaussian_matrix(p, k, key);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, k);
  const auto diag = qr.matrixQR().diagonal();
  for (Eigen::Index j = 0; j < k; ++j)
    if (diag(j) < 0.0) q.col(j) = -q.col(j);
  return ProjectionMatrix::dense(std::move(q), ProjectionKind::haar, key);
}

// Block sizes when p is not a multiple of k: the first p mod k blocks get
// ceil(p/k) coordinates, the rest floor(p/k).
inline std::vector<Eigen::Index> block_sizes(Eigen::Index p, Eigen::Index k) {
  std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), p / k);
  for (Eigen::Index j = 0; j < p % k; ++j) ++sizes[static_cast<std::size_t>(j)];
  return sizes;
}

// One permutation + one random projection. Weights are iid N(0,1); the
// coordinates are permuted uniformly, cut into k contiguous blocks, and
// each block's weights are normalized to a unit column.
inline BlockLayout block_layout(Eigen::Index p, Eigen::Index k, const StreamKey& key) {
  detail::require(k >= 1, "block_projection: k must be >= 1");
  detail::require(k <= p, "block_projection: k must not exceed p");
  Stream stream(key);
  Eigen::VectorXd r(p);
  for (Eigen::Index j = 0; j < p; ++j) r(j) = stream.gaussian();
  const std::vector<std::size_t> perm = random_permutation(static_cast<std::size_t>(p), stream);

  BlockLayout layout;
  layout.column.assign(static_cast<std::size_t>(p), 0);
  layout.weight.resize(p);
  const std::vector<Eigen::Index> sizes = block_sizes(p, k);
  Eigen::Index start = 0;
  for (Eigen::Index col = 0; col < k; ++col) {
    const Eigen::Index len = sizes[static_cast<std::size_t>(col)];
    double norm = r.segment(start, len).norm();
    for (std::uint64_t attempt = 0; !(norm > 0.0); ++attempt) {
      std::clog << "raptt: zero-norm block " << col << " in projection " << key.to_string()
                << ", redrawing weights\n";
      Stream regen(key.child("regen", static_cast<std::uint64_t>(col) * 1000 + attempt));
      for (Eigen::Index t = 0; t < len; ++t) r(start + t) = regen.gaussian();
      norm = r.segment(start, len).norm();
    }
    for (Eigen::Index t = start; t < start + len; ++t) {
      const std::size_t coord = perm[static_cast<std::size_t>(t)];
      layout.column[coord] = col;
      layout.weight(static_cast<Eigen::Index>(coord)) = r(t) / norm;
    }
    start += len;
  }
  return layout;
}

inline ProjectionMatrix block_projection(Eigen::Index p, Eigen::Index k, const StreamKey& key) {
  return ProjectionMatrix::block(k, block_layout(p, k, key), key);
}

inline ProjectionMatrix make_projection(ProjectionKind kind, Eigen::Index p, Eigen::Index k,
                                        const StreamKey& key) {
  return kind == ProjectionKind::haar ? haar_projection(p, k, key) : block_projection(p, k, key);
}

}  // namespace raptt
