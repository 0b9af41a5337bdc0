#pragma once

#include <cmath>

#include "gmvae/errors.hpp"
#include "gmvae/types.hpp"

// Scalar-generic numeric kernels shared by the autodiff primitives, the GMM
// baseline, and the evaluation oracles. All mixture arithmetic is done in
// log space with max-subtraction.

namespace gmvae {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

template <typename Derived>
double logsumexp(const Eigen::MatrixBase<Derived>& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

// Row-wise logsumexp of a BxN matrix -> Bx1.
template <typename Derived>
Mat logsumexp_rows(const Eigen::MatrixBase<Derived>& a) {
  Mat out(a.rows(), 1);
  for (Index i = 0; i < a.rows(); ++i) out(i, 0) = logsumexp(a.row(i));
  return out;
}

template <typename Derived>
Mat softmax_rows(const Eigen::MatrixBase<Derived>& a) {
  Mat out(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    const double m = a.row(i).maxCoeff();
    out.row(i) = (a.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

template <typename Derived>
Mat log_softmax_rows(const Eigen::MatrixBase<Derived>& a) {
  Mat out(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    const double m = a.row(i).maxCoeff();
    const double lse = m + std::log((a.row(i).array() - m).exp().sum());
    out.row(i) = a.row(i).array() - lse;
  }
  return out;
}

// log N(x | mean, diag(var)) summed over dimensions, one value per row.
// All three arguments are BxD.
template <typename DX, typename DM, typename DV>
Mat gaussian_logpdf_rows(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DM>& mean,
                         const Eigen::MatrixBase<DV>& var) {
  if (x.rows() != mean.rows() || x.cols() != mean.cols() || mean.rows() != var.rows() ||
      mean.cols() != var.cols())
    throw ShapeError("gaussian_logpdf_rows: mismatched shapes");
  if ((var.array() <= 0.0).any()) throw DomainError("gaussian_logpdf_rows: nonpositive variance");
  const auto sq = (x.array() - mean.array()).square();
  Mat per = (-0.5 * (kLog2Pi + var.array().log() + sq / var.array())).matrix();
  Mat out(x.rows(), 1);
  out.col(0) = per.rowwise().sum();
  return out;
}

// Same but with a single component (mean/var as length-D vectors) evaluated
// against every row of x; used by the GMM baseline and density oracles.
template <typename DX>
Vec gaussian_logpdf_rows_one(const Eigen::MatrixBase<DX>& x, const Vec& mean, const Vec& var) {
  if (x.cols() != mean.size() || mean.size() != var.size())
    throw ShapeError("gaussian_logpdf_rows_one: mismatched dims");
  if ((var.array() <= 0.0).any()) throw DomainError("gaussian_logpdf_rows_one: nonpositive variance");
  const double c = -0.5 * (kLog2Pi * static_cast<double>(mean.size()) + var.array().log().sum());
  Vec out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    const auto d = x.row(i).transpose().array() - mean.array();
    out(i) = c - 0.5 * (d.square() / var.array()).sum();
  }
  return out;
}

}  // namespace gmvae
