// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "whatif/error.hpp"

namespace whatif {

struct OlsResult {
  Eigen::MatrixXd coefficients;  // columns x responses
  Eigen::MatrixXd residuals;     // rows x responses
};

/// Least squares through column-pivoted Householder QR. Rank deficiency
/// (relative pivot below 1e-10) is an error rather than a minimum-norm fit.
inline OlsResult ols(const Eigen::MatrixXd& design, const Eigen::MatrixXd& response) {
  if (design.rows() != response.rows()) throw Error(Errc::ShapeError, "design/response row mismatch");
  if (design.rows() < design.cols())
    throw Error(Errc::InsufficientData, "fewer rows than regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) throw Error(Errc::SingularDesign, "design matrix is rank deficient");
  OlsResult out;
  out.coefficients = qr.solve(response);
  out.residuals = response - design * out.coefficients;
  if (!out.coefficients.allFinite()) throw Error(Errc::SingularDesign, "non-finite least-squares solution");
  return out;
}

}  // namespace whatif
