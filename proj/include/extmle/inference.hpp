#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "extmle/design.hpp"
#include "extmle/fitting.hpp"
#include "extmle/polyhedra.hpp"

namespace extmle {

// Degrees of freedom adjusted for a nonexistent MLE: the number of
// estimable cell means |F| minus the number of estimable parameters
// rank(A_F) - m. With a full facial set this is the classical value.
int adjusted_df(const FacialSet& face, const DesignMatrix& a,
                const SamplingMatrix& v);

struct EstimabilityReport {
  int face_size = 0;
  int d_f = 0;                // rank of the face-restricted design
  int sampling_constraints = 0;
  Eigen::MatrixXd basis;      // I x (d_f - m), zero off the face
  int nonestimable_dimension = 0;  // rank(A) - rank(A_F)
};

// Orthonormal basis of the face-restricted model subspace with the
// sampling directions removed: the directions along which the data remain
// informative when the MLE does not exist.
EstimabilityReport estimable_directions(const DesignMatrix& a,
                                        const SamplingMatrix& v,
                                        const FacialSet& face);

struct GofReport {
  double g2 = 0;
  double x2 = 0;
  int df = 0;
  std::optional<double> p_g2;
  std::optional<double> p_x2;
  std::vector<std::string> warnings;
};

// Likelihood-ratio and Pearson statistics over the facial set, with the
// 0 log(0/0) = 0 convention, and upper-tail chi-square p-values on the
// adjusted degrees of freedom. df = 0 suppresses the p-values: the
// face-restricted model is saturated and the approximation does not apply.
GofReport goodness_of_fit(const ContingencyTable& n, const ExtendedFit& fit,
                          int df);

// Upper tail of the chi-square distribution via the regularized
// incomplete gamma function.
double chi_square_upper_tail(double x, int df);

// Largest normalized binomial residual |m^{u+} - m^{u-}| over an exact
// integer basis of the design kernel; the extended MLE lies on the toric
// variety and drives every residual to zero.
double toric_residuals(const Eigen::VectorXd& m_hat, const DesignMatrix& a);

// Basis of the nonestimable parameter directions: certificate-style
// vectors annihilating the face-restricted design but not the full one.
// Reported only under verbose output; the compact report carries just the
// dimension and the facial certificate.
std::vector<std::vector<Rat>> nonestimable_basis(const DesignMatrix& a,
                                                 const FacialSet& face);

struct VerificationRecord {
  bool verified = false;
  double moment_residual = 0;
  bool support_exact = false;
  double toric_residual = 0;
  bool block_totals_ok = true;
  std::vector<std::string> failures;
};

// Stamps a converged fit against the optimality characterization: moment
// equations, exact support on the facial set, membership in the toric
// variety and the sampling block totals.
VerificationRecord verify_fit(const ExtendedFit& fit, const DesignMatrix& a,
                              const SamplingMatrix& v,
                              const ContingencyTable& n,
                              double tol_moment = 1e-8,
                              double tol_toric = 1e-8);

}  // namespace extmle
