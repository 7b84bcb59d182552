#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "extmle/design.hpp"
#include "extmle/polyhedra.hpp"

namespace extmle {

enum class FitMethod { Ipf, Newton, Both };

struct FitOptions {
  FitMethod method = FitMethod::Both;
  double tol_moment = 1e-8;   // relative: scaled by 1 + max |A'n|
  int max_ipf_cycles = 10000;
  int max_newton_iter = 100;
};

// The extended MLE: supported exactly on the facial set of the observed
// support (entries off it are exact zeros, never tiny positives) and
// matching the observed margins on it. When the facial set is everything,
// this is the ordinary MLE.
struct ExtendedFit {
  Eigen::VectorXd m_hat;
  FacialSet face;
  std::vector<int> likelihood_zeros;
  FitMethod method = FitMethod::Both;
  int ipf_iterations = 0;
  int newton_iterations = 0;
  double moment_residual = 0;      // max |A'(m - n)|
  double method_discrepancy = 0;   // max |m_ipf - m_newton| when both ran
  double log_likelihood = 0;       // Poisson form
  bool converged = false;
  std::string diagnostic;
};

// Face-first extended maximum likelihood: compute the facial set, then
// optimize the face-restricted model. Poisson and multinomial-type schemes
// reach the same fit through genuinely different objectives.
ExtendedFit fit_extended_mle(const DesignMatrix& a, const ContingencyTable& n,
                             const SamplingScheme& scheme,
                             const FitOptions& opts = {});

struct IterativeFitResult {
  Eigen::VectorXd m;   // full-length mean vector, exact zeros off the face
  int iterations = 0;
  double residual = 0;
  bool converged = false;
};

// Cyclic proportional fitting of the generating-class margins on the given
// face. Cells off the face are masked out of every rescale; a zero target
// margin zeroes its whole fiber (0/0 := 0).
IterativeFitResult ipf(const DesignMatrix& a, const ContingencyTable& n,
                       const FacialSet& face, double tol, int max_cycles);

// Damped Newton-Raphson on the Poisson log-likelihood restricted to the
// face, parametrized by an orthonormal basis of the face-restricted design
// columns, where the Fisher information is nonsingular. An empty `theta0`
// selects the smoothed default start; the start never changes the optimum.
IterativeFitResult newton_fit(const DesignMatrix& a, const ContingencyTable& n,
                              const FacialSet& face, double tol, int max_iter,
                              const Eigen::VectorXd& theta0 = {});

// Same but maximizing the product-multinomial log-likelihood over the
// face-restricted sampling-reduced parametrization.
IterativeFitResult newton_fit_multinomial(const DesignMatrix& a,
                                          const ContingencyTable& n,
                                          const SamplingScheme& scheme,
                                          const FacialSet& face, double tol,
                                          int max_iter);

// Poisson log-likelihood (n, mu) - 1'exp(mu) - sum log n(i)!. Entries of
// `mu` may be -inf to encode extended points with exp(mu) = 0 there.
double poisson_loglik(const Eigen::VectorXd& mu, const ContingencyTable& n);

// Same value expressed in the mean parametrization.
double poisson_loglik_mean(const Eigen::VectorXd& m, const ContingencyTable& n);

// Product-multinomial log-likelihood of a point beta of the
// sampling-reduced subspace, including the -sum log n(i)! constant.
double product_multinomial_loglik(const Eigen::VectorXd& beta,
                                  const ContingencyTable& n,
                                  const SamplingScheme& scheme);

// Orthonormal basis of the design columns restricted to the face (zero
// rows elsewhere dropped); width equals the exact rank of the restriction.
Eigen::MatrixXd face_basis(const DesignMatrix& a, const FacialSet& face);

// max_j |(A'(m - n))_j|, the moment-equation residual of a candidate fit.
double moment_residual(const DesignMatrix& a, const ContingencyTable& n,
                       const Eigen::VectorXd& m);

// 1 + max |A'n|, the scale against which moment residuals are judged.
double moment_scale(const DesignMatrix& a, const ContingencyTable& n);

}  // namespace extmle
