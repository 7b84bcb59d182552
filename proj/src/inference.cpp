#include "extmle/inference.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace extmle {

int adjusted_df(const FacialSet& face, const DesignMatrix& a,
                const SamplingMatrix& v) {
  int rank_af = rank(a.rational().select_rows(face.cells));
  return static_cast<int>(face.cells.size()) - (rank_af - v.m());
}

EstimabilityReport estimable_directions(const DesignMatrix& a,
                                        const SamplingMatrix& v,
                                        const FacialSet& face) {
  const int nf = static_cast<int>(face.cells.size());
  RatMatrix stacked(nf, v.m() + a.column_count());
  for (int j = 0; j < v.m(); ++j)
    for (int r = 0; r < nf; ++r) stacked(r, j) = v.column(j)[face.cells[r]];
  for (int j = 0; j < a.column_count(); ++j)
    for (int r = 0; r < nf; ++r)
      if (a.matrix()(face.cells[r], j)) stacked(r, v.m() + j) = 1;
  auto raw = orthogonal_complement_basis(stacked, v.m());

  EstimabilityReport rep;
  rep.face_size = nf;
  rep.d_f = rank(a.rational().select_rows(face.cells));
  rep.sampling_constraints = v.m();
  rep.nonestimable_dimension = a.rank() - rep.d_f;
  rep.basis.setZero(a.cell_count(), static_cast<int>(raw.size()));
  for (std::size_t k = 0; k < raw.size(); ++k) {
    double norm2 = 0;
    for (int r = 0; r < nf; ++r) {
      double x = static_cast<double>(raw[k][r]);
      rep.basis(face.cells[r], static_cast<int>(k)) = x;
      norm2 += x * x;
    }
    rep.basis.col(static_cast<int>(k)) /= std::sqrt(norm2);
  }
  if (rep.basis.cols() != rep.d_f - v.m())
    throw std::logic_error("estimable basis has unexpected width");
  return rep;
}

double chi_square_upper_tail(double x, int df) {
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

GofReport goodness_of_fit(const ContingencyTable& n, const ExtendedFit& fit,
                          int df) {
  if (df < 0) throw std::invalid_argument("negative degrees of freedom");
  GofReport rep;
  rep.df = df;
  for (int i : fit.face.cells) {
    double ni = static_cast<double>(n.count(i));
    double mi = fit.m_hat(i);
    if (ni > 0) rep.g2 += 2.0 * ni * std::log(ni / mi);
    rep.x2 += (ni - mi) * (ni - mi) / mi;
  }
  // Exactly-fitted tables produce tiny negative G2 by rounding; clamp.
  if (std::abs(rep.g2) < 1e-12) rep.g2 = std::max(rep.g2, 0.0);
  if (df == 0) {
    rep.warnings.push_back(
        "saturated on facial set, chi-square not applicable");
  } else {
    rep.p_g2 = chi_square_upper_tail(rep.g2, df);
    rep.p_x2 = chi_square_upper_tail(rep.x2, df);
  }
  return rep;
}

double toric_residuals(const Eigen::VectorXd& m_hat, const DesignMatrix& a) {
  // Integer lattice basis of kernel(A') in cell space.
  auto basis = integer_kernel_basis(a.rational().transposed());
  if (basis.size() > 500) {
    // Oversized kernels are subsampled deterministically.
    std::mt19937 rng(12345);
    std::shuffle(basis.begin(), basis.end(), rng);
    basis.resize(500);
  }
  double worst = 0;
  for (const auto& u : basis) {
    // log of each monomial, or "zero" when a positive power hits a 0 cell
    bool plus_zero = false, minus_zero = false;
    double log_plus = 0, log_minus = 0;
    for (int i = 0; i < static_cast<int>(u.size()); ++i) {
      if (u[i] == 0) continue;  // 0^0 = 1
      double e = static_cast<double>(u[i]);
      if (m_hat(i) <= 0) {
        (e > 0 ? plus_zero : minus_zero) = true;
        continue;
      }
      double term = e * std::log(m_hat(i));
      if (e > 0)
        log_plus += term;
      else
        log_minus -= term;
    }
    double r;
    if (plus_zero && minus_zero)
      r = 0;  // both monomials vanish
    else if (plus_zero || minus_zero)
      r = 1;  // one side vanished, the other is positive
    else
      r = 1.0 - std::exp(-std::abs(log_plus - log_minus));
    worst = std::max(worst, r);
  }
  return worst;
}

std::vector<std::vector<Rat>> nonestimable_basis(const DesignMatrix& a,
                                                 const FacialSet& face) {
  auto k_full = kernel_basis(a.rational());            // design redundancy
  auto k_face = kernel_basis(a.rational().select_rows(face.cells));
  RatMatrix stacked(a.column_count(),
                    static_cast<int>(k_full.size() + k_face.size()));
  for (std::size_t j = 0; j < k_full.size(); ++j)
    for (int i = 0; i < a.column_count(); ++i)
      stacked(i, static_cast<int>(j)) = k_full[j][i];
  for (std::size_t j = 0; j < k_face.size(); ++j)
    for (int i = 0; i < a.column_count(); ++i)
      stacked(i, static_cast<int>(k_full.size() + j)) = k_face[j][i];
  return orthogonal_complement_basis(stacked, static_cast<int>(k_full.size()));
}

VerificationRecord verify_fit(const ExtendedFit& fit, const DesignMatrix& a,
                              const SamplingMatrix& v,
                              const ContingencyTable& n, double tol_moment,
                              double tol_toric) {
  VerificationRecord rec;
  if (!fit.converged)
    rec.failures.push_back("fit did not converge: " + fit.diagnostic);

  rec.moment_residual = moment_residual(a, n, fit.m_hat);
  if (rec.moment_residual > tol_moment * moment_scale(a, n))
    rec.failures.push_back("moment equations violated, residual " +
                           std::to_string(rec.moment_residual));

  rec.support_exact = true;
  for (int i = 0; i < a.cell_count(); ++i) {
    bool in_face = fit.face.contains(i);
    if (in_face && !(fit.m_hat(i) > 0)) rec.support_exact = false;
    if (!in_face && fit.m_hat(i) != 0.0) rec.support_exact = false;
  }
  if (!rec.support_exact)
    rec.failures.push_back("support of the fit differs from the facial set");

  rec.toric_residual = toric_residuals(fit.m_hat, a);
  if (rec.toric_residual > tol_toric)
    rec.failures.push_back("toric residual " +
                           std::to_string(rec.toric_residual));

  for (int j = 0; j < v.m(); ++j) {
    double total = 0;
    for (int i : v.scheme().blocks[j]) total += fit.m_hat(i);
    double expected = static_cast<double>(v.scheme().totals[j]);
    if (std::abs(total - expected) > tol_moment * (1.0 + expected)) {
      rec.block_totals_ok = false;
      rec.failures.push_back("sampling block " + std::to_string(j) +
                             " total off by " +
                             std::to_string(total - expected));
    }
  }
  rec.verified = rec.failures.empty();
  return rec;
}

}  // namespace extmle
