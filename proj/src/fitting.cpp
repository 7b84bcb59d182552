#include "extmle/fitting.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace extmle {

double moment_scale(const DesignMatrix& a, const ContingencyTable& n) {
  double mx = 0;
  for (std::int64_t t : sufficient_statistics(a, n))
    mx = std::max(mx, static_cast<double>(t));
  return 1.0 + mx;
}

double moment_residual(const DesignMatrix& a, const ContingencyTable& n,
                       const Eigen::VectorXd& m) {
  double worst = 0;
  std::vector<std::int64_t> t = sufficient_statistics(a, n);
  for (int j = 0; j < a.column_count(); ++j) {
    double s = 0;
    for (int i = 0; i < a.cell_count(); ++i)
      if (a.matrix()(i, j)) s += m(i);
    worst = std::max(worst, std::abs(s - static_cast<double>(t[j])));
  }
  return worst;
}

namespace {

std::vector<char> face_mask(const FacialSet& face, int cells) {
  std::vector<char> mask(cells, 0);
  for (int i : face.cells) mask[i] = 1;
  return mask;
}

}  // namespace

IterativeFitResult ipf(const DesignMatrix& a, const ContingencyTable& n,
                       const FacialSet& face, double tol, int max_cycles) {
  const int cells = a.cell_count();
  const auto mask = face_mask(face, cells);
  std::vector<std::int64_t> target = sufficient_statistics(a, n);
  const double scale = moment_scale(a, n);

  IterativeFitResult out;
  out.m.setZero(cells);
  const double total = static_cast<double>(n.total());
  for (int i : face.cells) out.m(i) = total / face.cells.size();

  const int terms = static_cast<int>(a.model().terms().size());
  for (int cycle = 1; cycle <= max_cycles; ++cycle) {
    for (int t = 0; t < terms; ++t) {
      // Current margins of this term, then rescale each fiber.
      std::vector<double> cur(a.column_count(), 0.0);
      for (int i : face.cells) cur[a.column_of(t, i)] += out.m(i);
      for (int i : face.cells) {
        int j = a.column_of(t, i);
        if (target[j] == 0)
          out.m(i) = 0.0;  // zero margin zeroes the fiber
        else if (cur[j] > 0)
          out.m(i) *= static_cast<double>(target[j]) / cur[j];
      }
    }
    out.residual = moment_residual(a, n, out.m);
    out.iterations = cycle;
    if (out.residual <= tol * scale) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

Eigen::MatrixXd face_basis(const DesignMatrix& a, const FacialSet& face) {
  const int nf = static_cast<int>(face.cells.size());
  RatMatrix restricted(nf, a.column_count());
  for (int r = 0; r < nf; ++r)
    for (int j = 0; j < a.column_count(); ++j)
      if (a.matrix()(face.cells[r], j)) restricted(r, j) = 1;
  auto basis = orthogonal_complement_basis(restricted, 0);
  Eigen::MatrixXd b(nf, static_cast<int>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    double norm2 = 0;
    for (int i = 0; i < nf; ++i) {
      b(i, static_cast<int>(k)) = static_cast<double>(basis[k][i]);
      norm2 += b(i, static_cast<int>(k)) * b(i, static_cast<int>(k));
    }
    b.col(static_cast<int>(k)) /= std::sqrt(norm2);
  }
  return b;
}

namespace {

Eigen::VectorXd face_counts(const ContingencyTable& n, const FacialSet& face) {
  Eigen::VectorXd nf(face.cells.size());
  for (std::size_t r = 0; r < face.cells.size(); ++r)
    nf(static_cast<int>(r)) = static_cast<double>(n.count(face.cells[r]));
  return nf;
}

Eigen::VectorXd embed(const Eigen::VectorXd& on_face, const FacialSet& face,
                      int cells) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(cells);
  for (std::size_t r = 0; r < face.cells.size(); ++r)
    full(face.cells[r]) = on_face(static_cast<int>(r));
  return full;
}

double poisson_objective(const Eigen::VectorXd& nf, const Eigen::VectorXd& mu) {
  double v = 0;
  for (int i = 0; i < nf.size(); ++i) v += nf(i) * mu(i) - std::exp(mu(i));
  return v;
}

}  // namespace

IterativeFitResult newton_fit(const DesignMatrix& a, const ContingencyTable& n,
                              const FacialSet& face, double tol, int max_iter,
                              const Eigen::VectorXd& theta0) {
  const Eigen::MatrixXd b = face_basis(a, face);
  const Eigen::VectorXd nf = face_counts(n, face);
  const double scale = moment_scale(a, n);

  Eigen::VectorXd theta =
      theta0.size() == b.cols()
          ? theta0
          : Eigen::VectorXd(b.transpose() * (nf.array() + 0.5).log().matrix());
  IterativeFitResult out;
  for (int iter = 0; iter <= max_iter; ++iter) {
    Eigen::VectorXd mu = b * theta;
    Eigen::VectorXd m = mu.array().exp();
    out.m = embed(m, face, a.cell_count());
    out.residual = moment_residual(a, n, out.m);
    out.iterations = iter;
    if (out.residual <= tol * scale) {
      out.converged = true;
      return out;
    }
    if (iter == max_iter) break;

    Eigen::MatrixXd info = b.transpose() * m.asDiagonal() * b;
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error(
          "singular Fisher information on the face; facial-set computation "
          "is inconsistent");
    Eigen::VectorXd step = llt.solve(b.transpose() * (nf - m));

    // Step halving keeps the likelihood nondecreasing.
    double current = poisson_objective(nf, mu);
    double lambda = 1.0;
    while (lambda > 1e-12) {
      double trial = poisson_objective(nf, b * (theta + lambda * step));
      if (std::isfinite(trial) && trial >= current) break;
      lambda *= 0.5;
    }
    theta += lambda * step;
  }
  return out;
}

IterativeFitResult newton_fit_multinomial(const DesignMatrix& a,
                                          const ContingencyTable& n,
                                          const SamplingScheme& scheme,
                                          const FacialSet& face, double tol,
                                          int max_iter) {
  const int cells = a.cell_count();
  const int nf_count = static_cast<int>(face.cells.size());
  SamplingMatrix v = build_sampling_matrix(scheme, a.grid(), n);
  if (v.m() == 0)
    throw std::invalid_argument("multinomial fitting needs sampling blocks");

  // Basis of the face-restricted model subspace with the sampling
  // directions removed; the multinomial likelihood is strictly concave on
  // this parametrization.
  RatMatrix stacked(nf_count, v.m() + a.column_count());
  for (int j = 0; j < v.m(); ++j)
    for (int r = 0; r < nf_count; ++r)
      stacked(r, j) = v.column(j)[face.cells[r]];
  for (int j = 0; j < a.column_count(); ++j)
    for (int r = 0; r < nf_count; ++r)
      if (a.matrix()(face.cells[r], j)) stacked(r, v.m() + j) = 1;
  auto raw = orthogonal_complement_basis(stacked, v.m());
  Eigen::MatrixXd b(nf_count, static_cast<int>(raw.size()));
  for (std::size_t k = 0; k < raw.size(); ++k) {
    double norm2 = 0;
    for (int r = 0; r < nf_count; ++r) {
      b(r, static_cast<int>(k)) = static_cast<double>(raw[k][r]);
      norm2 += b(r, static_cast<int>(k)) * b(r, static_cast<int>(k));
    }
    b.col(static_cast<int>(k)) /= std::sqrt(norm2);
  }

  // Face-local block structure.
  std::vector<int> block_of(nf_count, -1);
  for (std::size_t j = 0; j < scheme.blocks.size(); ++j)
    for (int i : scheme.blocks[j])
      if (face.contains(i)) {
        auto it = std::lower_bound(face.cells.begin(), face.cells.end(), i);
        block_of[it - face.cells.begin()] = static_cast<int>(j);
      }
  const int nblocks = static_cast<int>(scheme.blocks.size());

  const Eigen::VectorXd nf = face_counts(n, face);
  const double scale = moment_scale(a, n);

  auto means = [&](const Eigen::VectorXd& beta) {
    Eigen::VectorXd m(nf_count);
    std::vector<double> mass(nblocks, 0.0);
    for (int r = 0; r < nf_count; ++r) {
      m(r) = std::exp(beta(r));
      if (block_of[r] >= 0) mass[block_of[r]] += m(r);
    }
    for (int r = 0; r < nf_count; ++r)
      if (block_of[r] >= 0)
        m(r) *= static_cast<double>(scheme.totals[block_of[r]]) /
                mass[block_of[r]];
    return m;
  };
  auto objective = [&](const Eigen::VectorXd& beta) {
    double val = nf.dot(beta);
    std::vector<double> mass(nblocks, 0.0);
    for (int r = 0; r < nf_count; ++r)
      if (block_of[r] >= 0) mass[block_of[r]] += std::exp(beta(r));
    for (int j = 0; j < nblocks; ++j)
      val -= static_cast<double>(scheme.totals[j]) * std::log(mass[j]);
    return val;
  };

  Eigen::VectorXd theta =
      b.transpose() * (nf.array() + 0.5).log().matrix();
  IterativeFitResult out;
  for (int iter = 0; iter <= max_iter; ++iter) {
    Eigen::VectorXd beta = b * theta;
    Eigen::VectorXd m = means(beta);
    out.m = embed(m, face, cells);
    out.residual = moment_residual(a, n, out.m);
    out.iterations = iter;
    if (out.residual <= tol * scale) {
      out.converged = true;
      return out;
    }
    if (iter == max_iter) break;

    // info = B' W B with W = diag(m) - sum_j m_j m_j' / N_j.
    Eigen::MatrixXd info = b.transpose() * m.asDiagonal() * b;
    for (int j = 0; j < nblocks; ++j) {
      Eigen::VectorXd mj = Eigen::VectorXd::Zero(nf_count);
      for (int r = 0; r < nf_count; ++r)
        if (block_of[r] == j) mj(r) = m(r);
      Eigen::VectorXd w = b.transpose() * mj;
      info -= w * w.transpose() / static_cast<double>(scheme.totals[j]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error(
          "singular multinomial information on the face; facial-set "
          "computation is inconsistent");
    Eigen::VectorXd step = llt.solve(b.transpose() * (nf - m));

    double current = objective(beta);
    double lambda = 1.0;
    while (lambda > 1e-12) {
      double trial = objective(b * (theta + lambda * step));
      if (std::isfinite(trial) && trial >= current) break;
      lambda *= 0.5;
    }
    theta += lambda * step;
  }
  return out;
}

double poisson_loglik(const Eigen::VectorXd& mu, const ContingencyTable& n) {
  double v = 0;
  for (int i = 0; i < mu.size(); ++i) {
    double ni = static_cast<double>(n.count(i));
    if (ni > 0) v += ni * mu(i);
    v -= std::exp(mu(i));  // exp(-inf) = 0 for extended points
    v -= std::lgamma(ni + 1.0);
  }
  return v;
}

double poisson_loglik_mean(const Eigen::VectorXd& m,
                           const ContingencyTable& n) {
  double v = 0;
  for (int i = 0; i < m.size(); ++i) {
    double ni = static_cast<double>(n.count(i));
    if (ni > 0) v += ni * std::log(m(i));
    v -= m(i);
    v -= std::lgamma(ni + 1.0);
  }
  return v;
}

double product_multinomial_loglik(const Eigen::VectorXd& beta,
                                  const ContingencyTable& n,
                                  const SamplingScheme& scheme) {
  double v = 0;
  for (int i = 0; i < beta.size(); ++i) {
    double ni = static_cast<double>(n.count(i));
    if (ni > 0) v += ni * beta(i);
    v -= std::lgamma(ni + 1.0);
  }
  for (std::size_t j = 0; j < scheme.blocks.size(); ++j) {
    double mass = 0;
    for (int i : scheme.blocks[j]) mass += std::exp(beta(i));
    v -= static_cast<double>(scheme.totals[j]) * std::log(mass);
  }
  return v;
}

ExtendedFit fit_extended_mle(const DesignMatrix& a, const ContingencyTable& n,
                             const SamplingScheme& scheme,
                             const FitOptions& opts) {
  if (n.grid().cell_count() != a.cell_count())
    throw std::invalid_argument("table does not match design matrix");
  SamplingMatrix v = build_sampling_matrix(scheme, a.grid(), n);
  if (v.m() > 0) require_scheme_in_model(a, v);

  std::vector<int> support = n.support();
  if (support.empty()) throw std::invalid_argument("table has empty support");

  ExtendedFit fit;
  fit.method = opts.method;
  fit.face = facial_set(a, support);
  fit.likelihood_zeros = fit.face.complement(a.cell_count());

  const bool want_ipf =
      opts.method == FitMethod::Ipf || opts.method == FitMethod::Both;
  const bool want_newton =
      opts.method == FitMethod::Newton || opts.method == FitMethod::Both;
  const bool multinomial_objective =
      scheme.variant == SamplingScheme::Variant::Multinomial ||
      scheme.variant == SamplingScheme::Variant::ProductMultinomial;

  IterativeFitResult ipf_result, newton_result;
  bool ok = true;
  if (want_ipf) {
    ipf_result = ipf(a, n, fit.face, opts.tol_moment, opts.max_ipf_cycles);
    fit.ipf_iterations = ipf_result.iterations;
    if (!ipf_result.converged) {
      ok = false;
      fit.diagnostic = "IPF did not converge; final margin residual " +
                       std::to_string(ipf_result.residual);
    }
  }
  if (want_newton) {
    newton_result =
        multinomial_objective
            ? newton_fit_multinomial(a, n, scheme, fit.face, opts.tol_moment,
                                     opts.max_newton_iter)
            : newton_fit(a, n, fit.face, opts.tol_moment, opts.max_newton_iter);
    fit.newton_iterations = newton_result.iterations;
    if (!newton_result.converged) {
      ok = false;
      fit.diagnostic += std::string(fit.diagnostic.empty() ? "" : "; ") +
                        "Newton did not converge; final moment residual " +
                        std::to_string(newton_result.residual);
    }
  }
  if (want_ipf && want_newton && ipf_result.converged &&
      newton_result.converged) {
    fit.method_discrepancy =
        (ipf_result.m - newton_result.m).cwiseAbs().maxCoeff();
    if (fit.method_discrepancy > 1e-6) {
      ok = false;
      fit.diagnostic += std::string(fit.diagnostic.empty() ? "" : "; ") +
                        "IPF and Newton disagree by " +
                        std::to_string(fit.method_discrepancy);
    }
  }

  fit.m_hat = want_newton && newton_result.converged ? newton_result.m
                                                     : ipf_result.m;
  if (fit.m_hat.size() == 0) fit.m_hat = Eigen::VectorXd::Zero(a.cell_count());
  fit.moment_residual = moment_residual(a, n, fit.m_hat);
  fit.converged = ok;

  // Poisson-form log-likelihood at the extended optimum.
  Eigen::VectorXd mu(a.cell_count());
  for (int i = 0; i < a.cell_count(); ++i)
    mu(i) = fit.m_hat(i) > 0 ? std::log(fit.m_hat(i))
                             : -std::numeric_limits<double>::infinity();
  fit.log_likelihood = poisson_loglik(mu, n);
  return fit;
}

}  // namespace extmle
