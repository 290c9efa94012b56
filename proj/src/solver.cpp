#include "smsl/solver.hpp"

#include "smsl/prox.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace smsl {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void check_finite(const Matrix& m, int iteration, const std::string& name) {
  if (!m.allFinite())
    throw SolverError(iteration, name,
                      "non-finite values in " + name + " at iteration " + std::to_string(iteration));
}

void require_view(const Problem& p, int s) {
  if (s < 0 || s >= p.views()) throw ConfigError("view index out of range");
}

}  // namespace

void SolverConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !(lambda3 >= 0.0))
    throw ConfigError("lambda1, lambda2 and lambda3 must be nonnegative");
  if (!(mu0 > 0.0)) throw ConfigError("mu0 must be positive");
  if (!(mu_max >= mu0)) throw ConfigError("mu_max must be >= mu0");
  if (!(rho >= 1.0)) throw ConfigError("rho must be >= 1");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

double Residuals::max() const {
  return std::max({reconstruction, error_split, sum_to_one, consensus});
}

bool Residuals::below(double epsilon) const {
  return reconstruction < epsilon && error_split < epsilon && sum_to_one < epsilon &&
         consensus < epsilon;
}

SolverState SolverState::zeros(int views, int bands, int pixels, int n_h, double mu0) {
  SolverState st;
  st.c = Matrix::Zero(n_h, pixels);
  st.j = Matrix::Zero(n_h, pixels);
  st.y4 = Matrix::Zero(n_h, pixels);
  for (int s = 0; s < views; ++s) {
    st.d.push_back(Matrix::Zero(n_h, pixels));
    st.e.push_back(Matrix::Zero(bands, pixels));
    st.w.push_back(Matrix::Zero(bands, pixels));
    st.y1.push_back(Matrix::Zero(bands, pixels));
    st.y2.push_back(RowVector::Zero(pixels));
    st.y3.push_back(Matrix::Zero(bands, pixels));
  }
  st.mu = mu0;
  return st;
}

Problem::Problem(std::vector<Matrix> views, Matrix h) : x_(std::move(views)), h_(std::move(h)) {
  if (x_.empty()) throw ConfigError("no views");
  for (const auto& x : x_) {
    if (x.rows() != h_.rows() || x.cols() != x_.front().cols())
      throw ConfigError("view and dictionary shapes disagree");
    if (!x.allFinite()) throw DataError("view contains non-finite values");
  }
  if (h_.cols() < 1) throw ConfigError("empty dictionary");
  if (!h_.allFinite()) throw DataError("dictionary contains non-finite values");
  hth_ = h_.transpose() * h_;
  for (const auto& x : x_) htx_.push_back(h_.transpose() * x);
  c_factor_.compute(c_system());
  if (c_factor_.info() != Eigen::Success) throw DataError("C-system factorization failed");
}

Problem::Problem(const ViewSet& views, const SketchedDictionary& dict)
    : Problem(views.flattened(), dict.h) {}

Matrix Problem::c_system() const {
  const auto s = static_cast<double>(views());
  Matrix a = s * hth_;
  a.array() += s;
  a.diagonal().array() += 1.0;
  return a;
}

Matrix Problem::d_system(double lambda2, double mu) const {
  Matrix m = mu * hth_;
  m.array() += mu;
  m.diagonal().array() += lambda2;
  return m;
}

Eigen::LLT<Matrix> Problem::d_factor(double lambda2, double mu) const {
  if (lambda2 == 0.0 && atoms() > bands() + 1)
    throw ConfigError("lambda2 = 0 leaves the D-system singular when the sketch size exceeds bands + 1");
  Eigen::LLT<Matrix> llt(d_system(lambda2, mu));
  if (llt.info() != Eigen::Success)
    throw ConfigError("D-system is not positive definite; increase lambda2");
  return llt;
}

SolverState initial_state(const Problem& problem, const SolverConfig& cfg) {
  return SolverState::zeros(problem.views(), problem.bands(), problem.pixels(), problem.atoms(),
                            cfg.mu0);
}

Matrix c_rhs(const SolverState& st, const Problem& p) {
  const double inv_mu = 1.0 / st.mu;
  Matrix d_sum = Matrix::Zero(p.atoms(), p.pixels());
  Matrix e_term = Matrix::Zero(p.bands(), p.pixels());
  RowVector ones_term = RowVector::Zero(p.pixels());
  Matrix b = st.j - inv_mu * st.y4;
  for (int s = 0; s < p.views(); ++s) {
    const auto k = static_cast<std::size_t>(s);
    b += p.htx(s);
    d_sum += st.d[k];
    e_term += inv_mu * st.y1[k] - st.e[k];
    ones_term += st.d[k].colwise().sum() + inv_mu * st.y2[k];
    ones_term.array() -= 1.0;
  }
  b.noalias() -= p.hth() * d_sum;
  b.noalias() += p.h().transpose() * e_term;
  b.rowwise() -= ones_term;
  return b;
}

Matrix update_c(const SolverState& st, const Problem& p) {
  return p.c_factor().solve(c_rhs(st, p));
}

Matrix update_j(const SolverState& st, const SolverConfig& cfg) {
  return prox::svt(st.c + st.y4 / st.mu, cfg.lambda1 / st.mu);
}

Matrix d_rhs(const SolverState& st, const Problem& p, const SolverConfig& cfg, int s) {
  require_view(p, s);
  const auto k = static_cast<std::size_t>(s);
  const double mu = st.mu;
  Matrix rhs = mu * p.htx(s);
  rhs.noalias() -= mu * (p.hth() * st.c);
  rhs.noalias() += p.h().transpose() * (st.y1[k] - mu * st.e[k]);
  RowVector ones_term = mu * st.c.colwise().sum() + st.y2[k];
  ones_term.array() -= mu;
  rhs.rowwise() -= ones_term;
  if (cfg.lambda3 != 0.0) {
    for (int t = 0; t < p.views(); ++t)
      if (t != s) rhs -= cfg.lambda3 * st.d[static_cast<std::size_t>(t)].cwiseAbs();
  }
  return rhs;
}

Matrix update_d_unprojected(const SolverState& st, const Problem& p, const SolverConfig& cfg,
                            int s, const Eigen::LLT<Matrix>& factor) {
  return factor.solve(d_rhs(st, p, cfg, s));
}

Matrix update_d(const SolverState& st, const Problem& p, const SolverConfig& cfg, int s,
                const Eigen::LLT<Matrix>& factor) {
  return update_d_unprojected(st, p, cfg, s, factor).cwiseMax(0.0);
}

Matrix update_d(const SolverState& st, const Problem& p, const SolverConfig& cfg, int s) {
  return update_d(st, p, cfg, s, p.d_factor(cfg.lambda2, st.mu));
}

Matrix update_e(const SolverState& st, const Problem& p, int s) {
  require_view(p, s);
  const auto k = static_cast<std::size_t>(s);
  const double inv_mu = 1.0 / st.mu;
  Matrix e = p.x(s) + st.w[k] + inv_mu * (st.y1[k] - st.y3[k]);
  e.noalias() -= p.h() * (st.c + st.d[k]);
  return 0.5 * e;
}

Matrix update_w(const SolverState& st, int s) {
  if (!(st.mu > 0.0)) throw ConfigError("mu must be positive");
  const auto k = static_cast<std::size_t>(s);
  return prox::l21_shrink(st.e[k] + st.y3[k] / st.mu, 1.0 / st.mu);
}

void update_view_multipliers(SolverState& st, const Problem& p, int s) {
  require_view(p, s);
  const auto k = static_cast<std::size_t>(s);
  const Matrix coef = st.c + st.d[k];
  Matrix r1 = p.x(s) - st.e[k];
  r1.noalias() -= p.h() * coef;
  st.y1[k] += st.mu * r1;
  RowVector r2 = coef.colwise().sum();
  r2.array() -= 1.0;
  st.y2[k] += st.mu * r2;
  st.y3[k] += st.mu * (st.e[k] - st.w[k]);
}

void update_consensus_multiplier(SolverState& st, const SolverConfig& cfg) {
  st.y4 += st.mu * (st.c - st.j);
  st.mu = std::min(cfg.rho * st.mu, cfg.mu_max);
}

void update_multipliers(SolverState& st, const Problem& p, const SolverConfig& cfg) {
  for (int s = 0; s < p.views(); ++s) update_view_multipliers(st, p, s);
  update_consensus_multiplier(st, cfg);
}

Residuals residuals(const SolverState& st, const Problem& p) {
  Residuals r;
  r.consensus = max_abs(st.c - st.j);
  for (int s = 0; s < p.views(); ++s) {
    const auto k = static_cast<std::size_t>(s);
    const Matrix coef = st.c + st.d[k];
    Matrix rec = p.x(s) - st.e[k];
    rec.noalias() -= p.h() * coef;
    r.reconstruction = std::max(r.reconstruction, max_abs(rec));
    r.error_split = std::max(r.error_split, max_abs(st.e[k] - st.w[k]));
    RowVector sums = coef.colwise().sum();
    sums.array() -= 1.0;
    r.sum_to_one = std::max(r.sum_to_one, sums.cwiseAbs().maxCoeff());
  }
  return r;
}

SolveResult solve(const Problem& p, const SolverConfig& cfg, const IterationObserver& observer) {
  cfg.validate();
  SolveResult result;
  SolverState& st = result.state;
  st = initial_state(p, cfg);

  Eigen::LLT<Matrix> d_factor = p.d_factor(cfg.lambda2, st.mu);
  double factored_mu = st.mu;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    st.iter = it;
    const double mu_used = st.mu;
    if (st.mu != factored_mu) {
      d_factor = p.d_factor(cfg.lambda2, st.mu);
      factored_mu = st.mu;
    }

    st.c = update_c(st, p);
    check_finite(st.c, it, "C");
    st.j = update_j(st, cfg);
    check_finite(st.j, it, "J");

    for (int s = 0; s < p.views(); ++s) {
      const auto k = static_cast<std::size_t>(s);
      const std::string tag = std::to_string(s + 1);
      st.d[k] = update_d(st, p, cfg, s, d_factor);
      check_finite(st.d[k], it, "D" + tag);
      st.e[k] = update_e(st, p, s);
      check_finite(st.e[k], it, "E" + tag);
      st.w[k] = update_w(st, s);
      check_finite(st.w[k], it, "W" + tag);
      update_view_multipliers(st, p, s);
      check_finite(st.y1[k], it, "Y1_" + tag);
      check_finite(st.y3[k], it, "Y3_" + tag);
      if (!st.y2[k].allFinite()) throw SolverError(it, "Y2_" + tag, "non-finite values in Y2_" + tag);
    }
    update_consensus_multiplier(st, cfg);
    check_finite(st.y4, it, "Y4");

    IterationRecord rec{it, residuals(st, p), mu_used};
    st.history.push_back(rec);
    if (observer) observer(rec);
    result.iterations_run = it;
    if (rec.residuals.below(cfg.epsilon)) {
      result.converged = true;
      break;
    }
  }
  return result;
}

SolveResult solve(const ViewSet& views, const SketchedDictionary& dict, const SolverConfig& cfg) {
  return solve(Problem(views, dict), cfg);
}

void write_residual_csv(std::ostream& out, const std::vector<IterationRecord>& history) {
  out << "iteration,r1,r2,r3,r4,mu\n";
  const auto old_precision = out.precision(17);
  for (const auto& rec : history) {
    out << rec.iteration << ',' << rec.residuals.reconstruction << ','
        << rec.residuals.error_split << ',' << rec.residuals.sum_to_one << ','
        << rec.residuals.consensus << ',' << rec.mu << '\n';
  }
  out.precision(old_precision);
}

}  // namespace smsl
