#include "csmac/cscodec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "csmac/rng.hpp"

namespace csmac {

namespace {

std::vector<int> sample_indices(int n, int m, std::mt19937_64& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> d(i, n - 1);
    std::swap(idx[i], idx[d(rng)]);
  }
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Eigen::MatrixXd selection_matrix(const std::vector<int>& idx, int n) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(idx.size(), n);
  for (std::size_t r = 0; r < idx.size(); ++r) s(r, idx[r]) = 1.0;
  return s;
}

// Measurement operator in factored form plus optional separable Gram factors.
struct CsOperator {
  Eigen::MatrixXd u, v;  // separable path: Y = U A V^T
  Eigen::MatrixXd psi_s, psi_t;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
  bool separable = true;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& a) const {
    if (separable) return u * a * v.transpose();
    Eigen::MatrixXd z = psi_s * a * psi_t.transpose();
    return mask.select(z, Eigen::MatrixXd::Zero(z.rows(), z.cols()));
  }
  Eigen::MatrixXd adjoint(const Eigen::MatrixXd& y) const {
    if (separable) return u.transpose() * y * v;
    Eigen::MatrixXd masked = mask.select(y, Eigen::MatrixXd::Zero(y.rows(), y.cols()));
    return psi_s.transpose() * masked * psi_t;
  }
  int coeff_rows() const { return separable ? u.cols() : psi_s.cols(); }
  int coeff_cols() const { return separable ? v.cols() : psi_t.cols(); }
  long long measurements() const {
    if (separable) return static_cast<long long>(u.rows()) * v.rows();
    return mask.count();
  }
  // spectral norm bound via power iteration on the small Grams
  double op_norm_sq() const {
    if (!separable) return 1.0;  // orthonormal synthesis then a mask
    auto sq_norm = [](const Eigen::MatrixXd& m) {
      Eigen::MatrixXd g = m.transpose() * m;
      Eigen::VectorXd x = Eigen::VectorXd::Ones(g.rows()).normalized();
      double lam = 0;
      for (int i = 0; i < 60; ++i) {
        x = (g * x).eval();
        lam = x.norm();
        x /= lam;
      }
      return lam;
    };
    return sq_norm(u) * sq_norm(v);
  }
};

// Incremental Cholesky least squares on a growing atom support, using the
// separable Gram G[(i,j),(k,l)] = (U^T U)(i,k) * (V^T V)(j,l).
class SupportSolver {
 public:
  SupportSolver(const CsOperator& op) : op_(op) {
    if (op.separable) {
      gu_ = op.u.transpose() * op.u;
      gv_ = op.v.transpose() * op.v;
    }
  }

  const std::vector<std::pair<int, int>>& support() const { return support_; }

  void add_atoms(const std::vector<std::pair<int, int>>& atoms, const Eigen::MatrixXd& corr_y) {
    const int k0 = static_cast<int>(support_.size());
    const int add = static_cast<int>(atoms.size());
    Eigen::MatrixXd cross(k0, add);
    Eigen::MatrixXd block(add, add);
    for (int j = 0; j < add; ++j) {
      for (int i = 0; i < k0; ++i) cross(i, j) = gram(support_[i], atoms[j]);
      for (int i = 0; i <= j; ++i) {
        block(i, j) = gram(atoms[i], atoms[j]);
        block(j, i) = block(i, j);
      }
    }
    Eigen::MatrixXd x(k0, add);
    if (k0 > 0)
      x = chol_.topLeftCorner(k0, k0)
              .triangularView<Eigen::Lower>()
              .solve(cross);
    Eigen::MatrixXd schur = block;
    if (k0 > 0) schur -= x.transpose() * x;
    schur.diagonal().array() += 1e-12;
    Eigen::LLT<Eigen::MatrixXd> llt(schur);
    if (llt.info() != Eigen::Success) throw std::runtime_error("reconstruct: singular support");

    chol_.conservativeResizeLike(Eigen::MatrixXd::Zero(k0 + add, k0 + add));
    if (k0 > 0) chol_.block(k0, 0, add, k0) = x.transpose();
    chol_.block(k0, k0, add, add) = llt.matrixL();
    for (const auto& a : atoms) support_.push_back(a);
    rhs_.conservativeResize(k0 + add);
    for (int j = 0; j < add; ++j) rhs_(k0 + j) = corr_y(atoms[j].first, atoms[j].second);
  }

  Eigen::VectorXd solve() const {
    const int k = static_cast<int>(support_.size());
    Eigen::VectorXd y = chol_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solve(rhs_);
    return chol_.topLeftCorner(k, k).transpose().triangularView<Eigen::Upper>().solve(y);
  }

 private:
  double gram(const std::pair<int, int>& a, const std::pair<int, int>& b) const {
    return gu_(a.first, b.first) * gv_(a.second, b.second);
  }

  const CsOperator& op_;
  Eigen::MatrixXd gu_, gv_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd rhs_;
  std::vector<std::pair<int, int>> support_;
};

Eigen::MatrixXd scatter(const std::vector<std::pair<int, int>>& support, const Eigen::VectorXd& w,
                        int rows, int cols) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  for (std::size_t i = 0; i < support.size(); ++i) a(support[i].first, support[i].second) = w(i);
  return a;
}

// Conjugate-gradient least squares restricted to a fixed support; the
// scattered-mask operator has no usable separable Gram.
Eigen::VectorXd cg_on_support(const CsOperator& op, const std::vector<std::pair<int, int>>& sup,
                              const Eigen::MatrixXd& y, const Eigen::VectorXd& w0, int iters) {
  const int k = static_cast<int>(sup.size());
  auto apply = [&](const Eigen::VectorXd& w) {
    Eigen::MatrixXd yw = op.forward(scatter(sup, w, op.coeff_rows(), op.coeff_cols()));
    Eigen::MatrixXd back = op.adjoint(yw);
    Eigen::VectorXd out(k);
    for (int i = 0; i < k; ++i) out(i) = back(sup[i].first, sup[i].second);
    return out;
  };
  Eigen::MatrixXd aty = op.adjoint(y);
  Eigen::VectorXd b(k);
  for (int i = 0; i < k; ++i) b(i) = aty(sup[i].first, sup[i].second);

  Eigen::VectorXd w = w0;
  Eigen::VectorXd r = b - apply(w);
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  for (int it = 0; it < iters && rs > 1e-24; ++it) {
    Eigen::VectorXd ap = apply(p);
    double denom = p.dot(ap);
    if (denom <= 0) break;
    double alpha = rs / denom;
    w += alpha * p;
    r -= alpha * ap;
    double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return w;
}

ReconstructionResult greedy_pursuit(const CsOperator& op, const Eigen::MatrixXd& y,
                                    const ReconstructionConfig& cfg) {
  ReconstructionResult res;
  const int rows = op.coeff_rows(), cols = op.coeff_cols();
  const long long m = op.measurements();
  SupportSolver solver(op);
  std::vector<std::pair<int, int>> support;
  Eigen::VectorXd weights;
  Eigen::MatrixXd residual = y;
  Eigen::MatrixXd corr_y = op.adjoint(y);
  double rnorm = residual.norm();

  std::vector<bool> in_support(static_cast<std::size_t>(rows) * cols, false);
  int it = 0;
  for (; it < cfg.max_iterations && rnorm > cfg.epsilon; ++it) {
    if (static_cast<long long>(support.size()) >= m) break;
    Eigen::MatrixXd corr = op.adjoint(residual);
    const int batch = std::max(1, cfg.atoms_per_iteration);
    std::vector<std::pair<int, int>> picked;
    for (int b = 0; b < batch && static_cast<long long>(support.size() + picked.size()) < m; ++b) {
      double best = 0;
      int bi = -1, bj = -1;
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
          double v = std::abs(corr(i, j));
          if (v > best && !in_support[static_cast<std::size_t>(i) * cols + j]) {
            best = v;
            bi = i;
            bj = j;
          }
        }
      if (bi < 0 || best <= 1e-300) break;
      picked.emplace_back(bi, bj);
      in_support[static_cast<std::size_t>(bi) * cols + bj] = true;
      corr(bi, bj) = 0;
    }
    if (picked.empty()) break;

    if (op.separable) {
      solver.add_atoms(picked, corr_y);
      weights = solver.solve();
      support = solver.support();
    } else {
      Eigen::VectorXd w0 = Eigen::VectorXd::Zero(support.size() + picked.size());
      w0.head(weights.size()) = weights;
      for (const auto& a : picked) support.push_back(a);
      weights = cg_on_support(op, support, y, w0, 40);
    }
    residual = y - op.forward(scatter(support, weights, rows, cols));
    rnorm = residual.norm();
  }

  res.coeffs = scatter(support, weights, rows, cols);
  res.residual_norm = rnorm;
  res.iterations = it;
  res.converged = rnorm <= cfg.epsilon;
  return res;
}

ReconstructionResult basis_pursuit_denoise(const CsOperator& op, const Eigen::MatrixXd& y,
                                           const ReconstructionConfig& cfg) {
  ReconstructionResult res;
  const int rows = op.coeff_rows(), cols = op.coeff_cols();
  const double lip = std::max(op.op_norm_sq(), 1e-12);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::MatrixXd corr0 = op.adjoint(y);
  double mu = 0.5 * corr0.cwiseAbs().maxCoeff();
  const double mu_min = std::max(1e-12 * mu, 1e-300);
  double rnorm = y.norm();
  int total_iters = 0;

  // FISTA with geometric continuation on the shrinkage weight until the
  // residual constraint is met.
  while (total_iters < cfg.max_iterations) {
    Eigen::MatrixXd z = a;
    Eigen::MatrixXd a_prev = a;
    double t = 1.0;
    for (int inner = 0; inner < 60 && total_iters < cfg.max_iterations; ++inner, ++total_iters) {
      Eigen::MatrixXd grad = op.adjoint(op.forward(z) - y);
      Eigen::MatrixXd w = z - grad / lip;
      double thr = mu / lip;
      a = w.unaryExpr([thr](double v) {
        if (v > thr) return v - thr;
        if (v < -thr) return v + thr;
        return 0.0;
      });
      double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      z = a + ((t - 1.0) / t_next) * (a - a_prev);
      a_prev = a;
      t = t_next;
      if (inner >= 8 && (a - z).norm() <= 1e-10 * std::max(1.0, a.norm())) break;
    }
    rnorm = (y - op.forward(a)).norm();
    if (rnorm <= std::max(cfg.epsilon, 1e-12) || mu <= mu_min) break;
    mu *= 0.4;
  }

  // Debias: least squares on the discovered support.
  double thr = 1e-8 * std::max(1.0, a.cwiseAbs().maxCoeff());
  std::vector<std::pair<int, int>> support;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (std::abs(a(i, j)) > thr) support.emplace_back(i, j);
  if (!support.empty() && static_cast<long long>(support.size()) <= op.measurements()) {
    Eigen::VectorXd w0(support.size());
    for (std::size_t i = 0; i < support.size(); ++i)
      w0(i) = a(support[i].first, support[i].second);
    Eigen::VectorXd w = cg_on_support(op, support, y, w0, 60);
    Eigen::MatrixXd a_db = scatter(support, w, rows, cols);
    double r_db = (y - op.forward(a_db)).norm();
    if (r_db <= rnorm) {
      a = a_db;
      rnorm = r_db;
    }
  }

  res.coeffs = a;
  res.residual_norm = rnorm;
  res.iterations = total_iters;
  res.converged = rnorm <= std::max(cfg.epsilon, 1e-12);
  return res;
}

ReconstructionResult run_solver(const CsOperator& op, const Eigen::MatrixXd& y,
                                const WaveletBasis& bs, const WaveletBasis& bt,
                                const ReconstructionConfig& cfg) {
  if (cfg.epsilon < 0 || cfg.max_iterations < 1)
    throw std::invalid_argument("reconstruct: bad tolerance or iteration budget");
  ReconstructionResult res = cfg.solver == ReconstructionConfig::Solver::GreedyPursuit
                                 ? greedy_pursuit(op, y, cfg)
                                 : basis_pursuit_denoise(op, y, cfg);
  res.z_hat = synthesize(res.coeffs, bs, bt);
  double thr = 1e-10 * std::max(1.0, res.coeffs.cwiseAbs().maxCoeff());
  res.sparsity = static_cast<int>((res.coeffs.cwiseAbs().array() > thr).count());
  return res;
}

}  // namespace

Eigen::MatrixXd SamplingPlan::phi_space() const {
  return mode == SamplingMode::SubsetSelection ? selection_matrix(rows, n_s) : phi_s;
}

Eigen::MatrixXd SamplingPlan::phi_time() const {
  return mode == SamplingMode::SubsetSelection ? selection_matrix(cols, n_t) : phi_t;
}

std::string SamplingPlan::to_text() const {
  std::ostringstream os;
  os << "mode=" << (mode == SamplingMode::SubsetSelection ? "subset" : "dense") << "\n";
  os << "n_s=" << n_s << "\nn_t=" << n_t << "\nm_s=" << m_s << "\nm_t=" << m_t << "\n";
  os << "seed=" << seed << "\n";
  if (mode == SamplingMode::SubsetSelection) {
    os << "rows=";
    for (std::size_t i = 0; i < rows.size(); ++i) os << (i ? "," : "") << rows[i];
    os << "\ncols=";
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
  } else {
    os.precision(17);
    os << "phi_s=";
    for (int i = 0; i < phi_s.size(); ++i) os << (i ? "," : "") << phi_s.data()[i];
    os << "\nphi_t=";
    for (int i = 0; i < phi_t.size(); ++i) os << (i ? "," : "") << phi_t.data()[i];
    os << "\n";
  }
  return os.str();
}

namespace {
std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}
}  // namespace

SamplingPlan SamplingPlan::from_text(const std::string& text) {
  SamplingPlan p;
  std::istringstream is(text);
  std::string line;
  std::string phi_s_raw, phi_t_raw;
  while (std::getline(is, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "mode")
      p.mode = (val == "subset") ? SamplingMode::SubsetSelection : SamplingMode::DenseRandom;
    else if (key == "n_s")
      p.n_s = std::stoi(val);
    else if (key == "n_t")
      p.n_t = std::stoi(val);
    else if (key == "m_s")
      p.m_s = std::stoi(val);
    else if (key == "m_t")
      p.m_t = std::stoi(val);
    else if (key == "seed")
      p.seed = std::stoull(val);
    else if (key == "rows")
      for (double v : parse_csv_doubles(val)) p.rows.push_back(static_cast<int>(v));
    else if (key == "cols")
      for (double v : parse_csv_doubles(val)) p.cols.push_back(static_cast<int>(v));
    else if (key == "phi_s")
      phi_s_raw = val;
    else if (key == "phi_t")
      phi_t_raw = val;
    else
      throw std::invalid_argument("SamplingPlan::from_text: unknown key '" + key + "'");
  }
  if (p.mode == SamplingMode::DenseRandom) {
    auto vs = parse_csv_doubles(phi_s_raw), vt = parse_csv_doubles(phi_t_raw);
    p.phi_s = Eigen::Map<Eigen::MatrixXd>(vs.data(), p.m_s, p.n_s);
    p.phi_t = Eigen::Map<Eigen::MatrixXd>(vt.data(), p.m_t, p.n_t);
  }
  return p;
}

SamplingPlan make_subset_plan(int n_s, int n_t, int m_s, int m_t, std::uint64_t seed) {
  if (m_s < 1 || m_s > n_s || m_t < 1 || m_t > n_t)
    throw std::invalid_argument("make_subset_plan: sample counts out of range");
  SamplingPlan p;
  p.mode = SamplingMode::SubsetSelection;
  p.n_s = n_s;
  p.n_t = n_t;
  p.m_s = m_s;
  p.m_t = m_t;
  p.seed = seed;
  auto rng = make_rng(seed);
  p.rows = sample_indices(n_s, m_s, rng);
  p.cols = sample_indices(n_t, m_t, rng);
  return p;
}

SamplingPlan make_dense_plan(int n_s, int n_t, int m_s, int m_t, std::uint64_t seed, double lo,
                             double hi) {
  if (m_s < 1 || m_s > n_s || m_t < 1 || m_t > n_t)
    throw std::invalid_argument("make_dense_plan: sample counts out of range");
  SamplingPlan p;
  p.mode = SamplingMode::DenseRandom;
  p.n_s = n_s;
  p.n_t = n_t;
  p.m_s = m_s;
  p.m_t = m_t;
  p.seed = seed;
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  p.phi_s.resize(m_s, n_s);
  p.phi_t.resize(m_t, n_t);
  for (int i = 0; i < m_s; ++i)
    for (int j = 0; j < n_s; ++j) p.phi_s(i, j) = d(rng);
  for (int i = 0; i < m_t; ++i)
    for (int j = 0; j < n_t; ++j) p.phi_t(i, j) = d(rng);
  return p;
}

Eigen::MatrixXd analyze(const Eigen::MatrixXd& z, const WaveletBasis& bs, const WaveletBasis& bt) {
  if (z.rows() != bs.dimension || z.cols() != bt.dimension)
    throw std::invalid_argument("analyze: field and basis dimensions disagree");
  return bs.matrix.transpose() * z * bt.matrix;
}

Eigen::MatrixXd synthesize(const Eigen::MatrixXd& a, const WaveletBasis& bs,
                           const WaveletBasis& bt) {
  if (a.rows() != bs.dimension || a.cols() != bt.dimension)
    throw std::invalid_argument("synthesize: coefficients and basis dimensions disagree");
  return bs.matrix * a * bt.matrix.transpose();
}

Eigen::MatrixXd observe(const Eigen::MatrixXd& z, const SamplingPlan& plan) {
  if (z.rows() != plan.n_s || z.cols() != plan.n_t)
    throw std::invalid_argument("observe: field does not match the plan dimensions");
  if (plan.mode == SamplingMode::SubsetSelection) {
    Eigen::MatrixXd y(plan.m_s, plan.m_t);
    for (int i = 0; i < plan.m_s; ++i)
      for (int j = 0; j < plan.m_t; ++j) y(i, j) = z(plan.rows[i], plan.cols[j]);
    return y;
  }
  return plan.phi_s * z * plan.phi_t.transpose();
}

ReconstructionResult reconstruct(const Eigen::MatrixXd& y, const SamplingPlan& plan,
                                 const WaveletBasis& bs, const WaveletBasis& bt,
                                 const ReconstructionConfig& cfg) {
  if (y.rows() != plan.m_s || y.cols() != plan.m_t)
    throw std::invalid_argument("reconstruct: observation does not match the plan");
  if (plan.n_s != bs.dimension || plan.n_t != bt.dimension)
    throw std::invalid_argument("reconstruct: plan and basis dimensions disagree");
  CsOperator op;
  op.separable = true;
  op.u = plan.phi_space() * bs.matrix;
  op.v = plan.phi_time() * bt.matrix;
  return run_solver(op, y, bs, bt, cfg);
}

ReconstructionResult reconstruct_scattered(
    const Eigen::MatrixXd& observed_values,
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask, const WaveletBasis& bs,
    const WaveletBasis& bt, const ReconstructionConfig& cfg) {
  if (observed_values.rows() != mask.rows() || observed_values.cols() != mask.cols())
    throw std::invalid_argument("reconstruct_scattered: values and mask disagree");
  CsOperator op;
  op.separable = false;
  op.psi_s = bs.matrix;
  op.psi_t = bt.matrix;
  op.mask = mask;
  Eigen::MatrixXd y = mask.select(observed_values,
                                  Eigen::MatrixXd::Zero(mask.rows(), mask.cols()));
  return run_solver(op, y, bs, bt, cfg);
}

double mse(const Eigen::MatrixXd& z, const Eigen::MatrixXd& z_hat) {
  double ref = z.squaredNorm();
  if (ref <= 0.0) throw std::invalid_argument("mse: reference field has zero norm");
  return (z - z_hat).squaredNorm() / ref;
}

}  // namespace csmac
