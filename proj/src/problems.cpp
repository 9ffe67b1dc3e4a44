#include "decsim/problems.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace decsim {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_sq(const Vec& a) { return dot(a, a); }

int prog(const Vec& x) {
  for (int i = static_cast<int>(x.size()); i > 0; --i) {
    if (x[i - 1] != 0.0) return i;
  }
  return 0;
}

namespace {

// y = (1/4) tridiag(-1, 2, -1) x
void chain_mul(const Vec& x, Vec& y) {
  const int d = static_cast<int>(x.size());
  for (int i = 0; i < d; ++i) {
    double v = 2.0 * x[i];
    if (i > 0) v -= x[i - 1];
    if (i + 1 < d) v -= x[i + 1];
    y[i] = 0.25 * v;
  }
}

// Solves (1/4) tridiag(-1,2,-1) x = b by the Thomas algorithm.
Vec chain_solve(const Vec& b) {
  const int d = static_cast<int>(b.size());
  Vec c(d, 0.0), r(d, 0.0), x(d, 0.0);
  double diag = 0.5;
  c[0] = -0.25 / diag;
  r[0] = b[0] / diag;
  for (int i = 1; i < d; ++i) {
    const double m = 0.5 + 0.25 * c[i - 1];
    c[i] = -0.25 / m;
    r[i] = (b[i] + 0.25 * r[i - 1]) / m;
  }
  x[d - 1] = r[d - 1];
  for (int i = d - 2; i >= 0; --i) x[i] = r[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace

QuadraticChain::QuadraticChain(int d) : d_(d) {
  if (d < 2) throw std::invalid_argument("QuadraticChain: d must be at least 2");
  // Eigenvalues of tridiag(-1,2,-1) are 2 - 2 cos(k pi / (d+1)).
  smoothness_ = 0.25 * (2.0 - 2.0 * std::cos(d * M_PI / (d + 1.0)));
  Vec b(d, 0.0);
  b[0] = -0.25;
  minimizer_ = chain_solve(b);
  f_star_ = -0.5 * dot(b, minimizer_);
}

double QuadraticChain::value(const Vec& x) const {
  Vec ax(d_);
  chain_mul(x, ax);
  return 0.5 * dot(x, ax) + 0.25 * x[0];
}

void QuadraticChain::grad(const Vec& x, Vec& out) const {
  out.resize(d_);
  chain_mul(x, out);
  out[0] += 0.25;
}

Vec QuadraticChain::start_point() const {
  Vec x0(d_, 0.0);
  x0[0] = std::sqrt(static_cast<double>(d_));
  return x0;
}

HeteroQuadratic::HeteroQuadratic(int n, int d, uint64_t seed) : n_(n), d_(d) {
  if (n < 1 || d < 1) throw std::invalid_argument("HeteroQuadratic: bad sizes");
  RngStream rng(seed, 0, RngPurpose::kProblemGen);
  a_.assign(n, std::vector<double>(d * d, 0.0));
  b_.assign(n, Vec(d, 0.0));
  // A_i = M M' / d + 0.1 I keeps every component strictly convex.
  std::vector<double> m(d * d);
  for (int w = 0; w < n; ++w) {
    for (auto& v : m) v = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += m[i * d + k] * m[j * d + k];
        s /= d;
        if (i == j) s += 0.1;
        a_[w][i * d + j] = s;
        a_[w][j * d + i] = s;
      }
    }
    for (int i = 0; i < d; ++i) b_[w][i] = rng.uniform(-1.0, 1.0);
  }

  // Mean quadratic: smoothness from power iteration, minimizer by
  // Gaussian elimination on A_bar x = b_bar.
  std::vector<double> abar(d * d, 0.0);
  Vec bbar(d, 0.0);
  for (int w = 0; w < n; ++w) {
    for (int i = 0; i < d * d; ++i) abar[i] += a_[w][i] / n;
    for (int i = 0; i < d; ++i) bbar[i] += b_[w][i] / n;
  }
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = rng.uniform(0.1, 1.0);
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec av(d, 0.0);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) av[i] += abar[i * d + j] * v[j];
    }
    lambda = std::sqrt(norm_sq(av));
    for (int i = 0; i < d; ++i) v[i] = av[i] / lambda;
  }
  smoothness_ = lambda;

  std::vector<double> lu = abar;
  Vec rhs = bbar;
  std::vector<int> piv(d);
  for (int i = 0; i < d; ++i) piv[i] = i;
  for (int col = 0; col < d; ++col) {
    int p = col;
    for (int r = col + 1; r < d; ++r) {
      if (std::fabs(lu[r * d + col]) > std::fabs(lu[p * d + col])) p = r;
    }
    if (p != col) {
      for (int j = 0; j < d; ++j) std::swap(lu[col * d + j], lu[p * d + j]);
      std::swap(rhs[col], rhs[p]);
    }
    const double dpiv = lu[col * d + col];
    for (int r = col + 1; r < d; ++r) {
      const double f = lu[r * d + col] / dpiv;
      for (int j = col; j < d; ++j) lu[r * d + j] -= f * lu[col * d + j];
      rhs[r] -= f * rhs[col];
    }
  }
  minimizer_.assign(d, 0.0);
  for (int r = d - 1; r >= 0; --r) {
    double s = rhs[r];
    for (int j = r + 1; j < d; ++j) s -= lu[r * d + j] * minimizer_[j];
    minimizer_[r] = s / lu[r * d + r];
  }
  f_star_ = value(minimizer_);
}

double HeteroQuadratic::component_value(int worker, const Vec& x) const {
  double s = 0.0;
  for (int i = 0; i < d_; ++i) {
    double row = 0.0;
    for (int j = 0; j < d_; ++j) row += a_[worker][i * d_ + j] * x[j];
    s += 0.5 * x[i] * row - b_[worker][i] * x[i];
  }
  return s;
}

double HeteroQuadratic::value(const Vec& x) const {
  double s = 0.0;
  for (int w = 0; w < n_; ++w) s += component_value(w, x);
  return s / n_;
}

void HeteroQuadratic::component_grad(int worker, const Vec& x, Vec& out) const {
  out.assign(d_, 0.0);
  for (int i = 0; i < d_; ++i) {
    double row = 0.0;
    for (int j = 0; j < d_; ++j) row += a_[worker][i * d_ + j] * x[j];
    out[i] = row - b_[worker][i];
  }
}

void HeteroQuadratic::grad(const Vec& x, Vec& out) const {
  out.assign(d_, 0.0);
  Vec g(d_);
  for (int w = 0; w < n_; ++w) {
    component_grad(w, x, g);
    for (int i = 0; i < d_; ++i) out[i] += g[i] / n_;
  }
}

namespace {

class ProgBernoulliOracle : public StochasticOracle {
 public:
  ProgBernoulliOracle(std::shared_ptr<const Objective> obj, double p)
      : obj_(std::move(obj)), p_(p) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw std::invalid_argument("prog_bernoulli_oracle: p must be in (0, 1]");
    }
  }

  void sample(const Vec& x, RngStream& rng, Vec& out) const override {
    obj_->grad(x, out);
    const int cut = prog(x);
    // One coin per sample, shared across coordinates.
    const double scale = rng.bernoulli(p_) ? 1.0 / p_ : 0.0;
    for (int j = cut; j < static_cast<int>(out.size()); ++j) out[j] *= scale;
  }

  double variance_bound() const override {
    // Trajectory dependent (max_j |grad_j|^2 (1-p)/p); not computed here.
    return kInfVariance;
  }

  static constexpr double kInfVariance = std::numeric_limits<double>::infinity();

 private:
  std::shared_ptr<const Objective> obj_;
  double p_;
};

class GaussianOracle : public StochasticOracle {
 public:
  GaussianOracle(std::shared_ptr<const Objective> obj, double sigma2)
      : obj_(std::move(obj)), sigma2_(sigma2),
        coord_std_(std::sqrt(sigma2 / obj_->dim())) {
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("gaussian_oracle: sigma2 < 0");
  }

  void sample(const Vec& x, RngStream& rng, Vec& out) const override {
    obj_->grad(x, out);
    add_noise(rng, out);
  }

  void component_sample(int worker, const Vec& x, RngStream& rng,
                        Vec& out) const override {
    obj_->component_grad(worker, x, out);
    add_noise(rng, out);
  }

  double variance_bound() const override { return sigma2_; }

 private:
  void add_noise(RngStream& rng, Vec& out) const {
    if (sigma2_ == 0.0) return;
    for (auto& v : out) v += coord_std_ * rng.normal();
  }

  std::shared_ptr<const Objective> obj_;
  double sigma2_;
  double coord_std_;
};

}  // namespace

std::unique_ptr<StochasticOracle> prog_bernoulli_oracle(
    std::shared_ptr<const Objective> obj, double p) {
  return std::make_unique<ProgBernoulliOracle>(std::move(obj), p);
}

std::unique_ptr<StochasticOracle> gaussian_oracle(
    std::shared_ptr<const Objective> obj, double sigma2) {
  return std::make_unique<GaussianOracle>(std::move(obj), sigma2);
}

std::shared_ptr<Objective> make_quadratic_chain(int d) {
  return std::make_shared<QuadraticChain>(d);
}

std::shared_ptr<HeteroQuadratic> make_hetero_quadratic(int n, int d, uint64_t seed) {
  return std::make_shared<HeteroQuadratic>(n, d, seed);
}

}  // namespace decsim
