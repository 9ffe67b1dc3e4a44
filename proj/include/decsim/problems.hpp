#pragma once

#include <memory>
#include <vector>

#include "decsim/rng.hpp"

namespace decsim {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm_sq(const Vec& a);

// Index (1-based) of the last nonzero coordinate; 0 for the zero vector.
int prog(const Vec& x);

// Differentiable objective with a known smoothness constant and lower
// bound. Heterogeneous problems additionally expose per-worker components
// f_i with f = (1/n) sum_i f_i. Immutable after construction.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual void grad(const Vec& x, Vec& out) const = 0;
  virtual double smoothness() const = 0;
  virtual double lower_bound() const = 0;
  virtual Vec start_point() const = 0;

  virtual int components() const { return 1; }
  virtual void component_grad(int /*worker*/, const Vec& x, Vec& out) const { grad(x, out); }

  double delta() const { return value(start_point()) - lower_bound(); }
  Vec gradient(const Vec& x) const {
    Vec g(dim());
    grad(x, g);
    return g;
  }
};

// f(x) = 1/2 x'Ax - b'x with A = (1/4) tridiag(-1, 2, -1) and
// b = (1/4)(-1, 0, ..., 0)'; default start (sqrt(d), 0, ..., 0).
class QuadraticChain : public Objective {
 public:
  explicit QuadraticChain(int d);

  int dim() const override { return d_; }
  double value(const Vec& x) const override;
  void grad(const Vec& x, Vec& out) const override;
  double smoothness() const override { return smoothness_; }
  double lower_bound() const override { return f_star_; }
  Vec start_point() const override;

 private:
  int d_;
  double smoothness_;
  double f_star_;
  Vec minimizer_;
};

// Mean of n random strictly convex quadratics f_i(x) = 1/2 x'A_i x - b_i'x;
// the mean objective has a known minimizer via a dense solve.
class HeteroQuadratic : public Objective {
 public:
  HeteroQuadratic(int n, int d, uint64_t seed);

  int dim() const override { return d_; }
  double value(const Vec& x) const override;
  void grad(const Vec& x, Vec& out) const override;
  double smoothness() const override { return smoothness_; }
  double lower_bound() const override { return f_star_; }
  Vec start_point() const override { return Vec(d_, 0.0); }

  int components() const override { return n_; }
  void component_grad(int worker, const Vec& x, Vec& out) const override;
  double component_value(int worker, const Vec& x) const;
  const Vec& minimizer() const { return minimizer_; }

 private:
  int n_;
  int d_;
  double smoothness_;
  double f_star_;
  Vec minimizer_;
  std::vector<std::vector<double>> a_;  // per worker, d x d row-major
  std::vector<Vec> b_;
};

// Unbiased stochastic gradient source with a variance bound. Samples pull
// randomness from the caller's stream, never from hidden state.
class StochasticOracle {
 public:
  virtual ~StochasticOracle() = default;
  virtual void sample(const Vec& x, RngStream& rng, Vec& out) const = 0;
  virtual void component_sample(int /*worker*/, const Vec& x, RngStream& rng,
                                Vec& out) const {
    sample(x, rng, out);
  }
  virtual double variance_bound() const = 0;
};

// Progress-gated Bernoulli oracle: one xi ~ Bernoulli(p) per sample;
// coordinates past prog(x) are scaled by xi/p, the rest pass through.
std::unique_ptr<StochasticOracle> prog_bernoulli_oracle(
    std::shared_ptr<const Objective> obj, double p);

// Exact gradient plus isotropic Gaussian noise with total variance sigma2.
// In component mode the noise is added to the component gradient.
std::unique_ptr<StochasticOracle> gaussian_oracle(
    std::shared_ptr<const Objective> obj, double sigma2);

std::shared_ptr<Objective> make_quadratic_chain(int d);
std::shared_ptr<HeteroQuadratic> make_hetero_quadratic(int n, int d, uint64_t seed);

}  // namespace decsim
