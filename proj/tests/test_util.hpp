#pragma once

// Shared generators and oracles for the test suites. Instances are small,
// seeded, and rejected until well-conditioned so eigensolver noise stays far
// below the asserted tolerances.

#include <Eigen/Eigenvalues>
#include <optional>

#include "kex/kernels.hpp"
#include "kex/measured_set.hpp"
#include "kex/nystrom.hpp"
#include "kex/rng.hpp"
#include "kex/spectral.hpp"

namespace kex::testutil {

inline RowMatrixXd random_points(Rng& rng, Index n, Index dim, double box = 1.0) {
  RowMatrixXd pts(n, dim);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < dim; ++c) pts(i, c) = rng.uniform(-box, box);
  }
  return pts;
}

inline Eigen::VectorXd random_weights(Rng& rng, Index n) {
  Eigen::VectorXd w(n);
  for (Index i = 0; i < n; ++i) w[i] = rng.uniform(0.5, 2.0);
  return w;
}

inline MeasuredSet random_set(Rng& rng, Index n, Index dim, bool random_weights_on = true) {
  if (random_weights_on) {
    return MeasuredSet(random_points(rng, n, dim), random_weights(rng, n));
  }
  return MeasuredSet::with_uniform_weights(random_points(rng, n, dim));
}

inline double mean_squared_distance(const MeasuredSet& s) {
  double acc = 0.0;
  Index count = 0;
  for (Index i = 0; i < s.size(); ++i) {
    for (Index j = 0; j < s.size(); ++j) {
      acc += (s.points().row(i) - s.points().row(j)).squaredNorm();
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

// gaussian bandwidth around the data's own scale
inline double natural_epsilon(Rng& rng, const MeasuredSet& s) {
  return std::max(mean_squared_distance(s), 1e-6) * rng.uniform(0.5, 2.0);
}

// eigenvalues (descending) of the mu-weighted operator of a symmetric block
inline Eigen::VectorXd weighted_spectrum(const RowMatrixXd& K, const Eigen::VectorXd& mu) {
  const Eigen::VectorXd root_mu = mu.cwiseSqrt();
  const Eigen::MatrixXd B =
      root_mu.asDiagonal() * (0.5 * (K + K.transpose())) * root_mu.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

struct Instance {
  MeasuredSet full;
  SplitView view;
  KernelSpec spec;

  Instance(MeasuredSet f, SplitView v, KernelSpec s)
      : full(std::move(f)), view(std::move(v)), spec(std::move(s)) {}
};

struct InstanceOpts {
  Index min_train = 3, max_train = 8;
  Index min_test = 1, max_test = 4;
  Index min_dim = 1, max_dim = 5;
  bool random_weights = true;
  // test points drawn near training points at this radius; 0 = same box
  double test_radius = 0.0;
  // reject kernels whose full spectrum dips below this relative floor
  double cond_floor = 1e-7;
};

// Well-conditioned random gaussian instance with a train/test split. Draws
// until the full kernel's relative spectrum stays above cond_floor.
inline Instance random_instance(Rng& rng, const InstanceOpts& opts = {}) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Index nt = opts.min_train + static_cast<Index>(rng.integer(
                                          static_cast<std::uint64_t>(opts.max_train - opts.min_train + 1)));
    const Index nz = opts.min_test + static_cast<Index>(rng.integer(
                                         static_cast<std::uint64_t>(opts.max_test - opts.min_test + 1)));
    const Index dim = opts.min_dim + static_cast<Index>(rng.integer(
                                         static_cast<std::uint64_t>(opts.max_dim - opts.min_dim + 1)));
    const Index n = nt + nz;
    RowMatrixXd pts = random_points(rng, n, dim);
    if (opts.test_radius > 0.0) {
      for (Index z = nt; z < n; ++z) {
        const Index anchor = static_cast<Index>(rng.integer(static_cast<std::uint64_t>(nt)));
        for (Index c = 0; c < dim; ++c) {
          pts(z, c) = pts(anchor, c) + opts.test_radius * rng.normal();
        }
      }
    }
    Eigen::VectorXd w = opts.random_weights ? random_weights(rng, n) : Eigen::VectorXd::Ones(n);
    MeasuredSet full(std::move(pts), std::move(w));
    const double eps = natural_epsilon(rng, full);
    const KernelSpec spec = GaussianSpec{eps, 0.0};

    const KernelMatrix K = build_kernel(spec, full, full);
    const Eigen::VectorXd lam = weighted_spectrum(K.values(), full.weights());
    if (lam[lam.size() - 1] < opts.cond_floor * lam[0]) continue;

    std::vector<Index> test_idx;
    for (Index i = nt; i < n; ++i) test_idx.push_back(i);
    SplitView view = split(full, std::move(test_idx));
    return Instance(std::move(full), std::move(view), spec);
  }
  throw std::runtime_error("random_instance: rejection loop exhausted");
}

struct FittedInstance {
  Instance inst;
  KernelMatrix full_kernel;
  SpectralModel full_spectra;
  ExtensionModel model;
  ExtendedEmbedding embedding;

  FittedInstance(Instance i, KernelMatrix fk, SpectralModel fs, ExtensionModel m,
                 ExtendedEmbedding e)
      : inst(std::move(i)),
        full_kernel(std::move(fk)),
        full_spectra(std::move(fs)),
        model(std::move(m)),
        embedding(std::move(e)) {}
};

inline FittedInstance fit_instance(Instance inst, double rank_tol = 1e-10) {
  KernelMatrix full_kernel = build_kernel(inst.spec, inst.full, inst.full);
  validate_mercer(full_kernel);
  SpectralModel full_spectra = spectral_decompose(full_kernel, inst.full, rank_tol);
  ExtensionModel model = fit(inst.view.train_set(), inst.spec, rank_tol);
  ExtendedEmbedding embedding = extend(model, inst.view);
  return FittedInstance(std::move(inst), std::move(full_kernel), std::move(full_spectra),
                        std::move(model), std::move(embedding));
}

inline FittedInstance random_fitted(Rng& rng, const InstanceOpts& opts = {},
                                    double rank_tol = 1e-10) {
  return fit_instance(random_instance(rng, opts), rank_tol);
}

}  // namespace kex::testutil
