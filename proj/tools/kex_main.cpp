// kex: kernel embeddings with out-of-sample extension.
//
// Subcommands: synth, fit, extend, diffusion-fit, diffusion-extend,
// diagnose, compare. All numeric output is written with shortest
// round-trip formatting, so identical inputs give byte-identical files.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kex/diagnostics.hpp"
#include "kex/diffusion.hpp"
#include "kex/io.hpp"
#include "kex/nystrom.hpp"
#include "kex/rng.hpp"
#include "kex/synth.hpp"

namespace {

using namespace kex;

struct CommonOpts {
  std::string data;
  std::string out;
  std::string measure_col = "weight";
  double rank_tol = kDefaultRankTol;
};

struct KernelOpts {
  std::string kind = "gaussian";
  std::optional<double> epsilon;
  double eta = 0.0;
  std::string kernel_file;
};

KernelSpec make_spec(const KernelOpts& k) {
  if (k.kind == "gaussian") {
    if (!k.epsilon) throw config_error("gaussian kernel needs --epsilon");
    return GaussianSpec{*k.epsilon, k.eta};
  }
  if (k.kind == "linear") return LinearSpec{};
  if (k.kind == "precomputed") {
    if (k.kernel_file.empty()) throw config_error("precomputed kernel needs --kernel-file");
    return PrecomputedSpec{load_matrix_csv(k.kernel_file)};
  }
  throw config_error("unknown kernel kind '" + k.kind + "'");
}

void add_kernel_options(CLI::App* cmd, KernelOpts& k) {
  cmd->add_option("--kernel", k.kind, "kernel kind: gaussian | linear | precomputed")
      ->envname("KEX_KERNEL");
  cmd->add_option("--epsilon", k.epsilon, "gaussian bandwidth")->envname("KEX_EPSILON");
  cmd->add_option("--eta", k.eta, "gaussian sparsity threshold in [0,1)")->envname("KEX_ETA");
  cmd->add_option("--kernel-file", k.kernel_file, "CSV matrix for a precomputed kernel")
      ->envname("KEX_KERNEL_FILE");
}

std::string join_labels(const std::vector<std::string>& labels, Index i) {
  return labels.empty() ? std::string() : labels[static_cast<std::size_t>(i)];
}

// ---------------------------------------------------------------- synth

int cmd_synth(const std::string& shape, Index n, double noise, std::uint64_t seed,
              const std::string& out) {
  const LoadedData data = synth_dataset(shape, n, noise, seed);
  save_points_csv(out, data.to_set());
  std::cout << "wrote " << n << " points (" << shape << ") to " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------- fit

int cmd_fit(const CommonOpts& c, const KernelOpts& k) {
  const MeasuredSet train = load_csv(c.data, c.measure_col).to_set();
  const ExtensionModel model = fit(train, make_spec(k), c.rank_tol);
  save_model(c.out, model, c.rank_tol);
  std::cout << "rank d=" << model.rank() << "\n";
  const Index head = std::min<Index>(model.rank(), 5);
  for (Index j = 0; j < head; ++j) {
    std::cout << "sigma_" << (j + 1) << "=" << format_double(model.spectra.eigenvalues()[j])
              << "\n";
  }
  return 0;
}

int cmd_diffusion_fit(const CommonOpts& c, double epsilon, double eta) {
  const MeasuredSet train = load_csv(c.data, c.measure_col).to_set();
  const DiffusionModel model = diffusion_fit(train, epsilon, eta, c.rank_tol);
  save_model(c.out, model, c.rank_tol);
  std::cout << "rank=" << model.spectra.rank() << " embedding_dim=" << model.embedding_dim()
            << "\n";
  const Index head = std::min<Index>(model.spectra.rank(), 5);
  for (Index j = 0; j < head; ++j) {
    std::cout << "lambda_" << j << "=" << format_double(model.spectra.eigenvalues()[j]) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- extend

std::string kpca_header(Index d, bool with_label) {
  std::string h;
  for (Index j = 0; j < d; ++j) {
    if (j > 0) h += ',';
    h += "psi_hat_" + std::to_string(j + 1);
  }
  if (with_label) h += ",label";
  h += '\n';
  return h;
}

std::string diffusion_header(Index r, bool with_label) {
  std::string h;
  for (Index j = 0; j < r; ++j) h += "u_" + std::to_string(j + 1) + ",";
  for (Index j = 0; j < r; ++j) h += "psi_" + std::to_string(j + 1) + ",";
  for (Index j = 0; j < r; ++j) h += "v_" + std::to_string(j + 1) + ",";
  h += "density";
  if (with_label) h += ",label";
  h += '\n';
  return h;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw io_error("write failure on '" + path + "'");
}

int cmd_extend(const std::string& model_path, const CommonOpts& c, bool require_diffusion) {
  const LoadedModel loaded = load_model(model_path);
  const LoadedData test = load_csv(c.data, c.measure_col);

  if (loaded.is_diffusion()) {
    const DiffusionModel& model = loaded.diffusion();
    const Index r = model.embedding_dim();
    if (test.count() == 0) {
      write_text(c.out, diffusion_header(r, false));
      return 0;
    }
    const DiffusionExtension ext = diffusion_extend(model, test.to_set());
    std::string text = diffusion_header(r, !test.labels.empty());
    for (Index i = 0; i < test.count(); ++i) {
      for (Index j = 0; j < r; ++j) text += format_double(ext.weighted(i, j)) + ",";
      for (Index j = 0; j < r; ++j) text += format_double(ext.standard(i, j)) + ",";
      for (Index j = 0; j < r; ++j) text += format_double(ext.normalized(i, j)) + ",";
      text += format_double(ext.updated_densities[i]);
      if (!test.labels.empty()) text += "," + join_labels(test.labels, i);
      text += '\n';
    }
    write_text(c.out, text);
    return 0;
  }

  if (require_diffusion) {
    throw config_error("'" + model_path + "' is not a diffusion model");
  }
  const ExtensionModel& model = loaded.extension();
  const Index d = model.rank();
  if (test.count() == 0) {
    write_text(c.out, kpca_header(d, false));
    return 0;
  }
  const MeasuredSet test_set = test.to_set();
  if (test_set.dim() != model.train.dim()) {
    throw dimension_error("test points have dimension " + std::to_string(test_set.dim()) +
                          ", model expects " + std::to_string(model.train.dim()));
  }

  // assemble train + test, extend, keep the test rows
  const Index nt = model.train.size();
  RowMatrixXd pts(nt + test_set.size(), model.train.dim());
  pts.topRows(nt) = model.train.points();
  pts.bottomRows(test_set.size()) = test_set.points();
  Eigen::VectorXd w(nt + test_set.size());
  w.head(nt) = model.train.weights();
  w.tail(test_set.size()) = test_set.weights();
  std::vector<Index> test_idx(static_cast<std::size_t>(test_set.size()));
  for (Index i = 0; i < test_set.size(); ++i) test_idx[static_cast<std::size_t>(i)] = nt + i;
  const SplitView view = split(MeasuredSet(std::move(pts), std::move(w)), std::move(test_idx));
  const ExtendedEmbedding emb = extend(model, view);

  std::string text = kpca_header(d, !test.labels.empty());
  for (Index i = 0; i < test_set.size(); ++i) {
    for (Index j = 0; j < d; ++j) {
      if (j > 0) text += ',';
      text += format_double(emb.features(nt + i, j));
    }
    if (!test.labels.empty()) text += "," + join_labels(test.labels, i);
    text += '\n';
  }
  write_text(c.out, text);
  return 0;
}

// ---------------------------------------------------------------- diagnose

void spectra_table(Report& rep, const char* name, const Eigen::VectorXd& v) {
  for (Index i = 0; i < v.size(); ++i) {
    rep.add(std::string(name) + "." + std::to_string(i), v[i]);
  }
}

int cmd_diagnose(const std::string& model_path, const CommonOpts& c) {
  const LoadedModel loaded = load_model(model_path);
  if (loaded.is_diffusion()) {
    throw config_error("diagnose expects a kernel-extension model; diffusion models carry "
                       "their own consistency checks at fit time");
  }
  const ExtensionModel& model = loaded.extension();
  const LoadedData full_data = load_csv(c.data, c.measure_col);
  const MeasuredSet full_set = full_data.to_set();

  const Index nt = model.train.size();
  if (full_set.size() < nt) {
    throw dimension_error("data has fewer rows than the model's training set");
  }
  {
    RowMatrixXd head_pts = full_set.points().topRows(nt);
    Eigen::VectorXd head_w = full_set.weights().head(nt);
    const MeasuredSet head(std::move(head_pts), std::move(head_w));
    if (!head.same_data(model.train)) {
      throw dimension_error("the first " + std::to_string(nt) +
                            " data rows must be the model's training points");
    }
  }
  std::vector<Index> test_idx;
  for (Index i = nt; i < full_set.size(); ++i) test_idx.push_back(i);
  const SplitView view = split(full_set, std::move(test_idx));

  KernelMatrix full_kernel = model.spec.evaluable()
                                 ? build_kernel(model.spec, full_set, full_set)
                                 : [&] {
                                     if (view.test_indices().empty()) {
                                       return model.train_kernel;
                                     }
                                     throw config_error(
                                         "a precomputed kernel cannot be evaluated at unseen "
                                         "points; use compare with --kernel-file");
                                   }();
  const MercerCertificate cert = validate_mercer(full_kernel);
  if (!cert.certified) {
    throw numerical_error("kernel on the full data failed Mercer validation");
  }
  const SpectralModel full_spectra = spectral_decompose(full_kernel, full_set, c.rank_tol);
  const ExtendedEmbedding emb = model.spec.evaluable()
                                    ? extend(model, view)
                                    : extend_with_kernel(model, view, full_kernel);
  const ResidualDecomposition res = residual(full_kernel, emb, full_spectra);
  const ExactnessReport ex = exactness_check(res);
  const ErrorReport er = error_bounds(res, view);
  const SpectrumComparison sc = spectrum_comparison(full_spectra, emb, model, view);
  const PerturbationEstimate pe = perturbation_estimate(full_spectra, res.projector);

  Report rep;
  rep.add("kind", "diagnose");
  rep.add("n_train", nt);
  rep.add("n_test", static_cast<Index>(view.test_indices().size()));
  rep.add("dim", full_set.dim());
  rep.add("vol_X", er.vol_X);
  rep.add("vol_Z", er.vol_Z);
  rep.add("rank_full", full_spectra.rank());
  rep.add("rank_train", model.rank());
  rep.add("s", res.s);
  rep.add("lambda_1", res.lambda1);
  rep.add("k0_norm2", res.k0_norm2);
  rep.add("trace_k0", er.trace_k0);
  rep.add("avg_distance", er.avg_distance);
  rep.add("trace_bound", er.trace_bound);
  rep.add("spectral_bound", er.spectral_bound);
  rep.add_flag("chain", er.chain_ok);
  rep.add("exact", ex.exact ? "exact" : "inexact");
  rep.add("spectrum_identity_error", sc.spectrum_identity_error);
  rep.add("t_norm2", sc.t_norm2);
  rep.add_flag("gaps", true);  // spectrum_comparison throws on violation
  double max_dev = 0.0;
  for (Index i = 0; i < pe.gamma_hat.size(); ++i) {
    const double g = i < sc.gamma.size() ? sc.gamma[i] : 0.0;
    max_dev = std::max(max_dev, std::abs(g - pe.gamma_hat[i]));
  }
  rep.add("perturbation_max_dev", max_dev);
  rep.add("perturbation_degenerate_rows", static_cast<Index>(pe.degenerate.size()));
  spectra_table(rep, "lambda", sc.lambda);
  spectra_table(rep, "gamma", sc.gamma);
  spectra_table(rep, "sigma", sc.sigma);
  spectra_table(rep, "gamma_hat", pe.gamma_hat);
  rep.save(c.out);
  std::cout << (ex.exact ? "exact" : "inexact") << " extension, s=" << res.s << "\n";
  return 0;
}

// ---------------------------------------------------------------- compare

int cmd_compare(const CommonOpts& c, const KernelOpts& k, const std::string& split_file,
                std::optional<double> split_frac, std::optional<std::uint64_t> seed) {
  const LoadedData full_data = load_csv(c.data, c.measure_col);
  const MeasuredSet full_set = full_data.to_set();

  std::vector<Index> test_idx;
  if (!split_file.empty()) {
    const RowMatrixXd raw = load_matrix_csv(split_file);
    for (Index i = 0; i < raw.rows(); ++i) {
      for (Index j = 0; j < raw.cols(); ++j) {
        test_idx.push_back(static_cast<Index>(raw(i, j)));
      }
    }
  } else if (split_frac) {
    if (!seed) throw config_error("--split-frac needs --seed for a reproducible split");
    if (!(*split_frac > 0.0) || !(*split_frac < 1.0)) {
      throw config_error("--split-frac must lie in (0, 1)");
    }
    std::vector<Index> all(static_cast<std::size_t>(full_set.size()));
    for (Index i = 0; i < full_set.size(); ++i) all[static_cast<std::size_t>(i)] = i;
    Rng rng(*seed);
    rng.shuffle(all);
    const auto n_test = static_cast<std::size_t>(
        std::max<Index>(1, static_cast<Index>(*split_frac * static_cast<double>(
                                                                full_set.size()))));
    test_idx.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_test));
  } else {
    throw config_error("compare needs either --split-file or --split-frac with --seed");
  }
  const SplitView view = split(full_set, std::move(test_idx));

  const KernelSpec spec = make_spec(k);
  KernelMatrix full_kernel = build_kernel(spec, full_set, full_set);
  const MercerCertificate cert = validate_mercer(full_kernel);
  if (!cert.certified) throw numerical_error("kernel failed Mercer validation");
  const SpectralModel full_spectra = spectral_decompose(full_kernel, full_set, c.rank_tol);

  const MeasuredSet train = view.train_set();
  const KernelSpec train_spec =
      spec.is_precomputed()
          ? KernelSpec(PrecomputedSpec{restrict(full_kernel, view, BlockPart::train).values()})
          : spec;
  const ExtensionModel model = fit(train, train_spec, c.rank_tol);
  const ExtendedEmbedding emb = spec.is_precomputed()
                                    ? extend_with_kernel(model, view, full_kernel)
                                    : extend(model, view);
  const ResidualDecomposition res = residual(full_kernel, emb, full_spectra);
  const ExactnessReport ex = exactness_check(res);
  const ErrorReport er = error_bounds(res, view);
  const SpectrumComparison sc = spectrum_comparison(full_spectra, emb, model, view);

  Report rep;
  rep.add("kind", "compare");
  rep.add("n_train", train.size());
  rep.add("n_test", static_cast<Index>(view.test_indices().size()));
  rep.add("dim", full_set.dim());
  rep.add("d_phi_psi", er.avg_distance);
  rep.add("trace_bound", er.trace_bound);
  rep.add("spectral_bound", er.spectral_bound);
  rep.add_flag("chain", er.chain_ok);
  rep.add("exact", ex.exact ? "exact" : "inexact");
  rep.add("s", res.s);
  rep.add("k0_norm2", res.k0_norm2);
  rep.add("trace_k0", er.trace_k0);
  rep.add("spectrum_identity_error", sc.spectrum_identity_error);
  rep.add("t_norm2", sc.t_norm2);
  if (res.s > 0) {
    const PerturbationScaling ps = perturbation_scaling(emb, res, c.rank_tol);
    rep.add("perturb_error_scale_1", ps.max_error[0]);
    rep.add("perturb_error_scale_05", ps.max_error[1]);
    rep.add("perturb_error_scale_025", ps.max_error[2]);
    rep.add("perturb_ratio_1", ps.ratios[0]);
    rep.add("perturb_ratio_2", ps.ratios[1]);
    rep.add("perturb_order", ps.order);
  }
  spectra_table(rep, "lambda", sc.lambda);
  spectra_table(rep, "gamma", sc.gamma);
  spectra_table(rep, "sigma", sc.sigma);
  rep.save(c.out);
  std::cout << "d(Phi,Psi_hat)=" << format_double(er.avg_distance)
            << " trace_bound=" << format_double(er.trace_bound) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel embeddings with out-of-sample extension"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_shape = "swiss-roll";
  Index synth_n = 100;
  double synth_noise = 0.0;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  bool synth_seed_given = false;
  synth->add_option("--shape", synth_shape, "swiss-roll | circles | gaussian-blobs");
  synth->add_option("--n", synth_n, "number of points")->required();
  synth->add_option("--noise", synth_noise, "noise level");
  synth->add_option("--seed", synth_seed, "rng seed")
      ->envname("KEX_SEED")
      ->each([&](const std::string&) { synth_seed_given = true; });
  synth->add_option("--out", synth_out, "output CSV")->required()->envname("KEX_OUT");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a kernel extension model");
  CommonOpts fit_c;
  KernelOpts fit_k;
  fit_cmd->add_option("--data", fit_c.data, "training CSV")->required();
  fit_cmd->add_option("--out", fit_c.out, "model file")->required()->envname("KEX_OUT");
  fit_cmd->add_option("--measure-col", fit_c.measure_col, "weight column name")
      ->envname("KEX_MEASURE_COL");
  fit_cmd->add_option("--rank-tol", fit_c.rank_tol, "relative eigenvalue cutoff")
      ->envname("KEX_RANK_TOL");
  add_kernel_options(fit_cmd, fit_k);

  // diffusion-fit
  auto* dfit = app.add_subcommand("diffusion-fit", "fit a diffusion embedding");
  CommonOpts dfit_c;
  std::optional<double> dfit_eps;
  double dfit_eta = 0.0;
  dfit->add_option("--data", dfit_c.data, "training CSV")->required();
  dfit->add_option("--out", dfit_c.out, "model file")->required()->envname("KEX_OUT");
  dfit->add_option("--measure-col", dfit_c.measure_col, "weight column name")
      ->envname("KEX_MEASURE_COL");
  dfit->add_option("--rank-tol", dfit_c.rank_tol, "relative eigenvalue cutoff")
      ->envname("KEX_RANK_TOL");
  dfit->add_option("--epsilon", dfit_eps, "gaussian bandwidth")
      ->required()
      ->envname("KEX_EPSILON");
  dfit->add_option("--eta", dfit_eta, "sparsity threshold")->envname("KEX_ETA");

  // extend / diffusion-extend
  auto* ext = app.add_subcommand("extend", "extend a model to test points");
  CommonOpts ext_c;
  std::string ext_model;
  ext->add_option("--model", ext_model, "model file")->required()->envname("KEX_MODEL");
  ext->add_option("--data", ext_c.data, "test CSV")->required();
  ext->add_option("--out", ext_c.out, "embedding CSV")->required()->envname("KEX_OUT");
  ext->add_option("--measure-col", ext_c.measure_col, "weight column name")
      ->envname("KEX_MEASURE_COL");

  auto* dext = app.add_subcommand("diffusion-extend", "extend a diffusion embedding");
  CommonOpts dext_c;
  std::string dext_model;
  dext->add_option("--model", dext_model, "model file")->required()->envname("KEX_MODEL");
  dext->add_option("--data", dext_c.data, "test CSV")->required();
  dext->add_option("--out", dext_c.out, "embedding CSV")->required()->envname("KEX_OUT");
  dext->add_option("--measure-col", dext_c.measure_col, "weight column name")
      ->envname("KEX_MEASURE_COL");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "error bounds and spectra for an extension");
  CommonOpts diag_c;
  std::string diag_model;
  diag->add_option("--model", diag_model, "model file")->required()->envname("KEX_MODEL");
  diag->add_option("--data", diag_c.data, "full CSV (training rows first)")->required();
  diag->add_option("--out", diag_c.out, "report file")->required()->envname("KEX_OUT");
  diag->add_option("--measure-col", diag_c.measure_col, "weight column name")
      ->envname("KEX_MEASURE_COL");
  diag->add_option("--rank-tol", diag_c.rank_tol, "relative eigenvalue cutoff")
      ->envname("KEX_RANK_TOL");

  // compare
  auto* cmp = app.add_subcommand("compare", "full retrain vs out-of-sample extension");
  CommonOpts cmp_c;
  KernelOpts cmp_k;
  std::string cmp_split_file;
  std::optional<double> cmp_frac;
  std::optional<std::uint64_t> cmp_seed;
  cmp->add_option("--data", cmp_c.data, "full CSV")->required();
  cmp->add_option("--out", cmp_c.out, "report file")->required()->envname("KEX_OUT");
  cmp->add_option("--measure-col", cmp_c.measure_col, "weight column name")
      ->envname("KEX_MEASURE_COL");
  cmp->add_option("--rank-tol", cmp_c.rank_tol, "relative eigenvalue cutoff")
      ->envname("KEX_RANK_TOL");
  cmp->add_option("--split-file", cmp_split_file, "file of test indices");
  cmp->add_option("--split-frac", cmp_frac, "random test fraction in (0,1)")
      ->envname("KEX_SPLIT_FRAC");
  cmp->add_option("--seed", cmp_seed, "split seed")->envname("KEX_SEED");
  add_kernel_options(cmp, cmp_k);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      if (!synth_seed_given) throw config_error("synth needs --seed for reproducible output");
      return cmd_synth(synth_shape, synth_n, synth_noise, synth_seed, synth_out);
    }
    if (fit_cmd->parsed()) return cmd_fit(fit_c, fit_k);
    if (dfit->parsed()) {
      return cmd_diffusion_fit(dfit_c, dfit_eps ? *dfit_eps : 1.0, dfit_eta);
    }
    if (ext->parsed()) return cmd_extend(ext_model, ext_c, false);
    if (dext->parsed()) return cmd_extend(dext_model, dext_c, true);
    if (diag->parsed()) return cmd_diagnose(diag_model, diag_c);
    if (cmp->parsed()) return cmd_compare(cmp_c, cmp_k, cmp_split_file, cmp_frac, cmp_seed);
    return 2;
  } catch (const kex::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
