#include "kex/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace kex {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kModelFormat = "kex-model";
constexpr int kModelVersion = 1;

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string digest_hex(std::string_view payload) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(payload)));
  return std::string(buf);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw io_error("read failure on '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw io_error("write failure on '" + path + "'");
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

double parse_double(const std::string& field, const std::string& where) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || end != begin + field.size()) {
    throw io_error("non-numeric field '" + field + "' " + where);
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

MeasuredSet LoadedData::to_set() const {
  if (count() == 0) throw config_error("data set is empty");
  return MeasuredSet(points, weights, labels);
}

LoadedData load_csv(const std::string& path, const std::string& measure_col) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw io_error("'" + path + "' is empty (no header)");
  const std::vector<std::string> header = split_fields(line);

  Index weight_col = -1;
  Index label_col = -1;
  std::vector<Index> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == measure_col) {
      weight_col = static_cast<Index>(c);
    } else if (header[c] == "label") {
      label_col = static_cast<Index>(c);
    } else {
      feature_cols.push_back(static_cast<Index>(c));
    }
  }
  if (feature_cols.empty()) {
    throw io_error("'" + path + "' has no coordinate columns");
  }

  std::vector<std::vector<std::string>> rows;
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw io_error("'" + path + "' line " + std::to_string(lineno) + " has " +
                     std::to_string(fields.size()) + " fields, header has " +
                     std::to_string(header.size()));
    }
    rows.push_back(std::move(fields));
  }

  LoadedData out;
  const Index n = static_cast<Index>(rows.size());
  out.points.resize(n, static_cast<Index>(feature_cols.size()));
  out.weights = Eigen::VectorXd::Ones(n);
  for (Index r = 0; r < n; ++r) {
    const auto& fields = rows[static_cast<std::size_t>(r)];
    const std::string where = "in '" + path + "' row " + std::to_string(r + 1);
    for (std::size_t c = 0; c < feature_cols.size(); ++c) {
      out.points(r, static_cast<Index>(c)) =
          parse_double(fields[static_cast<std::size_t>(feature_cols[c])], where);
    }
    if (weight_col >= 0) {
      out.weights[r] = parse_double(fields[static_cast<std::size_t>(weight_col)], where);
    }
    if (label_col >= 0) {
      out.labels.push_back(fields[static_cast<std::size_t>(label_col)]);
    }
  }
  return out;
}

void save_points_csv(const std::string& path, const MeasuredSet& s) {
  std::string text;
  for (Index c = 0; c < s.dim(); ++c) {
    if (c > 0) text += ',';
    text += "x" + std::to_string(c);
  }
  text += ",weight";
  const bool with_labels = !s.labels().empty();
  if (with_labels) text += ",label";
  text += '\n';
  for (Index r = 0; r < s.size(); ++r) {
    for (Index c = 0; c < s.dim(); ++c) {
      if (c > 0) text += ',';
      text += format_double(s.points()(r, c));
    }
    text += ',';
    text += format_double(s.weights()[r]);
    if (with_labels) {
      text += ',';
      text += s.labels()[static_cast<std::size_t>(r)];
    }
    text += '\n';
  }
  write_file(path, text);
}

RowMatrixXd load_matrix_csv(const std::string& path) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  std::vector<std::vector<double>> rows;
  Index lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      row.push_back(parse_double(f, "in '" + path + "' line " + std::to_string(lineno)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw io_error("'" + path + "' line " + std::to_string(lineno) +
                     " has a different field count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw io_error("'" + path + "' holds no matrix rows");
  RowMatrixXd M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return M;
}

namespace {

ordered_json set_to_json(const MeasuredSet& s) {
  ordered_json j;
  j["dim"] = s.dim();
  auto points = ordered_json::array();
  for (Index i = 0; i < s.size(); ++i) {
    auto row = ordered_json::array();
    for (Index c = 0; c < s.dim(); ++c) row.push_back(s.points()(i, c));
    points.push_back(std::move(row));
  }
  j["points"] = std::move(points);
  auto weights = ordered_json::array();
  for (Index i = 0; i < s.size(); ++i) weights.push_back(s.weights()[i]);
  j["weights"] = std::move(weights);
  if (!s.labels().empty()) j["labels"] = s.labels();
  return j;
}

MeasuredSet set_from_json(const ordered_json& j) {
  const auto& points = j.at("points");
  const Index n = static_cast<Index>(points.size());
  const Index dim = j.at("dim").get<Index>();
  RowMatrixXd pts(n, dim);
  for (Index i = 0; i < n; ++i) {
    const auto& row = points.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != dim) {
      throw io_error("model file: point row has the wrong dimension");
    }
    for (Index c = 0; c < dim; ++c) pts(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  Eigen::VectorXd w(n);
  const auto& weights = j.at("weights");
  if (static_cast<Index>(weights.size()) != n) {
    throw io_error("model file: weight count does not match points");
  }
  for (Index i = 0; i < n; ++i) w[i] = weights.at(static_cast<std::size_t>(i)).get<double>();
  std::vector<std::string> labels;
  if (j.contains("labels")) labels = j.at("labels").get<std::vector<std::string>>();
  return MeasuredSet(std::move(pts), std::move(w), std::move(labels));
}

ordered_json spectra_to_json(const SpectralModel& m) {
  ordered_json j;
  auto vals = ordered_json::array();
  for (Index i = 0; i < m.rank(); ++i) vals.push_back(m.eigenvalues()[i]);
  j["eigenvalues"] = std::move(vals);
  auto funcs = ordered_json::array();
  for (Index c = 0; c < m.rank(); ++c) {
    auto col = ordered_json::array();
    for (Index r = 0; r < m.base().size(); ++r) col.push_back(m.eigenfunctions()(r, c));
    funcs.push_back(std::move(col));
  }
  j["eigenfunctions"] = std::move(funcs);
  return j;
}

SpectralModel spectra_from_json(const ordered_json& j, const MeasuredSet& base,
                                double rank_tol) {
  const auto& vals = j.at("eigenvalues");
  const Index m = static_cast<Index>(vals.size());
  Eigen::VectorXd lambdas(m);
  for (Index i = 0; i < m; ++i) lambdas[i] = vals.at(static_cast<std::size_t>(i)).get<double>();
  const auto& funcs = j.at("eigenfunctions");
  if (static_cast<Index>(funcs.size()) != m) {
    throw io_error("model file: eigenfunction count does not match eigenvalues");
  }
  Eigen::MatrixXd V(base.size(), m);
  for (Index c = 0; c < m; ++c) {
    const auto& col = funcs.at(static_cast<std::size_t>(c));
    if (static_cast<Index>(col.size()) != base.size()) {
      throw io_error("model file: eigenfunction length does not match the training set");
    }
    for (Index r = 0; r < base.size(); ++r) {
      V(r, c) = col.at(static_cast<std::size_t>(r)).get<double>();
    }
  }
  return SpectralModel(base, std::move(lambdas), std::move(V), rank_tol);
}

ordered_json kernel_spec_to_json(const KernelSpec& spec) {
  ordered_json j;
  j["kind"] = spec.kind_name();
  if (spec.is_gaussian()) {
    j["epsilon"] = spec.gaussian().epsilon;
    j["eta"] = spec.gaussian().eta;
  } else if (spec.is_precomputed()) {
    const auto& M = spec.precomputed().matrix;
    auto rows = ordered_json::array();
    for (Index i = 0; i < M.rows(); ++i) {
      auto row = ordered_json::array();
      for (Index c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
      rows.push_back(std::move(row));
    }
    j["matrix"] = std::move(rows);
  }
  return j;
}

KernelSpec kernel_spec_from_json(const ordered_json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian") {
    return GaussianSpec{j.at("epsilon").get<double>(), j.at("eta").get<double>()};
  }
  if (kind == "linear") return LinearSpec{};
  if (kind == "precomputed") {
    const auto& rows = j.at("matrix");
    const Index n = static_cast<Index>(rows.size());
    if (n == 0) throw io_error("model file: empty precomputed matrix");
    const Index m = static_cast<Index>(rows.at(0).size());
    RowMatrixXd M(n, m);
    for (Index i = 0; i < n; ++i) {
      const auto& row = rows.at(static_cast<std::size_t>(i));
      if (static_cast<Index>(row.size()) != m) {
        throw io_error("model file: ragged precomputed matrix");
      }
      for (Index c = 0; c < m; ++c) M(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return PrecomputedSpec{std::move(M)};
  }
  throw io_error("model file: unknown kernel kind '" + kind + "'");
}

void write_model_file(const std::string& path, ordered_json payload) {
  const std::string digest = digest_hex(payload.dump());
  payload["digest"] = digest;
  write_file(path, payload.dump(2) + "\n");
}

ordered_json read_model_file(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw io_error("cannot parse model file '" + path + "': " + e.what());
  }
  if (!j.contains("format") || j.at("format") != kModelFormat) {
    throw io_error("'" + path + "' is not a model file");
  }
  if (j.at("version").get<int>() != kModelVersion) {
    throw io_error("'" + path + "' has unsupported model version");
  }
  if (!j.contains("digest")) throw io_error("'" + path + "' is missing its digest");
  const std::string stored = j.at("digest").get<std::string>();
  j.erase("digest");
  if (digest_hex(j.dump()) != stored) {
    throw io_error("'" + path + "' is corrupt (digest mismatch)");
  }
  return j;
}

}  // namespace

void save_model(const std::string& path, const ExtensionModel& m, double rank_tol) {
  ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = "kpca";
  j["kernel"] = kernel_spec_to_json(m.spec);
  j["rank_tol"] = rank_tol;
  j["train"] = set_to_json(m.train);
  j["spectra"] = spectra_to_json(m.spectra);
  write_model_file(path, std::move(j));
}

void save_model(const std::string& path, const DiffusionModel& m, double rank_tol) {
  ordered_json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = "diffusion";
  j["kernel"] = kernel_spec_to_json(KernelSpec(GaussianSpec{m.epsilon, m.eta}));
  j["rank_tol"] = rank_tol;
  j["train"] = set_to_json(m.train);
  j["spectra"] = spectra_to_json(m.spectra);
  ordered_json d;
  auto dens = ordered_json::array();
  for (Index i = 0; i < m.densities.size(); ++i) dens.push_back(m.densities[i]);
  d["densities"] = std::move(dens);
  d["total_mass"] = m.total_mass;
  d["trivial_residual"] = m.trivial_residual;
  d["trivial_match"] = m.trivial_match;
  j["diffusion"] = std::move(d);
  write_model_file(path, std::move(j));
}

LoadedModel load_model(const std::string& path) {
  const ordered_json j = read_model_file(path);
  const std::string kind = j.at("kind").get<std::string>();
  const double rank_tol = j.at("rank_tol").get<double>();
  MeasuredSet train = set_from_json(j.at("train"));
  KernelSpec spec = kernel_spec_from_json(j.at("kernel"));
  SpectralModel spectra = spectra_from_json(j.at("spectra"), train, rank_tol);

  if (kind == "kpca") {
    KernelMatrix k = build_kernel(spec, train, train);
    validate_mercer(k);
    FeatureMap features(spectra);
    return LoadedModel{ExtensionModel{std::move(train), std::move(spec), std::move(k),
                                      std::move(spectra), std::move(features)},
                       rank_tol};
  }
  if (kind == "diffusion") {
    const auto& d = j.at("diffusion");
    const GaussianSpec g = std::get<GaussianSpec>(spec.value());
    KernelMatrix W = build_kernel(spec, train, train);
    const auto& dens = d.at("densities");
    if (static_cast<Index>(dens.size()) != train.size()) {
      throw io_error("model file: density count does not match the training set");
    }
    Eigen::VectorXd S(train.size());
    for (Index i = 0; i < S.size(); ++i) S[i] = dens.at(static_cast<std::size_t>(i)).get<double>();

    const Index r = spectra.rank() - 1;
    Eigen::MatrixXd standard_dr(train.size(), r);
    Eigen::MatrixXd weighted_dr(train.size(), r);
    Eigen::MatrixXd normalized_dr(train.size(), r);
    const Eigen::VectorXd root_S = S.cwiseSqrt();
    for (Index c = 0; c < r; ++c) {
      standard_dr.col(c) =
          std::sqrt(spectra.eigenvalues()[c + 1]) * spectra.eigenfunctions().col(c + 1);
      weighted_dr.col(c) = standard_dr.col(c).cwiseProduct(root_S);
      normalized_dr.col(c) = standard_dr.col(c).cwiseQuotient(root_S);
    }
    DiffusionModel m{std::move(train),
                     g.epsilon,
                     g.eta,
                     std::move(W),
                     std::move(S),
                     d.at("total_mass").get<double>(),
                     std::move(spectra),
                     std::move(standard_dr),
                     std::move(weighted_dr),
                     std::move(normalized_dr),
                     d.at("trivial_residual").get<double>(),
                     d.at("trivial_match").get<double>()};
    return LoadedModel{std::move(m), rank_tol};
  }
  throw io_error("'" + path + "' has unknown model kind '" + kind + "'");
}

void Report::add(std::string_view key, double value) {
  text_ += key;
  text_ += '=';
  text_ += format_double(value);
  text_ += '\n';
}

void Report::add(std::string_view key, Index value) {
  text_ += key;
  text_ += '=';
  text_ += std::to_string(value);
  text_ += '\n';
}

void Report::add(std::string_view key, std::string_view value) {
  text_ += key;
  text_ += '=';
  text_ += value;
  text_ += '\n';
}

void Report::add_flag(std::string_view key, bool pass) {
  add(key, pass ? std::string_view("pass") : std::string_view("fail"));
}

void Report::save(const std::string& path) const { write_file(path, text_); }

}  // namespace kex
