#include "urlr/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "urlr/error.hpp"

namespace urlr {

std::string format_real(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*g", digits, v);
  std::string s(buf.data());
  return s == "-0" ? "0" : s;
}

namespace {

class CsvReader {
 public:
  explicit CsvReader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw ValidationError("cannot open " + path.string());
  }

  // Next non-empty row; false at end of file.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line_no_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      split(line, fields);
      return true;
    }
    return false;
  }

  // Requires a header row whose leading columns match `expected`.
  std::vector<std::string> header(const std::vector<std::string>& expected, bool exact = true) {
    std::vector<std::string> fields;
    if (!next(fields)) fail("missing header row");
    const bool prefix_ok = fields.size() >= expected.size() &&
                           std::equal(expected.begin(), expected.end(), fields.begin());
    if (!prefix_ok || (exact && fields.size() != expected.size())) {
      std::string want;
      for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
      fail("expected header '" + want + (exact ? "'" : ",...'"));
    }
    return fields;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ValidationError(path_.string() + ":" + std::to_string(line_no_) + ": " + message);
  }

  void expect_columns(const std::vector<std::string>& fields, std::size_t n) const {
    if (fields.size() != n) {
      fail("expected " + std::to_string(n) + " columns, found " + std::to_string(fields.size()));
    }
  }

  std::int64_t integer(const std::string& field, const char* what) const {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      fail(std::string("invalid ") + what + " '" + field + "'");
    }
    return v;
  }

  double real(const std::string& field, const char* what) const {
    double v = 0.0;
    const char* begin = field.data();
    if (!field.empty() && field[0] == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
      fail(std::string("invalid ") + what + " '" + field + "'");
    }
    return v;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
  }

  void split(const std::string& line, std::vector<std::string>& fields) const {
    fields.clear();
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (quoted) fail("unterminated quoted field");
    fields.push_back(trim(cur));
  }

  fs::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw ValidationError("failed writing " + path.string());
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

// Reads `id,value...` rows that must list ids 0..N-1 in order.
template <typename RowFn>
std::size_t read_dense_ids(CsvReader& csv, std::size_t n_cols, RowFn&& row_fn) {
  std::vector<std::string> fields;
  std::size_t expected = 0;
  while (csv.next(fields)) {
    csv.expect_columns(fields, n_cols);
    const std::int64_t id = csv.integer(fields[0], "id");
    if (id != static_cast<std::int64_t>(expected)) {
      csv.fail("expected id " + std::to_string(expected) + ", found " + fields[0] +
               " (rows must be sorted by id and cover 0..N-1)");
    }
    row_fn(fields);
    ++expected;
  }
  return expected;
}

}  // namespace

std::vector<AnnotationRecord> read_labels(const fs::path& path) {
  CsvReader csv(path);
  const auto head = csv.header({"preferred", "other"}, false);
  const bool has_annotator = head.size() == 3 && head[2] == "annotator";
  if (head.size() > 2 && !has_annotator) csv.fail("expected header 'preferred,other[,annotator]'");
  std::vector<AnnotationRecord> records;
  std::vector<std::string> fields;
  while (csv.next(fields)) {
    if (fields.size() != head.size()) csv.expect_columns(fields, head.size());
    AnnotationRecord r;
    r.preferred = csv.integer(fields[0], "node id");
    r.other = csv.integer(fields[1], "node id");
    if (r.preferred < 0 || r.other < 0) csv.fail("node ids must be non-negative");
    if (r.preferred == r.other) csv.fail("node " + fields[0] + " compared with itself");
    if (has_annotator) r.annotator = fields[2];
    records.push_back(std::move(r));
  }
  return records;
}

void write_labels(const fs::path& path, const std::vector<AnnotationRecord>& records) {
  const bool annotated = std::any_of(records.begin(), records.end(),
                                     [](const auto& r) { return !r.annotator.empty(); });
  auto out = open_out(path);
  out << (annotated ? "preferred,other,annotator\n" : "preferred,other\n");
  for (const auto& r : records) {
    out << r.preferred << ',' << r.other;
    if (annotated) out << ',' << quote_csv(r.annotator);
    out << '\n';
  }
  finish(out, path);
}

ComparisonGraph read_graph_csv(const fs::path& path, std::size_t n_nodes) {
  CsvReader csv(path);
  csv.header({"src", "dst", "weight"});
  std::vector<Edge> edges;
  std::vector<std::string> fields;
  while (csv.next(fields)) {
    csv.expect_columns(fields, 3);
    Edge e{csv.integer(fields[0], "node id"), csv.integer(fields[1], "node id"),
           csv.integer(fields[2], "weight")};
    if (e.src < 0 || e.dst < 0 || e.src >= NodeId(n_nodes) || e.dst >= NodeId(n_nodes)) {
      csv.fail("node id out of range [0, " + std::to_string(n_nodes) + ")");
    }
    if (e.src == e.dst) csv.fail("self-loop on node " + fields[0]);
    if (e.weight < 1) csv.fail("weight must be >= 1");
    edges.push_back(e);
  }
  return ComparisonGraph(n_nodes, std::move(edges));
}

void write_graph_csv(const fs::path& path, const ComparisonGraph& g) {
  auto out = open_out(path);
  out << "src,dst,weight\n";
  for (const Edge& e : g.edges()) out << e.src << ',' << e.dst << ',' << e.weight << '\n';
  finish(out, path);
}

FeatureMatrix read_features(const fs::path& path) {
  CsvReader csv(path);
  std::vector<std::string> head;
  {
    head = csv.header({"id"}, false);
    if (head.size() < 2) csv.fail("feature file needs at least one feature column");
    for (std::size_t k = 1; k < head.size(); ++k) {
      if (head[k] != "f" + std::to_string(k - 1)) {
        csv.fail("expected column 'f" + std::to_string(k - 1) + "', found '" + head[k] + "'");
      }
    }
  }
  const std::size_t d = head.size() - 1;
  std::vector<double> values;
  const std::size_t n = read_dense_ids(csv, head.size(), [&](const auto& fields) {
    for (std::size_t k = 1; k < fields.size(); ++k) values.push_back(csv.real(fields[k], "feature value"));
  });
  if (n == 0) csv.fail("feature file has no rows");
  FeatureMatrix phi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) phi(Eigen::Index(i), Eigen::Index(k)) = values[i * d + k];
  }
  return phi;
}

void write_features(const fs::path& path, const FeatureMatrix& phi) {
  auto out = open_out(path);
  out << "id";
  for (Eigen::Index k = 0; k < phi.cols(); ++k) out << ",f" << k;
  out << '\n';
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    out << i;
    for (Eigen::Index k = 0; k < phi.cols(); ++k) out << ',' << format_real(phi(i, k), 17);
    out << '\n';
  }
  finish(out, path);
}

RankModel read_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  auto fail = [&](std::size_t line, const std::string& msg) -> ValidationError {
    return ValidationError(path.string() + ":" + std::to_string(line) + ": " + msg);
  };
  auto parse_real = [&](const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw fail(line, "invalid number '" + s + "'");
    }
    return v;
  };
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  RankModel model;
  if (!next() || line.rfind("mu ", 0) != 0) throw fail(line_no, "expected 'mu <value>'");
  model.mu = parse_real(line.substr(3), line_no);
  if (!(model.mu > 0.0)) throw fail(line_no, "mu must be positive");
  if (!next() || line.rfind("dim ", 0) != 0) throw fail(line_no, "expected 'dim <count>'");
  std::int64_t dim = -1;
  {
    const std::string s = line.substr(4);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), dim);
    if (ec != std::errc() || ptr != s.data() + s.size() || dim < 1) {
      throw fail(line_no, "invalid dimension '" + s + "'");
    }
  }
  if (!next() || line != "beta") throw fail(line_no, "expected 'beta'");
  model.beta.resize(dim);
  for (std::int64_t k = 0; k < dim; ++k) {
    if (!next()) throw fail(line_no, "expected " + std::to_string(dim) + " coefficients, found " +
                                         std::to_string(k));
    model.beta(k) = parse_real(line, line_no);
  }
  if (next()) throw fail(line_no, "unexpected content after " + std::to_string(dim) + " coefficients");
  return model;
}

void write_model(const fs::path& path, const RankModel& model) {
  auto out = open_out(path);
  out << "mu " << format_real(model.mu, 17) << '\n';
  out << "dim " << model.dim() << '\n';
  out << "beta\n";
  for (Eigen::Index k = 0; k < model.dim(); ++k) out << format_real(model.beta(k), 17) << '\n';
  finish(out, path);
}

Eigen::VectorXd read_scores(const fs::path& path) {
  CsvReader csv(path);
  const auto head = csv.header({"id"}, false);
  if (head.size() != 2) csv.fail("expected header 'id,score'");
  std::vector<double> values;
  read_dense_ids(csv, 2, [&](const auto& fields) { values.push_back(csv.real(fields[1], "score")); });
  return Eigen::Map<Eigen::VectorXd>(values.data(), Eigen::Index(values.size()));
}

void write_scores(const fs::path& path, const Eigen::VectorXd& scores) {
  auto out = open_out(path);
  out << "id,score\n";
  for (Eigen::Index i = 0; i < scores.size(); ++i) out << i << ',' << format_real(scores(i), 17) << '\n';
  finish(out, path);
}

EdgeMask read_truth_outliers(const fs::path& path) {
  CsvReader csv(path);
  csv.header({"edge_index", "is_outlier"});
  EdgeMask truth;
  std::vector<std::string> fields;
  while (csv.next(fields)) {
    csv.expect_columns(fields, 2);
    if (csv.integer(fields[0], "edge index") != std::int64_t(truth.size())) {
      csv.fail("expected edge index " + std::to_string(truth.size()));
    }
    const auto v = csv.integer(fields[1], "outlier flag");
    if (v != 0 && v != 1) csv.fail("outlier flag must be 0 or 1");
    truth.push_back(static_cast<std::uint8_t>(v));
  }
  return truth;
}

void write_truth_outliers(const fs::path& path, const EdgeMask& truth) {
  auto out = open_out(path);
  out << "edge_index,is_outlier\n";
  for (std::size_t k = 0; k < truth.size(); ++k) out << k << ',' << int(truth[k]) << '\n';
  finish(out, path);
}

std::vector<std::pair<NodeId, NodeId>> read_pairs(const fs::path& path) {
  CsvReader csv(path);
  csv.header({"a", "b"});
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::vector<std::string> fields;
  while (csv.next(fields)) {
    csv.expect_columns(fields, 2);
    pairs.emplace_back(csv.integer(fields[0], "node id"), csv.integer(fields[1], "node id"));
  }
  return pairs;
}

void write_pairs(const fs::path& path, const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  auto out = open_out(path);
  out << "a,b\n";
  for (const auto& [a, b] : pairs) out << a << ',' << b << '\n';
  finish(out, path);
}

void write_path_csv(const fs::path& path, const ComparisonGraph& g, const OutlierPath& order) {
  auto out = open_out(path);
  out << "edge_index,src,dst,activation_lambda,rank\n";
  std::vector<std::size_t> rank(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[std::size_t(order.order[r])] = r + 1;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Edge& e = g.edge(k);
    out << k << ',' << e.src << ',' << e.dst << ','
        << format_real(order.activation_lambda(Eigen::Index(k)), 17) << ',' << rank[k] << '\n';
  }
  finish(out, path);
}

OutlierPath read_path_csv(const fs::path& path) {
  CsvReader csv(path);
  csv.header({"edge_index", "src", "dst", "activation_lambda", "rank"});
  std::vector<double> activation;
  std::vector<std::int64_t> ranks;
  std::vector<std::string> fields;
  while (csv.next(fields)) {
    csv.expect_columns(fields, 5);
    if (csv.integer(fields[0], "edge index") != std::int64_t(activation.size())) {
      csv.fail("expected edge index " + std::to_string(activation.size()));
    }
    activation.push_back(csv.real(fields[3], "activation lambda"));
    ranks.push_back(csv.integer(fields[4], "rank"));
  }
  OutlierPath out;
  out.activation_lambda = Eigen::Map<Eigen::VectorXd>(activation.data(), Eigen::Index(activation.size()));
  out.order.assign(activation.size(), -1);
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    const auto r = ranks[k];
    if (r < 1 || r > std::int64_t(ranks.size()) || out.order[std::size_t(r - 1)] != -1) {
      throw ValidationError(path.string() + ": ranks must be a permutation of 1..|E|");
    }
    out.order[std::size_t(r - 1)] = Eigen::Index(k);
  }
  return out;
}

void write_pruned_csv(const fs::path& path, const ComparisonGraph& g, const EdgeMask& f) {
  auto out = open_out(path);
  out << "edge_index,src,dst,weight\n";
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    if (f[k]) continue;
    const Edge& e = g.edge(k);
    out << k << ',' << e.src << ',' << e.dst << ',' << e.weight << '\n';
  }
  finish(out, path);
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw NumericalError("SHA-256 initialization failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), std::size_t(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xF];
  }
  return out;
}

void write_json(const fs::path& path, const Json& value) {
  auto out = open_out(path);
  out << value.dump(2) << '\n';
  finish(out, path);
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

namespace {

// Visits every key of a JSON object, rejecting keys without a handler.
using Handlers = std::map<std::string, std::function<void(const Json&)>, std::less<>>;

void apply(const Json& j, const std::string& where, const Handlers& handlers) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw ValidationError(where + ": unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + "." + key + ": " + e.what());
    }
  }
}

template <typename T>
T as(const Json& v, const char* what) {
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ValidationError(std::string(what) + " must be a string");
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ValidationError(std::string(what) + " must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0)) {
      throw ValidationError(std::string(what) + " must be a non-negative integer");
    }
  } else {
    if (!v.is_number()) throw ValidationError(std::string(what) + " must be a number");
  }
  return v.get<T>();
}

}  // namespace

PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig cfg) {
  apply(j, "pipeline", {
      {"method", [&](const Json& v) { cfg.method = parse_method(as<std::string>(v, "method")); }},
      {"prune_percent", [&](const Json& v) { cfg.prune_percent = as<double>(v, "prune_percent"); }},
      {"mu", [&](const Json& v) { cfg.mu = as<double>(v, "mu"); }},
      {"pca_dim",
       [&](const Json& v) {
         if (v.is_null()) {
           cfg.pca_dim.reset();
         } else {
           cfg.pca_dim = as<std::size_t>(v, "pca_dim");
         }
       }},
      {"hat_materialize_cap",
       [&](const Json& v) { cfg.hat_materialize_cap = as<std::size_t>(v, "hat_materialize_cap"); }},
      {"path",
       [&](const Json& v) {
         apply(v, "pipeline.path", {
             {"n_lambdas", [&](const Json& x) { cfg.path.n_lambdas = as<std::size_t>(x, "n_lambdas"); }},
             {"lambda_min_ratio",
              [&](const Json& x) { cfg.path.lambda_min_ratio = as<double>(x, "lambda_min_ratio"); }},
             {"cd_tolerance", [&](const Json& x) { cfg.path.cd_tolerance = as<double>(x, "cd_tolerance"); }},
             {"max_sweeps", [&](const Json& x) { cfg.path.max_sweeps = as<std::size_t>(x, "max_sweeps"); }},
         });
       }},
  });
  return cfg;
}

Json to_json(const PipelineConfig& cfg) {
  Json j;
  j["method"] = std::string(to_string(cfg.method));
  j["prune_percent"] = cfg.prune_percent;
  j["mu"] = cfg.mu;
  j["pca_dim"] = cfg.pca_dim ? Json(*cfg.pca_dim) : Json(nullptr);
  j["hat_materialize_cap"] = cfg.hat_materialize_cap;
  j["path"] = {{"n_lambdas", cfg.path.n_lambdas},
               {"lambda_min_ratio", cfg.path.lambda_min_ratio},
               {"cd_tolerance", cfg.path.cd_tolerance},
               {"max_sweeps", cfg.path.max_sweeps}};
  return j;
}

SyntheticSpec synthetic_spec_from_json(const Json& j, SyntheticSpec spec) {
  std::optional<double> onr;
  apply(j, "data", {
      {"n_nodes", [&](const Json& v) { spec.n_nodes = as<std::size_t>(v, "n_nodes"); }},
      {"feature_dim", [&](const Json& v) { spec.feature_dim = as<std::size_t>(v, "feature_dim"); }},
      {"graph",
       [&](const Json& v) {
         apply(v, "data.graph", {
             {"kind", [&](const Json& x) { spec.graph.kind = parse_graph_kind(as<std::string>(x, "kind")); }},
             {"n_pairs", [&](const Json& x) { spec.graph.n_pairs = as<std::size_t>(x, "n_pairs"); }},
             {"votes_per_pair",
              [&](const Json& x) { spec.graph.votes_per_pair = as<std::size_t>(x, "votes_per_pair"); }},
             {"connected", [&](const Json& x) { spec.graph.connected = as<bool>(x, "connected"); }},
         });
       }},
      {"theta_source",
       [&](const Json& v) { spec.theta_source = parse_theta_source(as<std::string>(v, "theta_source")); }},
      {"sigma", [&](const Json& v) { spec.sigma = as<double>(v, "sigma"); }},
      {"outlier_magnitude", [&](const Json& v) { spec.outlier_magnitude = as<double>(v, "outlier_magnitude"); }},
      {"onr", [&](const Json& v) { onr = as<double>(v, "onr"); }},
      {"flip_prob", [&](const Json& v) { spec.flip_prob = as<double>(v, "flip_prob"); }},
      {"error_model",
       [&](const Json& v) { spec.error_model = parse_error_model(as<std::string>(v, "error_model")); }},
      {"quadratic",
       [&](const Json& v) {
         apply(v, "data.quadratic", {
             {"a", [&](const Json& x) { spec.quadratic.a = as<double>(x, "a"); }},
             {"b", [&](const Json& x) { spec.quadratic.b = as<double>(x, "b"); }},
             {"c", [&](const Json& x) { spec.quadratic.c = as<double>(x, "c"); }},
         });
       }},
      {"n_test_nodes", [&](const Json& v) { spec.n_test_nodes = as<std::size_t>(v, "n_test_nodes"); }},
      {"n_test_pairs", [&](const Json& v) { spec.n_test_pairs = as<std::size_t>(v, "n_test_pairs"); }},
      {"seed", [&](const Json& v) { spec.seed = as<std::uint64_t>(v, "seed"); }},
  });
  if (onr) {
    if (j.contains("outlier_magnitude")) {
      throw ValidationError("data: give either onr or outlier_magnitude, not both");
    }
    spec.outlier_magnitude = *onr * spec.sigma;
  }
  return spec;
}

Json to_json(const SyntheticSpec& spec) {
  Json j;
  j["n_nodes"] = spec.n_nodes;
  j["feature_dim"] = spec.feature_dim;
  j["graph"] = {{"kind", std::string(to_string(spec.graph.kind))},
                {"n_pairs", spec.graph.n_pairs},
                {"votes_per_pair", spec.graph.votes_per_pair},
                {"connected", spec.graph.connected}};
  j["theta_source"] = std::string(to_string(spec.theta_source));
  j["sigma"] = spec.sigma;
  j["outlier_magnitude"] = spec.outlier_magnitude;
  j["flip_prob"] = spec.flip_prob;
  j["error_model"] = std::string(to_string(spec.error_model));
  j["quadratic"] = {{"a", spec.quadratic.a}, {"b", spec.quadratic.b}, {"c", spec.quadratic.c}};
  j["n_test_nodes"] = spec.n_test_nodes;
  j["n_test_pairs"] = spec.n_test_pairs;
  j["seed"] = spec.seed;
  return j;
}

SweepSpec sweep_spec_from_json(const Json& j) {
  SweepSpec spec;
  apply(j, "sweep", {
      {"data", [&](const Json& v) { spec.data = synthetic_spec_from_json(v); }},
      {"pipeline", [&](const Json& v) { spec.pipeline = pipeline_config_from_json(v); }},
      {"axis", [&](const Json& v) { spec.axis = parse_axis(as<std::string>(v, "axis")); }},
      {"values",
       [&](const Json& v) {
         if (!v.is_array()) throw ValidationError("values must be an array");
         spec.values.clear();
         for (const auto& x : v) spec.values.push_back(as<double>(x, "values[]"));
       }},
      {"methods",
       [&](const Json& v) {
         if (!v.is_array()) throw ValidationError("methods must be an array");
         spec.methods.clear();
         for (const auto& x : v) spec.methods.push_back(parse_method(as<std::string>(x, "methods[]")));
       }},
      {"n_seeds", [&](const Json& v) { spec.n_seeds = as<std::size_t>(v, "n_seeds"); }},
      {"base_seed", [&](const Json& v) { spec.base_seed = as<std::uint64_t>(v, "base_seed"); }},
      {"jobs", [&](const Json& v) { spec.jobs = as<std::size_t>(v, "jobs"); }},
  });
  return spec;
}

Json to_json(const SweepSpec& spec) {
  Json j;
  j["data"] = to_json(spec.data);
  j["pipeline"] = to_json(spec.pipeline);
  j["axis"] = std::string(to_string(spec.axis));
  j["values"] = spec.values;
  Json methods = Json::array();
  for (Method m : spec.methods) methods.push_back(std::string(to_string(m)));
  j["methods"] = methods;
  j["n_seeds"] = spec.n_seeds;
  j["base_seed"] = spec.base_seed;
  j["jobs"] = spec.jobs;
  return j;
}

Json to_json(const Diagnostics& d) {
  Json j;
  j["n_components"] = d.n_components;
  j["rank_x"] = d.rank_x;
  j["dim_gamma_featureless"] = d.dim_gamma_featureless;
  j["dim_gamma_urlr"] = d.dim_gamma_urlr;
  Json comps = Json::array();
  for (const auto& c : d.components) {
    comps.push_back({{"n_nodes", c.n_nodes},
                     {"n_edges", c.n_edges},
                     {"dim_gamma_featureless", c.dim_gamma_featureless}});
  }
  j["components"] = comps;
  return j;
}

void export_dataset(const fs::path& dir, const SyntheticDataset& data) {
  fs::create_directories(dir);
  write_labels(dir / "labels.csv", data.records);
  write_graph_csv(dir / "graph.csv", data.graph);
  write_features(dir / "features.csv", data.phi);
  write_truth_outliers(dir / "truth.csv", data.truth_outliers);
  write_scores(dir / "truth_theta.csv", data.truth_theta.theta);
  if (data.truth_beta) write_model(dir / "truth_model.txt", RankModel{*data.truth_beta, kDefaultMu});
  if (data.test_phi.rows() > 0) {
    write_features(dir / "test_features.csv", data.test_phi);
    write_scores(dir / "test_theta.csv", data.test_theta);
  }
  if (!data.test_pairs.empty()) write_pairs(dir / "test_pairs.csv", data.test_pairs);
}

}  // namespace urlr
