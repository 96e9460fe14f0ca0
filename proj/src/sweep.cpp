#include "urlr/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "urlr/error.hpp"
#include "urlr/eval.hpp"
#include "urlr/io.hpp"

namespace urlr {

std::string_view to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::prune:
      return "prune";
    case SweepAxis::error_rate:
      return "error_rate";
    case SweepAxis::onr:
      return "onr";
    case SweepAxis::density:
      return "density";
  }
  return "unknown";
}

SweepAxis parse_axis(std::string_view name) {
  if (name == "prune") return SweepAxis::prune;
  if (name == "error_rate") return SweepAxis::error_rate;
  if (name == "onr") return SweepAxis::onr;
  if (name == "density") return SweepAxis::density;
  throw ValidationError("unknown sweep axis '" + std::string(name) +
                        "' (expected prune, error_rate, onr or density)");
}

void SweepSpec::validate() const {
  if (values.empty()) throw ValidationError("sweep has no axis values");
  if (methods.empty()) throw ValidationError("sweep has no methods");
  if (n_seeds == 0) throw ValidationError("sweep needs at least one seed");
  if (jobs == 0) throw ValidationError("jobs must be >= 1");
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("axis values must be finite");
  }
  if (axis == SweepAxis::onr && !(data.sigma > 0.0)) {
    throw ValidationError("an onr sweep needs sigma > 0");
  }
  if (axis == SweepAxis::density && data.graph.kind == GraphKind::complete) {
    throw ValidationError("a density sweep needs a sampled graph, not a complete one");
  }
}

SyntheticSpec spec_at(const SweepSpec& sweep, double axis_value, std::uint64_t seed) {
  SyntheticSpec spec = sweep.data;
  spec.seed = seed;
  switch (sweep.axis) {
    case SweepAxis::prune:
      break;
    case SweepAxis::error_rate:
      spec.flip_prob = axis_value;
      break;
    case SweepAxis::onr:
      spec.outlier_magnitude = axis_value * spec.sigma;
      break;
    case SweepAxis::density:
      spec.graph.n_pairs = static_cast<std::size_t>(
          std::llround(axis_value * static_cast<double>(spec.n_nodes)));
      break;
  }
  return spec;
}

KendallResult score_ranking(const FitResult& fit, const SyntheticDataset& data) {
  if (!fit.model) throw ValidationError("fit has no ranking model to score");
  if (data.test_phi.rows() > 0) {
    const Eigen::VectorXd pred = predict(*fit.model, data.test_phi);
    if (!data.test_pairs.empty()) return kendall_on_pairs(pred, data.test_theta, data.test_pairs);
    return kendall(pred, data.test_theta);
  }
  return kendall(predict(*fit.model, data.phi), data.truth_theta.theta);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// One method and seed; all axis values for a prune sweep, else one value.
struct WorkUnit {
  std::size_t method_index = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> value_indices;
};

std::vector<TrialRow> run_unit(const SweepSpec& spec, const WorkUnit& unit) {
  const Method method = spec.methods[unit.method_index];
  std::vector<TrialRow> rows;
  for (std::size_t v : unit.value_indices) {
    const double value = spec.values[v];
    const SyntheticSpec data_spec = spec_at(spec, value, unit.seed);
    TrialRow row;
    row.method = method;
    row.seed = unit.seed;
    row.axis_value = value;
    row.p = spec.axis == SweepAxis::prune ? value : spec.pipeline.prune_percent;
    row.error_rate = data_spec.flip_prob;
    row.onr = data_spec.onr();
    rows.push_back(row);
  }

  try {
    const SyntheticDataset data = generate(spec_at(spec, spec.values[unit.value_indices[0]], unit.seed));
    std::vector<double> p_values;
    for (const TrialRow& row : rows) p_values.push_back(row.p);
    PipelineConfig cfg = spec.pipeline;
    cfg.method = method;

    // Only a prune sweep has several values per unit, and they share one dataset.
    std::vector<FitResult> fits;
    if (spec.axis == SweepAxis::prune) {
      cfg.prune_percent = 0.0;
      fits = fit_prune_grid(data.graph, data.phi, cfg, p_values);
    } else {
      fits.push_back(fit(data.graph, data.phi, cfg));
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
      TrialRow& row = rows[k];
      try {
        const FitResult& fit_k = fits[k];
        const KendallResult k_result = score_ranking(fit_k, data);
        row.kendall_distance = k_result.distance;
        row.kendall_correlation = k_result.correlation;
        const auto& truth = data.truth_outliers;
        const bool has_both = std::any_of(truth.begin(), truth.end(), [](auto t) { return t != 0; }) &&
                              std::any_of(truth.begin(), truth.end(), [](auto t) { return t == 0; });
        if (fit_k.outlier_order.size() == truth.size() && has_both) {
          row.auc = outlier_roc(fit_k.outlier_order, truth).auc;
        }
      } catch (const std::exception& e) {
        row.status = e.what();
        row.kendall_distance = row.kendall_correlation = kNaN;
      }
    }
  } catch (const std::exception& e) {
    for (TrialRow& row : rows) {
      row.status = e.what();
      row.kendall_distance = row.kendall_correlation = kNaN;
    }
  }
  return rows;
}

}  // namespace

SummaryStat summarize(const std::vector<double>& values) {
  SummaryStat s;
  s.n = values.size();
  if (s.n == 0) {
    s.mean = s.std = kNaN;
    return s;
  }
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

const SummaryRow& SweepResult::at(Method method, double axis_value) const {
  for (const SummaryRow& row : summary) {
    if (row.method == method && row.axis_value == axis_value) return row;
  }
  throw ValidationError("no summary row for method " + std::string(to_string(method)) +
                        " at axis value " + format_real(axis_value));
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<WorkUnit> units;
  for (std::size_t m = 0; m < spec.methods.size(); ++m) {
    for (std::size_t s = 0; s < spec.n_seeds; ++s) {
      const std::uint64_t seed = spec.base_seed + s;
      if (spec.axis == SweepAxis::prune) {
        WorkUnit unit{m, seed, {}};
        for (std::size_t v = 0; v < spec.values.size(); ++v) unit.value_indices.push_back(v);
        units.push_back(std::move(unit));
      } else {
        for (std::size_t v = 0; v < spec.values.size(); ++v) units.push_back({m, seed, {v}});
      }
    }
  }

  // Units are listed in output order; each worker writes only its own slots.
  std::vector<std::vector<TrialRow>> results(units.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < units.size(); i = next++) results[i] = run_unit(spec, units[i]);
  };
  const std::size_t n_threads = std::min(spec.jobs, units.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  SweepResult out;
  for (auto& rows : results) {
    for (auto& row : rows) out.rows.push_back(std::move(row));
  }

  for (Method method : spec.methods) {
    for (double value : spec.values) {
      std::vector<double> dist, corr, auc;
      for (const TrialRow& row : out.rows) {
        if (row.method != method || row.axis_value != value || !row.ok()) continue;
        dist.push_back(row.kendall_distance);
        corr.push_back(row.kendall_correlation);
        if (row.auc) auc.push_back(*row.auc);
      }
      out.summary.push_back({method, value, summarize(dist), summarize(corr), summarize(auc)});
    }
  }
  return out;
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c == '\n' ? ' ' : c;
  }
  return quoted + "\"";
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : ""; }

std::string stat_real(const SummaryStat& s, bool mean) {
  if (s.n == 0) return "";
  return format_real(mean ? s.mean : s.std);
}

}  // namespace

void write_curves_csv(std::ostream& out, const SweepSpec& spec, const SweepResult& result) {
  out << kCurvesHeader << '\n';
  const std::string axis(to_string(spec.axis));
  for (const TrialRow& r : result.rows) {
    out << to_string(r.method) << ',' << r.seed << ',' << axis << ',' << format_real(r.axis_value) << ','
        << format_real(r.p) << ',' << format_real(r.error_rate) << ',' << format_real(r.onr) << ','
        << (r.ok() ? format_real(r.kendall_distance) : "") << ','
        << (r.ok() ? format_real(r.kendall_correlation) : "") << ',' << optional_real(r.auc) << ','
        << csv_field(r.status) << '\n';
  }
  for (const SummaryRow& s : result.summary) {
    const SyntheticSpec at = spec_at(spec, s.axis_value, spec.base_seed);
    const double p = spec.axis == SweepAxis::prune ? s.axis_value : spec.pipeline.prune_percent;
    for (bool mean : {true, false}) {
      out << to_string(s.method) << ',' << (mean ? "mean" : "std") << ',' << axis << ','
          << format_real(s.axis_value) << ',' << format_real(p) << ',' << format_real(at.flip_prob)
          << ',' << format_real(at.onr()) << ',' << stat_real(s.kendall_distance, mean) << ','
          << stat_real(s.kendall_correlation, mean) << ',' << stat_real(s.auc, mean) << ",n="
          << s.kendall_distance.n << '\n';
    }
  }
}

void write_metrics_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const TrialRow& r : rows) {
    out << to_string(r.method) << ',' << r.seed << ',' << format_real(r.p) << ','
        << format_real(r.error_rate) << ',' << format_real(r.onr) << ','
        << (r.ok() ? format_real(r.kendall_distance) : "") << ',' << optional_real(r.auc) << '\n';
  }
}

}  // namespace urlr
