#pragma once

// Multi-seed synthetic experiments along one axis.
//
// Seeds are paired: for a given seed every method and every axis value sees
// data from the same RNG streams, so per-seed differences between methods are
// meaningful.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "urlr/eval.hpp"
#include "urlr/pipeline.hpp"
#include "urlr/synth.hpp"

namespace urlr {

// prune: pruning rate p in percent. error_rate: flip probability.
// onr: outlier magnitude over sigma. density: sampled pairs per node.
enum class SweepAxis { prune, error_rate, onr, density };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_axis(std::string_view name);

struct SweepSpec {
  SyntheticSpec data;
  PipelineConfig pipeline;
  SweepAxis axis = SweepAxis::prune;
  std::vector<double> values;
  std::vector<Method> methods{Method::urlr, Method::huber_lasso_fl, Method::raw};
  std::size_t n_seeds = 10;
  std::uint64_t base_seed = 0;
  std::size_t jobs = 1;

  void validate() const;
};

struct TrialRow {
  Method method = Method::urlr;
  std::uint64_t seed = 0;
  double axis_value = 0.0;
  double p = 0.0;
  double error_rate = 0.0;
  double onr = 0.0;
  double kendall_distance = 0.0;
  double kendall_correlation = 0.0;
  std::optional<double> auc;
  // "ok" or the failure message.
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

struct SummaryStat {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

struct SummaryRow {
  Method method = Method::urlr;
  double axis_value = 0.0;
  SummaryStat kendall_distance;
  SummaryStat kendall_correlation;
  SummaryStat auc;
};

struct SweepResult {
  // Ordered by method (as listed in the spec), seed, axis value.
  std::vector<TrialRow> rows;
  // Ordered by method, axis value.
  std::vector<SummaryRow> summary;

  const SummaryRow& at(Method method, double axis_value) const;
};

// Ranking quality of a fitted model against the dataset's ground truth:
// held-out pairs when present, else all held-out nodes, else the training nodes.
KendallResult score_ranking(const FitResult& fit, const SyntheticDataset& data);

SyntheticSpec spec_at(const SweepSpec& sweep, double axis_value, std::uint64_t seed);

SweepResult run_sweep(const SweepSpec& spec);

SummaryStat summarize(const std::vector<double>& values);

// Header: method,seed,axis,axis_value,p,error_rate,onr,kendall_distance,
// kendall_correlation,auc,status. Summary rows carry "mean" or "std" as seed.
void write_curves_csv(std::ostream& out, const SweepSpec& spec, const SweepResult& result);
// Header: method,seed,p,error_rate,onr,kendall_distance,auc.
void write_metrics_csv(std::ostream& out, const std::vector<TrialRow>& rows);

inline constexpr std::string_view kCurvesHeader =
    "method,seed,axis,axis_value,p,error_rate,onr,kendall_distance,kendall_correlation,auc,status";
inline constexpr std::string_view kMetricsHeader =
    "method,seed,p,error_rate,onr,kendall_distance,auc";

}  // namespace urlr
