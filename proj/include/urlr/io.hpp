#pragma once

// File formats. Every reader reports failures as ValidationError with the
// file name and 1-based line number.
//
//   labels      preferred,other[,annotator]
//   graph       src,dst,weight
//   features    id,f0,f1,...        rows sorted by id, covering 0..N-1
//   scores      id,score            also used for ground-truth orders
//   truth       edge_index,is_outlier
//   pairs       a,b                 held-out evaluation pairs
//   path dump   edge_index,src,dst,activation_lambda,rank
//   pruned      edge_index,src,dst,weight
//   model       "mu <v>", "dim <d>", "beta", then one coefficient per line

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "urlr/graph.hpp"
#include "urlr/lasso_path.hpp"
#include "urlr/pipeline.hpp"
#include "urlr/solver.hpp"
#include "urlr/sweep.hpp"
#include "urlr/synth.hpp"

namespace urlr {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Shortest "%.<digits>g" rendering; 17 digits round-trips a double.
std::string format_real(double v, int digits = 12);

std::vector<AnnotationRecord> read_labels(const fs::path& path);
void write_labels(const fs::path& path, const std::vector<AnnotationRecord>& records);

ComparisonGraph read_graph_csv(const fs::path& path, std::size_t n_nodes);
void write_graph_csv(const fs::path& path, const ComparisonGraph& g);

FeatureMatrix read_features(const fs::path& path);
void write_features(const fs::path& path, const FeatureMatrix& phi);

RankModel read_model(const fs::path& path);
void write_model(const fs::path& path, const RankModel& model);

Eigen::VectorXd read_scores(const fs::path& path);
void write_scores(const fs::path& path, const Eigen::VectorXd& scores);

EdgeMask read_truth_outliers(const fs::path& path);
void write_truth_outliers(const fs::path& path, const EdgeMask& truth);

std::vector<std::pair<NodeId, NodeId>> read_pairs(const fs::path& path);
void write_pairs(const fs::path& path, const std::vector<std::pair<NodeId, NodeId>>& pairs);

void write_path_csv(const fs::path& path, const ComparisonGraph& g, const OutlierPath& order);
// Activation lambdas of the path dump, indexed by edge, plus the order.
OutlierPath read_path_csv(const fs::path& path);

void write_pruned_csv(const fs::path& path, const ComparisonGraph& g, const EdgeMask& f);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

void write_json(const fs::path& path, const Json& value);
Json read_json(const fs::path& path);

// JSON <-> configuration. Unknown keys are rejected so typos do not pass
// silently; absent keys keep their defaults.
PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig base = {});
Json to_json(const PipelineConfig& cfg);
SyntheticSpec synthetic_spec_from_json(const Json& j, SyntheticSpec base = {});
Json to_json(const SyntheticSpec& spec);
SweepSpec sweep_spec_from_json(const Json& j);
Json to_json(const SweepSpec& spec);
Json to_json(const Diagnostics& d);

// Writes every file of a synthetic dataset into `dir`: labels.csv, graph.csv,
// features.csv, truth.csv, truth_theta.csv and, when present, truth_model.txt,
// test_features.csv, test_theta.csv, test_pairs.csv.
void export_dataset(const fs::path& dir, const SyntheticDataset& data);

}  // namespace urlr
