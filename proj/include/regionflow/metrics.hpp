#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regionflow/clustering.hpp"
#include "regionflow/network.hpp"

namespace regionflow {

// Share of total flow (ordered pairs, diagonal included) that stays inside
// communities.
double intra_flow_ratio(const Matrix& flows, const Partition& partition);

struct InequalityResult {
  double value = 0.0;                   // product of per-feature medians
  std::vector<double> feature_medians;  // median over communities, per feature
};

// sigma / sqrt(mu (1 - mu)) per feature and community with population sigma
// and mu clamped to [1e-6, 1 - 1e-6]; singleton communities score 0.
InequalityResult inequality_raw(const Matrix& attributes, const Partition& partition);

// Min-max over a batch; needs at least two distinct values.
std::vector<double> normalize_inequality(const std::vector<double>& raw);

struct CosineResult {
  double value = 0.0;
  std::vector<double> community_medians;  // communities with >= 2 members, in label order
};

// Median over communities of the median pairwise cosine similarity.
CosineResult cosine_within(const Matrix& attributes, const Partition& partition);

double synthetic_score(double intra_flow, double cosine, double inequality_norm);

// Share of adjacent pairs whose endpoints share a community.
double join_count_ratio(const Matrix& adjacency, const Partition& partition);

double median(std::vector<double> values);

struct MetricsReport {
  std::string name;
  double intra_flow_ratio = 0.0;
  double inequality_raw = 0.0;
  std::optional<double> inequality_norm;
  double cosine_similarity = 0.0;
  std::optional<double> synthetic_score;
  double join_count_ratio = 0.0;
  int communities = 0;
  std::vector<double> inequality_feature_medians;
  std::vector<double> cosine_community_medians;
};

MetricsReport evaluate_partition(const SpatialNetwork& network, const Partition& partition,
                                 const std::string& name = {});

// Fills inequality_norm and synthetic_score when the batch has a proper
// range; otherwise both stay unset.
void normalize_batch(std::vector<MetricsReport>& reports);

std::string metrics_to_json(const std::vector<MetricsReport>& reports);
std::string metrics_to_csv(const std::vector<MetricsReport>& reports);

}  // namespace regionflow
