#include "regionflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "regionflow/errors.hpp"
#include "regionflow/io.hpp"

namespace regionflow {
namespace {

void check_length(const Partition& partition, Eigen::Index n, const char* what) {
  if (static_cast<Eigen::Index>(partition.size()) != n)
    throw ValidationError(std::string(what) + ": partition length does not match the network");
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double intra_flow_ratio(const Matrix& flows, const Partition& partition) {
  check_length(partition, flows.rows(), "intra_flow_ratio");
  double intra = 0.0, total = 0.0;
  for (Eigen::Index i = 0; i < flows.rows(); ++i)
    for (Eigen::Index j = 0; j < flows.cols(); ++j) {
      total += flows(i, j);
      if (partition.label(i) == partition.label(j)) intra += flows(i, j);
    }
  if (!(total > 0.0)) throw ValidationError("intra_flow_ratio: total flow must be positive");
  return intra / total;
}

InequalityResult inequality_raw(const Matrix& attributes, const Partition& partition) {
  check_length(partition, attributes.rows(), "inequality");
  constexpr double kMuClamp = 1e-6;
  const auto groups = partition.members();
  InequalityResult result;
  result.value = 1.0;
  for (Eigen::Index f = 0; f < attributes.cols(); ++f) {
    std::vector<double> per_community;
    for (const auto& members : groups) {
      if (members.size() < 2) {
        per_community.push_back(0.0);
        continue;
      }
      double mu = 0.0;
      for (int i : members) mu += attributes(i, f);
      mu /= static_cast<double>(members.size());
      double var = 0.0;
      for (int i : members) var += (attributes(i, f) - mu) * (attributes(i, f) - mu);
      const double sigma = std::sqrt(var / static_cast<double>(members.size()));
      const double m = std::clamp(mu, kMuClamp, 1.0 - kMuClamp);
      per_community.push_back(sigma / std::sqrt(m * (1.0 - m)));
    }
    double med = median(per_community);
    result.feature_medians.push_back(med);
    result.value *= med;
  }
  if (attributes.cols() == 0) result.value = 0.0;
  return result;
}

std::vector<double> normalize_inequality(const std::vector<double>& raw) {
  if (raw.size() < 2) throw ValidationError("normalize_inequality: batch needs at least two values");
  auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double min = *lo, max = *hi;
  if (!(max > min)) throw ValidationError("normalize_inequality: batch has no spread (constant values)");
  std::vector<double> out;
  out.reserve(raw.size());
  for (double v : raw) out.push_back((v - min) / (max - min));
  return out;
}

CosineResult cosine_within(const Matrix& attributes, const Partition& partition) {
  check_length(partition, attributes.rows(), "cosine_within");
  Eigen::VectorXd norms = attributes.rowwise().norm();
  CosineResult result;
  for (const auto& members : partition.members()) {
    if (members.size() < 2) continue;
    std::vector<double> sims;
    sims.reserve(members.size() * (members.size() - 1) / 2);
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        const int i = members[a], j = members[b];
        const double denom = norms(i) * norms(j);
        if (denom == 0.0) throw ValidationError("cosine_within: all-zero attribute row");
        sims.push_back(attributes.row(i).dot(attributes.row(j)) / denom);
      }
    result.community_medians.push_back(median(std::move(sims)));
  }
  if (result.community_medians.empty())
    throw ValidationError("cosine_within: every community has a single member");
  result.value = median(result.community_medians);
  return result;
}

double synthetic_score(double intra_flow, double cosine, double inequality_norm) {
  return intra_flow * cosine * (1.0 - inequality_norm);
}

double join_count_ratio(const Matrix& adjacency, const Partition& partition) {
  check_length(partition, adjacency.rows(), "join_count_ratio");
  double same = 0.0, diff = 0.0;
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i)
    for (Eigen::Index j = i + 1; j < adjacency.cols(); ++j)
      if (adjacency(i, j) != 0.0) (partition.label(i) == partition.label(j) ? same : diff) += 1.0;
  if (same + diff == 0.0) throw ValidationError("join_count_ratio: adjacency has no edges");
  return same / (same + diff);
}

MetricsReport evaluate_partition(const SpatialNetwork& network, const Partition& partition, const std::string& name) {
  MetricsReport r;
  r.name = name;
  r.communities = partition.k();
  r.intra_flow_ratio = intra_flow_ratio(network.flows, partition);
  auto ineq = inequality_raw(network.attributes, partition);
  r.inequality_raw = ineq.value;
  r.inequality_feature_medians = std::move(ineq.feature_medians);
  auto cos = cosine_within(network.attributes, partition);
  r.cosine_similarity = cos.value;
  r.cosine_community_medians = std::move(cos.community_medians);
  r.join_count_ratio = join_count_ratio(network.adjacency, partition);
  return r;
}

void normalize_batch(std::vector<MetricsReport>& reports) {
  std::vector<double> raw;
  for (const auto& r : reports) raw.push_back(r.inequality_raw);
  std::vector<double> norm;
  try {
    norm = normalize_inequality(raw);
  } catch (const ValidationError&) {
    for (auto& r : reports) r.inequality_norm.reset(), r.synthetic_score.reset();
    return;
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    reports[i].inequality_norm = norm[i];
    reports[i].synthetic_score = synthetic_score(reports[i].intra_flow_ratio, reports[i].cosine_similarity, norm[i]);
  }
}

std::string metrics_to_json(const std::vector<MetricsReport>& reports) {
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["communities"] = r.communities;
    j["intra_flow_ratio"] = r.intra_flow_ratio;
    j["inequality_raw"] = r.inequality_raw;
    j["inequality_norm"] = r.inequality_norm ? nlohmann::ordered_json(*r.inequality_norm) : nlohmann::ordered_json();
    j["cosine_similarity"] = r.cosine_similarity;
    j["synthetic_score"] = r.synthetic_score ? nlohmann::ordered_json(*r.synthetic_score) : nlohmann::ordered_json();
    j["join_count_ratio"] = r.join_count_ratio;
    j["inequality_feature_medians"] = r.inequality_feature_medians;
    j["cosine_community_medians"] = r.cosine_community_medians;
    runs.push_back(std::move(j));
  }
  nlohmann::ordered_json doc;
  doc["runs"] = std::move(runs);
  return doc.dump(2) + "\n";
}

std::string metrics_to_csv(const std::vector<MetricsReport>& reports) {
  std::ostringstream out;
  out << "name,communities,intra_flow_ratio,inequality_raw,inequality_norm,cosine_similarity,synthetic_score,"
         "join_count_ratio\n";
  auto opt = [](const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); };
  for (const auto& r : reports)
    out << r.name << "," << r.communities << "," << io::format_double(r.intra_flow_ratio) << ","
        << io::format_double(r.inequality_raw) << "," << opt(r.inequality_norm) << ","
        << io::format_double(r.cosine_similarity) << "," << opt(r.synthetic_score) << ","
        << io::format_double(r.join_count_ratio) << "\n";
  return out.str();
}

}  // namespace regionflow
