#include "regionflow/hpsa.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "json.hpp"
#include "regionflow/errors.hpp"
#include "regionflow/io.hpp"

namespace regionflow {

std::vector<CommunityHealthProfile> aggregate_profiles(const Partition& partition,
                                                       const std::vector<double>& population,
                                                       const std::vector<double>& providers,
                                                       const std::vector<double>& area,
                                                       const std::map<std::string, std::vector<double>>& extra) {
  const std::size_t n = partition.size();
  if (population.size() != n || providers.size() != n || area.size() != n)
    throw ValidationError("aggregate_profiles: per-node vectors must have length " + std::to_string(n));
  for (const auto& [name, values] : extra)
    if (values.size() != n) throw ValidationError("aggregate_profiles: criterion '" + name + "' has wrong length");
  std::vector<CommunityHealthProfile> out(static_cast<std::size_t>(partition.k()));
  for (int c = 0; c < partition.k(); ++c) out[c].community = c + 1;
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : {population[i], providers[i], area[i]})
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError("aggregate_profiles: node " + std::to_string(i) + " has a negative or non-finite value");
    auto& prof = out[partition.label(i) - 1];
    prof.population += population[i];
    prof.providers += providers[i];
    prof.area += area[i];
    for (const auto& [name, values] : extra) prof.extra_criteria[name] += values[i];
  }
  return out;
}

Designation designate(const std::vector<CommunityHealthProfile>& profiles, double ratio_threshold) {
  if (!(ratio_threshold > 0.0)) throw ValidationError("designate: ratio threshold must be positive");
  Designation d;
  double finite_sum = 0.0;
  int finite_count = 0;
  for (const auto& p : profiles) {
    double ratio;
    if (p.providers > 0.0)
      ratio = p.population / p.providers;
    else
      ratio = p.population > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    const bool flagged = ratio >= ratio_threshold;
    d.ratios.push_back(ratio);
    d.designated.push_back(flagged);
    if (!flagged) continue;
    ++d.summary.hpsa_count;
    d.summary.total_area += p.area;
    if (std::isinf(ratio)) {
      ++d.summary.infinite_ratio_count;
    } else {
      finite_sum += ratio;
      ++finite_count;
    }
  }
  d.summary.mean_ratio = finite_count ? finite_sum / finite_count : 0.0;
  return d;
}

HealthTable load_health(const std::filesystem::path& path, const std::vector<std::string>& node_ids) {
  auto table = io::read_csv(path);
  const std::vector<std::string> required{"id", "population", "providers", "area_km2"};
  if (table.header.size() < required.size() || !std::equal(required.begin(), required.end(), table.header.begin()))
    throw ValidationError(path.string() + ": header must start with id,population,providers,area_km2");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < node_ids.size(); ++i) index.emplace(node_ids[i], i);
  HealthTable out;
  const std::size_t n = node_ids.size();
  out.population.assign(n, 0.0);
  out.providers.assign(n, 0.0);
  out.area.assign(n, 0.0);
  for (std::size_t c = required.size(); c < table.header.size(); ++c) out.extra[table.header[c]].assign(n, 0.0);
  std::vector<bool> seen(n, false);
  for (const auto& row : table.rows) {
    std::string where = path.string() + " row " + std::to_string(row.line);
    auto it = index.find(row.cells[0]);
    if (it == index.end()) throw ValidationError(where + ": unknown id '" + row.cells[0] + "'");
    const std::size_t i = it->second;
    if (seen[i]) throw ValidationError(where + ": duplicate id");
    seen[i] = true;
    out.population[i] = io::parse_double(row.cells[1], where);
    out.providers[i] = io::parse_double(row.cells[2], where);
    out.area[i] = io::parse_double(row.cells[3], where);
    if (out.population[i] < 0 || out.providers[i] < 0 || out.area[i] < 0)
      throw ValidationError(where + ": values must be non-negative");
    for (std::size_t c = required.size(); c < table.header.size(); ++c)
      out.extra[table.header[c]][i] = io::parse_double(row.cells[c], where);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i]) throw ValidationError(path.string() + ": missing row for node '" + node_ids[i] + "'");
  return out;
}

std::string hpsa_to_json(const std::vector<CommunityHealthProfile>& profiles, const Designation& d,
                         double ratio_threshold) {
  using nlohmann::ordered_json;
  ordered_json communities = ordered_json::array();
  for (std::size_t c = 0; c < profiles.size(); ++c) {
    const auto& p = profiles[c];
    ordered_json j;
    j["community"] = p.community;
    j["population"] = p.population;
    j["providers"] = p.providers;
    j["area_km2"] = p.area;
    j["ratio"] = std::isinf(d.ratios[c]) ? ordered_json("inf") : ordered_json(d.ratios[c]);
    j["designated"] = static_cast<bool>(d.designated[c]);
    j["extra_criteria"] = p.extra_criteria;
    communities.push_back(std::move(j));
  }
  ordered_json doc;
  doc["ratio_threshold"] = ratio_threshold;
  doc["communities"] = std::move(communities);
  doc["summary"] = {{"hpsa_number", d.summary.hpsa_count},
                    {"population_to_provider", d.summary.mean_ratio},
                    {"infinite_ratio_count", d.summary.infinite_ratio_count},
                    {"total_area_km2", d.summary.total_area}};
  return doc.dump(2) + "\n";
}

}  // namespace regionflow
