#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "regionflow/clustering.hpp"

namespace regionflow {

struct CommunityHealthProfile {
  int community = 0;
  double population = 0.0;
  double providers = 0.0;  // full-time equivalents
  double area = 0.0;       // km^2
  std::map<std::string, double> extra_criteria;  // summed per community, reported only
};

struct DelineationSummary {
  int hpsa_count = 0;
  double mean_ratio = 0.0;      // over designated communities with finite ratio
  int infinite_ratio_count = 0;  // designated communities without providers
  double total_area = 0.0;
};

struct Designation {
  std::vector<bool> designated;
  std::vector<double> ratios;  // population / providers, +inf when providers = 0 < population
  DelineationSummary summary;
};

struct HealthTable {
  std::vector<double> population;
  std::vector<double> providers;
  std::vector<double> area;
  std::map<std::string, std::vector<double>> extra;
};

std::vector<CommunityHealthProfile> aggregate_profiles(const Partition& partition,
                                                       const std::vector<double>& population,
                                                       const std::vector<double>& providers,
                                                       const std::vector<double>& area,
                                                       const std::map<std::string, std::vector<double>>& extra = {});

inline constexpr double kDefaultRatioThreshold = 3500.0;

// A community is designated when population / providers >= ratio_threshold.
Designation designate(const std::vector<CommunityHealthProfile>& profiles,
                      double ratio_threshold = kDefaultRatioThreshold);

// "id,population,providers,area_km2[,extra...]" with one row per node.
HealthTable load_health(const std::filesystem::path& path, const std::vector<std::string>& node_ids);

std::string hpsa_to_json(const std::vector<CommunityHealthProfile>& profiles, const Designation& designation,
                         double ratio_threshold);

}  // namespace regionflow
