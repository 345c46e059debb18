#include "commoncv/datasets.hpp"

#include <string>

namespace commoncv::datasets {

Study mcv_surveys() {
  const GroupMoments groups[] = {{63, 84.13, 3.390, "1995"}, {72, 85.68, 2.946, "1996"}};
  return validate_study(groups);
}

const std::vector<RawGroup>& hospital_survival() {
  static const std::vector<RawGroup> data = {
      {"hospital1", {176, 105, 266, 227, 66}},
      {"hospital2", {24, 5, 155, 54}},
      {"hospital3", {58, 64, 15}},
      {"hospital4", {147, 42, 305, 92, 30, 82, 256, 237, 208, 147}},
  };
  return data;
}

const std::vector<double>& hospital4_listing_variant() {
  static const std::vector<double> data = {174, 42, 305, 92, 30, 82, 265, 237, 208, 147};
  return data;
}

Study hospitals() {
  std::vector<SampleSummary> groups;
  std::vector<std::string> labels;
  for (const auto& g : hospital_survival()) {
    groups.push_back(summarize(g.values));
    labels.emplace_back(g.label);
  }
  return validate_study(std::move(groups), std::move(labels));
}

}  // namespace commoncv::datasets
