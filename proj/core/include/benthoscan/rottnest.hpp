#pragma once

#include <string>
#include <vector>

namespace benthoscan {

// One row of the published survey class distribution: code plus labeled
// point counts on the 2010-12 (train) and 2013 (test) sides.
struct SurveyClassRow {
  const char* code;
  long train_points;
  long test_points;
};

// All 78 annotation codes of the Rottnest Island survey.
const std::vector<SurveyClassRow>& rottnest_class_rows();

// Macroalgae codes are those with the MA prefix; MAECK is the kelp code.
inline constexpr const char* kKelpCode = "MAECK";
inline constexpr const char* kKelpNodeId = "1.1.1";

}  // namespace benthoscan
