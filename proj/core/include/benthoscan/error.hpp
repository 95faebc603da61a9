#pragma once

#include <stdexcept>
#include <string>

namespace benthoscan {

enum class Errc {
  // configuration / environment
  config_error,
  io_error,
  // manifest ingest
  malformed_row,
  unknown_image_reference,
  duplicate_image_id,
  empty_site,
  year_not_covered,
  // taxonomy
  cycle_detected,
  duplicate_code,
  orphan_node,
  unknown_node,
  root_has_no_siblings,
  // preprocessing
  point_out_of_bounds,
  // feature extraction
  backend_unavailable,
  inference_failure,
  cache_corrupt,
  // solver
  single_class_input,
  dimension_mismatch,
  non_finite_feature,
  insufficient_samples_for_folds,
  // strategy assembly
  no_positives,
  no_negatives,
  unsupported_strategy,
  // evaluation
  length_mismatch,
  empty_test_set,
  // coverage
  no_labeled_points,
  degenerate_x,
};

const char* errc_name(Errc code);

// Process exit codes used by the CLI: 0 success, 2 configuration error,
// 3 data/dimension error, 4 solver failure.
int exit_code_for(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace benthoscan
