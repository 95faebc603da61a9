#include "benthoscan/error.hpp"

namespace benthoscan {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IoError";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::unknown_image_reference: return "UnknownImageReference";
    case Errc::duplicate_image_id: return "DuplicateImageId";
    case Errc::empty_site: return "EmptySite";
    case Errc::year_not_covered: return "YearNotCovered";
    case Errc::cycle_detected: return "CycleDetected";
    case Errc::duplicate_code: return "DuplicateCode";
    case Errc::orphan_node: return "OrphanNode";
    case Errc::unknown_node: return "UnknownNode";
    case Errc::root_has_no_siblings: return "RootHasNoSiblings";
    case Errc::point_out_of_bounds: return "PointOutOfBounds";
    case Errc::backend_unavailable: return "BackendUnavailable";
    case Errc::inference_failure: return "InferenceFailure";
    case Errc::cache_corrupt: return "CacheCorrupt";
    case Errc::single_class_input: return "SingleClassInput";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::non_finite_feature: return "NonFiniteFeature";
    case Errc::insufficient_samples_for_folds: return "InsufficientSamplesForFolds";
    case Errc::no_positives: return "NoPositives";
    case Errc::no_negatives: return "NoNegatives";
    case Errc::unsupported_strategy: return "UnsupportedStrategy";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty_test_set: return "EmptyTestSet";
    case Errc::no_labeled_points: return "NoLabeledPoints";
    case Errc::degenerate_x: return "DegenerateX";
  }
  return "UnknownError";
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::config_error:
    case Errc::io_error:
    case Errc::backend_unavailable:
      return 2;
    case Errc::single_class_input:
    case Errc::insufficient_samples_for_folds:
    case Errc::no_positives:
    case Errc::no_negatives:
    case Errc::unsupported_strategy:
    case Errc::inference_failure:
      return 4;
    default:
      return 3;
  }
}

}  // namespace benthoscan
