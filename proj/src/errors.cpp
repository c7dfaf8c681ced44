#include "pathnav/errors.hpp"

namespace pathnav {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::missing_level: return "MissingLevel";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::unreadable_raster: return "UnreadableRaster";
    case Errc::invalid_magnification: return "InvalidMagnification";
    case Errc::invalid_overlap: return "InvalidOverlap";
    case Errc::out_of_bounds: return "OutOfBounds";
    case Errc::no_json_found: return "NoJsonFound";
    case Errc::schema_violation: return "SchemaViolation";
    case Errc::duplicate_region_id: return "DuplicateRegionId";
    case Errc::invalid_viewport: return "InvalidViewport";
    case Errc::inconsistent_action: return "InconsistentAction";
    case Errc::unparseable: return "Unparseable";
    case Errc::timeout: return "Timeout";
    case Errc::rate_limited: return "RateLimited";
    case Errc::api_error: return "ApiError";
    case Errc::too_many_images: return "TooManyImages";
    case Errc::script_exhausted: return "ScriptExhausted";
    case Errc::unknown_region_id: return "UnknownRegionId";
    case Errc::answer_missing: return "AnswerMissing";
    case Errc::label_mismatch: return "LabelMismatch";
    case Errc::unknown_record_id: return "UnknownRecordId";
    case Errc::duplicate_prediction: return "DuplicatePrediction";
    case Errc::invalid_args: return "InvalidArgs";
    case Errc::empty_class: return "EmptyClass";
    case Errc::ragged_attempts: return "RaggedAttempts";
    case Errc::duplicate_record_id: return "DuplicateRecordId";
    case Errc::bad_answer_index: return "BadAnswerIndex";
    case Errc::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace pathnav
