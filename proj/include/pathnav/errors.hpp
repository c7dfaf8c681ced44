#pragma once

#include <stdexcept>
#include <string>

namespace pathnav {

// One code per failure contract exposed by the library. Callers switch on
// the code; the message carries the specifics (field path, line number...).
enum class Errc {
  // slide model
  missing_level,
  dimension_mismatch,
  unreadable_raster,
  invalid_magnification,
  // region tiler
  invalid_overlap,
  out_of_bounds,
  // navigation DSL
  no_json_found,
  schema_violation,
  duplicate_region_id,
  invalid_viewport,
  inconsistent_action,
  unparseable,
  // backend
  timeout,
  rate_limited,
  api_error,
  too_many_images,
  script_exhausted,
  // agent runtime
  unknown_region_id,
  answer_missing,
  label_mismatch,
  // eval harness
  unknown_record_id,
  duplicate_prediction,
  invalid_args,
  empty_class,
  ragged_attempts,
  // dataset io
  duplicate_record_id,
  bad_answer_index,
  // generic
  io_error,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace pathnav
