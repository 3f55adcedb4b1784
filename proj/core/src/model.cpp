#include "hlc/model.hpp"

#include <algorithm>
#include <cctype>

#include "hlc/error.hpp"
#include "hlc/text.hpp"

namespace hlc {

std::string_view to_string(Label label) {
  return label == Label::defect ? "defect" : "not_defect";
}

std::string_view display_name(Label label) {
  return label == Label::defect ? "defect" : "not defect";
}

Label parse_label(std::string_view token) {
  const std::string t = normalize_text(token);
  if (t == "defect") {
    return Label::defect;
  }
  if (t == "not defect" || t == "not_defect" || t == "no defect") {
    return Label::not_defect;
  }
  throw Error(ErrorCode::UnknownLabel, "unknown label '" + std::string(token) + "'");
}

void Requirement::validate() const {
  if (id.empty()) {
    throw Error(ErrorCode::InvalidRequirement, "requirement id is empty");
  }
  if (trim(text).empty()) {
    throw Error(ErrorCode::InvalidRequirement, "requirement " + id + " has blank text");
  }
}

void Finding::validate() const {
  requirement.validate();
  const auto& span = occurrence.span;
  if (span.start >= span.end || span.end > code_point_length(requirement.text)) {
    throw Error(ErrorCode::InvalidRequirement,
                "occurrence span out of range for requirement " + requirement.id);
  }
  if (code_point_substr(requirement.text, span.start, span.end) != occurrence.surface) {
    throw Error(ErrorCode::InvalidRequirement,
                "occurrence surface does not match requirement text for " + requirement.id);
  }
  if (normalize_text(occurrence.surface) != occurrence.catalog_entry) {
    throw Error(ErrorCode::InvalidRequirement,
                "occurrence surface does not normalize to its catalog entry");
  }
}

}  // namespace hlc
