#include "taxwb/core/label.hpp"

#include "taxwb/core/error.hpp"
#include "taxwb/core/text.hpp"

namespace taxwb {

Label::Label(std::string_view text) : text_(text::trim(text)) {
  if (text_.empty()) throw Error(ErrorCode::invalid_label, "label is empty");
  if (text_.find(kPathSeparator) != std::string::npos) {
    throw Error(ErrorCode::invalid_label,
                "label '" + text_ + "' contains the path separator ' / '");
  }
}

}  // namespace taxwb
