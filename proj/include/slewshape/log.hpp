#pragma once

#include <functional>
#include <string>

namespace slewshape {

using WarningSink = std::function<void(const std::string&)>;

/// Replaces the warning sink (stderr by default) and returns the previous one.
WarningSink set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace slewshape
