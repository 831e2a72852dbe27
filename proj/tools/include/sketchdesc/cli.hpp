#pragma once

#include <iosfwd>

namespace sketchdesc {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;
inline constexpr int kAssumption = 3;
}  // namespace exit_code

/// `sketchdesc solve|diagnose|experiment ...`. Errors go to `err` as one JSON object.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace sketchdesc
