#pragma once

#include <iosfwd>

namespace d2::cli {

/// Runs the d2c command line. Returns 0 on success, 2 on input errors and
/// 3 on solver failures; failures print one `error kind=... message=...`
/// line to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace d2::cli
