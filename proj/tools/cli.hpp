#pragma once

#include <iosfwd>

namespace wmattr::cli {

// Exit codes.
inline constexpr int kOk = 0;
/// detect/attribute: content not detected. verify: a cross-check failed.
inline constexpr int kNegative = 1;
/// Bad arguments, unreadable files, config errors, solver budget exceeded.
inline constexpr int kError = 2;
/// simulate: at least one empirical rate missed its theoretical bound.
inline constexpr int kBoundViolation = 3;

/// Runs the command line; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace wmattr::cli
