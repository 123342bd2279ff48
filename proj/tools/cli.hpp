#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace ruelle::cli {

// Stable process exit codes.
enum ExitCode : int {
  kPass = 0,
  kIdentityFailure = 1,
  kConfigError = 2,
  kNonUnique = 3,
  kDegenerate = 4,
  kSamplingDegenerate = 5,
  kNonExtremal = 6,
};

// Runs `ruelle <subcommand> [flags]`; args excludes the program name.
// Reports go to out, diagnostics to err, files to --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// FNV-1a over the text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace ruelle::cli
