#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bopt {

inline constexpr const char* kCampaignDirEnv = "BOPT_CAMPAIGN_DIR";
inline constexpr const char* kCampaignFileName = "campaign.json";

// Exit codes of cli_dispatch.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBudget = 3;

/// Runs one command line (argv[0] is the program name). Candidate rows and
/// reports go to out, diagnostics to err; tell reads CSV from in unless
/// --input names a file.
int cli_dispatch(const std::vector<std::string>& argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace bopt
