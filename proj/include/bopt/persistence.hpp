#pragma once

#include "bopt/campaign.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace bopt {

inline constexpr int kStateSchemaVersion = 1;
inline constexpr const char* kStateSchemaName = "bopt.campaign";
inline constexpr const char* kConfigSchemaName = "bopt.config";

nlohmann::ordered_json state_to_json(const CampaignState& state);
CampaignState state_from_json(const nlohmann::ordered_json& doc);

std::string serialise_state(const CampaignState& state);
CampaignState parse_state(const std::string& text);

// Atomic replace: written to a sibling temporary and renamed over path.
void save_state(const CampaignState& state, const std::filesystem::path& path);
CampaignState load_state(const std::filesystem::path& path);

// Config documents share the state dialect; every field is optional.
struct CampaignSetup {
    InputSpace space;
    CampaignConfig config;
};
CampaignSetup setup_from_json(const nlohmann::ordered_json& doc);
nlohmann::ordered_json setup_to_json(const CampaignSetup& setup);
CampaignSetup load_setup(const std::filesystem::path& path);

// Shortest round-trip decimal.
std::string format_double(double v);

void write_history_csv(const CampaignState& state, std::ostream& out);
void write_traces_csv(const BenchmarkResult& result, std::ostream& out);
void write_summary_csv(const BenchmarkResult& result, std::ostream& out);

}  // namespace bopt
