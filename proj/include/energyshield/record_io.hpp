#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "energyshield/orchestrator.hpp"

namespace energyshield {

struct Provenance {
    std::uint64_t config_hash = 0;
    std::uint64_t seed_base = 0;
};

// column order of the episode CSV
extern const char* const kEpisodeColumns;

// doubles are written with 17 significant digits so reading back is exact
void write_episode_csv(std::ostream& out, const EpisodeRecord& rec, const Provenance& prov);
std::string episode_csv(const EpisodeRecord& rec, const Provenance& prov);

// throws ConfigError on malformed input
EpisodeRecord read_episode_csv(std::istream& in, Provenance* prov = nullptr);
EpisodeRecord parse_episode_csv(const std::string& text, Provenance* prov = nullptr);

std::string episode_file_name(const EpisodeRecord& rec);

}  // namespace energyshield
