#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dtcx/data.hpp"

// Synthetic stand-in for the UCI differentiated thyroid cancer recurrence
// file: same header, same category vocabularies, plausible clinical
// correlations driven by a latent severity score. Used by tests and demos
// when the real file is not available; it is not a substitute for it.
namespace dtcx::synthetic {

std::vector<std::string> thyroid_header();

data::RawTable thyroid_cohort(std::size_t n = 383, std::uint64_t seed = 2024);

std::string to_csv(const data::RawTable& table);
void write_csv(const data::RawTable& table, const std::filesystem::path& path);

}  // namespace dtcx::synthetic
