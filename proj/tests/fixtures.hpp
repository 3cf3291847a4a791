#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "dtcx/commands.hpp"
#include "dtcx/synthetic.hpp"

namespace dtcx::testing {

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(DTCX_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Synthetic cohort on disk plus quick training options for it.
inline cli::TrainOptions small_training(const std::filesystem::path& dir, std::size_t epochs = 5) {
  const auto csv = dir / "cohort.csv";
  synthetic::write_csv(synthetic::thyroid_cohort(), csv);
  cli::TrainOptions opts;
  opts.data = csv;
  opts.out = dir / "run";
  opts.seed = 3;
  opts.hidden = {16, 8};
  opts.config.epochs = epochs;
  return opts;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace dtcx::testing
