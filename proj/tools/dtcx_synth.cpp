// Writes a synthetic cohort with the UCI recurrence file's layout.

#include <CLI11.hpp>

#include <iostream>

#include "dtcx/error.hpp"
#include "dtcx/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic thyroid-recurrence cohort (same columns as the UCI file)"};
  std::string out;
  std::size_t rows = 383;
  std::uint64_t seed = 2024;
  app.add_option("--out", out, "Output CSV path")->required();
  app.add_option("--rows", rows)->check(CLI::PositiveNumber);
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);
  try {
    dtcx::synthetic::write_csv(dtcx::synthetic::thyroid_cohort(rows, seed), out);
  } catch (const dtcx::Error& e) {
    std::cerr << "dtcx_synth: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
