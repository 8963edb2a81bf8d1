#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "crcsel/tabular.hpp"

namespace testing {

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("crcsel_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Continuous feature attributes a0, a1, ... with the given cells
/// (row-major) and outcomes.
inline crcsel::Dataset continuous_dataset(std::size_t attributes,
                                          std::vector<crcsel::Cell> cells,
                                          std::vector<crcsel::OutcomeRecord> outcomes) {
  std::vector<crcsel::AttributeSpec> specs;
  for (std::size_t a = 0; a < attributes; ++a) {
    specs.push_back({"a" + std::to_string(a), crcsel::AttributeKind::continuous(),
                     {crcsel::Role::Feature}});
  }
  std::vector<std::string> ids;
  for (std::size_t p = 0; p < outcomes.size(); ++p) ids.push_back("P" + std::to_string(p));
  return crcsel::Dataset(std::move(specs), std::move(ids), std::move(cells),
                         std::move(outcomes));
}

inline crcsel::OutcomeRecord alive(int months, int stage = 2) {
  return {months, crcsel::VitalStatus::Alive, stage};
}

inline crcsel::OutcomeRecord dead(int months, int stage = 3) {
  return {months, crcsel::VitalStatus::DeadOfDisease, stage};
}

}  // namespace testing
