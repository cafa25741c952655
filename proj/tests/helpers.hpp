#pragma once

#include <filesystem>
#include <string>

#include "nestinf/io.hpp"

namespace testutil {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(NESTINF_FIXTURE_DIR) / name;
}

inline nestinf::CsvTable load_fixture(const std::string& name) {
  return nestinf::read_csv(fixture_path(name));
}

}  // namespace testutil
