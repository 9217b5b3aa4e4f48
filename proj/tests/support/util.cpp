#include "support/util.hpp"

#include <atomic>
#include <iostream>
#include <sstream>

#include "cli.hpp"

namespace plucase::testing {

std::string fixture(const std::string& relative) {
  return std::string(PLUCASE_FIXTURE_DIR) + "/" + relative;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("plucase-" + tag + "-" + std::to_string(++counter));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string TempDir::str(const std::string& relative) const {
  if (relative.empty()) return path_.string();
  return (path_ / relative).string();
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("plucase");
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  int code = 2;
  try {
    code = cli::run(static_cast<int>(argv.size()), argv.data());
  } catch (...) {
    std::cout.rdbuf(old);
    throw;
  }
  std::cout.rdbuf(old);
  return {code, captured.str()};
}

}  // namespace plucase::testing
