#ifndef PLUCASE_TESTS_UTIL_HPP
#define PLUCASE_TESTS_UTIL_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace plucase::testing {

std::string fixture(const std::string& relative);

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& relative = "") const;

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int code = 0;
  std::string out;
};

// Runs the command line entry point in-process with stdout captured.
CliResult run_cli(const std::vector<std::string>& args);

}  // namespace plucase::testing

#endif
