#ifndef PLUCASE_TOOLS_CLI_HPP
#define PLUCASE_TOOLS_CLI_HPP

namespace plucase::cli {

// Parses the command line and runs one subcommand. Returns the process
// exit code: 0 on success, 1 when validation findings were reported,
// 2 on errors (usage, parse, I/O, inconsistent inputs).
int run(int argc, const char* const* argv);

}  // namespace plucase::cli

#endif
