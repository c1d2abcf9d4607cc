#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gearnet::cli {

enum ExitCode : int { kSuccess = 0, kCheckFailed = 1, kUsage = 2, kIo = 3 };

/// Runs one subcommand (synth, train, experiment, gradcheck, eval). `args`
/// excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace gearnet::cli
