#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace csiwater::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,     // bad flags or config
  kIo = 3,        // unreadable input, unwritable output
  kEmpty = 4,     // no frames survived featurization
  kTraining = 5,  // a fold failed to train
};

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csiwater::cli
