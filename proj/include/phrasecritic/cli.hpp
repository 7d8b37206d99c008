#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "phrasecritic/critic.hpp"
#include "phrasecritic/explain.hpp"

namespace phrasecritic {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitMissingFile = 3,
  kExitFormat = 4,
  kExitRuntime = 5,
};

struct RunConfig {
  std::string command;
  std::filesystem::path data;
  std::filesystem::path model;
  std::filesystem::path out;
  std::uint64_t seed = 7;
  double threshold = kDefaultThreshold;
  int n = 100;
  int k = 10;
  int epochs = 30;
  LossKind loss = LossKind::Rank;
  bool svg = false;
  int classes = 20;
  int scenes_per_class = 150;
  int limit = 0;  // 0 keeps every test scene
};

// Directory for outputs when --out is absent: $PHRASECRITIC_OUT, else "out".
std::filesystem::path default_output_dir();

int exit_code_for(const std::exception& e);

// Runs one subcommand; errors become a JSON record on stderr and a nonzero code.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace phrasecritic
