#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "p2f/backend.hpp"
#include "p2f/evaluation.hpp"

namespace p2f {

/// Settings for every subcommand. Loaded from a JSON document (unknown keys
/// are rejected, missing ones take the defaults below) and then overridden
/// by flags.
struct RunConfig {
  BackendConfig backend;
  /// Path of a mock script; replaces the HTTP backend when set.
  std::string mock;

  std::string scheme = "p2f-local";
  /// Override the scheme's engines: "llm" or "local".
  std::string fabrication;
  std::string combination;
  /// Override the scheme's directive, e.g. "P2F_V2".
  std::string directive;
  std::string decomposition_version = "V2";
  std::string fabrication_version = "V1";
  std::string combination_version = "V2";
  std::size_t m = 5;
  std::size_t repeats = 3;
  std::string plan_mode = "force-fake";
  double alpha = 0.5;
  double beta = 0.5;
  bool refine = true;
  bool llm_attack_generation = true;
  /// Attack type names; empty means all.
  std::vector<std::string> attacks;
  std::size_t completion_hints = 0;
  /// Directory of <LABEL>.txt replacement pools; empty uses the built-in ones.
  std::string pools;

  std::vector<std::size_t> ratios{1, 3, 5, 7, 9};
  std::vector<std::size_t> hints{0, 1, 2};
  /// Leak rate. Defaults to 1 for sweep and 0.5 for ablate.
  std::optional<double> lambda;
  /// Defaults to 1000 for sweep and 1 for ablate.
  std::optional<std::size_t> trials;
  std::size_t r = 7;
  std::vector<std::string> configs{"standard", "di", "no-decomposition", "no-combination", "full"};
  std::size_t per_category = 20;
  std::string templates;

  std::uint64_t seed = 0;
  std::string corpus;
  std::string question;
  std::string id;
  std::string out = "p2f-out";
  std::size_t jobs = 1;

  static RunConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  /// Throws ValidationError for bad values or missing referenced files.
  void validate() const;
  PipelineOptions pipeline_options() const;
};

/// Entry point of the p2f tool. `args` excludes the program name. Returns
/// 0 on success, 1 on usage or validation errors, 2 on backend failures.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace p2f
