// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>

#include "planrl/trainer.hpp"

namespace planrl {

using KvMap = std::map<std::string, std::string>;

// Flat "key = value" text with '#' comments; config_version is mandatory.
KvMap parse_config_text(const std::string& text);
KvMap load_config_file(const std::string& path);
std::string config_to_text(const KvMap& kv);

// Everything a training run needs beyond the world itself.
struct RunSpec {
    TrainConfig train;
    int train_queries = 96;
    int heldout_queries = 48;
    std::uint64_t query_seed = 1;
    double multihop_fraction = 0.75;
};

// Strict: unknown keys and malformed values raise ConfigError.
RunSpec run_spec_from_kv(const KvMap& kv);
// Complete snapshot, defaults included; run_spec_from_kv round-trips it.
KvMap kv_from_run_spec(const RunSpec& spec);

} // namespace planrl
