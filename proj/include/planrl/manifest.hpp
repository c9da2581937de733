// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "planrl/config.hpp"

namespace planrl {

inline constexpr const char* kCodeVersion = "planrl 0.1.0";

// Written before training starts; everything needed to replay the run.
struct RunManifest {
    KvMap config;         // resolved snapshot, shaping enables included
    std::string mode;     // vanilla | eas | sau | both
    std::string world_path;
    std::string world_hash; // fnv1a64 of the world file bytes, hex
    std::string code_version;
    std::string started_at;
    std::string finished_at; // empty until the run completes
    std::string out_dir;
};

std::string file_hash_hex(const std::string& path);
std::string timestamp_utc();

void write_manifest(const RunManifest& manifest, const std::string& path);
RunManifest load_manifest(const std::string& path);

} // namespace planrl
