// SPDX-License-Identifier: Apache-2.0
#include "planrl/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "planrl/errors.hpp"
#include "planrl/rng.hpp"

namespace planrl {

std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("file_hash_hex: cannot open " + path);
    std::uint64_t h = kFnvOffset;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    }
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

std::string timestamp_utc() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::ordered_json doc;
    doc["format"] = "planrl-manifest";
    doc["version"] = 1;
    doc["code_version"] = manifest.code_version;
    doc["mode"] = manifest.mode;
    doc["world_path"] = manifest.world_path;
    doc["world_hash"] = manifest.world_hash;
    doc["started_at"] = manifest.started_at;
    doc["finished_at"] = manifest.finished_at;
    doc["out_dir"] = manifest.out_dir;
    nlohmann::ordered_json cfg;
    for (const auto& [key, value] : manifest.config) cfg[key] = value;
    doc["config"] = std::move(cfg);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_manifest: cannot open " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw DataError("write_manifest: failed writing " + path);
}

RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_manifest: cannot open " + path);
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("load_manifest: " + std::string(e.what()));
    }
    try {
        if (doc.at("format").get<std::string>() != "planrl-manifest") {
            throw DataError("load_manifest: not a manifest: " + path);
        }
        RunManifest m;
        m.code_version = doc.at("code_version").get<std::string>();
        m.mode = doc.at("mode").get<std::string>();
        m.world_path = doc.at("world_path").get<std::string>();
        m.world_hash = doc.at("world_hash").get<std::string>();
        m.started_at = doc.at("started_at").get<std::string>();
        m.finished_at = doc.at("finished_at").get<std::string>();
        m.out_dir = doc.at("out_dir").get<std::string>();
        for (const auto& [key, value] : doc.at("config").items()) {
            m.config[key] = value.get<std::string>();
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("load_manifest: malformed manifest: " + std::string(e.what()));
    }
}

} // namespace planrl
