// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "planrl/world.hpp"

namespace planrl {

// Closed token alphabet for one world: five structural markers followed by
// every query word, relation label, entity, and page id. Token ids are the
// policy's categorical support and are stable for a given world.
class TokenVocab {
  public:
    static constexpr int kEndSeg = 0;
    static constexpr int kPlanMarker = 1;
    static constexpr int kSearchMarker = 2;
    static constexpr int kBrowseMarker = 3;
    static constexpr int kAnswerMarker = 4;

    static TokenVocab build(const KnowledgeWorld& world);

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int id) const;
    int id(const std::string& name) const;      // throws DataError when missing
    int find(const std::string& name) const;    // -1 when missing

    bool is_marker(int id) const { return id >= 0 && id <= kAnswerMarker; }
    bool is_filler(int id) const { return id >= filler_begin_ && id < relation_begin_; }
    bool is_relation(int id) const { return id >= relation_begin_ && id < entity_begin_; }
    bool is_entity(int id) const { return id >= entity_begin_ && id < page_begin_; }
    bool is_page(int id) const { return id >= page_begin_ && id < size(); }

    // Stable digest of the alphabet; checkpoints must match it.
    std::uint64_t fingerprint() const { return fingerprint_; }

  private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> ids_;
    int filler_begin_ = 0;
    int relation_begin_ = 0;
    int entity_begin_ = 0;
    int page_begin_ = 0;
    std::uint64_t fingerprint_ = 0;
};

} // namespace planrl
