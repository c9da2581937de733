// SPDX-License-Identifier: Apache-2.0
#include "planrl/vocab.hpp"

#include "planrl/errors.hpp"
#include "planrl/rng.hpp"

namespace planrl {

TokenVocab TokenVocab::build(const KnowledgeWorld& world) {
    TokenVocab v;
    v.names_ = {"<end>", "<plan>", "<search>", "<browse>", "<answer>"};
    v.filler_begin_ = static_cast<int>(v.names_.size());
    for (const char* w : {"who", "is", "the", "of"}) v.names_.emplace_back(w);
    v.relation_begin_ = static_cast<int>(v.names_.size());
    for (const auto& r : world.relation_labels) v.names_.push_back(r);
    v.entity_begin_ = static_cast<int>(v.names_.size());
    for (const auto& e : world.entities) v.names_.push_back(e);
    v.page_begin_ = static_cast<int>(v.names_.size());
    for (const auto& p : world.pages) v.names_.push_back(p.page_id);

    for (int i = 0; i < static_cast<int>(v.names_.size()); ++i) {
        auto [it, inserted] = v.ids_.emplace(v.names_[static_cast<std::size_t>(i)], i);
        if (!inserted) {
            throw DataError("vocab: duplicate token name " + v.names_[static_cast<std::size_t>(i)]);
        }
    }
    std::uint64_t h = kFnvOffset;
    for (const auto& n : v.names_) {
        h = fnv1a64(n, h);
        h = fnv1a64('\0', h);
    }
    v.fingerprint_ = h;
    return v;
}

const std::string& TokenVocab::name(int id) const {
    if (id < 0 || id >= size()) throw ContractError("vocab: token id out of range");
    return names_[static_cast<std::size_t>(id)];
}

int TokenVocab::id(const std::string& name) const {
    int f = find(name);
    if (f < 0) throw DataError("vocab: unknown token \"" + name + "\"");
    return f;
}

int TokenVocab::find(const std::string& name) const {
    auto it = ids_.find(name);
    return it == ids_.end() ? -1 : it->second;
}

} // namespace planrl
