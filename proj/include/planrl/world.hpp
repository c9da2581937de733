// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace planrl {

struct Triple {
    std::string subject;
    std::string relation;
    std::string object;

    bool operator==(const Triple&) const = default;
};

struct Page {
    std::string page_id; // usable as a URL token
    std::string title;
    std::vector<Triple> facts;
    std::string distractor_text;
};

// Seeded entity-relation graph with one document page per fact.
// Relations are functional: each (subject, relation) pair has exactly one
// object, so every hop chain has a unique answer.
struct KnowledgeWorld {
    std::uint64_t seed = 0;
    int hop_min = 1;
    int hop_max = 1;
    std::vector<std::string> entities;
    std::vector<std::string> relation_labels;
    std::vector<Triple> relations;
    std::vector<Page> pages;

    const Page* find_page(const std::string& page_id) const;
    // Functional lookup; nullopt when the pair is not asserted.
    std::optional<std::string> follow(const std::string& subject,
                                      const std::string& relation) const;

    void rebuild_indices();

  private:
    std::unordered_map<std::string, std::size_t> page_index_;
    std::unordered_map<std::string, std::string> relation_index_; // "subject|relation" -> object
};

struct Query {
    std::string query_id;
    std::string surface_form;
    std::string start_entity;
    std::vector<std::string> hop_chain; // applied in order from start_entity
    std::string answer;

    int hops() const { return static_cast<int>(hop_chain.size()); }
    bool operator==(const Query&) const = default;
};

struct SearchResult {
    std::string title;
    std::string url; // a page_id
    std::string snippet;

    bool operator==(const SearchResult&) const = default;
};

// Per-worker memo of search results; replayed queries must return the
// identical list. Iteration follows insertion order.
class SearchCache {
  public:
    const std::vector<SearchResult>* find(const std::string& normalized_query) const;
    void insert(const std::string& normalized_query, std::vector<SearchResult> results);
    const std::vector<std::pair<std::string, std::vector<SearchResult>>>& entries() const {
        return entries_;
    }
    std::size_t size() const { return entries_.size(); }

  private:
    std::vector<std::pair<std::string, std::vector<SearchResult>>> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct SearchResponse {
    std::string query;                 // as issued by the caller
    std::vector<SearchResult> results; // empty when error is set
    std::string error;                 // in-band tool failure text; empty on success
};

struct BrowseEntry {
    std::string url;
    std::string info;           // the page-information payload shown to the agent
    bool found = false;
    std::vector<Triple> facts;  // the facts actually included in `info`
};

KnowledgeWorld generate_world(std::uint64_t seed, int n_entities, int n_relations,
                              std::pair<int, int> hop_depth_range);

std::vector<Query> sample_queries(const KnowledgeWorld& world, int n, std::uint64_t rng_seed,
                                  double multihop_fraction = 0.75);

std::vector<SearchResponse> web_search(const KnowledgeWorld& world, SearchCache& cache,
                                       const std::vector<std::string>& queries, int k);

std::vector<BrowseEntry> web_browse(const KnowledgeWorld& world, const SearchCache& cache,
                                    const std::vector<std::string>& url_list,
                                    const std::string& originating_query);

// Deterministic lexical-overlap score used by web_search ranking.
int overlap_score(const std::vector<std::string>& query_tokens, const Page& page);

std::string world_to_string(const KnowledgeWorld& world);
void save_world(const KnowledgeWorld& world, const std::string& path);
KnowledgeWorld load_world(const std::string& path);

} // namespace planrl
