// SPDX-License-Identifier: Apache-2.0
#include "planrl/world.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "planrl/errors.hpp"
#include "planrl/rng.hpp"
#include "planrl/text.hpp"

namespace planrl {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kMaxHopDepth = 5;
constexpr std::size_t kSnippetChars = 120;

const std::vector<std::string> kRelationPool = {
    "founder", "patron", "origin", "rival", "steward", "emblem", "mentor", "anthem"};

const std::vector<std::string> kTitleSuffixes = {
    "records", "profile", "overview", "archive", "gazette", "chronicle"};

const std::vector<std::string> kDistractorWords = {
    "annual",  "report", "collected", "public",  "summary", "edition",
    "volume",  "review", "bulletin",  "general", "notes",   "digest"};

// Query filler words; entity and relation names must avoid these.
const std::set<std::string> kReservedWords = {"who", "is", "the", "of"};

std::string make_entity_name(Rng& rng) {
    static const std::vector<std::string> onsets = {"b", "d",  "f",  "g",  "k",  "l",
                                                    "m", "n",  "r",  "s",  "t",  "v",
                                                    "z", "br", "dr", "kr", "st", "tr"};
    static const std::vector<std::string> vowels = {"a", "e", "i", "o", "u", "a", "o", "e"};
    static const std::vector<std::string> codas = {"", "n", "l", "r", "s", "x", "k", "th"};
    int syllables = 2 + static_cast<int>(rng.next_below(2));
    std::string name;
    for (int s = 0; s < syllables; ++s) {
        name += onsets[rng.next_below(onsets.size())];
        name += vowels[rng.next_below(vowels.size())];
    }
    name += codas[rng.next_below(codas.size())];
    return name;
}

std::string fact_text(const Triple& t) {
    return t.subject + " " + t.relation + ": " + t.object + ".";
}

std::string page_key(const std::string& subject, const std::string& relation) {
    return subject + "|" + relation;
}

} // namespace

const Page* KnowledgeWorld::find_page(const std::string& page_id) const {
    auto it = page_index_.find(page_id);
    if (it == page_index_.end()) return nullptr;
    return &pages[it->second];
}

std::optional<std::string> KnowledgeWorld::follow(const std::string& subject,
                                                  const std::string& relation) const {
    auto it = relation_index_.find(page_key(subject, relation));
    if (it == relation_index_.end()) return std::nullopt;
    return it->second;
}

void KnowledgeWorld::rebuild_indices() {
    page_index_.clear();
    relation_index_.clear();
    for (std::size_t i = 0; i < pages.size(); ++i) page_index_[pages[i].page_id] = i;
    for (const Triple& t : relations) {
        auto [it, inserted] = relation_index_.emplace(page_key(t.subject, t.relation), t.object);
        if (!inserted && it->second != t.object) {
            throw DataError("relation is not functional: " + t.subject + " " + t.relation);
        }
    }
}

KnowledgeWorld generate_world(std::uint64_t seed, int n_entities, int n_relations,
                              std::pair<int, int> hop_depth_range) {
    auto [hop_min, hop_max] = hop_depth_range;
    if (n_entities < 2) throw ConfigError("generate_world: need at least 2 entities");
    if (n_relations < 1) throw ConfigError("generate_world: need at least 1 relation label");
    if (hop_min < 1 || hop_max > kMaxHopDepth || hop_min > hop_max) {
        throw ConfigError("generate_world: hop depth range must lie within [1, 5]");
    }

    KnowledgeWorld world;
    world.seed = seed;
    world.hop_min = hop_min;
    world.hop_max = hop_max;

    Rng rng = derive_rng(seed, {0x77ull});

    std::set<std::string> used(kReservedWords);
    for (const auto& w : kDistractorWords) used.insert(w);
    for (const auto& w : kTitleSuffixes) used.insert(w);
    while (static_cast<int>(world.entities.size()) < n_entities) {
        std::string name = make_entity_name(rng);
        if (used.insert(name).second) world.entities.push_back(name);
    }

    for (int r = 0; r < n_relations; ++r) {
        if (r < static_cast<int>(kRelationPool.size())) {
            world.relation_labels.push_back(kRelationPool[r]);
        } else {
            world.relation_labels.push_back("relation" + std::to_string(r + 1));
        }
    }

    // One functional mapping per relation label: a fixed-point-free
    // permutation, so every chain of every depth resolves.
    const std::size_t n = world.entities.size();
    for (const std::string& label : world.relation_labels) {
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        for (std::size_t i = 0; i < n; ++i) {
            if (perm[i] == i) std::swap(perm[i], perm[(i + 1) % n]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            world.relations.push_back(
                Triple{world.entities[i], label, world.entities[perm[i]]});
        }
    }

    // One page per fact: a hop's evidence never shares a page with the
    // next hop's, so multi-hop queries take multiple tool calls.
    for (const Triple& t : world.relations) {
        Page page;
        page.page_id = t.subject + "-" + t.relation;
        page.title = t.subject + " " + t.relation + " " +
                     kTitleSuffixes[rng.next_below(kTitleSuffixes.size())];
        page.facts = {t};
        int n_words = 5 + static_cast<int>(rng.next_below(5));
        std::vector<std::string> words;
        for (int w = 0; w < n_words; ++w) {
            words.push_back(kDistractorWords[rng.next_below(kDistractorWords.size())]);
        }
        page.distractor_text = join(words, " ");
        world.pages.push_back(std::move(page));
    }

    world.rebuild_indices();
    return world;
}

namespace {

std::string surface_form_for(const std::string& start, const std::vector<std::string>& chain) {
    std::string phrase = start;
    for (const std::string& rel : chain) phrase = rel + " of " + phrase;
    return "who is the " + phrase;
}

// All (start, chain) combinations for one hop depth, in generation order.
std::vector<std::pair<std::string, std::vector<std::string>>> enumerate_chains(
    const KnowledgeWorld& world, int depth) {
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    std::vector<std::size_t> idx(static_cast<std::size_t>(depth), 0);
    const std::size_t n_rel = world.relation_labels.size();
    for (const std::string& start : world.entities) {
        std::fill(idx.begin(), idx.end(), 0);
        for (;;) {
            std::vector<std::string> chain;
            chain.reserve(idx.size());
            for (std::size_t i : idx) chain.push_back(world.relation_labels[i]);
            out.emplace_back(start, std::move(chain));
            std::size_t pos = 0;
            while (pos < idx.size() && ++idx[pos] == n_rel) idx[pos++] = 0;
            if (pos == idx.size()) break;
        }
    }
    return out;
}

} // namespace

std::vector<Query> sample_queries(const KnowledgeWorld& world, int n, std::uint64_t rng_seed,
                                  double multihop_fraction) {
    if (world.entities.empty() || world.relations.empty()) {
        throw ContractError("sample_queries: world is empty");
    }
    if (n < 0) throw ConfigError("sample_queries: n must be nonnegative");
    if (multihop_fraction < 0.0 || multihop_fraction > 1.0) {
        throw ConfigError("sample_queries: multihop_fraction must lie in [0, 1]");
    }

    const bool single_possible = world.hop_min <= 1;
    const bool multi_possible = world.hop_max >= 2;
    int n_multi = multi_possible ? static_cast<int>(std::llround(n * multihop_fraction)) : 0;
    if (!single_possible) n_multi = n;
    int n_single = n - n_multi;

    const double n_rel = static_cast<double>(world.relation_labels.size());
    double max_single = single_possible ? world.entities.size() * n_rel : 0.0;
    double max_multi = 0.0;
    if (multi_possible) {
        for (int d = std::max(2, world.hop_min); d <= world.hop_max; ++d) {
            double combos = static_cast<double>(world.entities.size());
            for (int i = 0; i < d; ++i) combos *= n_rel;
            max_multi += combos;
        }
    }
    if (n_single > max_single || n_multi > max_multi) {
        std::ostringstream msg;
        msg << "sample_queries: requested " << n_single << " single-hop and " << n_multi
            << " multi-hop queries but the world has at most "
            << static_cast<long long>(max_single) << " and "
            << static_cast<long long>(max_multi) << " distinct chains";
        throw ConfigError(msg.str());
    }

    Rng rng = derive_rng(rng_seed, {0x51ull});
    std::vector<Query> queries;

    auto draw_class = [&](int want, int depth_lo, int depth_hi) {
        // Enumerate then shuffle: exact, deterministic, duplicate-free.
        std::vector<std::pair<std::string, std::vector<std::string>>> pool;
        for (int d = depth_lo; d <= depth_hi; ++d) {
            auto chains = enumerate_chains(world, d);
            pool.insert(pool.end(), chains.begin(), chains.end());
        }
        rng.shuffle(pool);
        for (int i = 0; i < want; ++i) {
            auto& [start, chain] = pool[static_cast<std::size_t>(i)];
            Query q;
            q.start_entity = start;
            q.hop_chain = chain;
            q.surface_form = surface_form_for(start, chain);
            std::string cur = start;
            for (const std::string& rel : chain) {
                auto next = world.follow(cur, rel);
                if (!next) throw DataError("sample_queries: broken chain at " + cur);
                cur = *next;
            }
            q.answer = cur;
            queries.push_back(std::move(q));
        }
    };

    if (n_multi > 0) draw_class(n_multi, std::max(2, world.hop_min), world.hop_max);
    if (n_single > 0) draw_class(n_single, 1, 1);

    rng.shuffle(queries);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "q%04zu", i);
        queries[i].query_id = buf;
    }
    return queries;
}

int overlap_score(const std::vector<std::string>& query_tokens, const Page& page) {
    std::set<std::string> page_tokens;
    for (const auto& tok : tokenize(page.title)) page_tokens.insert(tok);
    std::string snippet;
    for (const Triple& t : page.facts) {
        if (!snippet.empty()) snippet += " ";
        snippet += fact_text(t);
    }
    for (const auto& tok : tokenize(truncate_text(snippet, kSnippetChars))) {
        page_tokens.insert(tok);
    }
    std::set<std::string> seen;
    int score = 0;
    for (const auto& tok : query_tokens) {
        if (seen.insert(tok).second && page_tokens.count(tok)) ++score;
    }
    return score;
}

std::vector<SearchResponse> web_search(const KnowledgeWorld& world, SearchCache& cache,
                                       const std::vector<std::string>& queries, int k) {
    if (queries.empty()) throw ContractError("web_search: queries must be nonempty");
    if (k < 1) throw ContractError("web_search: k must be >= 1");

    std::vector<SearchResponse> out;
    out.reserve(queries.size());
    for (const std::string& raw : queries) {
        SearchResponse resp;
        resp.query = raw;
        const std::string key = normalize_query(raw);
        if (key.empty()) {
            // In-band failure: the agent reads it as tool output and the
            // episode continues.
            resp.error = "tool error: empty search query";
            out.push_back(std::move(resp));
            continue;
        }
        if (const auto* hit = cache.find(key)) {
            resp.results = *hit;
            out.push_back(std::move(resp));
            continue;
        }
        const auto query_tokens = tokenize(key);
        std::vector<std::pair<int, const Page*>> scored;
        scored.reserve(world.pages.size());
        for (const Page& page : world.pages) {
            scored.emplace_back(overlap_score(query_tokens, page), &page);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second->page_id < b.second->page_id;
        });
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
        for (std::size_t i = 0; i < take; ++i) {
            const Page& page = *scored[i].second;
            std::string snippet;
            for (const Triple& t : page.facts) {
                if (!snippet.empty()) snippet += " ";
                snippet += fact_text(t);
            }
            resp.results.push_back(
                SearchResult{page.title, page.page_id, truncate_text(snippet, kSnippetChars)});
        }
        cache.insert(key, resp.results);
        out.push_back(std::move(resp));
    }
    return out;
}

std::vector<BrowseEntry> web_browse(const KnowledgeWorld& world, const SearchCache& cache,
                                    const std::vector<std::string>& url_list,
                                    const std::string& originating_query) {
    if (url_list.empty()) throw ContractError("web_browse: url_list must be nonempty");

    std::vector<BrowseEntry> out;
    out.reserve(url_list.size());
    for (const std::string& url : url_list) {
        BrowseEntry entry;
        entry.url = url;
        const Page* page = world.find_page(url);
        if (page == nullptr) {
            entry.info = "page not found: " + url;
            out.push_back(std::move(entry));
            continue;
        }
        entry.found = true;
        // Relevance filter: the user query's tokens plus the tokens of the
        // cached search query that surfaced this url.
        std::set<std::string> filter;
        for (const auto& tok : tokenize(originating_query)) filter.insert(tok);
        for (const auto& [cached_query, results] : cache.entries()) {
            bool contains = std::any_of(results.begin(), results.end(),
                                        [&](const SearchResult& r) { return r.url == url; });
            if (contains) {
                for (const auto& tok : tokenize(cached_query)) filter.insert(tok);
                break;
            }
        }
        std::string info = page->title + ".";
        for (const Triple& t : page->facts) {
            bool relevant = filter.count(t.subject) || filter.count(t.relation) ||
                            filter.count(t.object);
            if (relevant) {
                entry.facts.push_back(t);
                info += " " + fact_text(t);
            }
        }
        if (entry.facts.empty()) info += " (no relevant content)";
        entry.info = std::move(info);
        out.push_back(std::move(entry));
    }
    return out;
}

const std::vector<SearchResult>* SearchCache::find(const std::string& normalized_query) const {
    auto it = index_.find(normalized_query);
    if (it == index_.end()) return nullptr;
    return &entries_[it->second].second;
}

void SearchCache::insert(const std::string& normalized_query, std::vector<SearchResult> results) {
    auto it = index_.find(normalized_query);
    if (it != index_.end()) return; // first insertion wins; hits must replay it
    index_[normalized_query] = entries_.size();
    entries_.emplace_back(normalized_query, std::move(results));
}

std::string world_to_string(const KnowledgeWorld& world) {
    ordered_json doc;
    doc["format"] = "planrl-world";
    doc["version"] = 1;
    doc["seed"] = world.seed;
    doc["hop_depth_range"] = {world.hop_min, world.hop_max};
    doc["entities"] = world.entities;
    doc["relation_labels"] = world.relation_labels;
    ordered_json triples = ordered_json::array();
    for (const Triple& t : world.relations) {
        triples.push_back({{"subject", t.subject}, {"relation", t.relation}, {"object", t.object}});
    }
    doc["relations"] = std::move(triples);
    ordered_json pages = ordered_json::array();
    for (const Page& p : world.pages) {
        ordered_json facts = ordered_json::array();
        for (const Triple& t : p.facts) {
            facts.push_back({{"subject", t.subject}, {"relation", t.relation}, {"object", t.object}});
        }
        pages.push_back({{"page_id", p.page_id},
                         {"title", p.title},
                         {"facts", std::move(facts)},
                         {"distractor_text", p.distractor_text}});
    }
    doc["pages"] = std::move(pages);
    return doc.dump(2) + "\n";
}

void save_world(const KnowledgeWorld& world, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_world: cannot open " + path);
    out << world_to_string(world);
    if (!out) throw DataError("save_world: failed writing " + path);
}

KnowledgeWorld load_world(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_world: cannot open " + path);
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("load_world: " + std::string(e.what()));
    }
    try {
        if (doc.at("format").get<std::string>() != "planrl-world") {
            throw DataError("load_world: not a world file: " + path);
        }
        KnowledgeWorld world;
        world.seed = doc.at("seed").get<std::uint64_t>();
        world.hop_min = doc.at("hop_depth_range").at(0).get<int>();
        world.hop_max = doc.at("hop_depth_range").at(1).get<int>();
        world.entities = doc.at("entities").get<std::vector<std::string>>();
        world.relation_labels = doc.at("relation_labels").get<std::vector<std::string>>();
        for (const auto& jt : doc.at("relations")) {
            world.relations.push_back(Triple{jt.at("subject").get<std::string>(),
                                             jt.at("relation").get<std::string>(),
                                             jt.at("object").get<std::string>()});
        }
        std::set<std::string> entity_set(world.entities.begin(), world.entities.end());
        for (const Triple& t : world.relations) {
            if (!entity_set.count(t.subject) || !entity_set.count(t.object)) {
                throw DataError("load_world: relation endpoint is not a declared entity");
            }
        }
        for (const auto& jp : doc.at("pages")) {
            Page page;
            page.page_id = jp.at("page_id").get<std::string>();
            page.title = jp.at("title").get<std::string>();
            for (const auto& jt : jp.at("facts")) {
                page.facts.push_back(Triple{jt.at("subject").get<std::string>(),
                                            jt.at("relation").get<std::string>(),
                                            jt.at("object").get<std::string>()});
            }
            page.distractor_text = jp.at("distractor_text").get<std::string>();
            world.pages.push_back(std::move(page));
        }
        world.rebuild_indices();
        return world;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("load_world: malformed world file: " + std::string(e.what()));
    }
}

} // namespace planrl
