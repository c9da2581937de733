// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace planrl {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Lowercase, strip punctuation, split on whitespace.
std::vector<std::string> tokenize(std::string_view s);

// Lowercase + collapse internal whitespace; the canonical search-cache key.
std::string normalize_query(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string truncate_text(std::string_view s, std::size_t max_chars);

} // namespace planrl
