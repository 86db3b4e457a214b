#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gqr {

struct TokenizeOptions {
    bool remove_stopwords = false;
    bool stem = false;
};

/// Lowercases and splits on any non-alphanumeric byte; empty fragments are
/// discarded. Stopword removal and Porter stemming are applied afterwards
/// when enabled. Deterministic for a given input and options.
std::vector<std::string> tokenize(std::string_view text,
                                  const TokenizeOptions& options = {});

/// Classic Porter (1980) stemmer. Expects a lowercase token.
std::string porter_stem(std::string_view word);

bool is_stopword(std::string_view word);

/// ASCII lowercase copy, used for case-insensitive comparisons throughout.
std::string to_lower(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

} // namespace gqr
