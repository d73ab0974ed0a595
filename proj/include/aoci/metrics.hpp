#pragma once

#include "aoci/model.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace aoci {

enum class TokenEstimator {
    Chars4,   // ceil(code points / 4)
    Words13,  // ceil(whitespace-separated words * 4 / 3)
};

std::string_view to_string(TokenEstimator method);

/// Parses "chars4" / "words13" (case-insensitive); nullopt otherwise.
std::optional<TokenEstimator> parse_estimator(std::string_view name);

/// Estimator named by AOCI_ESTIMATOR, Chars4 when unset. Throws
/// std::invalid_argument on an unknown name.
TokenEstimator estimator_from_env();

std::size_t estimate_tokens(std::string_view text, TokenEstimator method = TokenEstimator::Chars4);

/// Sum of the per-element estimates of F, R (joined by ','), A and S.
/// This is the figure compared against an entry's token budget.
std::size_t semantic_tokens(const CodeEntry& entry, TokenEstimator method = TokenEstimator::Chars4);

/// Path + tag + semantic elements.
std::size_t entry_tokens(const CodeEntry& entry, TokenEstimator method = TokenEstimator::Chars4);

/// Name + tag + field description.
std::size_t table_tokens(const TableEntry& entry, TokenEstimator method = TokenEstimator::Chars4);

/// Header text plus every entry; the figure ablation reports compare.
std::size_t index_tokens(const Index& index, TokenEstimator method = TokenEstimator::Chars4);

/// 1 iff both paths are equal after canonical_path. Throws InvalidPath on
/// empty input.
int score_where(std::string_view predicted, std::string_view truth);

/// Trim, strip surrounding quotes/backticks, case-fold (ASCII).
std::string normalize_entity(std::string_view raw);

struct F1Score {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t matched = 0;
    std::size_t predicted = 0;
    std::size_t truth = 0;
};

/// Set-based F1 over normalized entities. Both empty scores 1.0; exactly
/// one empty scores 0.0.
F1Score score_what(const std::vector<std::string>& predicted, const std::vector<std::string>& truth);

struct BudgetCompliance {
    std::size_t within = 0;
    std::size_t under = 0;
    std::size_t over = 0;
};

struct IndexStats {
    std::size_t code_entries = 0;
    std::size_t table_entries = 0;
    std::size_t tagged_entries = 0;
    std::size_t untagged_entries = 0;
    std::size_t scale_absent = 0;   // tagged entries without an E code
    std::size_t scale_only_entries = 0;   // size-only tags
    std::map<std::string, std::size_t> by_layer;
    std::map<std::string, std::size_t> by_module;
    std::map<int, std::size_t, std::greater<>> by_importance;
    std::map<std::string, std::size_t> by_feature;   // occurrences, not entries
    std::map<std::string, std::size_t> by_scale;
    std::map<std::string, std::size_t> by_table_domain;
    std::size_t header_tokens = 0;
    std::size_t entry_tokens = 0;
    std::size_t table_tokens = 0;
    std::size_t total_tokens = 0;
    std::map<int, std::size_t, std::greater<>> tokens_by_importance;   // semantic tokens
    std::map<int, BudgetCompliance, std::greater<>> budget_compliance;
    std::optional<std::size_t> repo_loc;
    std::optional<double> compression_ratio;   // total tokens / repo LOC
    TokenEstimator estimator = TokenEstimator::Chars4;
};

IndexStats index_stats(const Index& index, std::optional<std::size_t> repo_loc = std::nullopt,
                       TokenEstimator method = TokenEstimator::Chars4);

} // namespace aoci
