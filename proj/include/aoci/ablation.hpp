#pragma once

#include "aoci/metrics.hpp"
#include "aoci/model.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace aoci {

enum class AblationVariant { WoABCDE, WoABCD, WoR, WoS, WoFRAS };

inline constexpr AblationVariant kAblationVariants[] = {
    AblationVariant::WoABCDE, AblationVariant::WoABCD, AblationVariant::WoR,
    AblationVariant::WoS, AblationVariant::WoFRAS};

/// "wo-ABCDE", "wo-ABCD", "wo-R", "wo-S", "wo-FRAS".
std::string_view to_string(AblationVariant variant);
std::optional<AblationVariant> parse_variant(std::string_view name);

/// Structural ablation. Emptied elements serialize as "-". wo-ABCD keeps
/// only the E code and drops the bracket entirely when an entry has none.
/// Table entries are left alone unless include_tables is set, in which
/// case wo-ABCDE also strips table tags.
Index apply_ablation(const Index& index, AblationVariant variant, bool include_tables = false);

struct AblationReport {
    std::size_t original_tokens = 0;
    std::size_t ablated_tokens = 0;
    long long reduction = 0;          // original - ablated
    double ratio = 1.0;               // ablated / original
    double relative_reduction = 0.0;  // reduction / original
    std::size_t entries_changed = 0;  // code entries whose line differs
    std::size_t tables_changed = 0;
    std::size_t tags_removed = 0;     // entries that lost their bracket
};

AblationReport ablation_report(const Index& original, const Index& ablated,
                               TokenEstimator method = TokenEstimator::Chars4);

/// Prompt asking an external model for the natural-language rewrite
/// variant. The toolkit never performs the rewrite itself.
std::string nl_rewrite_prompt(const Index& index);

} // namespace aoci
