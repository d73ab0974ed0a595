#include "aoci/ablation.hpp"

#include "aoci/grammar.hpp"

#include <algorithm>

namespace aoci {

std::string_view to_string(AblationVariant variant) {
    switch (variant) {
    case AblationVariant::WoABCDE: return "wo-ABCDE";
    case AblationVariant::WoABCD: return "wo-ABCD";
    case AblationVariant::WoR: return "wo-R";
    case AblationVariant::WoS: return "wo-S";
    case AblationVariant::WoFRAS: return "wo-FRAS";
    }
    return "?";
}

std::optional<AblationVariant> parse_variant(std::string_view name) {
    for (auto v : kAblationVariants)
        if (to_string(v) == name)
            return v;
    return std::nullopt;
}

namespace {

void ablate_entry(CodeEntry& e, AblationVariant variant) {
    switch (variant) {
    case AblationVariant::WoABCDE:
        e.tag.reset();
        e.decoded.reset();
        break;
    case AblationVariant::WoABCD:
        if (e.decoded && e.decoded->scale) {
            DecodedTag size_only;
            size_only.scale = e.decoded->scale;
            e.tag = *e.decoded->scale;
            e.decoded = size_only;
        } else {
            e.tag.reset();
            e.decoded.reset();
        }
        break;
    case AblationVariant::WoR:
        e.r.clear();
        break;
    case AblationVariant::WoS:
        e.s.clear();
        break;
    case AblationVariant::WoFRAS:
        e.f.clear();
        e.r.clear();
        e.a.clear();
        e.s.clear();
        break;
    }
}

} // namespace

Index apply_ablation(const Index& index, AblationVariant variant, bool include_tables) {
    auto entries = index.code_entries();
    for (auto& e : entries)
        ablate_entry(e, variant);
    auto tables = index.table_entries();
    if (include_tables && variant == AblationVariant::WoABCDE)
        for (auto& t : tables)
            t.tag.reset();
    return Index(index.header(), std::move(entries), std::move(tables));
}

AblationReport ablation_report(const Index& original, const Index& ablated, TokenEstimator method) {
    AblationReport r;
    r.original_tokens = index_tokens(original, method);
    r.ablated_tokens = index_tokens(ablated, method);
    r.reduction = static_cast<long long>(r.original_tokens) - static_cast<long long>(r.ablated_tokens);
    if (r.original_tokens > 0) {
        r.ratio = static_cast<double>(r.ablated_tokens) / static_cast<double>(r.original_tokens);
        r.relative_reduction = static_cast<double>(r.reduction) / static_cast<double>(r.original_tokens);
    }
    const auto& a = original.code_entries();
    const auto& b = ablated.code_entries();
    for (const auto& e : a) {
        const auto* other = ablated.find_entry(e.path);
        if (!other || serialize_entry(e) != serialize_entry(*other))
            ++r.entries_changed;
        if (other && e.tag && !other->tag)
            ++r.tags_removed;
    }
    r.entries_changed += b.size() > a.size() ? b.size() - a.size() : 0;
    for (const auto& t : original.table_entries()) {
        const auto* other = ablated.find_table(t.name);
        if (!other || serialize_table_entry(t) != serialize_table_entry(*other))
            ++r.tables_changed;
    }
    return r;
}

std::string nl_rewrite_prompt(const Index& index) {
    std::string out =
        "=== INSTRUCTIONS ===\n"
        "Rewrite the index below into coherent natural-language paragraphs, one paragraph per entry.\n"
        "Preserve every fact: file path, layer, module, importance, technical characteristics, size,\n"
        "business function, related files, exposed APIs and design details. Do not add facts.\n"
        "Keep the database table descriptions as paragraphs as well.\n"
        "=== INDEX ===\n";
    out += serialize_index(index);
    return out;
}

} // namespace aoci
