#include "aoci/metrics.hpp"

#include "aoci/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <stdexcept>

namespace aoci {

namespace {

bool is_ws(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string join_refs(const std::vector<std::string>& refs) {
    std::string out;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (i)
            out += ',';
        out += refs[i];
    }
    return out;
}

} // namespace

std::string_view to_string(TokenEstimator method) {
    return method == TokenEstimator::Chars4 ? "chars4" : "words13";
}

std::optional<TokenEstimator> parse_estimator(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "chars4")
        return TokenEstimator::Chars4;
    if (lower == "words13")
        return TokenEstimator::Words13;
    return std::nullopt;
}

TokenEstimator estimator_from_env() {
    const char* value = std::getenv("AOCI_ESTIMATOR");
    if (!value || !*value)
        return TokenEstimator::Chars4;
    if (auto m = parse_estimator(value))
        return *m;
    throw std::invalid_argument(std::string("unknown AOCI_ESTIMATOR '") + value + "'");
}

std::size_t estimate_tokens(std::string_view text, TokenEstimator method) {
    if (method == TokenEstimator::Chars4) {
        std::size_t code_points = 0;
        for (unsigned char c : text)
            if ((c & 0xC0) != 0x80)
                ++code_points;
        return (code_points + 3) / 4;
    }
    std::size_t words = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_ws(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return (words * 4 + 2) / 3;
}

std::size_t semantic_tokens(const CodeEntry& entry, TokenEstimator method) {
    return estimate_tokens(entry.f, method) + estimate_tokens(join_refs(entry.r), method) +
           estimate_tokens(entry.a, method) + estimate_tokens(entry.s, method);
}

std::size_t entry_tokens(const CodeEntry& entry, TokenEstimator method) {
    std::size_t n = estimate_tokens(entry.path, method) + semantic_tokens(entry, method);
    if (entry.tag)
        n += estimate_tokens(*entry.tag, method);
    return n;
}

std::size_t table_tokens(const TableEntry& entry, TokenEstimator method) {
    std::size_t n = estimate_tokens(entry.name, method) + estimate_tokens(entry.fields_text, method);
    if (entry.tag)
        n += estimate_tokens(encode_table_tag(*entry.tag), method);
    return n;
}

std::size_t index_tokens(const Index& index, TokenEstimator method) {
    std::size_t n = estimate_tokens(serialize_header(index.header()), method);
    for (const auto& e : index.code_entries())
        n += entry_tokens(e, method);
    for (const auto& t : index.table_entries())
        n += table_tokens(t, method);
    return n;
}

int score_where(std::string_view predicted, std::string_view truth) {
    return canonical_path(predicted) == canonical_path(truth) ? 1 : 0;
}

std::string normalize_entity(std::string_view raw) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && is_ws(s.front()))
            s.remove_prefix(1);
        while (!s.empty() && is_ws(s.back()))
            s.remove_suffix(1);
        return s;
    };
    auto s = trim(raw);
    while (s.size() >= 2 && s.front() == s.back() && (s.front() == '"' || s.front() == '\'' || s.front() == '`'))
        s = trim(s.substr(1, s.size() - 2));
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

F1Score score_what(const std::vector<std::string>& predicted, const std::vector<std::string>& truth) {
    auto normalized = [](const std::vector<std::string>& items) {
        std::set<std::string> out;
        for (const auto& item : items) {
            auto n = normalize_entity(item);
            if (!n.empty())
                out.insert(std::move(n));
        }
        return out;
    };
    auto pred = normalized(predicted);
    auto gold = normalized(truth);

    F1Score score;
    score.predicted = pred.size();
    score.truth = gold.size();
    for (const auto& p : pred)
        score.matched += gold.count(p);

    if (pred.empty() && gold.empty()) {
        score.precision = score.recall = score.f1 = 1.0;
        return score;
    }
    if (pred.empty() || gold.empty())
        return score;
    score.precision = static_cast<double>(score.matched) / static_cast<double>(pred.size());
    score.recall = static_cast<double>(score.matched) / static_cast<double>(gold.size());
    if (score.precision + score.recall > 0.0)
        score.f1 = 2.0 * score.precision * score.recall / (score.precision + score.recall);
    return score;
}

IndexStats index_stats(const Index& index, std::optional<std::size_t> repo_loc, TokenEstimator method) {
    IndexStats st;
    st.estimator = method;
    st.code_entries = index.code_entries().size();
    st.table_entries = index.table_entries().size();
    st.header_tokens = estimate_tokens(serialize_header(index.header()), method);

    for (const auto& e : index.code_entries()) {
        st.entry_tokens += entry_tokens(e, method);
        if (!e.decoded) {
            ++st.untagged_entries;
            continue;
        }
        const auto& d = *e.decoded;
        ++st.tagged_entries;
        if (d.scale_only()) {
            ++st.by_scale[*d.scale];
            ++st.scale_only_entries;
            continue;
        }
        ++st.by_layer[d.layer];
        ++st.by_module[d.module];
        ++st.by_importance[d.importance];
        for (const auto& f : d.features)
            ++st.by_feature[f];
        if (d.scale)
            ++st.by_scale[*d.scale];
        else
            ++st.scale_absent;

        auto sem = semantic_tokens(e, method);
        st.tokens_by_importance[d.importance] += sem;
        auto budget = effective_budget(index.dictionary(), d.importance);
        auto& bucket = st.budget_compliance[d.importance];
        if (sem < static_cast<std::size_t>(budget.min_tokens))
            ++bucket.under;
        else if (sem > static_cast<std::size_t>(budget.max_tokens))
            ++bucket.over;
        else
            ++bucket.within;
    }
    for (const auto& t : index.table_entries()) {
        st.table_tokens += table_tokens(t, method);
        if (t.tag)
            ++st.by_table_domain[t.tag->domain];
    }
    st.total_tokens = st.header_tokens + st.entry_tokens + st.table_tokens;
    if (repo_loc) {
        st.repo_loc = repo_loc;
        if (*repo_loc > 0)
            st.compression_ratio = static_cast<double>(st.total_tokens) / static_cast<double>(*repo_loc);
    }
    return st;
}

} // namespace aoci
