#include "aoci/validator.hpp"

#include "aoci/grammar.hpp"

#include "json.hpp"

#include <algorithm>
#include <memory>
#include <regex>
#include <set>
#include <tuple>
#include <unordered_set>

namespace aoci {

std::string_view to_string(Severity severity) {
    return severity == Severity::Error ? "error" : "warning";
}

std::string format_issue(const ValidationIssue& issue) {
    return std::string(to_string(issue.severity)) + " " + issue.rule + " " + issue.subject + ": " + issue.message;
}

std::string issues_to_json(const std::vector<ValidationIssue>& issues) {
    auto arr = nlohmann::json::array();
    for (const auto& i : issues) {
        arr.push_back({{"severity", to_string(i.severity)},
                       {"rule", i.rule},
                       {"subject", i.subject},
                       {"message", i.message}});
    }
    return arr.dump(2);
}

bool has_errors(const std::vector<ValidationIssue>& issues) {
    return std::any_of(issues.begin(), issues.end(), [](const auto& i) { return i.severity == Severity::Error; });
}

bool ref_matches(std::string_view ref, std::string_view path) {
    if (ref.empty())
        return false;
    if (path == ref)
        return true;
    if (path.size() > ref.size() && path.substr(0, ref.size()) == ref && path[ref.size()] == '/')
        return true;
    return strip_extension(path) == ref;
}

namespace {

// Everything a reference can resolve to: exact paths, extension-less
// stems and every directory prefix.
class RefResolver {
public:
    explicit RefResolver(const std::vector<CodeEntry>& entries) {
        for (const auto& e : entries) {
            targets_.insert(e.path);
            targets_.insert(strip_extension(e.path));
            for (auto pos = e.path.find('/'); pos != std::string::npos; pos = e.path.find('/', pos + 1))
                targets_.insert(e.path.substr(0, pos));
        }
    }

    bool resolves(const std::string& ref) const { return targets_.count(ref) > 0; }

private:
    std::unordered_set<std::string> targets_;
};

} // namespace

std::vector<ValidationIssue> validate_index(const Index& index, TokenEstimator method) {
    std::vector<ValidationIssue> issues;
    auto add = [&](Severity sev, std::string rule, std::string subject, std::string message) {
        issues.push_back({sev, std::move(rule), std::move(subject), std::move(message)});
    };
    const auto& dict = index.dictionary();

    static const std::pair<const char*, const CodeMap TagDictionary::*> kTagDims[] = {
        {"A", &TagDictionary::dim_a}, {"B", &TagDictionary::dim_b},
        {"D", &TagDictionary::dim_d}, {"E", &TagDictionary::dim_e}};
    for (const auto& [name, member] : kTagDims)
        if (!(dict.*member).prefix_free())
            add(Severity::Warning, "W2", "header",
                std::string("dimension ") + name + " is not prefix-free; tag decoding may be ambiguous");

    std::unordered_set<std::string_view> seen_paths;
    for (const auto& e : index.code_entries())
        if (!seen_paths.insert(e.path).second)
            add(Severity::Error, "E1", e.path, "duplicate code entry path");
    std::unordered_set<std::string_view> table_names;
    for (const auto& t : index.table_entries())
        if (!table_names.insert(t.name).second)
            add(Severity::Error, "E1", t.name, "duplicate table name");

    RefResolver resolver(index.code_entries());
    for (const auto& e : index.code_entries()) {
        for (const auto& ref : e.r) {
            if (resolver.resolves(ref))
                continue;
            if (table_names.count(ref))
                add(Severity::Warning, "W4", e.path, "R reference '" + ref + "' names a database table");
            else
                add(Severity::Error, "E2", e.path, "R reference '" + ref + "' does not resolve to any entry");
        }

        if (!e.tag)
            continue;
        std::optional<DecodedTag> decoded;
        try {
            decoded = decode_entry_tag(*e.tag, dict);
        } catch (const TagError& err) {
            if (err.kind() == ParseErrorKind::InvalidImportance)
                add(Severity::Error, "E4", e.path, err.what());
            else
                add(Severity::Error, "E3", e.path, std::string("tag '") + *e.tag + "': " + err.what());
        }
        if (decoded && e.decoded && *decoded != *e.decoded)
            add(Severity::Error, "E3", e.path, "tag '" + *e.tag + "' does not match its decoded form");

        if (!e.decoded || e.decoded->scale_only())
            continue;
        const auto& d = *e.decoded;
        if (!is_importance_level(d.importance)) {
            add(Severity::Error, "E4", e.path, "importance " + std::to_string(d.importance) + " is off the scale");
            continue;
        }
        auto sem = semantic_tokens(e, method);
        auto budget = effective_budget(dict, d.importance);
        if (sem < static_cast<std::size_t>(budget.min_tokens) || sem > static_cast<std::size_t>(budget.max_tokens))
            add(Severity::Warning, "W1", e.path,
                "semantic content is ~" + std::to_string(sem) + " tokens, budget for C=" +
                    std::to_string(d.importance) + " is " + std::to_string(budget.min_tokens) + "-" +
                    std::to_string(budget.max_tokens));
        if (d.importance >= 7 && e.f.empty())
            add(Severity::Warning, "W3", e.path, "empty F element on an importance " + std::to_string(d.importance) + " entry");
    }

    for (const auto& t : index.table_entries()) {
        if (!t.tag)
            continue;
        const std::pair<TableDim, const std::string*> parts[] = {
            {TableDim::Domain, &t.tag->domain}, {TableDim::Type, &t.tag->ttype}, {TableDim::Scale, &t.tag->scale}};
        for (const auto& [dim, code] : parts)
            if (!dict.table_dim(dim).contains(*code))
                add(Severity::Error, "E3", t.name, "table code '" + *code + "' is not in the dictionary");
        for (const auto& f : t.tag->features)
            if (!dict.table_feat.contains(f))
                add(Severity::Error, "E3", t.name, "table feature '" + f + "' is not in the dictionary");
    }

    std::sort(issues.begin(), issues.end(), [](const auto& a, const auto& b) {
        return std::tie(a.subject, a.rule, a.message) < std::tie(b.subject, b.rule, b.message);
    });
    return issues;
}

struct Glob::Impl {
    std::regex re;
};

Glob::Glob(std::string_view pattern) : pattern_(pattern) {
    if (pattern.empty())
        throw ConfigError("empty glob");
    std::string& rx = regex_source_;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        char c = pattern[i];
        switch (c) {
        case '*':
            if (i + 1 < pattern.size() && pattern[i + 1] == '*') {
                bool dir_form = i + 2 < pattern.size() && pattern[i + 2] == '/';
                rx += dir_form ? "(?:.*/)?" : ".*";
                i += dir_form ? 2 : 1;
            } else {
                rx += "[^/]*";
            }
            break;
        case '?':
            rx += "[^/]";
            break;
        case '[': {
            auto close = pattern.find(']', i + 1);
            if (close == std::string_view::npos || close == i + 1)
                throw ConfigError("unterminated character class in glob '" + pattern_ + "'");
            auto body = pattern.substr(i + 1, close - i - 1);
            rx += '[';
            std::size_t k = 0;
            if (body[0] == '!' || body[0] == '^') {
                rx += '^';
                k = 1;
                if (body.size() == 1)
                    throw ConfigError("empty negated class in glob '" + pattern_ + "'");
            }
            for (; k < body.size(); ++k) {
                if (body[k] == '\\' || body[k] == '[' || body[k] == ']')
                    rx += '\\';
                rx += body[k];
            }
            rx += ']';
            i = close;
            break;
        }
        case ']':
            throw ConfigError("unbalanced ']' in glob '" + pattern_ + "'");
        case '.': case '+': case '(': case ')': case '{': case '}':
        case '^': case '$': case '|': case '\\':
            rx += '\\';
            rx += c;
            break;
        default:
            rx += c;
        }
    }
    try {
        impl_ = std::make_shared<const Impl>(Impl{std::regex(rx, std::regex::ECMAScript | std::regex::optimize)});
    } catch (const std::regex_error& e) {
        throw ConfigError("invalid glob '" + pattern_ + "': " + e.what());
    }
}

bool Glob::matches(std::string_view path) const {
    return std::regex_match(path.begin(), path.end(), impl_->re);
}

PathFilter::PathFilter(const std::vector<std::string>& include, const std::vector<std::string>& exclude) {
    for (const auto& p : include)
        include_.emplace_back(p);
    for (const auto& p : exclude)
        exclude_.emplace_back(p);
}

bool PathFilter::admits(std::string_view path) const {
    if (!include_.empty() &&
        std::none_of(include_.begin(), include_.end(), [&](const Glob& g) { return g.matches(path); }))
        return false;
    return std::none_of(exclude_.begin(), exclude_.end(), [&](const Glob& g) { return g.matches(path); });
}

CoverageReport check_coverage(const Index& index, const std::vector<std::string>& file_list,
                              const std::vector<std::string>& include_globs,
                              const std::vector<std::string>& exclude_globs) {
    PathFilter filter(include_globs, exclude_globs);
    std::unordered_set<std::string_view> entry_paths;
    for (const auto& e : index.code_entries())
        entry_paths.insert(e.path);

    CoverageReport report;
    std::set<std::string> files;
    for (const auto& f : file_list)
        files.insert(canonical_path(f));
    for (const auto& f : files) {
        if (!filter.admits(f))
            continue;
        ++report.eligible_files;
        if (entry_paths.count(f))
            ++report.indexed_files;
        else
            report.unindexed.push_back(f);
    }
    for (const auto& e : index.code_entries())
        if (!files.count(e.path))
            report.orphan_entries.push_back(e.path);
    return report;
}

} // namespace aoci
