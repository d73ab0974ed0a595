#pragma once

// Rule catalog
//   E1  duplicate code path or table name
//   E2  R reference resolves to no code entry
//   E3  tag code missing from the dictionary (or undecodable tag)
//   E4  importance digit outside 9/8/7/5/3/1 or outside dimension C
//   W1  semantic token estimate outside the importance budget
//   W2  dictionary dimension is not prefix-free
//   W3  empty F element on an entry with importance >= 7
//   W4  R reference names a database table instead of a code entry

#include "aoci/metrics.hpp"
#include "aoci/model.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aoci {

enum class Severity { Error, Warning };

std::string_view to_string(Severity severity);

struct ValidationIssue {
    Severity severity = Severity::Error;
    std::string rule;      // "E1".."W4"
    std::string subject;   // entry path, table name or "header"
    std::string message;

    bool operator==(const ValidationIssue&) const = default;
};

/// "severity rule subject: message"
std::string format_issue(const ValidationIssue& issue);

/// JSON array, one object per issue.
std::string issues_to_json(const std::vector<ValidationIssue>& issues);

bool has_errors(const std::vector<ValidationIssue>& issues);

/// True when `ref` resolves against `path`: equal, a directory prefix of
/// it, or equal to it without its extension.
bool ref_matches(std::string_view ref, std::string_view path);

/// Returns every issue, sorted by (subject, rule, message).
std::vector<ValidationIssue> validate_index(const Index& index, TokenEstimator method = TokenEstimator::Chars4);

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Compiled glob: '*' and '?' stay within a segment, '**' spans segments,
/// "[...]" is a character class. Throws ConfigError when malformed.
class Glob {
public:
    explicit Glob(std::string_view pattern);
    bool matches(std::string_view path) const;
    const std::string& pattern() const { return pattern_; }

private:
    std::string pattern_;
    std::string regex_source_;
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Include/exclude filter. An empty include list admits everything.
class PathFilter {
public:
    PathFilter() = default;
    PathFilter(const std::vector<std::string>& include, const std::vector<std::string>& exclude);
    bool admits(std::string_view path) const;

private:
    std::vector<Glob> include_;
    std::vector<Glob> exclude_;
};

struct CoverageReport {
    std::size_t eligible_files = 0;
    std::size_t indexed_files = 0;
    std::vector<std::string> unindexed;
    std::vector<std::string> orphan_entries;
};

CoverageReport check_coverage(const Index& index, const std::vector<std::string>& file_list,
                              const std::vector<std::string>& include_globs = {},
                              const std::vector<std::string>& exclude_globs = {});

} // namespace aoci
